#include "gdro/model/scenario.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace gdro::model {

std::string_view variant_tag(Variant v) {
  switch (v) {
    case Variant::C1: return "c1";
    case Variant::C1Singleton: return "c1_singleton";
    case Variant::LinearC1: return "linear_c1";
    case Variant::C2: return "c2";
    case Variant::C3: return "c3";
    case Variant::C3Singleton: return "c3_singleton";
  }
  return "unknown";
}

Variant variant_from_tag(std::string_view tag) {
  for (Variant v : {Variant::C1, Variant::C1Singleton, Variant::LinearC1, Variant::C2, Variant::C3,
                    Variant::C3Singleton})
    if (variant_tag(v) == tag) return v;
  throw std::invalid_argument("unknown variant '" + std::string(tag) + "'");
}

std::string_view objective_tag(ObjectiveKind k) {
  return k == ObjectiveKind::MinimizeCost ? "minimize_cost" : "minimize_epigraph";
}

ObjectiveKind objective_from_tag(std::string_view tag) {
  if (tag == "minimize_cost") return ObjectiveKind::MinimizeCost;
  if (tag == "minimize_epigraph") return ObjectiveKind::MinimizeEpigraph;
  throw std::invalid_argument("unknown objective kind '" + std::string(tag) + "'");
}

namespace {

std::string join(const std::vector<std::string>& errors) {
  std::ostringstream os;
  os << "scenario validation failed:";
  for (const auto& e : errors) os << "\n  - " << e;
  return os.str();
}

}  // namespace

ValidationError::ValidationError(std::vector<std::string> errors)
    : std::runtime_error(join(errors)), errors_(std::move(errors)) {}

namespace {

bool valid_exponent(double p) { return p == 1.0 || p == 2.0 || std::isinf(p); }

double sym_scale(const Eigen::MatrixXd& m) { return 1.0 + (m.size() ? m.cwiseAbs().maxCoeff() : 0.0); }

bool is_symmetric(const Eigen::MatrixXd& m) {
  return m.rows() == m.cols() && (m - m.transpose()).cwiseAbs().maxCoeff() <= 1e-10 * sym_scale(m);
}

class Checker {
 public:
  void require(bool ok, const std::string& msg) {
    if (!ok) errors.push_back(msg);
  }

  void square(const Eigen::MatrixXd& m, int k, const std::string& what) {
    require(m.rows() == k && m.cols() == k,
            "dimension mismatch: " + what + " must be " + std::to_string(k) + "x" + std::to_string(k));
  }

  void psd(const Eigen::MatrixXd& m, int k, const std::string& what, bool definite) {
    square(m, k, what);
    if (m.rows() != k || m.cols() != k) return;
    require(is_symmetric(m), what + " is not symmetric");
    const double lo = min_eigenvalue(m);
    if (definite)
      require(lo > kPsdTol, what + " is not positive definite (min eigenvalue " + std::to_string(lo) + ")");
    else
      require(lo >= -kPsdTol, what + " is not positive semidefinite (min eigenvalue " + std::to_string(lo) + ")");
  }

  void vector_set(const SetSpec& s, int k, const std::string& what) {
    if (!s.vector_set()) {
      errors.push_back(what + ": tag '" + std::string(set_tag(s.kind)) + "' is not a vector set");
      return;
    }
    switch (s.kind) {
      case SetKind::NormBall:
        require(valid_exponent(s.p), what + ": norm exponent must be 1, 2 or inf");
        require(s.radius >= 0.0, what + ": radius must be nonnegative");
        break;
      case SetKind::NormIntersection:
        require(!s.terms.empty(), what + ": intersection needs at least one norm");
        for (const auto& t : s.terms) {
          require(valid_exponent(t.p), what + ": norm exponent must be 1, 2 or inf");
          require(t.radius >= 0.0, what + ": radius must be nonnegative");
        }
        break;
      case SetKind::Polyhedron:
        require(s.C.cols() == k && s.C.rows() == s.c.size(), "dimension mismatch: " + what + " polyhedron C, c");
        if (s.c.size()) require(s.c.minCoeff() >= 0.0, what + ": polyhedron must contain the origin (c >= 0)");
        break;
      default: break;
    }
  }

  void matrix_set(const SetSpec& s, int k, const std::string& what) {
    if (!s.matrix_set()) {
      errors.push_back(what + ": tag '" + std::string(set_tag(s.kind)) + "' is not a matrix set");
      return;
    }
    switch (s.kind) {
      case SetKind::FrobeniusBall:
      case SetKind::SpectralNormBound:
        require(s.radius >= 0.0, what + ": radius must be nonnegative");
        break;
      case SetKind::SchattenBall:
      case SetKind::VecLifted:
        require(valid_exponent(s.p), what + ": norm exponent must be 1, 2 or inf");
        require(s.radius >= 0.0, what + ": radius must be nonnegative");
        break;
      case SetKind::NormIntersection:
        require(!s.terms.empty(), what + ": intersection needs at least one norm");
        for (const auto& t : s.terms) {
          require(valid_exponent(t.p), what + ": Schatten exponent must be 1, 2 or inf");
          require(t.radius >= 0.0, what + ": radius must be nonnegative");
        }
        break;
      case SetKind::PsdIntervalTrace:
        psd(s.D, k, what + " D", true);
        require(s.tau >= 0.0, what + ": tau must be nonnegative");
        [[fallthrough]];
      case SetKind::PsdInterval:
        require(s.theta >= 0.0, what + ": theta must be nonnegative");
        psd(s.Xi0, k, what + " Xi0", false);
        break;
      default: break;
    }
  }

  std::vector<std::string> errors;
};

}  // namespace

std::vector<Eigen::VectorXd> sample_vector_boundary(const SetSpec& s, int k, int count) {
  std::mt19937_64 rng(0x5eedULL + static_cast<unsigned>(k));
  std::normal_distribution<double> gauss;
  std::vector<Eigen::VectorXd> out;
  for (int n = 0; n < count; ++n) {
    Eigen::VectorXd d(k);
    for (int i = 0; i < k; ++i) d(i) = gauss(rng);
    // Alternate between generic directions and coordinate-aligned ones (vertices of l1 balls).
    if (n % 3 == 1) {
      const int i = n % k;
      d.setZero();
      d(i) = (n / k) % 2 ? -1.0 : 1.0;
    } else if (n % 3 == 2) {
      d = d.array().sign().matrix();
    }
    double t = kInf;
    switch (s.kind) {
      case SetKind::Singleton: t = 0.0; break;
      case SetKind::NormBall: t = s.radius / vector_norm(d, s.p); break;
      case SetKind::NormIntersection:
        for (const auto& term : s.terms) t = std::min(t, term.radius / vector_norm(d, term.p));
        break;
      case SetKind::Polyhedron: {
        const Eigen::VectorXd cd = s.C * d;
        for (int r = 0; r < cd.size(); ++r)
          if (cd(r) > 0.0) t = std::min(t, s.c(r) / cd(r));
        if (std::isinf(t)) t = 1e3;
        break;
      }
      default: throw std::invalid_argument("not a vector set");
    }
    out.push_back(t * d);
  }
  return out;
}

std::vector<Eigen::MatrixXd> sample_matrix_boundary(const SetSpec& s, int k, int count) {
  std::mt19937_64 rng(0xc0feeULL + static_cast<unsigned>(k));
  std::normal_distribution<double> gauss;
  std::vector<Eigen::MatrixXd> out;
  for (int n = 0; n < count; ++n) {
    Eigen::MatrixXd g(k, k);
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j) g(i, j) = gauss(rng);
    Eigen::MatrixXd d = 0.5 * (g + g.transpose());
    switch (s.kind) {
      case SetKind::Singleton: out.push_back(Eigen::MatrixXd::Zero(k, k)); break;
      case SetKind::FrobeniusBall: out.push_back(s.radius / d.norm() * d); break;
      case SetKind::SchattenBall: out.push_back(s.radius / schatten_norm(d, s.p) * d); break;
      case SetKind::SpectralNormBound: out.push_back(s.radius / schatten_norm(d, kInf) * d); break;
      case SetKind::VecLifted: out.push_back(s.radius / vector_norm(full_vec(d), s.p) * d); break;
      case SetKind::NormIntersection: {
        double t = kInf;
        for (const auto& term : s.terms) t = std::min(t, term.radius / schatten_norm(d, term.p));
        out.push_back(t * d);
        break;
      }
      case SetKind::PsdInterval:
      case SetKind::PsdIntervalTrace: {
        // Extreme points theta Xi0^{1/2} P Xi0^{1/2} with P a random orthogonal projector.
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(d);
        Eigen::MatrixXd P = Eigen::MatrixXd::Zero(k, k);
        for (int i = 0; i < k; ++i)
          if (((n >> i) & 1) || n % (k + 1) == 0) P += es.eigenvectors().col(i) * es.eigenvectors().col(i).transpose();
        const Eigen::MatrixXd root = psd_sqrt(s.Xi0);
        Eigen::MatrixXd x = s.theta * root * P * root;
        if (s.kind == SetKind::PsdIntervalTrace) {
          const double q = (x * s.D * x).trace();
          if (q > s.tau) x *= std::sqrt(s.tau / q);
        }
        out.push_back(x);
        break;
      }
      default: throw std::invalid_argument("not a matrix set");
    }
  }
  return out;
}

ValidatedScenario validate_scenario(const Scenario& input) {
  Checker ck;
  Scenario s = input;
  const int n = s.n, k = s.k;
  ck.require(n >= 1, "decision dimension n must be positive");
  ck.require(k >= 1, "uncertainty dimension k must be positive");
  if (!ck.errors.empty()) throw ValidationError(ck.errors);

  ck.require(s.cost.size() == n, "dimension mismatch: objective cost must have length n");
  const auto& con = s.constraint;
  ck.require(con.m() >= 1, "constraint needs at least one piece");
  for (int i = 0; i < con.m(); ++i)
    ck.require(con.pieces[i].a.coeffs.size() == n,
               "dimension mismatch: piece " + std::to_string(i) + " a.coeffs must have length n");
  ck.require(con.w.matrix.rows() == k && con.w.matrix.cols() == n, "dimension mismatch: w.matrix must be k x n");
  ck.require(con.w.offset.size() == k, "dimension mismatch: w.offset must have length k");

  auto& mm = s.moments;
  ck.require(mm.mu0.size() == k, "dimension mismatch: mu0 must have length k");
  ck.psd(mm.sigma0, k, "Sigma0", false);
  if (mm.A.size() == 0 && mm.sigma0.rows() == k && mm.sigma0.cols() == k) mm.A = psd_sqrt(mm.sigma0);
  ck.square(mm.A, k, "A");
  if (mm.A.rows() == k && mm.A.cols() == k) ck.require(is_symmetric(mm.A), "A is not symmetric");

  const Variant v = s.variant;
  const bool c3 = v == Variant::C3 || v == Variant::C3Singleton;
  ck.vector_set(mm.U1, k, "U1");
  ck.vector_set(mm.U2, k, "U2");
  if (!c3) {
    ck.matrix_set(mm.Z1, k, "Z1");
    ck.matrix_set(mm.Z2, k, "Z2");
  }

  // Distances.
  auto& phi = s.distance.phi;
  auto& psi = s.distance.psi;
  auto check_distance = [&](DistanceSpec& d, const std::string& what) {
    ck.require(d.weight > 0.0, what + ": weight must be strictly positive");
    switch (d.kind) {
      case DistanceKind::MeanNorm: ck.require(valid_exponent(d.p), what + ": norm exponent must be 1, 2 or inf"); break;
      case DistanceKind::MeanMahalanobis:
      case DistanceKind::CovPsdGauge:
        if (d.anchor.size() == 0) d.anchor = mm.sigma0;
        ck.psd(d.anchor, k, what + " anchor", true);
        break;
      case DistanceKind::MeanEntropy:
        if (d.anchor_mean.size() == 0) d.anchor_mean = mm.mu0;
        ck.require(d.anchor_mean.size() == k, "dimension mismatch: " + what + " anchor mean");
        if (d.anchor_mean.size() == k) ck.require(d.anchor_mean.minCoeff() > 0.0, what + ": anchor mean must be positive");
        break;
      case DistanceKind::CovGeneralQuad:
        ck.psd(d.P1, k, what + " P1", true);
        ck.psd(d.P2, k, what + " P2", true);
        break;
      default: break;
    }
  };
  check_distance(phi, "phi");
  if (psi) check_distance(*psi, "psi");

  const bool singleton = v == Variant::C1Singleton || v == Variant::C3Singleton;
  if (v == Variant::C2) {
    ck.require(phi.kind == DistanceKind::C2Mahalanobis, "variant c2 requires distance c2_mahalanobis");
    ck.require(!psi.has_value(), "variant c2 takes no psi distance");
    ck.psd(mm.sigma0, k, "Sigma0 (variant c2)", true);
  } else {
    ck.require(phi.on_mean(), "phi must be a mean distance, got '" + std::string(distance_tag(phi.kind)) + "'");
    if (singleton)
      ck.require(phi.single_argument(), "phi tag has no single-argument conjugate");
    else
      ck.require(phi.two_argument(), "phi tag '" + std::string(distance_tag(phi.kind)) +
                                         "' has no joint conjugate; use a singleton variant");
  }
  if (v == Variant::C1 || v == Variant::C1Singleton) {
    ck.require(psi.has_value(), "variant " + std::string(variant_tag(v)) + " requires a psi distance");
    if (psi) {
      ck.require(psi->on_covariance(), "psi must be a covariance distance");
      if (singleton)
        ck.require(psi->single_argument(), "psi tag has no single-argument conjugate");
      else
        ck.require(psi->two_argument(), "psi tag '" + std::string(distance_tag(psi->kind)) +
                                            "' has no joint conjugate; use a singleton variant");
      if (psi->kind == DistanceKind::CovPsdGauge)
        ck.require(mm.Z1.kind == SetKind::PsdInterval || mm.Z1.kind == SetKind::PsdIntervalTrace,
                   "cov_psd_gauge requires Z1 inside the PSD cone (psd_interval tags)");
    }
  }
  if (v == Variant::LinearC1) {
    ck.require(con.m() == 1, "variant linear_c1 requires m = 1");
    if (psi) ck.require(psi->on_covariance(), "psi must be a covariance distance");
  }
  if (c3) {
    ck.require(s.support.has_value(), "variant " + std::string(variant_tag(v)) + " requires a support set");
    ck.require(!psi.has_value(), "variant " + std::string(variant_tag(v)) + " takes no psi distance");
    ck.require(con.m() == 1, "c3 variants support affine g only (m = 1)");
    if (s.support) {
      ck.vector_set(*s.support, k, "support");
      if (s.support->vector_set() && mm.mu0.size() == k)
        ck.require(contains(*s.support, mm.mu0, 1e-9), "mu0 must lie in the support set");
    }
  } else {
    ck.require(!s.support.has_value(), "support set is only used by c3 variants");
  }
  if (singleton) {
    ck.require(mm.U2.kind == SetKind::Singleton, "singleton variants require U2 = singleton");
    if (v == Variant::C1Singleton) ck.require(mm.Z2.kind == SetKind::Singleton, "singleton variants require Z2 = singleton");
  }

  const auto& dc = s.decision;
  ck.require(dc.G.rows() == dc.g.size() && (dc.G.rows() == 0 || dc.G.cols() == n), "dimension mismatch: G, g");
  ck.require(dc.E.rows() == dc.e.size() && (dc.E.rows() == 0 || dc.E.cols() == n), "dimension mismatch: E, e");
  if (!ck.errors.empty()) throw ValidationError(ck.errors);

  // Containment of inner sets, by sampling.
  for (const auto& z : sample_vector_boundary(mm.U2, k, kContainmentSamples))
    if (!contains(mm.U1, z, 1e-9 * (1.0 + z.norm()))) {
      ck.errors.push_back("containment: U2 is not contained in U1");
      break;
    }
  if (!c3)
    for (const auto& x : sample_matrix_boundary(mm.Z2, k, kContainmentSamples))
      if (!contains(mm.Z1, x, 1e-9 * (1.0 + x.norm()))) {
        ck.errors.push_back("containment: Z2 is not contained in Z1");
        break;
      }
  if (!ck.errors.empty()) throw ValidationError(ck.errors);

  ValidatedScenario out;
  out.scenario = std::move(s);
  out.sigma0_sqrt = psd_sqrt(out.scenario.moments.sigma0);
  if (min_eigenvalue(out.scenario.moments.sigma0) > kPsdTol)
    out.sigma0_inv = out.scenario.moments.sigma0.llt().solve(Eigen::MatrixXd::Identity(k, k));
  return out;
}

}  // namespace gdro::model
