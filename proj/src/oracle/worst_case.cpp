#include "gdro/oracle/worst_case.hpp"

#include "gdro/conic/cones.hpp"
#include "gdro/convex/numeric.hpp"
#include "gdro/convex/projection.hpp"
#include "gdro/model/json.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <exception>
#include <functional>
#include <limits>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>

namespace gdro::oracle {

namespace {

using model::DistanceKind;
using model::DistanceSpec;
using model::SetKind;
using model::SetSpec;
using model::Variant;

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPsdFloor = -1e-10;

/// Runs fn(i) for i in [0, n), across OpenMP threads when `parallel`.
/// The first exception thrown by any iteration is rethrown.
void for_each_index(long n, bool parallel, const std::function<void(long)>& fn) {
  std::exception_ptr error;
  std::mutex lock;
#pragma omp parallel for schedule(dynamic, 16) if (parallel)
  for (long i = 0; i < n; ++i) {
    try {
      fn(i);
    } catch (...) {
      std::lock_guard<std::mutex> g(lock);
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
}

struct Box {
  Eigen::VectorXd lo, hi;
};

Eigen::VectorXd spacing(const Box& b, int n) { return (b.hi - b.lo) / (n - 1); }

/// Tensor grid over the box; degenerate coordinates contribute one point.
std::vector<Eigen::VectorXd> box_grid(const Box& b, int n) {
  const int dim = static_cast<int>(b.lo.size());
  std::vector<Eigen::VectorXd> out{Eigen::VectorXd::Zero(dim)};
  for (int j = 0; j < dim; ++j) {
    const double width = b.hi(j) - b.lo(j);
    const int pts = width > 1e-14 ? n : 1;
    std::vector<Eigen::VectorXd> next;
    next.reserve(out.size() * pts);
    for (const auto& v : out)
      for (int i = 0; i < pts; ++i) {
        Eigen::VectorXd u = v;
        u(j) = pts == 1 ? 0.5 * (b.lo(j) + b.hi(j)) : b.lo(j) + width * i / (n - 1);
        next.push_back(std::move(u));
      }
    out = std::move(next);
  }
  return out;
}

Box zoom(const Box& base, const Eigen::VectorXd& centre, const Eigen::VectorXd& h) {
  return {(centre - h).cwiseMax(base.lo), (centre + h).cwiseMin(base.hi)};
}

Box vector_box(const SetSpec& U, int k) {
  Box b{Eigen::VectorXd(k), Eigen::VectorXd(k)};
  for (int j = 0; j < k; ++j) {
    const Eigen::VectorXd e = Eigen::VectorXd::Unit(k, j);
    b.hi(j) = convex::support_value(U, e);
    b.lo(j) = -convex::support_value(U, Eigen::VectorXd(-e));
  }
  if (!b.lo.allFinite() || !b.hi.allFinite()) throw OracleError("oracle: mean perturbation set is unbounded");
  return b;
}

double spectral_norm(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  return svd.singularValues()(0);
}

Eigen::MatrixXd inverse_of(const Eigen::MatrixXd& m) {
  return m.ldlt().solve(Eigen::MatrixXd::Identity(m.rows(), m.cols()));
}

/// Covariance perturbations Xi as a function of box coordinates. PSD-interval
/// sets are parameterized by W in [0, I] with Xi = theta R W R, R = Xi0^{1/2};
/// other sets use svec(Xi) directly and project onto Z1.
class CovarianceGrid {
 public:
  CovarianceGrid(const SetSpec& Z1, int k, bool fixed) : Z1_(Z1), k_(k) {
    const int dim = conic::tri_size(k);
    if (fixed) {
      box_ = {Eigen::VectorXd(0), Eigen::VectorXd(0)};
      return;
    }
    w_space_ = Z1.kind == SetKind::PsdInterval || Z1.kind == SetKind::PsdIntervalTrace;
    box_ = {Eigen::VectorXd(dim), Eigen::VectorXd(dim)};
    if (w_space_) {
      R_ = model::psd_sqrt(Z1.Xi0);
      scale_ = Z1.theta * spectral_norm(R_) * spectral_norm(R_);
      int idx = 0;
      for (int j = 0; j < k; ++j)
        for (int i = j; i < k; ++i, ++idx) {
          box_.lo(idx) = i == j ? 0.0 : -std::sqrt(0.5);
          box_.hi(idx) = i == j ? 1.0 : std::sqrt(0.5);
        }
      return;
    }
    for (int j = 0; j < dim; ++j) {
      const Eigen::MatrixXd E = conic::smat(Eigen::VectorXd::Unit(dim, j), k);
      box_.hi(j) = convex::support_value(Z1, E);
      box_.lo(j) = -convex::support_value(Z1, Eigen::MatrixXd(-E));
    }
    if (!box_.lo.allFinite() || !box_.hi.allFinite())
      throw OracleError("oracle: covariance perturbation set is unbounded");
  }

  const Box& box() const { return box_; }
  /// Frobenius length of a unit coordinate step.
  double scale() const { return scale_; }
  /// Bound on |w^T dXi w| per unit coordinate step.
  double quadratic_gain(const Eigen::VectorXd& w) const {
    if (w_space_) return Z1_.theta * (R_ * w).squaredNorm();
    return w.squaredNorm();
  }

  Eigen::MatrixXd xi(const Eigen::VectorXd& coords) const {
    if (coords.size() == 0) return Eigen::MatrixXd::Zero(k_, k_);
    if (w_space_) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(conic::smat(coords, k_));
      const Eigen::VectorXd lam = es.eigenvalues().cwiseMax(0.0).cwiseMin(1.0);
      const Eigen::MatrixXd W = es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
      Eigen::MatrixXd X = Z1_.theta * R_ * W * R_;
      if (Z1_.kind == SetKind::PsdIntervalTrace && !model::contains(Z1_, X, 1e-10)) X = convex::project(Z1_, X);
      return X;
    }
    const Eigen::MatrixXd X = conic::smat(coords, k_);
    return model::contains(Z1_, X, 1e-12) ? X : convex::project(Z1_, X);
  }

 private:
  const SetSpec& Z1_;
  int k_;
  bool w_space_ = false;
  Eigen::MatrixXd R_;
  double scale_ = 1.0;
  Box box_;
};

struct MeanNode {
  Eigen::VectorXd coords, mu;
  double m = 0.0, penalty = 0.0;
};

struct CovNode {
  Eigen::VectorXd coords;
  Eigen::MatrixXd sigma;
  double s2 = 0.0, penalty = 0.0;
  bool valid = true;
};

struct Best {
  double value = -kInf;
  long index = -1;
  double inner = 0.0;

  void offer(double v, long i, double ib) {
    if (index < 0 || v > value || (v == value && i < index)) {
      value = v;
      index = i;
      inner = ib;
    }
  }
};

Best reduce(long n, bool parallel, const std::function<bool(long, double&, double&)>& eval) {
  Best best;
  std::exception_ptr error;
#pragma omp parallel if (parallel)
  {
    Best local;
#pragma omp for schedule(dynamic, 16) nowait
    for (long i = 0; i < n; ++i) {
      try {
        double v = 0.0, ib = 0.0;
        if (eval(i, v, ib)) local.offer(v, i, ib);
      } catch (...) {
#pragma omp critical(gdro_oracle_error)
        if (!error) error = std::current_exception();
      }
    }
#pragma omp critical(gdro_oracle_merge)
    if (local.index >= 0) best.offer(local.value, local.index, local.inner);
  }
  if (error) std::rethrow_exception(error);
  return best;
}

/// Lipschitz constant (Euclidean, in zeta) of zeta -> min distance from mu0 + A zeta to the inner mean set.
double mean_penalty_lipschitz(const DistanceSpec& phi, const model::ValidatedScenario& s, const Box& mu_box,
                              double zeta_diam) {
  const int k = s.k();
  const Eigen::MatrixXd& A = s.A();
  switch (phi.kind) {
    case DistanceKind::MeanNorm:
      return phi.weight * (phi.p == 1.0 ? std::sqrt(static_cast<double>(k)) : 1.0) * spectral_norm(A);
    case DistanceKind::MeanMahalanobis: {
      const Eigen::MatrixXd& anchor = phi.anchor.size() ? phi.anchor : s.moments().sigma0;
      return phi.weight * spectral_norm(A.transpose() * inverse_of(anchor) * A) * zeta_diam;
    }
    case DistanceKind::MeanEntropy: {
      const Eigen::VectorXd& a = phi.anchor_mean.size() ? phi.anchor_mean : s.moments().mu0;
      double sq = 0.0;
      for (int j = 0; j < k; ++j) {
        if (mu_box.lo(j) <= 0.0 || a(j) <= 0.0) return kInf;
        const double g = std::max(std::abs(std::log(mu_box.lo(j) / a(j)) + 1.0),
                                  std::abs(std::log(mu_box.hi(j) / a(j)) + 1.0));
        sq += g * g;
      }
      return spectral_norm(A) * std::sqrt(sq);
    }
    default: return kInf;
  }
}

/// Lipschitz constant (Frobenius, in Sigma) of Sigma -> min distance to the inner covariance set.
double cov_penalty_lipschitz(const DistanceSpec& psi, const model::ValidatedScenario& s, double diam) {
  const int k = s.k();
  switch (psi.kind) {
    case DistanceKind::CovFrobeniusSq: return 2.0 * psi.weight * diam;
    case DistanceKind::CovGeneralQuad: return 2.0 * spectral_norm(psi.P1) * spectral_norm(psi.P2) * diam;
    case DistanceKind::CovLogDet: {
      const double lam = 1.0 - diam;
      return lam > 0.0 ? psi.weight * std::sqrt(static_cast<double>(k)) / lam : kInf;
    }
    case DistanceKind::CovPsdGauge: {
      const Eigen::MatrixXd& anchor = psi.anchor.size() ? psi.anchor : s.moments().sigma0;
      return psi.weight * inverse_of(anchor).norm();
    }
    default: return kInf;
  }
}

/// Interval image of the zeta box under mu = mu0 + A zeta.
Box mean_image(const model::ValidatedScenario& s, const Box& zeta) {
  const Eigen::MatrixXd& A = s.A();
  const Eigen::VectorXd mid = 0.5 * (zeta.lo + zeta.hi), half = 0.5 * (zeta.hi - zeta.lo);
  const Eigen::VectorXd c = s.moments().mu0 + A * mid, r = A.cwiseAbs() * half;
  return {c - r, c + r};
}

struct Decision {
  Eigen::VectorXd w;
  std::vector<MomentPiece> pieces;
};

Decision at_decision(const model::ValidatedScenario& s, const Eigen::VectorXd& d) {
  const auto& g = s.scenario.constraint;
  if (d.size() != s.n())
    throw std::invalid_argument("oracle: decision has length " + std::to_string(d.size()) + ", expected " +
                                std::to_string(s.n()));
  Decision out;
  out.w = model::affine_eval(g.w, d);
  for (const auto& p : g.pieces) out.pieces.push_back({model::affine_eval(p.a, d), p.b});
  return out;
}

void check_grid(const model::ValidatedScenario& s, const GridConfig& grid) {
  grid.validate();
  if (s.k() > 3) throw OracleError("oracle: k = " + std::to_string(s.k()) + " exceeds the desk-scale limit of 3");
}

WorstCaseReport run_c1(const model::ValidatedScenario& s, const Eigen::VectorXd& d, const GridConfig& grid,
                       bool parallel) {
  check_grid(s, grid);
  const Variant v = s.scenario.variant;
  if (v != Variant::C1 && v != Variant::C1Singleton && v != Variant::LinearC1)
    throw OracleError("worst_case_violation: variant '" + std::string(model::variant_tag(v)) + "' is not supported");
  const auto& mom = s.moments();
  const int k = s.k();
  const bool linear = v == Variant::LinearC1;
  const Decision dec = at_decision(s, d);
  const DistanceSpec& phi = s.scenario.distance.phi;
  const std::optional<DistanceSpec>& psi = s.scenario.distance.psi;
  const DualSearch search{grid.dual_resolution, 0};

  const Box zeta_box = vector_box(mom.U1, k);
  const CovarianceGrid cov_grid(mom.Z1, k, linear);

  auto make_mean = [&](const std::vector<Eigen::VectorXd>& coords) {
    std::vector<MeanNode> nodes(coords.size());
    for_each_index(static_cast<long>(coords.size()), parallel, [&](long i) {
      MeanNode& n = nodes[i];
      n.coords = coords[i];
      const Eigen::VectorXd z = model::contains(mom.U1, coords[i], 1e-12) ? coords[i] : convex::project(mom.U1, coords[i]);
      n.mu = mom.mu0 + mom.A * z;
      n.m = dec.w.dot(n.mu);
      n.penalty = convex::min_distance(phi, n.mu, mom.U2, mom.mu0, mom.A);
    });
    return nodes;
  };
  auto make_cov = [&](const std::vector<Eigen::VectorXd>& coords) {
    std::vector<CovNode> nodes(coords.size());
    for_each_index(static_cast<long>(coords.size()), parallel, [&](long i) {
      CovNode& n = nodes[i];
      n.coords = coords[i];
      n.sigma = mom.sigma0 + cov_grid.xi(coords[i]);
      if (model::min_eigenvalue(n.sigma) < kPsdFloor * (1.0 + mom.sigma0.norm())) {
        n.valid = false;
        return;
      }
      n.s2 = std::max(0.0, dec.w.dot(n.sigma * dec.w));
      n.penalty = (!linear && psi) ? convex::min_distance(*psi, n.sigma, mom.Z2, mom.sigma0) : 0.0;
    });
    return nodes;
  };

  WorstCaseReport report;
  Box mbox = zeta_box, cbox = cov_grid.box();
  Eigen::VectorXd mh = spacing(zeta_box, grid.mean_points), ch = spacing(cbox, grid.cov_points);
  bool found = false;
  for (int level = 0; level <= grid.refinements; ++level) {
    const auto means = make_mean(box_grid(mbox, grid.mean_points));
    const auto covs = make_cov(box_grid(cbox, grid.cov_points));
    const long nc = static_cast<long>(covs.size());
    const long total = static_cast<long>(means.size()) * nc;
    for (const auto& c : covs)
      if (!c.valid) report.skipped += static_cast<int>(means.size());
    report.nodes += static_cast<int>(total);
    const Best best = reduce(total, parallel, [&](long idx, double& val, double& ib) {
      const CovNode& c = covs[idx % nc];
      if (!c.valid) return false;
      const MeanNode& m = means[idx / nc];
      ib = inner_dual_bound(dec.pieces, m.m, c.s2, search);
      val = ib - m.penalty - c.penalty;
      return !std::isnan(val);
    });
    if (best.index < 0) break;
    const MeanNode& m = means[best.index / nc];
    const CovNode& c = covs[best.index % nc];
    if (!found || best.value > report.max_violation) {
      found = true;
      report.max_violation = best.value;
      report.attaining_mu = m.mu;
      report.attaining_sigma = c.sigma;
      report.inner_bound = best.inner;
      report.penalty = m.penalty + c.penalty;
    }
    mbox = zoom(zeta_box, m.coords, mh);
    cbox = zoom(cov_grid.box(), c.coords, ch);
    mh = spacing(mbox, grid.mean_points);
    ch = spacing(cbox, grid.cov_points);
  }
  if (!found) throw OracleError("worst_case_violation: every grid node was skipped");

  // Covering radii of the base grid in grid coordinates (projection onto the
  // set is nonexpansive, and the W-space clip is a projection).
  const double r_zeta = 0.5 * spacing(zeta_box, grid.mean_points).norm();
  const double r_cov = 0.5 * spacing(cov_grid.box(), grid.cov_points).norm();
  const double zeta_diam = (zeta_box.hi - zeta_box.lo).norm();
  const double sigma_diam = cov_grid.scale() * (cov_grid.box().hi - cov_grid.box().lo).norm();
  double bmax = 0.0, bmin = kInf, bhi = -kInf;
  for (const auto& p : dec.pieces) {
    bmax = std::max(bmax, std::abs(p.b));
    bmin = std::min(bmin, p.b);
    bhi = std::max(bhi, p.b);
  }
  double bound = bmax * (mom.A.transpose() * dec.w).norm() * r_zeta +
                 0.5 * (bhi - bmin) * std::sqrt(cov_grid.quadratic_gain(dec.w) * r_cov);
  if (r_zeta > 0.0) bound += mean_penalty_lipschitz(phi, s, mean_image(s, zeta_box), zeta_diam) * r_zeta;
  if (r_cov > 0.0 && psi && !linear) bound += cov_penalty_lipschitz(*psi, s, sigma_diam) * cov_grid.scale() * r_cov;
  report.grid_error_bound = bound;
  return report;
}

}  // namespace

void GridConfig::validate() const {
  if (mean_points < 3 || cov_points < 3 || dual_resolution < 3 || refinements < 0)
    throw std::invalid_argument("grid config: point counts must be >= 3 and refinements >= 0");
}

nlohmann::ordered_json report_to_json(const WorstCaseReport& r) {
  nlohmann::ordered_json j;
  j["max_violation"] = r.max_violation;
  j["attaining_mu"] = model::vector_to_json(r.attaining_mu);
  j["attaining_sigma"] = model::matrix_to_json(r.attaining_sigma);
  j["inner_bound"] = r.inner_bound;
  j["penalty"] = r.penalty;
  if (std::isfinite(r.grid_error_bound))
    j["grid_error_bound"] = r.grid_error_bound;
  else
    j["grid_error_bound"] = "inf";
  j["nodes"] = r.nodes;
  j["skipped"] = r.skipped;
  return j;
}

WorstCaseReport worst_case_violation(const model::ValidatedScenario& s, const Eigen::VectorXd& d,
                                     const GridConfig& grid) {
  return run_c1(s, d, grid, true);
}

WorstCaseReport worst_case_violation_serial(const model::ValidatedScenario& s, const Eigen::VectorXd& d,
                                            const GridConfig& grid) {
  return run_c1(s, d, grid, false);
}

WorstCaseReport c3_worst_case(const model::ValidatedScenario& s, const Eigen::VectorXd& d, const GridConfig& grid) {
  check_grid(s, grid);
  const Variant v = s.scenario.variant;
  if (v != Variant::C3 && v != Variant::C3Singleton)
    throw OracleError("c3_worst_case: variant '" + std::string(model::variant_tag(v)) + "' is not C3");
  if (s.scenario.constraint.m() != 1) throw OracleError("c3_worst_case: requires a single affine piece");
  const auto& mom = s.moments();
  const int k = s.k();
  const Decision dec = at_decision(s, d);
  const double a = dec.pieces[0].a, b = dec.pieces[0].b;
  const DistanceSpec& phi = s.scenario.distance.phi;
  const Box zeta_box = vector_box(mom.U1, k);

  WorstCaseReport report;
  Box box = zeta_box;
  Eigen::VectorXd h = spacing(box, grid.mean_points);
  bool found = false;
  for (int level = 0; level <= grid.refinements; ++level) {
    const auto coords = box_grid(box, grid.mean_points);
    std::vector<MeanNode> nodes(coords.size());
    std::vector<char> valid(coords.size(), 1);
    for_each_index(static_cast<long>(coords.size()), true, [&](long i) {
      MeanNode& n = nodes[i];
      n.coords = coords[i];
      const Eigen::VectorXd z = model::contains(mom.U1, coords[i], 1e-12) ? coords[i] : convex::project(mom.U1, coords[i]);
      n.mu = mom.mu0 + mom.A * z;
      if (s.scenario.support && !model::contains(*s.scenario.support, n.mu, 1e-9)) {
        valid[i] = 0;
        return;
      }
      n.m = a + b * dec.w.dot(n.mu);
      n.penalty = v == Variant::C3Singleton ? convex::distance_value(phi, n.mu, mom.mu0)
                                            : convex::min_distance(phi, n.mu, mom.U2, mom.mu0, mom.A);
    });
    Best best;
    for (long i = 0; i < static_cast<long>(nodes.size()); ++i) {
      if (!valid[i]) {
        ++report.skipped;
        continue;
      }
      const double val = nodes[i].m - nodes[i].penalty;
      if (!std::isnan(val)) best.offer(val, i, nodes[i].m);
    }
    report.nodes += static_cast<int>(nodes.size());
    if (best.index < 0) break;
    const MeanNode& n = nodes[best.index];
    if (!found || best.value > report.max_violation) {
      found = true;
      report.max_violation = best.value;
      report.attaining_mu = n.mu;
      report.attaining_sigma = mom.sigma0;
      report.inner_bound = n.m;
      report.penalty = n.penalty;
    }
    box = zoom(zeta_box, n.coords, h);
    h = spacing(box, grid.mean_points);
  }
  if (!found) throw OracleError("c3_worst_case: no grid node lies in the support");
  const double r_zeta = 0.5 * spacing(zeta_box, grid.mean_points).norm();
  const double zeta_diam = (zeta_box.hi - zeta_box.lo).norm();
  report.grid_error_bound =
      r_zeta > 0.0 ? (std::abs(b) * (mom.A.transpose() * dec.w).norm() +
                      mean_penalty_lipschitz(phi, s, mean_image(s, zeta_box), zeta_diam)) *
                         r_zeta
                   : 0.0;
  return report;
}

Verification verify_feasibility(const model::ValidatedScenario& s, const Eigen::VectorXd& d, double tol,
                                const GridConfig& grid) {
  const Variant v = s.scenario.variant;
  Verification out;
  out.report = (v == Variant::C3 || v == Variant::C3Singleton) ? c3_worst_case(s, d, grid)
                                                               : worst_case_violation(s, d, grid);
  out.pass = out.report.max_violation <= tol + out.report.grid_error_bound;
  return out;
}

}  // namespace gdro::oracle
