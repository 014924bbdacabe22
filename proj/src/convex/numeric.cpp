#include "gdro/convex/numeric.hpp"

#include "gdro/conic/solver.hpp"
#include "gdro/convex/projection.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace gdro::convex {

using conic::Cone;
using conic::ConicFragment;
using conic::LinExpr;
using conic::SymMatExpr;
using conic::VecExpr;
using model::DistanceKind;
using model::DistanceSpec;
using model::SetKind;
using model::SetSpec;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPgTol = 1e-9;
constexpr int kPgMaxIter = 10000;

/// ||arg||_p <= radius as cone rows.
void norm_rows(ConicFragment& f, const VecExpr& arg, const LinExpr& radius, double p, const std::string& name) {
  const int n = static_cast<int>(arg.size());
  if (p == 2.0) {
    VecExpr rows{radius};
    rows.insert(rows.end(), arg.begin(), arg.end());
    f.add(name, Cone::soc(n + 1), rows);
  } else if (std::isinf(p)) {
    VecExpr rows;
    for (const auto& a : arg) {
      rows.push_back(radius - a);
      rows.push_back(radius + a);
    }
    f.add(name, Cone::nonneg(2 * n), rows);
  } else if (p == 1.0) {
    f.declare(name + ".abs", n);
    VecExpr rows;
    LinExpr total;
    for (int i = 0; i < n; ++i) {
      const LinExpr u = LinExpr::var(name + ".abs", i);
      rows.push_back(u - arg[i]);
      rows.push_back(u + arg[i]);
      total += u;
    }
    rows.push_back(radius - total);
    f.add(name, Cone::nonneg(2 * n + 1), rows);
  } else {
    throw std::invalid_argument("norm exponent must be 1, 2 or inf");
  }
}

SymMatExpr scaled_identity(double r, int k) { return SymMatExpr::constant(r * Eigen::MatrixXd::Identity(k, k)); }

void schatten_rows(ConicFragment& f, const SymMatExpr& X, double p, double r, const std::string& name) {
  const int k = X.order();
  if (p == 2.0) {
    norm_rows(f, X.svec(), LinExpr(r), 2.0, name);
  } else if (std::isinf(p)) {
    f.add(name + ".upper", Cone::psd(k), (scaled_identity(r, k) - X).svec());
    f.add(name + ".lower", Cone::psd(k), (scaled_identity(r, k) + X).svec());
  } else if (p == 1.0) {
    f.declare(name + ".pos", conic::tri_size(k));
    f.declare(name + ".neg", conic::tri_size(k));
    const SymMatExpr P = SymMatExpr::variable(name + ".pos", k);
    const SymMatExpr N = SymMatExpr::variable(name + ".neg", k);
    f.add(name + ".pos_psd", Cone::psd(k), P.svec());
    f.add(name + ".neg_psd", Cone::psd(k), N.svec());
    VecExpr split;
    for (int j = 0; j < k; ++j)
      for (int i = j; i < k; ++i) split.push_back(X.at(i, j) - P.at(i, j) + N.at(i, j));
    f.add(name + ".split", Cone::zero(static_cast<int>(split.size())), split);
    f.add(name + ".budget", Cone::nonneg(1), {r - P.trace() - N.trace()});
  } else {
    throw std::invalid_argument("Schatten exponent must be 1, 2 or inf");
  }
}

double solve_max(const ConicFragment& f, const LinExpr& gain) {
  const conic::ConicProgram prog = conic::assemble(std::span<const ConicFragment>(&f, 1), ConicFragment{}, -gain);
  const conic::Solution sol = conic::solve(prog);
  if (sol.status == conic::SolveStatus::Unbounded) return kInf;
  if (sol.status != conic::SolveStatus::Optimal)
    throw std::runtime_error("support evaluation failed: " + std::string(conic::status_name(sol.status)) + " " +
                             sol.message);
  return -sol.objective;
}

double inner(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) { return a.cwiseProduct(b).sum(); }

/// Accelerated projected gradient with backtracking and monotone restart.
/// Stops when the gradient-mapping norm falls below kPgTol * (1 + |f|).
template <class T, class F, class G, class P>
double projected_gradient(T x, const F& f, const G& grad, const P& proj, double L) {
  x = proj(x);
  double fx = f(x);
  if (!std::isfinite(fx)) throw ConvergenceError("projected gradient: infeasible starting point");
  T y = x;
  double fy = fx, t = 1.0;
  L = std::max(L, 1e-12);
  for (int it = 0; it < kPgMaxIter; ++it) {
    const T g = grad(y);
    T xn;
    double fn;
    for (;;) {
      xn = proj(y - g / L);
      fn = f(xn);
      const T step = xn - y;
      if (std::isfinite(fn) && fn <= fy + inner(g, step) + 0.5 * L * step.squaredNorm() + 1e-15 * std::abs(fy)) break;
      L *= 2.0;
      if (L > 1e30) throw ConvergenceError("projected gradient: step size underflow");
    }
    const double mapping = L * (xn - y).norm();
    if (mapping <= kPgTol * (1.0 + std::abs(fn))) return std::min(fn, fx);
    if (fn > fx) {
      // A plain step from the best point no longer descends: stationary up to projection error.
      if (t == 1.0) return fx;
      // Restart momentum from the best point.
      y = x;
      fy = fx;
      t = 1.0;
      continue;
    }
    const double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    y = xn + ((t - 1.0) / tn) * (xn - x);
    fy = f(y);
    if (!std::isfinite(fy)) {
      y = xn;
      fy = fn;
    }
    x = xn;
    fx = fn;
    t = tn;
  }
  throw ConvergenceError("projected gradient did not converge within 10000 iterations");
}

bool origin_only(const SetSpec& S) {
  switch (S.kind) {
    case SetKind::Singleton: return true;
    case SetKind::NormBall:
    case SetKind::FrobeniusBall:
    case SetKind::SchattenBall:
    case SetKind::SpectralNormBound:
    case SetKind::VecLifted: return S.radius <= 0.0;
    case SetKind::NormIntersection:
      return std::any_of(S.terms.begin(), S.terms.end(), [](const model::NormTerm& t) { return t.radius <= 0.0; });
    case SetKind::PsdInterval: return S.theta <= 0.0 || S.Xi0.cwiseAbs().maxCoeff() == 0.0;
    case SetKind::PsdIntervalTrace: return S.theta <= 0.0 || S.tau <= 0.0 || S.Xi0.cwiseAbs().maxCoeff() == 0.0;
    default: return false;
  }
}

const Eigen::MatrixXd& require(const Eigen::MatrixXd& m, const char* what) {
  if (m.size() == 0) throw std::invalid_argument(std::string(what) + ": anchor matrix not set");
  return m;
}

Eigen::MatrixXd spd_inverse(const Eigen::MatrixXd& m) {
  return m.ldlt().solve(Eigen::MatrixXd::Identity(m.rows(), m.cols()));
}

Eigen::MatrixXd kron(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  Eigen::MatrixXd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

double max_eigenvalue(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(m.rows() - 1);
}

/// -ln det M for symmetric M; +inf unless M is positive definite.
double neg_logdet(const Eigen::MatrixXd& m) {
  Eigen::LLT<Eigen::MatrixXd> llt(0.5 * (m + m.transpose()));
  if (llt.info() != Eigen::Success) return kInf;
  const Eigen::VectorXd d = llt.matrixLLT().diagonal();
  if ((d.array() <= 0.0).any()) return kInf;
  return -2.0 * d.array().log().sum();
}

}  // namespace

ConicFragment membership_fragment(const SetSpec& S, const std::string& name, int k, bool matrix) {
  ConicFragment f;
  if (!matrix) {
    f.declare(name, k);
    const VecExpr z = conic::vec_var(name, k);
    switch (S.kind) {
      case SetKind::Singleton: f.add(name + ".origin", Cone::zero(k), z); break;
      case SetKind::NormBall: norm_rows(f, z, LinExpr(S.radius), S.p, name + ".ball"); break;
      case SetKind::NormIntersection:
        for (std::size_t j = 0; j < S.terms.size(); ++j)
          norm_rows(f, z, LinExpr(S.terms[j].radius), S.terms[j].p, name + ".ball" + std::to_string(j));
        break;
      case SetKind::Polyhedron:
        if (S.C.rows() > 0)
          f.add(name + ".faces", Cone::nonneg(static_cast<int>(S.C.rows())),
                conic::constant_vec(S.c) - conic::mat_mul(S.C, z));
        break;
      default: throw std::invalid_argument("set '" + std::string(model::set_tag(S.kind)) + "' is not a vector set");
    }
    return f;
  }
  f.declare(name, conic::tri_size(k));
  const SymMatExpr X = SymMatExpr::variable(name, k);
  switch (S.kind) {
    case SetKind::Singleton: {
      VecExpr rows;
      for (int j = 0; j < k; ++j)
        for (int i = j; i < k; ++i) rows.push_back(X.at(i, j));
      f.add(name + ".origin", Cone::zero(static_cast<int>(rows.size())), rows);
      break;
    }
    case SetKind::FrobeniusBall: norm_rows(f, X.svec(), LinExpr(S.radius), 2.0, name + ".ball"); break;
    case SetKind::SchattenBall: schatten_rows(f, X, S.p, S.radius, name + ".ball"); break;
    case SetKind::SpectralNormBound: schatten_rows(f, X, model::kInf, S.radius, name + ".ball"); break;
    case SetKind::NormIntersection:
      for (std::size_t j = 0; j < S.terms.size(); ++j)
        schatten_rows(f, X, S.terms[j].p, S.terms[j].radius, name + ".ball" + std::to_string(j));
      break;
    case SetKind::VecLifted: {
      VecExpr entries;
      for (int j = 0; j < k; ++j)
        for (int i = 0; i < k; ++i) entries.push_back(X.at(std::max(i, j), std::min(i, j)));
      norm_rows(f, entries, LinExpr(S.radius), S.p, name + ".ball");
      break;
    }
    case SetKind::PsdInterval:
    case SetKind::PsdIntervalTrace: {
      f.add(name + ".lower", Cone::psd(k), X.svec());
      f.add(name + ".upper", Cone::psd(k), (SymMatExpr::constant(S.theta * S.Xi0) - X).svec());
      if (S.kind == SetKind::PsdIntervalTrace) {
        const Eigen::MatrixXd R = model::psd_sqrt(S.D);
        VecExpr rows;
        for (int j = 0; j < k; ++j)
          for (int i = 0; i < k; ++i) {
            LinExpr e;
            for (int l = 0; l < k; ++l) e += R(i, l) * X.at(std::max(l, j), std::min(l, j));
            rows.push_back(e);
          }
        norm_rows(f, rows, LinExpr(std::sqrt(S.tau)), 2.0, name + ".trace");
      }
      break;
    }
    default: throw std::invalid_argument("set '" + std::string(model::set_tag(S.kind)) + "' is not a matrix set");
  }
  return f;
}

double support_value(const SetSpec& S, const Eigen::VectorXd& y) {
  const int k = static_cast<int>(y.size());
  switch (S.kind) {
    case SetKind::Singleton: return 0.0;
    case SetKind::NormBall: return S.radius * model::vector_norm(y, model::dual_exponent(S.p));
    case SetKind::NormIntersection:
    case SetKind::Polyhedron: {
      if (y.isZero(0.0)) return 0.0;
      const ConicFragment f = membership_fragment(S, "z", k, false);
      return solve_max(f, conic::dot(y, conic::vec_var("z", k)));
    }
    default: throw std::invalid_argument("set '" + std::string(model::set_tag(S.kind)) + "' is not a vector set");
  }
}

double support_value(const SetSpec& S, const Eigen::MatrixXd& Y) {
  const Eigen::MatrixXd Ys = 0.5 * (Y + Y.transpose());
  const int k = static_cast<int>(Y.rows());
  switch (S.kind) {
    case SetKind::Singleton: return 0.0;
    case SetKind::FrobeniusBall: return S.radius * Ys.norm();
    case SetKind::SchattenBall: return S.radius * model::schatten_norm(Ys, model::dual_exponent(S.p));
    case SetKind::SpectralNormBound: return S.radius * model::schatten_norm(Ys, 1.0);
    case SetKind::VecLifted: return S.radius * model::vector_norm(model::full_vec(Ys), model::dual_exponent(S.p));
    case SetKind::PsdInterval: {
      const Eigen::MatrixXd R = model::psd_sqrt(S.Xi0);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(R * Ys * R, Eigen::EigenvaluesOnly);
      return S.theta * es.eigenvalues().cwiseMax(0.0).sum();
    }
    case SetKind::NormIntersection:
    case SetKind::PsdIntervalTrace: {
      if (Ys.isZero(0.0)) return 0.0;
      const ConicFragment f = membership_fragment(S, "X", k, true);
      return solve_max(f, SymMatExpr::variable("X", k).trace_with(Ys));
    }
    default: throw std::invalid_argument("set '" + std::string(model::set_tag(S.kind)) + "' is not a matrix set");
  }
}

double distance_value(const DistanceSpec& phi, const Eigen::VectorXd& mu, const Eigen::VectorXd& mu_prime) {
  if (mu.size() != mu_prime.size()) throw std::invalid_argument("distance_value: dimension mismatch");
  switch (phi.kind) {
    case DistanceKind::MeanNorm: return phi.weight * model::vector_norm(mu - mu_prime, phi.p);
    case DistanceKind::MeanMahalanobis: {
      const Eigen::VectorXd d = mu - mu_prime;
      return 0.5 * phi.weight * d.dot(require(phi.anchor, "mean_mahalanobis").ldlt().solve(d));
    }
    case DistanceKind::MeanEntropy: {
      const Eigen::VectorXd& a = phi.anchor_mean.size() ? phi.anchor_mean : mu_prime;
      double v = 0.0;
      for (int i = 0; i < mu.size(); ++i) {
        if (mu(i) < 0.0 || a(i) <= 0.0) return kInf;
        if (mu(i) > 0.0) v += mu(i) * std::log(mu(i) / a(i));
      }
      return v;
    }
    default:
      throw std::invalid_argument("distance '" + std::string(model::distance_tag(phi.kind)) +
                                  "' is not a mean distance");
  }
}

double distance_value(const DistanceSpec& psi, const Eigen::MatrixXd& S, const Eigen::MatrixXd& S_prime) {
  if (S.rows() != S_prime.rows()) throw std::invalid_argument("distance_value: dimension mismatch");
  const int k = static_cast<int>(S.rows());
  const Eigen::MatrixXd d = 0.5 * ((S - S_prime) + (S - S_prime).transpose());
  switch (psi.kind) {
    case DistanceKind::CovFrobeniusSq: return psi.weight * d.squaredNorm();
    case DistanceKind::CovGeneralQuad: return (d * psi.P1 * d * psi.P2).trace();
    case DistanceKind::CovLogDet: return psi.weight * neg_logdet(d + Eigen::MatrixXd::Identity(k, k));
    case DistanceKind::CovPsdGauge: {
      const Eigen::MatrixXd& a = psi.anchor.size() ? psi.anchor : S_prime;
      if (model::min_eigenvalue(S) < -1e-12) return kInf;
      return psi.weight * ((spd_inverse(a) * S).trace() - k);
    }
    default:
      throw std::invalid_argument("distance '" + std::string(model::distance_tag(psi.kind)) +
                                  "' is not a covariance distance");
  }
}

double c2_distance_value(double eta, const Eigen::VectorXd& mu, const Eigen::MatrixXd& sigma,
                         const Eigen::VectorXd& mu0) {
  Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  if (llt.info() != Eigen::Success) return kInf;
  const Eigen::VectorXd d = mu - mu0;
  return eta * d.dot(llt.solve(d));
}

double conjugate_joint_value(const DistanceSpec& phi, const Eigen::VectorXd& lambda) {
  switch (phi.kind) {
    case DistanceKind::MeanNorm: {
      const double n = model::vector_norm(lambda, model::dual_exponent(phi.p));
      return n <= phi.weight * (1.0 + 1e-12) + 1e-12 ? 0.0 : kInf;
    }
    case DistanceKind::MeanMahalanobis:
      return lambda.dot(require(phi.anchor, "mean_mahalanobis") * lambda) / (2.0 * phi.weight);
    default:
      throw std::invalid_argument("distance '" + std::string(model::distance_tag(phi.kind)) +
                                  "' has no joint conjugate on mean arguments");
  }
}

double conjugate_joint_value(const DistanceSpec& psi, const Eigen::MatrixXd& Y) {
  const int k = static_cast<int>(Y.rows());
  const Eigen::MatrixXd Ys = 0.5 * (Y + Y.transpose());
  switch (psi.kind) {
    case DistanceKind::CovFrobeniusSq: return Ys.squaredNorm() / (4.0 * psi.weight);
    case DistanceKind::CovGeneralQuad: {
      // Maximizer solves P1 D P2 + P2 D P1 = Y; value tr(Y D) / 2.
      const Eigen::MatrixXd M = kron(psi.P2, psi.P1) + kron(psi.P1, psi.P2);
      const Eigen::VectorXd dv = M.ldlt().solve(model::full_vec(Ys));
      const Eigen::MatrixXd D = Eigen::Map<const Eigen::MatrixXd>(dv.data(), k, k);
      return 0.5 * (Ys * D).trace();
    }
    case DistanceKind::CovLogDet: {
      const double beta = psi.weight;
      const double nl = neg_logdet(-Ys);
      if (!std::isfinite(nl)) return kInf;
      return beta * nl + beta * (std::log(beta) - 1.0) * k - Ys.trace();
    }
    default:
      throw std::invalid_argument("distance '" + std::string(model::distance_tag(psi.kind)) +
                                  "' has no joint conjugate on covariance arguments");
  }
}

double conjugate_single_value(const DistanceSpec& phi, const Eigen::VectorXd& v, const Eigen::VectorXd& mu0) {
  switch (phi.kind) {
    case DistanceKind::MeanNorm:
    case DistanceKind::MeanMahalanobis: return mu0.dot(v) + conjugate_joint_value(phi, v);
    case DistanceKind::MeanEntropy: {
      const Eigen::VectorXd& a = phi.anchor_mean.size() ? phi.anchor_mean : mu0;
      return (a.array() * (v.array() - 1.0).exp()).sum();
    }
    default:
      throw std::invalid_argument("distance '" + std::string(model::distance_tag(phi.kind)) +
                                  "' has no single-argument conjugate on mean arguments");
  }
}

double conjugate_single_value(const DistanceSpec& psi, const Eigen::MatrixXd& V, const Eigen::MatrixXd& sigma0) {
  const Eigen::MatrixXd Vs = 0.5 * (V + V.transpose());
  switch (psi.kind) {
    case DistanceKind::CovFrobeniusSq:
    case DistanceKind::CovGeneralQuad:
    case DistanceKind::CovLogDet: return (Vs * sigma0).trace() + conjugate_joint_value(psi, Vs);
    case DistanceKind::CovPsdGauge: {
      const Eigen::MatrixXd& a = psi.anchor.size() ? psi.anchor : sigma0;
      const Eigen::MatrixXd slack = psi.weight * spd_inverse(a) - Vs;
      const double scale = 1.0 + slack.cwiseAbs().maxCoeff();
      return model::min_eigenvalue(slack) >= -1e-9 * scale ? psi.weight * static_cast<double>(V.rows()) : kInf;
    }
    default:
      throw std::invalid_argument("distance '" + std::string(model::distance_tag(psi.kind)) +
                                  "' has no single-argument conjugate on covariance arguments");
  }
}

double min_distance(const DistanceSpec& phi, const Eigen::VectorXd& mu, const SetSpec& U2,
                    const Eigen::VectorXd& mu0, const Eigen::MatrixXd& A) {
  const int k = static_cast<int>(mu.size());
  if (origin_only(U2)) return distance_value(phi, mu, mu0);
  if (!phi.two_argument())
    throw std::invalid_argument("min_distance: single-argument distance needs a singleton target set");
  const Eigen::VectorXd r = mu - mu0;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
  Eigen::VectorXd start = Eigen::VectorXd::Zero(k);
  if (lu.isInvertible()) {
    start = lu.solve(r);
    if (model::contains(U2, start, 1e-12)) return 0.0;
  }
  switch (phi.kind) {
    case DistanceKind::MeanNorm: {
      const double a = A(0, 0);
      const bool scaled_identity = a > 0.0 && (A - a * Eigen::MatrixXd::Identity(k, k)).norm() <= 1e-14 * a;
      if (phi.p == 2.0 && scaled_identity) {
        const Eigen::VectorXd z = r / a;
        return phi.weight * a * (z - project(U2, z)).norm();
      }
      if (scaled_identity && U2.kind == SetKind::NormBall && U2.p == phi.p)
        return phi.weight * a * std::max(model::vector_norm(r / a, phi.p) - U2.radius, 0.0);
      ConicFragment f = membership_fragment(U2, "zeta", k, false);
      f.declare("t", 1);
      const VecExpr resid = conic::constant_vec(r) - conic::mat_mul(A, conic::vec_var("zeta", k));
      norm_rows(f, resid, LinExpr::var("t"), phi.p, "dist");
      return phi.weight * -solve_max(f, -LinExpr::var("t"));
    }
    case DistanceKind::MeanMahalanobis: {
      const Eigen::MatrixXd W = spd_inverse(require(phi.anchor, "mean_mahalanobis"));
      const double beta = phi.weight;
      auto f = [&](const Eigen::VectorXd& z) {
        const Eigen::VectorXd d = r - A * z;
        return 0.5 * beta * d.dot(W * d);
      };
      auto grad = [&](const Eigen::VectorXd& z) { return Eigen::VectorXd(-beta * A.transpose() * W * (r - A * z)); };
      auto proj = [&](const Eigen::VectorXd& z) { return project(U2, z); };
      return projected_gradient<Eigen::VectorXd>(start, f, grad, proj,
                                                 beta * max_eigenvalue(A.transpose() * W * A));
    }
    default:
      throw std::invalid_argument("distance '" + std::string(model::distance_tag(phi.kind)) +
                                  "' is not a mean distance");
  }
}

double min_distance(const DistanceSpec& psi, const Eigen::MatrixXd& sigma, const SetSpec& Z2,
                    const Eigen::MatrixXd& sigma0) {
  const int k = static_cast<int>(sigma.rows());
  if (origin_only(Z2)) return distance_value(psi, sigma, sigma0);
  if (!psi.two_argument())
    throw std::invalid_argument("min_distance: single-argument distance needs a singleton target set");
  const Eigen::MatrixXd R = 0.5 * ((sigma - sigma0) + (sigma - sigma0).transpose());
  if (model::contains(Z2, R, 1e-12)) return 0.0;
  auto proj = [&](const Eigen::MatrixXd& x) { return project(Z2, x); };
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(k, k);
  switch (psi.kind) {
    case DistanceKind::CovFrobeniusSq: return psi.weight * (R - project(Z2, R)).squaredNorm();
    case DistanceKind::CovGeneralQuad: {
      auto f = [&](const Eigen::MatrixXd& x) {
        const Eigen::MatrixXd d = R - x;
        return (d * psi.P1 * d * psi.P2).trace();
      };
      auto grad = [&](const Eigen::MatrixXd& x) {
        const Eigen::MatrixXd d = R - x;
        return Eigen::MatrixXd(-(psi.P1 * d * psi.P2 + psi.P2 * d * psi.P1));
      };
      return projected_gradient<Eigen::MatrixXd>(R, f, grad, proj,
                                                 2.0 * max_eigenvalue(psi.P1) * max_eigenvalue(psi.P2));
    }
    case DistanceKind::CovLogDet: {
      const double beta = psi.weight;
      auto f = [&](const Eigen::MatrixXd& x) { return beta * neg_logdet(R - x + I); };
      auto grad = [&](const Eigen::MatrixXd& x) { return Eigen::MatrixXd(beta * spd_inverse(R - x + I)); };
      Eigen::MatrixXd start = project(Z2, R);
      if (!std::isfinite(f(start))) start = Eigen::MatrixXd::Zero(k, k);
      return projected_gradient<Eigen::MatrixXd>(start, f, grad, proj, beta);
    }
    default:
      throw std::invalid_argument("distance '" + std::string(model::distance_tag(psi.kind)) +
                                  "' is not a covariance distance");
  }
}

}  // namespace gdro::convex
