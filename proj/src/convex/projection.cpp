#include "gdro/convex/projection.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

namespace gdro::convex {

using model::SetKind;
using model::SetSpec;

namespace {

constexpr double kDykstraTol = 1e-13;
constexpr int kDykstraMaxIter = 100000;

/// Projection onto the l1 ball (Duchi et al. sort-based threshold).
Eigen::VectorXd project_l1(const Eigen::VectorXd& z, double radius) {
  if (z.lpNorm<1>() <= radius) return z;
  if (radius <= 0.0) return Eigen::VectorXd::Zero(z.size());
  std::vector<double> u(z.size());
  for (int i = 0; i < z.size(); ++i) u[i] = std::abs(z(i));
  std::sort(u.begin(), u.end(), std::greater<>());
  double cum = 0.0, theta = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    cum += u[j];
    const double t = (cum - radius) / static_cast<double>(j + 1);
    if (u[j] - t > 0.0) theta = t;
  }
  Eigen::VectorXd out(z.size());
  for (int i = 0; i < z.size(); ++i) out(i) = std::copysign(std::max(std::abs(z(i)) - theta, 0.0), z(i));
  return out;
}

template <class T>
using Projector = std::function<T(const T&)>;

/// Dykstra's alternating projections onto an intersection.
template <class T>
T dykstra(const T& start, const std::vector<Projector<T>>& projs) {
  if (projs.size() == 1) return projs[0](start);
  T x = start;
  std::vector<T> incr(projs.size(), T::Zero(start.rows(), start.cols()));
  for (int it = 0; it < kDykstraMaxIter; ++it) {
    double change = 0.0;
    for (std::size_t j = 0; j < projs.size(); ++j) {
      const T y = x + incr[j];
      const T next = projs[j](y);
      const T inc = y - next;
      change += (next - x).squaredNorm() + (inc - incr[j]).squaredNorm();
      x = next;
      incr[j] = inc;
    }
    if (std::sqrt(change) <= kDykstraTol * (1.0 + start.norm())) return x;
  }
  return x;
}

Eigen::MatrixXd spectral_map(const Eigen::MatrixXd& x, const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (x + x.transpose()));
  return es.eigenvectors() * f(es.eigenvalues()).asDiagonal() * es.eigenvectors().transpose();
}

Eigen::MatrixXd project_schatten(const Eigen::MatrixXd& x, double p, double radius) {
  return spectral_map(x, [&](const Eigen::VectorXd& ev) { return project_norm_ball(ev, p, radius); });
}

Eigen::MatrixXd project_below(const Eigen::MatrixXd& x, const Eigen::MatrixXd& upper) {
  return upper - project_psd(upper - x);
}

}  // namespace

Eigen::VectorXd project_norm_ball(const Eigen::VectorXd& z, double p, double radius) {
  if (p == 2.0) {
    const double n = z.norm();
    return n <= radius ? z : Eigen::VectorXd(z * (radius / n));
  }
  if (std::isinf(p)) return z.cwiseMax(-radius).cwiseMin(radius);
  if (p == 1.0) return project_l1(z, radius);
  throw std::invalid_argument("norm exponent must be 1, 2 or inf");
}

Eigen::MatrixXd project_psd(const Eigen::MatrixXd& x) {
  return spectral_map(x, [](const Eigen::VectorXd& ev) { return Eigen::VectorXd(ev.cwiseMax(0.0)); });
}

Eigen::MatrixXd project_trace_ellipsoid(const Eigen::MatrixXd& x, const Eigen::MatrixXd& D, double tau) {
  const Eigen::MatrixXd xs = 0.5 * (x + x.transpose());
  if ((xs * D * xs).trace() <= tau) return xs;
  if (tau <= 0.0) return Eigen::MatrixXd::Zero(x.rows(), x.cols());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(D);
  const Eigen::MatrixXd& Q = es.eigenvectors();
  const Eigen::VectorXd& lam = es.eigenvalues();
  const Eigen::MatrixXd xt = Q.transpose() * xs * Q;
  const int k = static_cast<int>(x.rows());
  // Stationarity X + (g/2)(DX + XD) = X0 decouples entrywise in the eigenbasis of D.
  auto solve = [&](double g) {
    Eigen::MatrixXd y(k, k);
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j) y(i, j) = xt(i, j) / (1.0 + 0.5 * g * (lam(i) + lam(j)));
    return y;
  };
  auto excess = [&](double g) {
    const Eigen::MatrixXd y = solve(g);
    return (y * lam.asDiagonal() * y).trace() - tau;
  };
  double lo = 0.0, hi = 1.0;
  while (excess(hi) > 0.0) hi *= 2.0;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (excess(mid) > 0.0 ? lo : hi) = mid;
  }
  return Q * solve(hi) * Q.transpose();
}

Eigen::VectorXd project(const SetSpec& S, const Eigen::VectorXd& z) {
  switch (S.kind) {
    case SetKind::Singleton: return Eigen::VectorXd::Zero(z.size());
    case SetKind::NormBall: return project_norm_ball(z, S.p, S.radius);
    case SetKind::NormIntersection: {
      std::vector<Projector<Eigen::VectorXd>> projs;
      for (const auto& t : S.terms)
        projs.push_back([t](const Eigen::VectorXd& v) { return project_norm_ball(v, t.p, t.radius); });
      return dykstra<Eigen::VectorXd>(z, projs);
    }
    case SetKind::Polyhedron: {
      if (S.C.rows() == 0) return z;
      std::vector<Projector<Eigen::VectorXd>> projs;
      for (int l = 0; l < S.C.rows(); ++l) {
        const Eigen::VectorXd a = S.C.row(l).transpose();
        const double b = S.c(l), aa = a.squaredNorm();
        projs.push_back([a, b, aa](const Eigen::VectorXd& v) {
          const double viol = a.dot(v) - b;
          return viol <= 0.0 || aa == 0.0 ? v : Eigen::VectorXd(v - (viol / aa) * a);
        });
      }
      return dykstra<Eigen::VectorXd>(z, projs);
    }
    default: throw std::invalid_argument("set '" + std::string(model::set_tag(S.kind)) + "' is not a vector set");
  }
}

Eigen::MatrixXd project(const SetSpec& S, const Eigen::MatrixXd& x) {
  const Eigen::MatrixXd xs = 0.5 * (x + x.transpose());
  const int k = static_cast<int>(x.rows());
  switch (S.kind) {
    case SetKind::Singleton: return Eigen::MatrixXd::Zero(k, k);
    case SetKind::FrobeniusBall: {
      const double n = xs.norm();
      return n <= S.radius ? xs : Eigen::MatrixXd(xs * (S.radius / n));
    }
    case SetKind::SchattenBall: return project_schatten(xs, S.p, S.radius);
    case SetKind::SpectralNormBound: return project_schatten(xs, model::kInf, S.radius);
    case SetKind::NormIntersection: {
      std::vector<Projector<Eigen::MatrixXd>> projs;
      for (const auto& t : S.terms)
        projs.push_back([t](const Eigen::MatrixXd& m) { return project_schatten(m, t.p, t.radius); });
      return dykstra<Eigen::MatrixXd>(xs, projs);
    }
    case SetKind::VecLifted: {
      const Eigen::VectorXd v = project_norm_ball(model::full_vec(xs), S.p, S.radius);
      return Eigen::Map<const Eigen::MatrixXd>(v.data(), k, k);
    }
    case SetKind::PsdInterval:
    case SetKind::PsdIntervalTrace: {
      const Eigen::MatrixXd upper = S.theta * S.Xi0;
      std::vector<Projector<Eigen::MatrixXd>> projs{
          [](const Eigen::MatrixXd& m) { return project_psd(m); },
          [upper](const Eigen::MatrixXd& m) { return project_below(m, upper); }};
      if (S.kind == SetKind::PsdIntervalTrace)
        projs.push_back([&S](const Eigen::MatrixXd& m) { return project_trace_ellipsoid(m, S.D, S.tau); });
      return dykstra<Eigen::MatrixXd>(xs, projs);
    }
    default: throw std::invalid_argument("set '" + std::string(model::set_tag(S.kind)) + "' is not a matrix set");
  }
}

}  // namespace gdro::convex
