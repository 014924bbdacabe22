#include "gdro/conic/cones.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>

namespace gdro::conic {

namespace {

constexpr double kSqrt2 = 1.41421356237309504880;

double soc_distance(double t, const Eigen::VectorXd& u) {
  const double nu = u.norm();
  if (nu <= t) return 0.0;
  if (nu <= -t) return std::hypot(t, nu);
  const double a = 0.5 * (t + nu);
  return std::hypot(t - a, nu - a);
}

/// Distance from s to the ray through u (u != 0).
double ray_distance_sq(const Eigen::Vector3d& s, const Eigen::Vector3d& u) {
  const double proj = std::max(0.0, s.dot(u)) / u.squaredNorm();
  return (s - proj * u).squaredNorm();
}

double exp_ray_distance_sq(const Eigen::Vector3d& s, double rho) {
  return ray_distance_sq(s, Eigen::Vector3d(rho, 1.0, std::exp(rho)));
}

bool exp_member(const Eigen::Vector3d& s) {
  const double x = s(0), y = s(1), z = s(2);
  if (y > 0.0) return z > 0.0 && y * std::log(z / y) >= x;
  return y == 0.0 && x <= 0.0 && z >= 0.0;
}

double exp_distance(const Eigen::Vector3d& s) {
  if (exp_member(s)) return 0.0;
  // Face {(x, 0, z): x <= 0, z >= 0} and the apex.
  const Eigen::Vector3d face(std::min(s(0), 0.0), 0.0, std::max(s(2), 0.0));
  double best = (s - face).squaredNorm();
  best = std::min(best, s.squaredNorm());
  // Remaining boundary: rays r*(rho, 1, e^rho). Coarse scan then golden section.
  constexpr int kScan = 801;
  constexpr double kLo = -40.0, kHi = 40.0;
  const double step = (kHi - kLo) / (kScan - 1);
  int arg = 0;
  double scan_best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < kScan; ++i) {
    const double d = exp_ray_distance_sq(s, kLo + i * step);
    if (d < scan_best) {
      scan_best = d;
      arg = i;
    }
  }
  double a = kLo + std::max(arg - 1, 0) * step;
  double b = kLo + std::min(arg + 1, kScan - 1) * step;
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = exp_ray_distance_sq(s, c), fd = exp_ray_distance_sq(s, d);
  for (int it = 0; it < 200 && b - a > 1e-14; ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = exp_ray_distance_sq(s, c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = exp_ray_distance_sq(s, d);
    }
  }
  best = std::min({best, scan_best, fc, fd});
  return std::sqrt(best);
}

}  // namespace

Eigen::VectorXd svec(const Eigen::MatrixXd& m) {
  const int n = static_cast<int>(m.rows());
  Eigen::VectorXd v(tri_size(n));
  int idx = 0;
  for (int j = 0; j < n; ++j)
    for (int i = j; i < n; ++i) v(idx++) = i == j ? m(i, i) : kSqrt2 * 0.5 * (m(i, j) + m(j, i));
  return v;
}

Eigen::MatrixXd smat(const Eigen::VectorXd& v, int order) {
  Eigen::MatrixXd m(order, order);
  int idx = 0;
  for (int j = 0; j < order; ++j)
    for (int i = j; i < order; ++i) {
      const double val = i == j ? v(idx) : v(idx) / kSqrt2;
      m(i, j) = val;
      m(j, i) = val;
      ++idx;
    }
  return m;
}

bool cone_interior(const Cone& cone, const Eigen::VectorXd& s) {
  switch (cone.kind) {
    case ConeKind::Zero: return false;
    case ConeKind::NonNegative: return (s.array() > 0.0).all();
    case ConeKind::SecondOrder: return s(0) > 0.0 && s(0) * s(0) - s.tail(s.size() - 1).squaredNorm() > 0.0;
    case ConeKind::RotatedSecondOrder:
      return s(0) > 0.0 && s(1) > 0.0 && 2.0 * s(0) * s(1) - s.tail(s.size() - 2).squaredNorm() > 0.0;
    case ConeKind::Psd: {
      Eigen::LLT<Eigen::MatrixXd> llt(smat(s, cone.order));
      if (llt.info() != Eigen::Success) return false;
      return (llt.matrixLLT().diagonal().array() > 0.0).all();
    }
    case ConeKind::Exponential:
      return s(1) > 0.0 && s(2) > 0.0 && s(1) * std::log(s(2) / s(1)) - s(0) > 0.0;
  }
  return false;
}

double barrier_degree(const Cone& cone) {
  switch (cone.kind) {
    case ConeKind::Zero: return 0.0;
    case ConeKind::NonNegative: return cone.dim;
    case ConeKind::SecondOrder:
    case ConeKind::RotatedSecondOrder: return 2.0;
    case ConeKind::Psd: return cone.order;
    case ConeKind::Exponential: return 3.0;
  }
  return 0.0;
}

Eigen::VectorXd cone_unit(const Cone& cone) {
  Eigen::VectorXd e = Eigen::VectorXd::Zero(cone.dim);
  switch (cone.kind) {
    case ConeKind::Zero: break;
    case ConeKind::NonNegative: e.setOnes(); break;
    case ConeKind::SecondOrder: e(0) = 1.0; break;
    case ConeKind::RotatedSecondOrder:
      e(0) = 1.0;
      e(1) = 1.0;
      break;
    case ConeKind::Psd: e = svec(Eigen::MatrixXd::Identity(cone.order, cone.order)); break;
    case ConeKind::Exponential: e << -1.0, 1.0, 1.0; break;
  }
  return e;
}

double barrier_value(const Cone& cone, const Eigen::VectorXd& s) {
  switch (cone.kind) {
    case ConeKind::Zero: return 0.0;
    case ConeKind::NonNegative: return -s.array().log().sum();
    case ConeKind::SecondOrder: return -std::log(s(0) * s(0) - s.tail(s.size() - 1).squaredNorm());
    case ConeKind::RotatedSecondOrder: return -std::log(2.0 * s(0) * s(1) - s.tail(s.size() - 2).squaredNorm());
    case ConeKind::Psd: {
      Eigen::LLT<Eigen::MatrixXd> llt(smat(s, cone.order));
      return -2.0 * llt.matrixLLT().diagonal().array().log().sum();
    }
    case ConeKind::Exponential: {
      const double x = s(0), y = s(1), z = s(2);
      return -std::log(y * std::log(z / y) - x) - std::log(y) - std::log(z);
    }
  }
  return 0.0;
}

void barrier_derivatives(const Cone& cone, const Eigen::VectorXd& s, Eigen::VectorXd& grad,
                         Eigen::MatrixXd& hess) {
  const int d = cone.dim;
  grad.resize(d);
  hess.setZero(d, d);
  switch (cone.kind) {
    case ConeKind::Zero: grad.setZero(); break;
    case ConeKind::NonNegative:
      grad = -s.cwiseInverse();
      hess.diagonal() = s.cwiseInverse().cwiseAbs2();
      break;
    case ConeKind::SecondOrder: {
      Eigen::VectorXd js = -s;
      js(0) = s(0);
      const double q = s(0) * s(0) - s.tail(d - 1).squaredNorm();
      grad = -2.0 / q * js;
      hess = 4.0 / (q * q) * js * js.transpose();
      hess(0, 0) -= 2.0 / q;
      for (int i = 1; i < d; ++i) hess(i, i) += 2.0 / q;
      break;
    }
    case ConeKind::RotatedSecondOrder: {
      const double q = 2.0 * s(0) * s(1) - s.tail(d - 2).squaredNorm();
      Eigen::VectorXd dq(d);
      dq(0) = 2.0 * s(1);
      dq(1) = 2.0 * s(0);
      dq.tail(d - 2) = -2.0 * s.tail(d - 2);
      grad = -dq / q;
      hess = dq * dq.transpose() / (q * q);
      hess(0, 1) -= 2.0 / q;
      hess(1, 0) -= 2.0 / q;
      for (int i = 2; i < d; ++i) hess(i, i) += 2.0 / q;
      break;
    }
    case ConeKind::Psd: {
      const int n = cone.order;
      const Eigen::MatrixXd sinv = smat(s, n).llt().solve(Eigen::MatrixXd::Identity(n, n));
      grad = -svec(sinv);
      Eigen::VectorXd ea = Eigen::VectorXd::Zero(d);
      for (int a = 0; a < d; ++a) {
        ea.setZero();
        ea(a) = 1.0;
        hess.col(a) = svec(sinv * smat(ea, n) * sinv);
      }
      break;
    }
    case ConeKind::Exponential: {
      const double x = s(0), y = s(1), z = s(2);
      const double psi = y * std::log(z / y) - x;
      const Eigen::Vector3d dpsi(-1.0, std::log(z / y) - 1.0, y / z);
      Eigen::Matrix3d d2psi = Eigen::Matrix3d::Zero();
      d2psi(1, 1) = -1.0 / y;
      d2psi(1, 2) = d2psi(2, 1) = 1.0 / z;
      d2psi(2, 2) = -y / (z * z);
      grad = -dpsi / psi;
      grad(1) -= 1.0 / y;
      grad(2) -= 1.0 / z;
      hess = dpsi * dpsi.transpose() / (psi * psi) - d2psi / psi;
      hess(1, 1) += 1.0 / (y * y);
      hess(2, 2) += 1.0 / (z * z);
      break;
    }
  }
}

double cone_distance(const Cone& cone, const Eigen::VectorXd& s) {
  switch (cone.kind) {
    case ConeKind::Zero: return s.norm();
    case ConeKind::NonNegative: return s.cwiseMin(0.0).norm();
    case ConeKind::SecondOrder: return soc_distance(s(0), s.tail(s.size() - 1));
    case ConeKind::RotatedSecondOrder: {
      Eigen::VectorXd u(s.size() - 1);
      u(0) = (s(0) - s(1)) / kSqrt2;
      u.tail(s.size() - 2) = s.tail(s.size() - 2);
      return soc_distance((s(0) + s(1)) / kSqrt2, u);
    }
    case ConeKind::Psd: {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(smat(s, cone.order), Eigen::EigenvaluesOnly);
      return es.eigenvalues().cwiseMin(0.0).norm();
    }
    case ConeKind::Exponential: return exp_distance(Eigen::Vector3d(s(0), s(1), s(2)));
  }
  return 0.0;
}

}  // namespace gdro::conic
