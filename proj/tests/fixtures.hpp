#pragma once

#include "gdro/model/scenario.hpp"
#include "gdro/oracle/moment.hpp"

#include <Eigen/Dense>

#include <array>
#include <random>
#include <vector>

namespace fixtures {

using gdro::model::DistanceSpec;
using gdro::model::Scenario;
using gdro::model::SetSpec;
using gdro::model::Variant;

class Rng {
 public:
  explicit Rng(unsigned long long seed) : gen_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(gen_); }
  double normal() { return std::normal_distribution<double>()(gen_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(gen_); }

  Eigen::VectorXd vec(int k, double lo, double hi) {
    Eigen::VectorXd v(k);
    for (int i = 0; i < k; ++i) v(i) = uniform(lo, hi);
    return v;
  }

  Eigen::VectorXd gauss(int k) {
    Eigen::VectorXd v(k);
    for (int i = 0; i < k; ++i) v(i) = normal();
    return v;
  }

  Eigen::MatrixXd sym(int k) {
    Eigen::MatrixXd g(k, k);
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j) g(i, j) = normal();
    return 0.5 * (g + g.transpose());
  }

  /// Symmetric positive definite with eigenvalues in [lo, hi].
  Eigen::MatrixXd spd(int k, double lo, double hi) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(sym(k) + 0.1 * Eigen::MatrixXd::Identity(k, k));
    const Eigen::MatrixXd q = qr.householderQ();
    return q * vec(k, lo, hi).asDiagonal() * q.transpose();
  }

  std::mt19937_64& engine() { return gen_; }

 private:
  std::mt19937_64 gen_;
};

/// Decision d in [-1, 1]^k, w(d) = d, random linear cost and m pieces with
/// a_i(0) < 0 so that d = 0 is strictly feasible.
inline Scenario base_scenario(Rng& rng, int k, int m) {
  Scenario s;
  s.n = k;
  s.k = k;
  s.cost = rng.vec(k, -1.0, 1.0);
  for (int i = 0; i < m; ++i) {
    gdro::model::Piece p;
    p.a.coeffs = rng.vec(k, -0.5, 0.5);
    p.a.constant = rng.uniform(-1.0, -0.3);
    p.b = i == 0 ? 1.0 : rng.uniform(-1.5, 1.5);
    s.constraint.pieces.push_back(p);
  }
  s.constraint.w.matrix = Eigen::MatrixXd::Identity(k, k);
  s.constraint.w.offset = Eigen::VectorXd::Zero(k);
  s.moments.mu0 = rng.vec(k, -0.5, 0.5);
  s.moments.sigma0 = rng.spd(k, 0.2, 1.0);
  s.decision.G.resize(2 * k, k);
  s.decision.G << Eigen::MatrixXd::Identity(k, k), -Eigen::MatrixXd::Identity(k, k);
  s.decision.g = Eigen::VectorXd::Ones(2 * k);
  s.decision.E.resize(0, k);
  s.decision.e.resize(0);
  return s;
}

/// Tag combinations of the worked examples:
/// 0: l1 mean balls, vec-lifted l2 covariance balls, l1 mean norm, squared Frobenius;
/// 1: lp mean balls, PSD intervals (inner with trace ellipsoid), Mahalanobis, general quadratic;
/// 2: l2 / l2-and-l1 mean sets, Frobenius / Frobenius-and-nuclear covariance sets, l2 mean norm, log-det.
inline Scenario random_c1(Rng& rng, int k, int m, int combo) {
  Scenario s = base_scenario(rng, k, m);
  s.variant = Variant::C1;
  const double r1 = rng.uniform(0.3, 0.8), r2 = r1 * rng.uniform(0.2, 0.8);
  switch (combo % 3) {
    case 0:
      s.moments.U1 = SetSpec::norm_ball(1.0, r1);
      s.moments.U2 = SetSpec::norm_ball(1.0, r2);
      s.moments.Z1 = SetSpec::vec_lifted(2.0, r1);
      s.moments.Z2 = SetSpec::vec_lifted(2.0, r2);
      s.distance.phi = DistanceSpec::mean_norm(1.0, rng.uniform(0.5, 3.0));
      s.distance.psi = DistanceSpec::cov_frobenius_sq(0.5 * rng.uniform(0.5, 5.0));
      break;
    case 1: {
      const double p = std::array<double, 3>{1.0, 2.0, gdro::model::kInf}[rng.integer(0, 2)];
      s.moments.U1 = SetSpec::norm_ball(p, r1);
      s.moments.U2 = SetSpec::norm_ball(p, r2);
      const Eigen::MatrixXd xi0 = rng.spd(k, 0.1, 0.5);
      const double t1 = rng.uniform(0.3, 1.0), t2 = t1 * rng.uniform(0.2, 0.8);
      s.moments.Z1 = SetSpec::psd_interval(t1, xi0);
      s.moments.Z2 = SetSpec::psd_interval_trace(t2, xi0, rng.spd(k, 0.5, 2.0), rng.uniform(0.01, 0.1));
      s.distance.phi = DistanceSpec::mean_mahalanobis(rng.uniform(0.5, 3.0));
      s.distance.psi = DistanceSpec::cov_general_quad(rng.spd(k, 0.5, 2.0), rng.spd(k, 0.5, 2.0));
      break;
    }
    default:
      s.moments.U1 = SetSpec::norm_ball(2.0, r1);
      s.moments.U2 = SetSpec::norm_intersection({{2.0, r2}, {1.0, 1.2 * r2}});
      s.moments.Z1 = SetSpec::frobenius_ball(r1);
      s.moments.Z2 = SetSpec::norm_intersection({{2.0, r2}, {1.0, 1.2 * r2}});
      s.distance.phi = DistanceSpec::mean_norm(2.0, rng.uniform(0.5, 3.0));
      s.distance.psi = DistanceSpec::cov_logdet(rng.uniform(0.02, 0.1));
      break;
  }
  return s;
}

inline Scenario random_linear(Rng& rng, int k) {
  Scenario s = base_scenario(rng, k, 1);
  s.variant = Variant::LinearC1;
  const double r1 = rng.uniform(0.3, 0.8), r2 = r1 * rng.uniform(0.2, 0.8);
  s.moments.U1 = SetSpec::norm_ball(1.0, r1);
  s.moments.U2 = SetSpec::norm_ball(1.0, r2);
  s.moments.Z1 = SetSpec::frobenius_ball(0.5);
  s.moments.Z2 = SetSpec::frobenius_ball(0.2);
  s.distance.phi = DistanceSpec::mean_norm(1.0, rng.uniform(0.2, 2.0));
  return s;
}

/// Singleton inner sets; combo 0: entropy mean and PSD-gauge covariance
/// penalties, combo 1: Mahalanobis and squared Frobenius.
inline Scenario random_c1_singleton(Rng& rng, int k, int m, int combo) {
  Scenario s = base_scenario(rng, k, m);
  s.variant = Variant::C1Singleton;
  s.moments.U1 = SetSpec::norm_ball(2.0, rng.uniform(0.2, 0.6));
  s.moments.U2 = SetSpec::singleton();
  s.moments.Z1 = SetSpec::psd_interval(rng.uniform(0.2, 0.8), s.moments.sigma0);
  s.moments.Z2 = SetSpec::singleton();
  if (combo % 2 == 0) {
    s.moments.mu0 = rng.vec(k, 0.5, 1.5);
    s.distance.phi = DistanceSpec::mean_entropy();
    s.distance.psi = DistanceSpec::cov_psd_gauge(rng.uniform(0.5, 3.0));
  } else {
    s.distance.phi = DistanceSpec::mean_mahalanobis(rng.uniform(0.5, 3.0));
    s.distance.psi = DistanceSpec::cov_frobenius_sq(rng.uniform(0.5, 3.0));
  }
  return s;
}

inline Scenario random_c2(Rng& rng, int k, int m) {
  Scenario s = base_scenario(rng, k, m);
  s.variant = Variant::C2;
  s.moments.U1 = SetSpec::norm_ball(2.0, rng.uniform(0.3, 0.8));
  s.moments.U2 = SetSpec::singleton();
  s.moments.Z1 = SetSpec::schatten_ball(2.0, rng.uniform(0.1, 0.4));
  s.moments.Z2 = SetSpec::singleton();
  s.distance.phi = DistanceSpec::c2_mahalanobis(rng.uniform(0.1, 2.0));
  return s;
}

/// Affine g(xi, d) = a(d) + d^T xi over a box support containing the mean set.
inline Scenario random_c3(Rng& rng, int k, bool singleton = false) {
  Scenario s = base_scenario(rng, k, 1);
  s.variant = singleton ? Variant::C3Singleton : Variant::C3;
  const double r1 = rng.uniform(0.3, 0.8), r2 = r1 * rng.uniform(0.2, 0.8);
  s.moments.U1 = SetSpec::norm_ball(2.0, r1);
  s.moments.U2 = singleton ? SetSpec::singleton() : SetSpec::norm_ball(2.0, r2);
  s.moments.Z1 = SetSpec::singleton();
  s.moments.Z2 = SetSpec::singleton();
  Eigen::MatrixXd C(2 * k, k);
  C << Eigen::MatrixXd::Identity(k, k), -Eigen::MatrixXd::Identity(k, k);
  Eigen::VectorXd c(2 * k);
  c << Eigen::VectorXd::Constant(k, 3.0) + s.moments.mu0, Eigen::VectorXd::Constant(k, 3.0) - s.moments.mu0;
  s.support = SetSpec::polyhedron(C, c);
  s.distance.phi = DistanceSpec::mean_norm(2.0, rng.uniform(0.5, 3.0));
  return s;
}

/// m pieces a + b y with a, b uniform on [-2, 2].
inline std::vector<gdro::oracle::MomentPiece> random_pieces(Rng& rng, int m) {
  std::vector<gdro::oracle::MomentPiece> p;
  for (int i = 0; i < m; ++i) p.push_back({rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0)});
  return p;
}

}  // namespace fixtures
