#include "gdro/portfolio/portfolio.hpp"

#include <cmath>
#include <stdexcept>

namespace gdro::portfolio {

using model::DistanceSpec;
using model::SetSpec;

void validate_params(const PortfolioParams& p) {
  if (!(p.epsilon > 0.0 && p.epsilon < 1.0)) throw std::invalid_argument("epsilon must lie in (0, 1)");
  if (!(p.beta1 > 0.0) || !(p.beta2 > 0.0))
    throw std::invalid_argument("beta1 and beta2 must be positive (use drc for the robust reference)");
  if (!(p.rho2 >= 0.0 && p.rho1 >= p.rho2)) throw std::invalid_argument("require rho1 >= rho2 >= 0");
  if (!(p.tau2 >= 0.0 && p.tau1 >= p.tau2)) throw std::invalid_argument("require tau1 >= tau2 >= 0");
}

void set_param(PortfolioParams& p, const std::string& key, double value) {
  if (key == "epsilon") p.epsilon = value;
  else if (key == "beta1") p.beta1 = value;
  else if (key == "beta2") p.beta2 = value;
  else if (key == "rho1") p.rho1 = value;
  else if (key == "rho2") p.rho2 = value;
  else if (key == "tau1") p.tau1 = value;
  else if (key == "tau2") p.tau2 = value;
  else if (key == "drc") p.drc = value != 0.0;
  else throw std::invalid_argument("unknown portfolio parameter '" + key + "'");
}

double get_param(const PortfolioParams& p, const std::string& key) {
  if (key == "epsilon") return p.epsilon;
  if (key == "beta1") return p.beta1;
  if (key == "beta2") return p.beta2;
  if (key == "rho1") return p.rho1;
  if (key == "rho2") return p.rho2;
  if (key == "tau1") return p.tau1;
  if (key == "tau2") return p.tau2;
  if (key == "drc") return p.drc ? 1.0 : 0.0;
  throw std::invalid_argument("unknown portfolio parameter '" + key + "'");
}

Eigen::VectorXd asset_mean() { return Eigen::Vector3d(0.0409, 0.0854, 0.0702); }

Eigen::MatrixXd asset_covariance_raw() {
  Eigen::Matrix3d s;
  s << 0.0075, 0.0065, 0.0080,
       0.0065, 0.0149, 0.0089,
       0.0073, 0.0089, 0.0121;
  return s;
}

Eigen::MatrixXd asset_covariance() {
  const Eigen::MatrixXd s = asset_covariance_raw();
  return 0.5 * (s + s.transpose());
}

model::Scenario portfolio_scenario(const PortfolioParams& p) {
  validate_params(p);
  constexpr int n = 5, k = 3;
  model::Scenario s;
  s.n = n;
  s.k = k;
  s.variant = model::Variant::C1;
  s.objective_kind = model::ObjectiveKind::MinimizeEpigraph;
  s.cost = Eigen::VectorXd::Zero(n);
  s.cost(4) = 1.0;

  // max{beta - v, beta(1 - 1/eps) - v - x^T xi / eps}
  model::Piece flat;
  flat.a.coeffs = Eigen::VectorXd::Zero(n);
  flat.a.coeffs(3) = 1.0;
  flat.a.coeffs(4) = -1.0;
  flat.b = 0.0;
  model::Piece tail;
  tail.a.coeffs = Eigen::VectorXd::Zero(n);
  tail.a.coeffs(3) = 1.0 - 1.0 / p.epsilon;
  tail.a.coeffs(4) = -1.0;
  tail.b = -1.0 / p.epsilon;
  s.constraint.pieces = {flat, tail};
  s.constraint.w.matrix = Eigen::MatrixXd::Zero(k, n);
  s.constraint.w.matrix.leftCols(k).setIdentity();
  s.constraint.w.offset = Eigen::VectorXd::Zero(k);

  const Eigen::MatrixXd sigma0 = asset_covariance();
  s.moments.mu0 = asset_mean();
  s.moments.sigma0 = sigma0;
  s.moments.U1 = SetSpec::norm_ball(2.0, p.rho1);
  s.moments.Z1 = SetSpec::psd_interval(p.tau1, sigma0);
  s.moments.U2 = p.drc ? s.moments.U1 : SetSpec::norm_ball(2.0, p.rho2);
  s.moments.Z2 = p.drc ? s.moments.Z1 : SetSpec::psd_interval(p.tau2, sigma0);

  s.distance.phi = DistanceSpec::mean_mahalanobis(p.beta1, sigma0);
  s.distance.psi = DistanceSpec::cov_frobenius_sq(0.5 * p.beta2);

  s.decision.G = Eigen::MatrixXd::Zero(k, n);
  s.decision.G.leftCols(k) = -Eigen::MatrixXd::Identity(k, k);
  s.decision.g = Eigen::VectorXd::Zero(k);
  s.decision.E = Eigen::MatrixXd::Zero(1, n);
  s.decision.E.leftCols(k).setOnes();
  s.decision.e = Eigen::VectorXd::Ones(1);
  return s;
}

}  // namespace gdro::portfolio
