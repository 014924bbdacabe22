#pragma once

#include "gdro/conic/program.hpp"
#include "gdro/model/sets.hpp"

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace gdro::convex {

class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Primal membership constraints z in S over a declared variable `name`
/// (dimension k for vector sets, k(k+1)/2 raw entries for matrix sets).
conic::ConicFragment membership_fragment(const model::SetSpec& S, const std::string& name, int k, bool matrix);

/// sup_{z in S} y^T z. Closed form where one exists, otherwise the primal
/// maximization solved by the default backend. +inf when unbounded.
double support_value(const model::SetSpec& S, const Eigen::VectorXd& y);
/// sup_{X in S} tr(Y X).
double support_value(const model::SetSpec& S, const Eigen::MatrixXd& Y);

/// phi(mu, mu_prime). Single-argument tags use their own anchor when set and
/// mu_prime otherwise. +inf outside the domain.
double distance_value(const model::DistanceSpec& phi, const Eigen::VectorXd& mu, const Eigen::VectorXd& mu_prime);
double distance_value(const model::DistanceSpec& psi, const Eigen::MatrixXd& S, const Eigen::MatrixXd& S_prime);
/// eta (mu - mu0)^T Sigma^{-1} (mu - mu0); +inf if Sigma is not positive definite.
double c2_distance_value(double eta, const Eigen::VectorXd& mu, const Eigen::MatrixXd& sigma,
                         const Eigen::VectorXd& mu0);

/// Closed forms of phi*(lambda; -lambda) / psi*(Y; -Y). +inf outside the domain.
double conjugate_joint_value(const model::DistanceSpec& phi, const Eigen::VectorXd& lambda);
double conjugate_joint_value(const model::DistanceSpec& psi, const Eigen::MatrixXd& Y);
/// Conjugate of mu -> phi(mu, mu0) and Sigma -> psi(Sigma, Sigma0).
double conjugate_single_value(const model::DistanceSpec& phi, const Eigen::VectorXd& v, const Eigen::VectorXd& mu0);
double conjugate_single_value(const model::DistanceSpec& psi, const Eigen::MatrixXd& V, const Eigen::MatrixXd& sigma0);

/// min over zeta in U2 of phi(mu, mu0 + A zeta).
double min_distance(const model::DistanceSpec& phi, const Eigen::VectorXd& mu, const model::SetSpec& U2,
                    const Eigen::VectorXd& mu0, const Eigen::MatrixXd& A);
/// min over Xi in Z2 of psi(Sigma, Sigma0 + Xi).
double min_distance(const model::DistanceSpec& psi, const Eigen::MatrixXd& sigma, const model::SetSpec& Z2,
                    const Eigen::MatrixXd& sigma0);

}  // namespace gdro::convex
