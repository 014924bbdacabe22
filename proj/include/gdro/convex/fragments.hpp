#pragma once

#include "gdro/conic/expr.hpp"
#include "gdro/conic/program.hpp"
#include "gdro/model/sets.hpp"

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace gdro::convex {

class UnsupportedTag : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Every fragment declares its auxiliary variables under `prefix`, so two
/// fragments built with different prefixes never share auxiliaries.

/// delta*(arg | S) for a vector set S.
conic::ConicFragment support_epigraph(const model::SetSpec& S, const conic::VecExpr& arg, const std::string& prefix);
/// delta*(arg | S) = sup_{X in S} tr(arg X) for a matrix set S and symmetric arg.
conic::ConicFragment support_epigraph(const model::SetSpec& S, const conic::SymMatExpr& arg,
                                      const std::string& prefix);

/// phi*(lambda; -lambda) for a two-argument mean distance.
conic::ConicFragment conjugate_joint_epigraph(const model::DistanceSpec& phi, const conic::VecExpr& dual,
                                              const std::string& prefix);
/// psi*(Y; -Y) for a two-argument covariance distance.
conic::ConicFragment conjugate_joint_epigraph(const model::DistanceSpec& psi, const conic::SymMatExpr& dual,
                                              const std::string& prefix);

/// Conjugate of mu -> phi(mu, mu0) at `dual`.
conic::ConicFragment conjugate_single_epigraph(const model::DistanceSpec& phi, const conic::VecExpr& dual,
                                               const Eigen::VectorXd& mu0, const std::string& prefix);
/// Conjugate of Sigma -> psi(Sigma, Sigma0) at `dual`.
conic::ConicFragment conjugate_single_epigraph(const model::DistanceSpec& psi, const conic::SymMatExpr& dual,
                                               const Eigen::MatrixXd& sigma0, const std::string& prefix);

/// t >= ||arg||_q as conic constraints added to `f`; returns t.
conic::LinExpr norm_epigraph(conic::ConicFragment& f, const conic::VecExpr& arg, double q, const std::string& prefix);

/// Matrix K with tr(X P1 X P2) = svec(X)^T K svec(X) for symmetric X.
Eigen::MatrixXd quad_form_svec(const Eigen::MatrixXd& P1, const Eigen::MatrixXd& P2);

}  // namespace gdro::convex
