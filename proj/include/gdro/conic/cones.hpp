#pragma once

#include "gdro/conic/program.hpp"

#include <Eigen/Dense>

namespace gdro::conic {

Eigen::VectorXd svec(const Eigen::MatrixXd& m);
Eigen::MatrixXd smat(const Eigen::VectorXd& v, int order);

/// Strict interior test (barrier domain).
bool cone_interior(const Cone& cone, const Eigen::VectorXd& s);
/// Barrier parameter nu of the standard logarithmic barrier.
double barrier_degree(const Cone& cone);
/// A fixed interior direction e: s + sigma*e is interior for large sigma.
Eigen::VectorXd cone_unit(const Cone& cone);

/// Standard log-barrier value; requires cone_interior(s).
double barrier_value(const Cone& cone, const Eigen::VectorXd& s);
void barrier_derivatives(const Cone& cone, const Eigen::VectorXd& s, Eigen::VectorXd& grad,
                         Eigen::MatrixXd& hess);

/// Euclidean distance from s to the (closed) cone.
double cone_distance(const Cone& cone, const Eigen::VectorXd& s);

}  // namespace gdro::conic
