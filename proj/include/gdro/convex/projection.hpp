#pragma once

#include "gdro/model/sets.hpp"

#include <Eigen/Dense>

namespace gdro::convex {

/// Euclidean projection onto a vector set.
Eigen::VectorXd project(const model::SetSpec& S, const Eigen::VectorXd& z);
/// Frobenius-norm projection of a symmetric matrix onto a matrix set.
Eigen::MatrixXd project(const model::SetSpec& S, const Eigen::MatrixXd& x);

Eigen::VectorXd project_norm_ball(const Eigen::VectorXd& z, double p, double radius);
/// Projection onto {X : tr(X D X) <= tau} within symmetric matrices.
Eigen::MatrixXd project_trace_ellipsoid(const Eigen::MatrixXd& x, const Eigen::MatrixXd& D, double tau);
Eigen::MatrixXd project_psd(const Eigen::MatrixXd& x);

}  // namespace gdro::convex
