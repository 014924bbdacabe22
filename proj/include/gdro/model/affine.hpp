#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <vector>

namespace gdro::model {

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// coeffs^T d + constant.
struct AffineScalar {
  Eigen::VectorXd coeffs;
  double constant = 0.0;
};

/// matrix * d + offset.
struct AffineVector {
  Eigen::MatrixXd matrix;
  Eigen::VectorXd offset;
};

double affine_eval(const AffineScalar& f, const Eigen::VectorXd& d);
Eigen::VectorXd affine_eval(const AffineVector& f, const Eigen::VectorXd& d);

struct Piece {
  AffineScalar a;
  double b = 0.0;
};

/// max_i { a_i(d) + b_i w(d)^T xi }.
struct PiecewiseAffine {
  std::vector<Piece> pieces;
  AffineVector w;

  int m() const { return static_cast<int>(pieces.size()); }
  /// Value at a fixed decision and realization.
  double value(const Eigen::VectorXd& d, const Eigen::VectorXd& xi) const;
};

}  // namespace gdro::model
