#include "gdro/model/affine.hpp"

#include <algorithm>
#include <limits>
#include <string>

namespace gdro::model {

double affine_eval(const AffineScalar& f, const Eigen::VectorXd& d) {
  if (f.coeffs.size() != d.size())
    throw DimensionError("affine scalar expects a decision of length " + std::to_string(f.coeffs.size()) + ", got " +
                         std::to_string(d.size()));
  return f.coeffs.dot(d) + f.constant;
}

Eigen::VectorXd affine_eval(const AffineVector& f, const Eigen::VectorXd& d) {
  if (f.matrix.cols() != d.size())
    throw DimensionError("affine vector expects a decision of length " + std::to_string(f.matrix.cols()) + ", got " +
                         std::to_string(d.size()));
  if (f.offset.size() != f.matrix.rows()) throw DimensionError("affine vector offset does not match its row count");
  return f.matrix * d + f.offset;
}

double PiecewiseAffine::value(const Eigen::VectorXd& d, const Eigen::VectorXd& xi) const {
  const double wx = affine_eval(w, d).dot(xi);
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& p : pieces) best = std::max(best, affine_eval(p.a, d) + p.b * wx);
  return best;
}

}  // namespace gdro::model
