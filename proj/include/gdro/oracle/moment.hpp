#pragma once

#include <span>
#include <stdexcept>
#include <vector>

namespace gdro::oracle {

/// One piece a + b*y of the scalar max-affine integrand.
struct MomentPiece {
  double a = 0.0;
  double b = 0.0;
};

class OracleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct DualSearch {
  /// Dual grid points per axis (c and log gamma2).
  int resolution = 41;
  /// Zoom passes before the final golden-section polish.
  int refinements = 3;
};

struct MomentBound {
  /// Dual value: an upper bound on the supremum for any (gamma1, gamma2).
  double value = 0.0;
  /// Primal discretized-support LP value: a lower bound.
  double primal = 0.0;
  double gamma0 = 0.0, gamma1 = 0.0, gamma2 = 0.0;
};

/// sup E[max_i (a_i + b_i y)] over laws on R with mean m and variance s2,
/// through the dual min gamma0 + gamma1 m + gamma2 (s2 + m^2), cross-checked
/// against a primal LP on a support grid over [m - 10 sqrt(s2), m + 10 sqrt(s2)].
/// Throws OracleError if s2 < 0 or the two sides do not meet within
/// 1e-4 (1 + |value|).
MomentBound inner_moment_bound(std::span<const MomentPiece> pieces, double m, double s2, const DualSearch& search = {});

/// Dual side only: nested golden section on the (convex) centred dual.
/// Always an upper bound; used at every oracle grid node.
double inner_dual_bound(std::span<const MomentPiece> pieces, double m, double s2);
/// Dual side with the grid and zoom passes of `search` ahead of the polish.
double inner_dual_bound(std::span<const MomentPiece> pieces, double m, double s2, const DualSearch& search);

/// Primal LP over the fixed support grid plus `extra` points.
double inner_primal_lp(std::span<const MomentPiece> pieces, double m, double s2, int grid_points = 401,
                       std::span<const double> extra = {});

}  // namespace gdro::oracle
