#pragma once

#include "gdro/conic/program.hpp"
#include "gdro/conic/solver.hpp"

#include <string>
#include <vector>

namespace gdro::conic {

struct ConstraintResidual {
  std::string name;
  ConeKind kind = ConeKind::Zero;
  /// Euclidean distance from A x + b to the cone.
  double distance = 0.0;
};

struct ResidualReport {
  bool pass = false;
  double tol = 1e-6;
  double max_residual = 0.0;
  /// Objective recomputed from the primal vector.
  double objective = 0.0;
  /// |recomputed objective - reported objective|.
  double objective_error = 0.0;
  std::vector<ConstraintResidual> residuals;
  /// Names of constraints whose residual exceeds tol.
  std::vector<std::string> violated;
};

ResidualReport check_solution(const ConicProgram& program, const Solution& solution, double tol = 1e-6);

}  // namespace gdro::conic
