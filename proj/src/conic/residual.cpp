#include "gdro/conic/residual.hpp"

#include "gdro/conic/cones.hpp"

#include <algorithm>
#include <cmath>

namespace gdro::conic {

ResidualReport check_solution(const ConicProgram& program, const Solution& solution, double tol) {
  ResidualReport r;
  r.tol = tol;
  if (solution.primal.size() != program.num_vars) {
    r.violated.push_back("primal vector has wrong length");
    r.max_residual = std::numeric_limits<double>::infinity();
    return r;
  }
  for (const auto& blk : program.constraints) {
    const double dist = cone_distance(blk.cone, program.evaluate(blk, solution.primal));
    r.residuals.push_back({blk.name, blk.cone.kind, dist});
    r.max_residual = std::max(r.max_residual, dist);
    if (!(dist <= tol)) r.violated.push_back(blk.name);
  }
  r.objective = program.objective_value(solution.primal);
  r.objective_error = std::abs(r.objective - solution.objective);
  if (!(r.objective_error <= tol * (1.0 + std::abs(r.objective)))) r.violated.push_back("objective");
  r.pass = r.violated.empty();
  return r;
}

}  // namespace gdro::conic
