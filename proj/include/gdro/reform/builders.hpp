#pragma once

#include "gdro/conic/program.hpp"
#include "gdro/conic/solver.hpp"
#include "gdro/model/scenario.hpp"

#include <Eigen/Dense>

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace gdro::reform {

/// Floor standing in for the strict inequality z > 0.
inline constexpr double kZMin = 1e-9;

class BuildError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct BuildOptions {
  /// Evaluate mode: d is pinned to this value, decision constraints are
  /// dropped and the program minimizes the left-hand side of the GDRC.
  std::optional<Eigen::VectorXd> fixed_decision;
};

struct BuiltProgram {
  conic::ConicProgram program;
  /// System symbols (d, p, s, t, z, vhat, lambda_i, Y, Q, ...) -> columns.
  std::map<std::string, std::vector<int>> variable_map;
  model::Variant variant = model::Variant::C1;
  bool drc = false;
  bool evaluate = false;

  Eigen::VectorXd decision(const Eigen::VectorXd& primal) const;
};

BuiltProgram build_c1(const model::ValidatedScenario& s, const BuildOptions& opt = {});
BuiltProgram build_c1_singleton(const model::ValidatedScenario& s, const BuildOptions& opt = {});
BuiltProgram build_linear(const model::ValidatedScenario& s, const BuildOptions& opt = {});
BuiltProgram build_c2(const model::ValidatedScenario& s, const BuildOptions& opt = {});
/// Dispatches to the C3 or C3Singleton row by variant.
BuiltProgram build_c3(const model::ValidatedScenario& s, const BuildOptions& opt = {});

/// Builder selected by the scenario's variant.
BuiltProgram build(const model::ValidatedScenario& s, const BuildOptions& opt = {});

/// Plain DRC under the outer sets (zero allowable violation): the system of
/// the scenario's family with every penalty multiplier removed.
BuiltProgram build_drc(const model::ValidatedScenario& s, const BuildOptions& opt = {});

struct SolvedProgram {
  conic::Solution solution;
  /// Decision d (empty unless the solve produced a primal point).
  Eigen::VectorXd decision;
};

SolvedProgram solve(const BuiltProgram& built, const conic::SolverOptions& options = {});

/// Minimum over auxiliaries of the GDRC left-hand side at a fixed decision
/// (<= 0 iff d is feasible). Throws std::runtime_error if the solve fails.
double evaluate_lhs(const model::ValidatedScenario& s, const Eigen::VectorXd& d, bool drc = false);

}  // namespace gdro::reform
