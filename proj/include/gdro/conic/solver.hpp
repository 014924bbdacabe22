#pragma once

#include "gdro/conic/program.hpp"

#include <Eigen/Dense>

#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace gdro::conic {

enum class SolveStatus { Optimal, Infeasible, Unbounded, Inaccurate, BackendError };

std::string_view status_name(SolveStatus s);
SolveStatus status_from_name(std::string_view s);

struct SolverOptions {
  /// Stop when the barrier duality-gap bound nu/t <= gap_abs + gap_rel*|obj|.
  double gap_abs = 1e-9;
  double gap_rel = 1e-9;
  /// Phase-I optimum above this is reported as infeasible.
  double infeasibility_tol = 1e-7;
  /// Box |x_i| <= box keeps every centering problem bounded. <= 0 disables.
  double box = 1e6;
  double barrier_growth = 10.0;
  int max_newton_steps = 4000;
};

struct Solution {
  SolveStatus status = SolveStatus::BackendError;
  Eigen::VectorXd primal;
  double objective = 0.0;
  /// One dual vector per constraint block of the program, when available.
  std::vector<Eigen::VectorXd> duals;
  int iterations = 0;
  std::string message;
};

/// Backend contract: accepts every ConeKind, returns status + primal (+ duals).
class SolverBackend {
 public:
  virtual ~SolverBackend() = default;
  virtual std::string name() const = 0;
  /// Whether concurrent solve() calls on one instance are safe.
  virtual bool reentrant() const = 0;
  virtual Solution solve(const ConicProgram& program, const SolverOptions& options) const = 0;
};

/// Reference backend: dense primal log-barrier path following with a
/// phase-I feasibility search. Pure function of its inputs; reentrant.
class BarrierBackend final : public SolverBackend {
 public:
  std::string name() const override { return "barrier"; }
  bool reentrant() const override { return true; }
  Solution solve(const ConicProgram& program, const SolverOptions& options) const override;
};

const SolverBackend& default_backend();

/// Solves through `backend`, serializing calls when the backend is not
/// reentrant. Exceptions thrown by the backend become BackendError with the
/// original message.
Solution solve(const ConicProgram& program, const SolverOptions& options = {},
               const SolverBackend& backend = default_backend());

}  // namespace gdro::conic
