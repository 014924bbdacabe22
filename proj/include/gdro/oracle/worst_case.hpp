#pragma once

#include "gdro/model/scenario.hpp"
#include "gdro/oracle/moment.hpp"

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

namespace gdro::oracle {

struct GridConfig {
  /// Grid points per mean-perturbation coordinate.
  int mean_points = 9;
  /// Grid points per covariance basis direction (svec coordinates).
  int cov_points = 5;
  /// Dual (gamma1, gamma2) grid points per axis at every node.
  int dual_resolution = 11;
  /// Zoom passes around the best node.
  int refinements = 2;

  /// Throws std::invalid_argument unless every count is >= 3 (refinements >= 0).
  void validate() const;
};

struct WorstCaseReport {
  /// innerBound - penalty at the attaining node; <= 0 means no violation found.
  double max_violation = 0.0;
  Eigen::VectorXd attaining_mu;
  Eigen::MatrixXd attaining_sigma;
  double inner_bound = 0.0;
  double penalty = 0.0;
  /// Lipschitz bound on how far the true supremum can exceed the base grid maximum.
  double grid_error_bound = 0.0;
  int nodes = 0;
  /// Nodes dropped because Sigma was not PSD (or mu left the support, C3).
  int skipped = 0;
};

nlohmann::ordered_json report_to_json(const WorstCaseReport& r);

/// sup over gridded (mu, Sigma) in the outer sets of the inner moment bound
/// minus the allowable violation. Variants C1, C1Singleton, LinearC1; k <= 3.
/// Node evaluation is OpenMP-parallel with a deterministic max-reduction.
WorstCaseReport worst_case_violation(const model::ValidatedScenario& s, const Eigen::VectorXd& d,
                                     const GridConfig& grid = {});
/// Single-threaded reference producing the same report.
WorstCaseReport worst_case_violation_serial(const model::ValidatedScenario& s, const Eigen::VectorXd& d,
                                            const GridConfig& grid = {});

struct Verification {
  bool pass = false;
  WorstCaseReport report;
};

/// Pass iff maxViolation <= tol + gridErrorBound. Dispatches C3 variants to c3_worst_case.
Verification verify_feasibility(const model::ValidatedScenario& s, const Eigen::VectorXd& d, double tol,
                                const GridConfig& grid = {});

/// Mean-only worst case for C3/C3Singleton: max over gridded mu in
/// (mu0 + A U1) and the support of g(mu, d) - penalty(mu).
WorstCaseReport c3_worst_case(const model::ValidatedScenario& s, const Eigen::VectorXd& d, const GridConfig& grid = {});

}  // namespace gdro::oracle
