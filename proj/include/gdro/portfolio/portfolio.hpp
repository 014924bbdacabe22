#pragma once

#include "gdro/conic/solver.hpp"
#include "gdro/model/scenario.hpp"

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <ostream>
#include <string>
#include <vector>

namespace gdro::portfolio {

struct PortfolioParams {
  double epsilon = 0.05;
  double beta1 = 5.0;
  double beta2 = 50.0;
  double rho1 = 0.5;
  double rho2 = 0.2;
  double tau1 = 0.8;
  double tau2 = 0.3;
  /// Distributionally robust reference: inner sets equal the outer sets.
  bool drc = false;
};

/// Throws std::invalid_argument on out-of-range parameters.
void validate_params(const PortfolioParams& p);
/// Sets one parameter by name (epsilon, beta1, beta2, rho1, rho2, tau1, tau2, drc).
void set_param(PortfolioParams& p, const std::string& key, double value);
double get_param(const PortfolioParams& p, const std::string& key);

/// Three-asset return data.
Eigen::VectorXd asset_mean();
/// Covariance as published (not exactly symmetric).
Eigen::MatrixXd asset_covariance_raw();
/// Symmetric part of asset_covariance_raw().
Eigen::MatrixXd asset_covariance();

/// Decision d = (x1, x2, x3, beta, v); minimize v subject to the worst-case
/// CVaR epigraph constraint written as a two-piece max-affine expectation.
model::Scenario portfolio_scenario(const PortfolioParams& p);

struct PortfolioRow {
  PortfolioParams params;
  conic::SolveStatus status = conic::SolveStatus::BackendError;
  double cvar = 0.0;
  Eigen::Vector3d x = Eigen::Vector3d::Zero();
  double beta = 0.0;
  std::string message;
};

PortfolioRow solve_portfolio(const PortfolioParams& p, const conic::SolverOptions& options = {});

struct SweepAxis {
  std::string key;
  std::vector<double> values;
};

/// Parses "key=v1,v2,...".
SweepAxis parse_sweep(const std::string& text);
/// Cartesian product of the axes in order (last axis fastest).
std::vector<PortfolioParams> expand_sweep(const PortfolioParams& base, const std::vector<SweepAxis>& axes);

/// Solves every point; rows come back in input order. The parallel version
/// distributes rows over OpenMP threads.
std::vector<PortfolioRow> run_rows(const std::vector<PortfolioParams>& points, const conic::SolverOptions& options = {});
std::vector<PortfolioRow> run_rows_serial(const std::vector<PortfolioParams>& points,
                                          const conic::SolverOptions& options = {});

/// Header: swept keys, cvar, x1, x2, x3, beta, status. 6 significant digits.
void write_csv(std::ostream& out, const std::vector<std::string>& keys, const std::vector<PortfolioRow>& rows);
nlohmann::ordered_json rows_to_json(const std::vector<std::string>& keys, const std::vector<PortfolioRow>& rows);

}  // namespace gdro::portfolio
