#include "gdro/portfolio/portfolio.hpp"

#include "gdro/reform/builders.hpp"

#include <cmath>
#include <exception>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace gdro::portfolio {

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(6) << v;
  return os.str();
}

double parse_number(const std::string& text, const std::string& context) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size() || !std::isfinite(v))
    throw std::invalid_argument("sweep '" + context + "': '" + text + "' is not a number");
  return v;
}

}  // namespace

PortfolioRow solve_portfolio(const PortfolioParams& p, const conic::SolverOptions& options) {
  PortfolioRow row;
  row.params = p;
  try {
    const model::ValidatedScenario vs = model::validate_scenario(portfolio_scenario(p));
    const reform::SolvedProgram sol = reform::solve(reform::build(vs), options);
    row.status = sol.solution.status;
    row.message = sol.solution.message;
    if (row.status == conic::SolveStatus::Optimal) {
      row.cvar = sol.solution.objective;
      row.x = sol.decision.head(3);
      row.beta = sol.decision(3);
    }
  } catch (const std::exception& e) {
    row.status = conic::SolveStatus::BackendError;
    row.message = e.what();
  }
  return row;
}

SweepAxis parse_sweep(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0) throw std::invalid_argument("sweep must look like key=v1,v2,...: '" + text + "'");
  SweepAxis axis;
  axis.key = text.substr(0, eq);
  get_param(PortfolioParams{}, axis.key);
  std::stringstream rest(text.substr(eq + 1));
  std::string item;
  while (std::getline(rest, item, ',')) axis.values.push_back(parse_number(item, axis.key));
  if (axis.values.empty()) throw std::invalid_argument("sweep '" + axis.key + "' has no values");
  return axis;
}

std::vector<PortfolioParams> expand_sweep(const PortfolioParams& base, const std::vector<SweepAxis>& axes) {
  std::vector<PortfolioParams> out{base};
  for (const auto& axis : axes) {
    std::vector<PortfolioParams> next;
    next.reserve(out.size() * axis.values.size());
    for (const auto& p : out)
      for (double v : axis.values) {
        PortfolioParams q = p;
        set_param(q, axis.key, v);
        next.push_back(q);
      }
    out = std::move(next);
  }
  return out;
}

std::vector<PortfolioRow> run_rows(const std::vector<PortfolioParams>& points, const conic::SolverOptions& options) {
  std::vector<PortfolioRow> rows(points.size());
  const long n = static_cast<long>(points.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (long i = 0; i < n; ++i) rows[i] = solve_portfolio(points[i], options);
  return rows;
}

std::vector<PortfolioRow> run_rows_serial(const std::vector<PortfolioParams>& points,
                                          const conic::SolverOptions& options) {
  std::vector<PortfolioRow> rows;
  rows.reserve(points.size());
  for (const auto& p : points) rows.push_back(solve_portfolio(p, options));
  return rows;
}

void write_csv(std::ostream& out, const std::vector<std::string>& keys, const std::vector<PortfolioRow>& rows) {
  for (const auto& k : keys) out << k << ',';
  out << "cvar,x1,x2,x3,beta,status\n";
  for (const auto& r : rows) {
    for (const auto& k : keys) out << fmt(get_param(r.params, k)) << ',';
    out << fmt(r.cvar) << ',' << fmt(r.x(0)) << ',' << fmt(r.x(1)) << ',' << fmt(r.x(2)) << ',' << fmt(r.beta) << ','
        << conic::status_name(r.status) << '\n';
  }
}

nlohmann::ordered_json rows_to_json(const std::vector<std::string>& keys, const std::vector<PortfolioRow>& rows) {
  nlohmann::ordered_json j;
  j["swept"] = keys;
  j["rows"] = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    nlohmann::ordered_json row;
    nlohmann::ordered_json params;
    for (const char* k : {"epsilon", "beta1", "beta2", "rho1", "rho2", "tau1", "tau2"}) params[k] = get_param(r.params, k);
    params["drc"] = r.params.drc;
    row["params"] = params;
    row["status"] = conic::status_name(r.status);
    row["cvar"] = r.cvar;
    row["x"] = {r.x(0), r.x(1), r.x(2)};
    row["beta"] = r.beta;
    if (!r.message.empty()) row["message"] = r.message;
    j["rows"].push_back(row);
  }
  return j;
}

}  // namespace gdro::portfolio
