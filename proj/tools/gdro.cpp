#include "gdro/conic/io.hpp"
#include "gdro/conic/residual.hpp"
#include "gdro/model/json.hpp"
#include "gdro/oracle/moment.hpp"
#include "gdro/oracle/worst_case.hpp"
#include "gdro/portfolio/portfolio.hpp"
#include "gdro/reform/builders.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace {

using nlohmann::ordered_json;
namespace conic = gdro::conic;
namespace model = gdro::model;
namespace oracle = gdro::oracle;
namespace portfolio = gdro::portfolio;
namespace reform = gdro::reform;

enum ExitCode : int { kOk = 0, kInvalid = 2, kBackend = 3, kResidual = 4, kVerifyFail = 5 };

/// Bad input detected by the CLI itself (exit 2).
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << text;
  if (!text.empty() && text.back() != '\n') out << "\n";
}

ordered_json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  try {
    return ordered_json::parse(in);
  } catch (const std::exception& e) {
    throw InputError("malformed JSON in '" + path + "': " + e.what());
  }
}

void print_errors(const std::vector<std::string>& errors) {
  std::cerr << ordered_json{{"errors", errors}}.dump() << "\n";
}

/// "mean,cov,dual,refinements", e.g. "9,5,11,2".
oracle::GridConfig parse_grid(const std::string& text) {
  oracle::GridConfig g;
  if (text.empty()) return g;
  std::vector<int> v;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      v.push_back(std::stoi(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw InputError("--grid: '" + item + "' is not an integer");
    }
  }
  if (v.size() != 4) throw InputError("--grid expects mean,cov,dual,refinements");
  g = {v[0], v[1], v[2], v[3]};
  try {
    g.validate();
  } catch (const std::exception& e) {
    throw InputError(std::string("--grid: ") + e.what());
  }
  return g;
}

model::ValidatedScenario load(const std::string& path) {
  return model::validate_scenario(model::load_scenario(path));
}

reform::BuiltProgram build(const model::ValidatedScenario& s, bool drc) {
  return drc ? reform::build_drc(s) : reform::build(s);
}

struct SolveArgs {
  std::string scenario, out, dump;
  double tol = 1e-6;
  bool drc = false;
};

int cmd_reformulate(const SolveArgs& a) {
  const auto built = build(load(a.scenario), a.drc);
  const auto& p = built.program;
  if (!a.out.empty()) write_file(a.out, conic::dump_program(p));
  ordered_json j;
  j["variables"] = p.num_vars;
  j["constraints"] = p.constraints.size();
  j["psd_blocks"] = p.count_cones(conic::ConeKind::Psd);
  std::cout << j.dump() << "\n";
  return kOk;
}

int cmd_solve(const SolveArgs& a) {
  const auto s = load(a.scenario);
  const auto built = build(s, a.drc);
  if (!a.dump.empty()) write_file(a.dump, conic::dump_program(built.program));
  const auto solved = reform::solve(built);
  const auto& sol = solved.solution;

  ordered_json j = conic::solution_to_json(built.program, sol);
  j["variant"] = std::string(model::variant_tag(s.scenario.variant));
  j["drc"] = a.drc;
  j["decision"] = model::vector_to_json(solved.decision);
  int code = sol.status == conic::SolveStatus::BackendError ? kBackend : kOk;
  if (sol.primal.size() == built.program.num_vars) {
    const auto r = conic::check_solution(built.program, sol, a.tol);
    j["residuals"] = {{"pass", r.pass}, {"tol", r.tol}, {"max_residual", r.max_residual},
                      {"objective_error", r.objective_error}, {"violated", r.violated}};
    if (code == kOk && !r.pass &&
        (sol.status == conic::SolveStatus::Optimal || sol.status == conic::SolveStatus::Inaccurate))
      code = kResidual;
  }
  if (!a.out.empty()) write_file(a.out, j.dump(2));
  std::cout << ordered_json{{"status", j["status"]}, {"objective", sol.objective}, {"exit", code}}.dump() << "\n";
  return code;
}

struct VerifyArgs {
  std::string scenario, solution, out, grid;
  double tol = 1e-4;
};

Eigen::VectorXd decision_from(const ordered_json& j) {
  const ordered_json& v = j.is_object() ? j.value("decision", ordered_json()) : j;
  if (!v.is_array()) throw InputError("solution has no 'decision' array");
  try {
    return model::vector_from_json(v);
  } catch (const std::exception& e) {
    throw InputError(std::string("bad decision: ") + e.what());
  }
}

int cmd_verify(const VerifyArgs& a) {
  const auto s = load(a.scenario);
  const Eigen::VectorXd d = decision_from(read_json(a.solution));
  if (d.size() != s.n())
    throw InputError("decision has " + std::to_string(d.size()) + " entries, scenario expects " +
                     std::to_string(s.n()));
  const auto grid = parse_grid(a.grid);
  oracle::Verification v;
  try {
    v = oracle::verify_feasibility(s, d, a.tol, grid);
  } catch (const oracle::OracleError& e) {
    throw InputError(e.what());
  }
  ordered_json j = {{"pass", v.pass}, {"tol", a.tol}, {"report", oracle::report_to_json(v.report)}};
  if (!a.out.empty()) write_file(a.out, j.dump(2));
  std::cout << ordered_json{{"pass", v.pass},
                            {"max_violation", v.report.max_violation},
                            {"grid_error_bound", v.report.grid_error_bound}}
                   .dump()
            << "\n";
  return v.pass ? kOk : kVerifyFail;
}

struct PortfolioArgs {
  portfolio::PortfolioParams base;
  std::vector<std::string> sweeps;
  std::string out, scenario_out;
};

int cmd_portfolio(const PortfolioArgs& a) {
  try {
    portfolio::validate_params(a.base);
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }
  if (!a.scenario_out.empty()) model::save_scenario(portfolio::portfolio_scenario(a.base), a.scenario_out);
  if (a.out.empty()) return kOk;

  std::vector<portfolio::SweepAxis> axes;
  std::vector<std::string> keys;
  for (const auto& text : a.sweeps) {
    try {
      axes.push_back(portfolio::parse_sweep(text));
    } catch (const std::invalid_argument& e) {
      throw InputError(e.what());
    }
    keys.push_back(axes.back().key);
  }
  const auto rows = portfolio::run_rows(portfolio::expand_sweep(a.base, axes));

  std::ostringstream csv;
  portfolio::write_csv(csv, keys, rows);
  write_file(a.out, csv.str());
  const std::string json_path = std::filesystem::path(a.out).replace_extension(".json").string();
  if (json_path != a.out) write_file(json_path, portfolio::rows_to_json(keys, rows).dump(2));

  int failed = 0;
  for (const auto& r : rows) failed += r.status == conic::SolveStatus::BackendError;
  std::cout << ordered_json{{"rows", rows.size()}, {"backend_errors", failed}, {"csv", a.out}}.dump() << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Globalized distributionally robust chance-constraint toolkit"};
  app.require_subcommand(1);

  SolveArgs ref;
  auto* reformulate = app.add_subcommand("reformulate", "Build the conic program and dump it");
  reformulate->add_option("--scenario", ref.scenario, "Scenario JSON")->required();
  reformulate->add_option("--out", ref.out, "Program dump path");
  reformulate->add_flag("--drc", ref.drc, "Build the DRC reference (no penalties)");

  SolveArgs sol;
  auto* solve = app.add_subcommand("solve", "Build, solve and residual-check");
  solve->add_option("--scenario", sol.scenario, "Scenario JSON")->required();
  solve->add_option("--out", sol.out, "Solution JSON path");
  solve->add_option("--tol", sol.tol, "Residual tolerance")->capture_default_str();
  solve->add_option("--dump-program", sol.dump, "Also write the program dump here");
  solve->add_flag("--drc", sol.drc, "Solve the DRC reference (no penalties)");

  VerifyArgs ver;
  auto* verify = app.add_subcommand("verify", "Check a decision with the worst-case oracle");
  verify->add_option("--scenario", ver.scenario, "Scenario JSON")->required();
  verify->add_option("--solution", ver.solution, "Solution JSON (a 'decision' array)")->required();
  verify->add_option("--tol", ver.tol, "Violation tolerance")->capture_default_str();
  verify->add_option("--grid", ver.grid, "mean,cov,dual,refinements (default 9,5,11,2)");
  verify->add_option("--out", ver.out, "Report JSON path");

  PortfolioArgs port;
  auto& pb = port.base;
  auto* port_cmd = app.add_subcommand("portfolio", "Worst-case CVaR portfolio runs with sweeps");
  port_cmd->add_option("--out", port.out, "CSV path (JSON is written beside it)");
  port_cmd->add_option("--sweep", port.sweeps, "key=v1,v2,... (repeatable; last varies fastest)");
  port_cmd->add_option("--scenario-out", port.scenario_out, "Write the base-point scenario JSON");
  port_cmd->add_option("--epsilon", pb.epsilon, "CVaR level")->capture_default_str();
  port_cmd->add_option("--beta1", pb.beta1, "Mean penalty weight")->capture_default_str();
  port_cmd->add_option("--beta2", pb.beta2, "Covariance penalty weight")->capture_default_str();
  port_cmd->add_option("--rho1", pb.rho1, "Outer mean radius")->capture_default_str();
  port_cmd->add_option("--rho2", pb.rho2, "Inner mean radius")->capture_default_str();
  port_cmd->add_option("--tau1", pb.tau1, "Outer covariance scale")->capture_default_str();
  port_cmd->add_option("--tau2", pb.tau2, "Inner covariance scale")->capture_default_str();
  port_cmd->add_flag("--drc", pb.drc, "Inner sets equal the outer sets");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInvalid;
  }

  try {
    if (*reformulate) return cmd_reformulate(ref);
    if (*solve) return cmd_solve(sol);
    if (*verify) return cmd_verify(ver);
    return cmd_portfolio(port);
  } catch (const model::ValidationError& e) {
    print_errors(e.errors());
    return kInvalid;
  } catch (const reform::BuildError& e) {
    print_errors({e.what()});
    return kInvalid;
  } catch (const InputError& e) {
    print_errors({e.what()});
    return kInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kBackend;
  }
}
