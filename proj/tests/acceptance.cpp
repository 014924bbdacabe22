#include "fixtures.hpp"

#include "gdro/conic/io.hpp"
#include "gdro/conic/residual.hpp"
#include "gdro/convex/fragments.hpp"
#include "gdro/convex/numeric.hpp"
#include "gdro/model/json.hpp"
#include "gdro/oracle/moment.hpp"
#include "gdro/oracle/worst_case.hpp"
#include "gdro/portfolio/portfolio.hpp"
#include "gdro/reform/builders.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

using namespace gdro;
using model::DistanceSpec;
using model::kInf;
using model::SetSpec;

namespace {

constexpr double kInfinity = std::numeric_limits<double>::infinity();
/// Solver noise allowed on monotone comparisons.
constexpr double kNoise = 1e-8;

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  /// Wall-clock limit in seconds; <= 0 means none.
  double limit;
  std::function<Outcome()> run;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string sci(double v) { return fmt("%.2e", v); }

/// Builds and solves; throws unless the status is optimal and residuals pass at 1e-6.
reform::SolvedProgram solve_checked(const reform::BuiltProgram& built) {
  reform::SolvedProgram sol = reform::solve(built);
  if (sol.solution.status != conic::SolveStatus::Optimal)
    throw std::runtime_error("solve status " + std::string(conic::status_name(sol.solution.status)) + ": " +
                             sol.solution.message);
  const conic::ResidualReport res = conic::check_solution(built.program, sol.solution, 1e-6);
  if (!res.pass) throw std::runtime_error("residual check failed, max " + sci(res.max_residual));
  return sol;
}

double optimum(const model::Scenario& sc, bool drc = false) {
  const auto vs = model::validate_scenario(sc);
  return solve_checked(drc ? reform::build_drc(vs) : reform::build(vs)).solution.objective;
}

Eigen::VectorXd optimal_decision(const model::ValidatedScenario& vs) { return solve_checked(reform::build(vs)).decision; }

int count_increases(const std::vector<double>& v) {
  int n = 0;
  for (std::size_t i = 1; i < v.size(); ++i) n += v[i] > v[i - 1] + kNoise;
  return n;
}

// 1. Dual grid value against the primal LP on random one-dimensional instances.
Outcome inner_sandwich() {
  fixtures::Rng rng(101);
  double worst = 0.0;
  int failures = 0;
  for (int t = 0; t < 100; ++t) {
    const auto pieces = fixtures::random_pieces(rng, rng.integer(1, 5));
    const double m = rng.uniform(-2.0, 2.0), s2 = rng.uniform(0.0, 4.0);
    try {
      const oracle::MomentBound r = oracle::inner_moment_bound(pieces, m, s2);
      const double gap = (r.value - r.primal) / (1.0 + std::abs(r.value));
      if (r.primal > r.value + 1e-9 * (1.0 + std::abs(r.value))) ++failures;
      worst = std::max(worst, gap);
    } catch (const oracle::OracleError&) {
      ++failures;
    }
  }
  return {failures == 0 && worst <= 1e-4,
          "100 instances, max (dual - primal)/(1+|v|) = " + sci(worst) + " (tol 1e-4), failures " +
              std::to_string(failures)};
}

// 2. Linear family: builder constraint value against the k=2 grid oracle.
Outcome linear_closed_form() {
  fixtures::Rng rng(102);
  double worst = 0.0;
  for (int t = 0; t < 20; ++t) {
    const auto vs = model::validate_scenario(fixtures::random_linear(rng, 2));
    const Eigen::VectorXd star = optimal_decision(vs);
    for (const Eigen::VectorXd& d : {star, Eigen::VectorXd(rng.vec(2, -1.0, 1.0))}) {
      const double builder = reform::evaluate_lhs(vs, d);
      const double grid = oracle::worst_case_violation(vs, d, oracle::GridConfig{11, 3, 9, 3}).max_violation;
      worst = std::max(worst, std::abs(builder - grid));
    }
  }
  return {worst <= 2e-3, "20 instances (optimum and a random decision each), max |builder - oracle| = " +
                             sci(worst) + " (tol 2e-3)"};
}

// 3. Builder optima pass the worst-case oracle.
Outcome soundness() {
  fixtures::Rng rng(103);
  int fails = 0;
  double worst = -kInfinity;
  std::ostringstream where;
  auto check = [&](const model::Scenario& sc, const std::string& label) {
    const auto vs = model::validate_scenario(sc);
    const auto v = oracle::verify_feasibility(vs, optimal_decision(vs), 1e-4);
    worst = std::max(worst, v.report.max_violation - v.report.grid_error_bound);
    if (!v.pass) {
      ++fails;
      where << " " << label;
    }
  };
  for (int t = 0; t < 20; ++t) check(fixtures::random_c1(rng, 2, 2, t % 2), "C1#" + std::to_string(t));
  for (int t = 0; t < 10; ++t)
    check(fixtures::random_c1_singleton(rng, 2, 2, t % 2), "C1Singleton#" + std::to_string(t));
  for (int t = 0; t < 10; ++t) check(fixtures::random_c3(rng, 2), "C3#" + std::to_string(t));
  return {fails == 0, "20 C1 + 10 C1Singleton + 10 C3 at tol 1e-4, max (violation - gridErrorBound) = " +
                          sci(worst) + ", failures " + std::to_string(fails) + where.str()};
}

// 4. Inner sets equal to the outer sets: the penalty vanishes on U1 x Z1.
Outcome drc_reduction() {
  fixtures::Rng rng(104);
  double worst = 0.0;
  auto compare = [&](model::Scenario sc) {
    sc.moments.U2 = sc.moments.U1;
    sc.moments.Z2 = sc.moments.Z1;
    worst = std::max(worst, std::abs(optimum(sc) - optimum(sc, true)));
  };
  for (int t = 0; t < 10; ++t) {
    compare(fixtures::random_c1(rng, 2, 2, t % 2));
    compare(fixtures::random_linear(rng, 2));
    compare(fixtures::random_c3(rng, 2));
  }
  return {worst <= 1e-6, "10 instances each of C1, LinearC1, C3; max |GDRC - DRC| = " + sci(worst) + " (tol 1e-6)"};
}

// 5. Monotone responses to penalty weights and inner-set growth.
Outcome monotonicity() {
  fixtures::Rng rng(105);
  int b1 = 0, b2 = 0, eta = 0, growth = 0;
  const std::vector<double> weights = {0.1, 0.5, 1.0, 5.0, 20.0};
  for (int t = 0; t < 10; ++t) {
    const model::Scenario base = fixtures::random_c1(rng, 2, 2, t % 2);
    std::vector<double> v1, v2;
    for (double w : weights) {
      model::Scenario sc = base;
      sc.distance.phi.weight = w;
      v1.push_back(optimum(sc));
      sc = base;
      sc.distance.psi->weight = w;
      v2.push_back(optimum(sc));
    }
    b1 += count_increases(v1);
    b2 += count_increases(v2);
  }
  for (int t = 0; t < 10; ++t) {
    const model::Scenario base = fixtures::random_c2(rng, 2, 2);
    std::vector<double> v;
    for (double e : {1e-4, 1e-2, 0.1, 1.0, 10.0}) {
      model::Scenario sc = base;
      sc.distance.phi.weight = e;
      v.push_back(optimum(sc));
    }
    eta += count_increases(v);
  }
  for (int t = 0; t < 10; ++t) {
    const model::Scenario base = fixtures::random_c1(rng, 2, 2, 0);
    std::vector<double> v;
    for (double f : {0.0, 0.25, 0.5, 0.75, 1.0}) {
      model::Scenario sc = base;
      sc.moments.U2 = SetSpec::norm_ball(1.0, f * base.moments.U1.radius);
      sc.moments.Z2 = SetSpec::vec_lifted(2.0, f * base.moments.Z1.radius);
      // Larger inner sets shrink the allowable violation: the optimum never drops.
      v.push_back(-optimum(sc));
    }
    growth += count_increases(v);
  }
  const int total = b1 + b2 + eta + growth;
  return {total == 0, "violations beyond 1e-8: beta1 " + std::to_string(b1) + ", beta2 " + std::to_string(b2) +
                          ", eta " + std::to_string(eta) + ", inner growth " + std::to_string(growth) +
                          " (10 instances x 5 points each)"};
}

// 6. Portfolio trends at epsilon = 0.05.
Outcome portfolio_trends() {
  using portfolio::PortfolioParams;
  using portfolio::PortfolioRow;
  const PortfolioParams base;
  auto sweep = [&](const std::string& key, std::vector<double> values, PortfolioParams p) {
    const auto rows = portfolio::run_rows(portfolio::expand_sweep(p, {{key, std::move(values)}}));
    for (const auto& r : rows)
      if (r.status != conic::SolveStatus::Optimal) throw std::runtime_error("portfolio row not optimal: " + r.message);
    return rows;
  };
  auto strictly_decreasing = [](const std::vector<PortfolioRow>& rows) {
    for (std::size_t i = 1; i < rows.size(); ++i)
      if (!(rows[i].cvar < rows[i - 1].cvar)) return false;
    return true;
  };

  const auto table1 = sweep("beta1", {0.1, 1.0, 5.0, 10.0, 50.0}, base);
  PortfolioParams t2 = base;
  t2.beta1 = 5.0;
  const auto table2 = sweep("beta2", {1.0, 10.0, 30.0, 50.0, 70.0}, t2);
  bool x1_down = true, x3_up = true;
  for (std::size_t i = 1; i < table1.size(); ++i) {
    x1_down = x1_down && table1[i].x(0) <= table1[i - 1].x(0) + kNoise;
    x3_up = x3_up && table1[i].x(2) >= table1[i - 1].x(2) - kNoise;
  }

  const std::vector<double> eps = {0.01, 0.02, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3};
  PortfolioParams drc = base, g1 = base, g2 = base;
  drc.drc = true;
  g1.beta1 = 1.0;
  g1.beta2 = 10.0;
  g2.beta1 = 10.0;
  g2.beta2 = 50.0;
  const auto curve_drc = sweep("epsilon", eps, drc), curve1 = sweep("epsilon", eps, g1),
             curve2 = sweep("epsilon", eps, g2);
  bool below = true;
  double margin = kInfinity;
  for (std::size_t i = 0; i < eps.size(); ++i) {
    below = below && curve1[i].cvar < curve_drc[i].cvar && curve2[i].cvar < curve_drc[i].cvar;
    margin = std::min({margin, curve_drc[i].cvar - curve1[i].cvar, curve_drc[i].cvar - curve2[i].cvar});
  }
  const bool a = strictly_decreasing(table1) && strictly_decreasing(table2);
  std::ostringstream out;
  out << "(a) cvar beta1 sweep " << fmt("%.4f", table1.front().cvar) << "->" << fmt("%.4f", table1.back().cvar)
      << ", beta2 sweep " << fmt("%.4f", table2.front().cvar) << "->" << fmt("%.4f", table2.back().cvar)
      << (a ? " strictly decreasing" : " NOT strictly decreasing") << "; (b) x1 " << fmt("%.4f", table1.front().x(0))
      << "->" << fmt("%.4f", table1.back().x(0)) << (x1_down ? " non-increasing" : " INCREASES") << ", x3 "
      << sci(table1.front().x(2)) << "->" << sci(table1.back().x(2)) << (x3_up ? " non-decreasing" : " DECREASES")
      << "; (c) min DRC - globalized over 8 eps = " << sci(margin);
  return {a && x1_down && x3_up && below, out.str()};
}

// 7. Graph fragments against closed forms, Schur lift, Schatten pairing.
double fragment_value(const conic::ConicFragment& f) {
  const conic::ConicProgram p =
      conic::assemble(std::span<const conic::ConicFragment>(&f, 1), conic::ConicFragment{}, f.epigraph);
  const conic::Solution s = conic::solve(p);
  if (s.status == conic::SolveStatus::Infeasible) return kInfinity;
  if (s.status != conic::SolveStatus::Optimal) return std::numeric_limits<double>::quiet_NaN();
  return s.objective;
}

double mismatch(double got, double expected) {
  if (std::isinf(expected) || std::isinf(got)) return std::isinf(expected) && std::isinf(got) ? 0.0 : kInfinity;
  if (std::isnan(got)) return kInfinity;
  return std::abs(got - expected);
}

double min_eig(const Eigen::MatrixXd& m) {
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(m, Eigen::EigenvaluesOnly).eigenvalues()(0);
}

Outcome convex_exactness() {
  fixtures::Rng rng(107);
  const int k = 2, reps = 200;
  const auto cvec = [](const Eigen::VectorXd& v) { return conic::constant_vec(v); };
  const auto cmat = [](const Eigen::MatrixXd& m) { return conic::SymMatExpr::constant(m); };
  double worst = 0.0;
  int tags = 0;
  std::string worst_tag = "-";
  auto record = [&](double err, const std::string& tag) {
    if (err > worst) {
      worst = err;
      worst_tag = tag;
    }
  };

  Eigen::MatrixXd C(2 * k + 1, k);
  C << Eigen::MatrixXd::Identity(k, k), -Eigen::MatrixXd::Identity(k, k), Eigen::RowVectorXd::Ones(k);
  const std::vector<SetSpec> vsets = {SetSpec::singleton(),
                                      SetSpec::norm_ball(1.0, 0.7),
                                      SetSpec::norm_ball(2.0, 0.7),
                                      SetSpec::norm_ball(kInf, 0.7),
                                      SetSpec::norm_intersection({{2.0, 0.6}, {1.0, 0.8}, {kInf, 0.4}}),
                                      SetSpec::polyhedron(C, rng.vec(2 * k + 1, 0.2, 1.0))};
  for (const auto& S : vsets) {
    ++tags;
    for (int r = 0; r < reps; ++r) {
      const Eigen::VectorXd y = rng.gauss(k);
      record(mismatch(fragment_value(convex::support_epigraph(S, cvec(y), "s")), convex::support_value(S, y)),
             "support " + std::string(model::set_tag(S.kind)));
    }
  }
  const Eigen::MatrixXd xi0 = rng.spd(k, 0.2, 1.0);
  const std::vector<SetSpec> msets = {SetSpec::singleton(),
                                      SetSpec::frobenius_ball(0.6),
                                      SetSpec::schatten_ball(1.0, 0.6),
                                      SetSpec::schatten_ball(2.0, 0.6),
                                      SetSpec::schatten_ball(kInf, 0.6),
                                      SetSpec::spectral_norm_bound(0.6),
                                      SetSpec::norm_intersection({{2.0, 0.6}, {1.0, 0.7}}),
                                      SetSpec::vec_lifted(1.0, 0.6),
                                      SetSpec::vec_lifted(2.0, 0.6),
                                      SetSpec::vec_lifted(kInf, 0.6),
                                      SetSpec::psd_interval(0.8, xi0),
                                      SetSpec::psd_interval_trace(0.8, xi0, rng.spd(k, 0.5, 2.0), 0.05)};
  for (const auto& S : msets) {
    ++tags;
    for (int r = 0; r < reps; ++r) {
      const Eigen::MatrixXd Y = rng.sym(k);
      record(mismatch(fragment_value(convex::support_epigraph(S, cmat(Y), "s")), convex::support_value(S, Y)),
             "support " + std::string(model::set_tag(S.kind)));
    }
  }

  const Eigen::MatrixXd sigma = rng.spd(k, 0.3, 2.0);
  for (const auto& d : {DistanceSpec::mean_norm(1.0, 1.5), DistanceSpec::mean_norm(2.0, 1.5),
                        DistanceSpec::mean_norm(kInf, 1.5), DistanceSpec::mean_mahalanobis(2.0, sigma)}) {
    ++tags;
    for (int r = 0; r < reps; ++r) {
      const Eigen::VectorXd lam = rng.gauss(k);
      record(mismatch(fragment_value(convex::conjugate_joint_epigraph(d, cvec(lam), "c")),
                      convex::conjugate_joint_value(d, lam)),
             "joint " + std::string(model::distance_tag(d.kind)));
    }
  }
  for (const auto& d : {DistanceSpec::cov_frobenius_sq(1.5),
                        DistanceSpec::cov_general_quad(rng.spd(k, 0.5, 2.0), rng.spd(k, 0.5, 2.0)),
                        DistanceSpec::cov_logdet(1.5)}) {
    ++tags;
    for (int r = 0; r < reps; ++r) {
      // Log-det: half the draws inside the conjugate domain (Y negative definite).
      const Eigen::MatrixXd Y = d.kind == model::DistanceKind::CovLogDet && r % 2 == 0
                                    ? Eigen::MatrixXd(-rng.spd(k, 0.2, 3.0))
                                    : rng.sym(k);
      record(mismatch(fragment_value(convex::conjugate_joint_epigraph(d, cmat(Y), "c")),
                      convex::conjugate_joint_value(d, Y)),
             "joint " + std::string(model::distance_tag(d.kind)));
    }
  }
  for (const auto& d : {DistanceSpec::mean_entropy(), DistanceSpec::mean_mahalanobis(1.5, sigma),
                        DistanceSpec::mean_norm(2.0, 3.0)}) {
    ++tags;
    for (int r = 0; r < reps; ++r) {
      const Eigen::VectorXd mu0 = rng.vec(k, 0.2, 2.0), v = rng.vec(k, -2.0, 2.0);
      record(mismatch(fragment_value(convex::conjugate_single_epigraph(d, cvec(v), mu0, "c")),
                      convex::conjugate_single_value(d, v, mu0)),
             "single " + std::string(model::distance_tag(d.kind)));
    }
  }
  for (const auto& d : {DistanceSpec::cov_frobenius_sq(1.5), DistanceSpec::cov_psd_gauge(1.5)}) {
    ++tags;
    for (int r = 0; r < reps; ++r) {
      const Eigen::MatrixXd anchor = rng.spd(k, 0.3, 2.0), V = rng.sym(k);
      record(mismatch(fragment_value(convex::conjugate_single_epigraph(d, cmat(V), anchor, "c")),
                      convex::conjugate_single_value(d, V, anchor)),
             "single " + std::string(model::distance_tag(d.kind)));
    }
  }

  // Schur lift: [[4z, w^T], [w, Q]] psd iff Q - w w^T / (4z) psd.
  int schur_agree = 0;
  for (int t = 0; t < 200; ++t) {
    const int n = 1 + t % 4;
    const double z = rng.uniform(0.05, 2.0);
    const Eigen::VectorXd w = rng.gauss(n);
    const Eigen::MatrixXd Q = w * w.transpose() / (4.0 * z) + rng.sym(n) * (t % 2 ? 0.3 : 1e-3);
    Eigen::MatrixXd block(n + 1, n + 1);
    block << 4.0 * z, w.transpose(), w, Q;
    schur_agree += (min_eig(block) >= -1e-12) == (min_eig(Q - w * w.transpose() / (4.0 * z)) >= -1e-12);
  }

  // tr(A B) <= ||A||_p ||B||_q.
  int trace_ok = 0;
  for (int t = 0; t < 500; ++t) {
    const int n = rng.integer(1, 4);
    const Eigen::MatrixXd A = rng.sym(n), B = rng.sym(n);
    const double inner = (A * B).trace();
    bool ok = true;
    for (double p : {1.0, 2.0, kInf}) {
      const double bound = model::schatten_norm(A, p) * model::schatten_norm(B, model::dual_exponent(p));
      ok = ok && inner <= bound + 1e-12 * (1.0 + bound);
    }
    trace_ok += ok;
  }
  return {worst <= 1e-6 && schur_agree == 200 && trace_ok == 500,
          std::to_string(tags) + " tags x 200 arguments, max |fragment - numeric| = " + sci(worst) + " (" +
              worst_tag + ", tol 1e-6); Schur " + std::to_string(schur_agree) + "/200; trace-Schatten " +
              std::to_string(trace_ok) + "/500"};
}

// 8. File round trip, rebuild and resolve.
Outcome determinism() {
  fixtures::Rng rng(108);
  const std::vector<model::Scenario> scenarios = {portfolio::portfolio_scenario({}), fixtures::random_c1(rng, 2, 2, 1),
                                                  fixtures::random_c2(rng, 2, 2), fixtures::random_c3(rng, 2)};
  const auto dir = std::filesystem::temp_directory_path() / "gdro_acceptance";
  std::filesystem::create_directories(dir);
  double worst = 0.0;
  bool identical = true;
  for (std::size_t i = 0; i < scenarios.size(); ++i) {
    const std::string path = (dir / ("s" + std::to_string(i) + ".json")).string();
    model::save_scenario(scenarios[i], path);
    std::string dumps[2];
    double objectives[2];
    for (int run = 0; run < 2; ++run) {
      const auto vs = model::validate_scenario(model::load_scenario(path));
      const auto built = reform::build(vs);
      dumps[run] = conic::dump_program(built.program);
      objectives[run] = solve_checked(built).solution.objective;
    }
    identical = identical && dumps[0] == dumps[1];
    const conic::Solution reparsed = conic::solve(conic::parse_program(dumps[0]));
    worst = std::max({worst, std::abs(objectives[0] - objectives[1]), std::abs(reparsed.objective - objectives[0])});
  }
  std::filesystem::remove_all(dir);
  return {identical && worst <= 1e-9, "4 scenarios (portfolio, C1, C2, C3): dumps " +
                                          std::string(identical ? "byte-identical" : "DIFFER") +
                                          ", max objective spread = " + sci(worst) + " (tol 1e-9)"};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "inner moment-bound sandwich", 10.0, inner_sandwich},
      {2, "linear-case closed form vs grid oracle", 30.0, linear_closed_form},
      {3, "reformulation soundness", 300.0, soundness},
      {4, "DRC reduction", 0.0, drc_reduction},
      {5, "monotonicity suites", 0.0, monotonicity},
      {6, "portfolio trends", 120.0, portfolio_trends},
      {7, "convex-calculus exactness", 0.0, convex_exactness},
      {8, "round-trip determinism", 0.0, determinism},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = c.limit <= 0.0 || secs < c.limit;
    const bool pass = out.pass && in_time;
    failed += !pass;
    std::string timing = fmt("%.2f s", secs);
    if (c.limit > 0.0) timing += fmt(" (limit %.0f s)", c.limit);
    std::printf("%s [%d] %s: %s | %s\n", pass ? "PASS" : "FAIL", c.id, c.name.c_str(), out.detail.c_str(),
                timing.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
