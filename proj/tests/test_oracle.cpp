#include "fixtures.hpp"

#include "gdro/convex/numeric.hpp"
#include "gdro/oracle/moment.hpp"
#include "gdro/oracle/worst_case.hpp"
#include "gdro/reform/builders.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace gdro;
using oracle::GridConfig;
using oracle::MomentPiece;

namespace {

const GridConfig kSmallGrid{7, 3, 9, 1};

Eigen::VectorXd builder_optimum(const model::ValidatedScenario& vs) {
  const reform::SolvedProgram sol = reform::solve(reform::build(vs));
  EXPECT_EQ(sol.solution.status, conic::SolveStatus::Optimal) << sol.solution.message;
  return sol.decision;
}

}  // namespace

TEST(InnerMomentBound, SpecExamples) {
  const std::vector<MomentPiece> single{{0.5, 2.0}};
  EXPECT_NEAR(oracle::inner_moment_bound(single, 1.0, 0.25).value, 2.5, 1e-9);
  const std::vector<MomentPiece> abs{{0.0, 1.0}, {0.0, -1.0}};
  EXPECT_NEAR(oracle::inner_moment_bound(abs, 0.0, 1.0).value, 1.0, 1e-6);
  EXPECT_NEAR(oracle::inner_moment_bound(abs, 0.0, 0.0).value, 0.0, 1e-12);
}

TEST(InnerMomentBound, NegativeVarianceThrows) {
  const std::vector<MomentPiece> p{{0.0, 1.0}};
  EXPECT_THROW(oracle::inner_moment_bound(p, 0.0, -1e-3), oracle::OracleError);
  EXPECT_THROW(oracle::inner_dual_bound(p, 0.0, -1.0), oracle::OracleError);
}

// sup E|y| over mean m, variance s2 is sqrt(s2 + m^2) (two points at +-sqrt(s2 + m^2)).
TEST(InnerMomentBound, AbsoluteValueClosedForm) {
  fixtures::Rng rng(3);
  const std::vector<MomentPiece> abs{{0.0, 1.0}, {0.0, -1.0}};
  for (int t = 0; t < 30; ++t) {
    const double m = rng.uniform(-2.0, 2.0), s2 = rng.uniform(0.0, 3.0);
    EXPECT_NEAR(oracle::inner_moment_bound(abs, m, s2).value, std::sqrt(s2 + m * m), 1e-6);
  }
}

// sup E(y - K)^+ = ((m - K) + sqrt(s2 + (m - K)^2)) / 2.
TEST(InnerMomentBound, CallPayoffClosedForm) {
  fixtures::Rng rng(4);
  for (int t = 0; t < 30; ++t) {
    const double K = rng.uniform(-2.0, 2.0), m = rng.uniform(-2.0, 2.0), s2 = rng.uniform(0.01, 3.0);
    const std::vector<MomentPiece> call{{0.0, 0.0}, {-K, 1.0}};
    const double expected = 0.5 * ((m - K) + std::sqrt(s2 + (m - K) * (m - K)));
    EXPECT_NEAR(oracle::inner_moment_bound(call, m, s2).value, expected, 1e-6 * (1.0 + expected));
    EXPECT_NEAR(oracle::inner_dual_bound(call, m, s2), expected, 1e-6 * (1.0 + expected));
  }
}

TEST(InnerMomentBound, DualPrimalSandwichOnRandomInstances) {
  fixtures::Rng rng(5);
  for (int t = 0; t < 100; ++t) {
    const auto pieces = fixtures::random_pieces(rng, rng.integer(1, 5));
    const double m = rng.uniform(-2.0, 2.0), s2 = rng.uniform(0.0, 4.0);
    const oracle::MomentBound r = oracle::inner_moment_bound(pieces, m, s2);
    EXPECT_LE(r.primal, r.value + 1e-9 * (1.0 + std::abs(r.value)));
    EXPECT_LE(r.value - r.primal, 1e-4 * (1.0 + std::abs(r.value)));
  }
}

TEST(InnerMomentBound, DualCertificateIsFeasible) {
  fixtures::Rng rng(6);
  for (int t = 0; t < 40; ++t) {
    const auto pieces = fixtures::random_pieces(rng, rng.integer(2, 4));
    const double m = rng.uniform(-1.0, 1.0), s2 = rng.uniform(0.1, 2.0);
    const oracle::MomentBound r = oracle::inner_moment_bound(pieces, m, s2);
    EXPECT_GT(r.gamma2, 0.0);
    EXPECT_NEAR(r.gamma0 + r.gamma1 * m + r.gamma2 * (s2 + m * m), r.value, 1e-8 * (1.0 + std::abs(r.value)));
    for (int j = 0; j <= 200; ++j) {
      const double y = m - 10.0 + 0.1 * j;
      const double q = r.gamma0 + r.gamma1 * y + r.gamma2 * y * y;
      for (const auto& p : pieces) EXPECT_GE(q, p.a + p.b * y - 1e-8 * (1.0 + std::abs(q)));
    }
  }
}

TEST(InnerMomentBound, JensenAndVarianceMonotonicity) {
  fixtures::Rng rng(8);
  for (int t = 0; t < 30; ++t) {
    const auto pieces = fixtures::random_pieces(rng, 3);
    const double m = rng.uniform(-1.0, 1.0);
    double point = -1e300;
    for (const auto& p : pieces) point = std::max(point, p.a + p.b * m);
    double prev = point;
    for (double s2 : {0.1, 0.5, 1.0, 2.0}) {
      const double v = oracle::inner_dual_bound(pieces, m, s2);
      EXPECT_GE(v, prev - 1e-9);
      prev = v;
    }
  }
}

TEST(InnerMomentBound, CommonSlopeIsVarianceFree) {
  const std::vector<MomentPiece> p{{0.3, 1.5}, {-0.2, 1.5}};
  EXPECT_NEAR(oracle::inner_moment_bound(p, 2.0, 5.0).value, 0.3 + 3.0, 1e-12);
}

TEST(GridConfig, RejectsSmallCounts) {
  EXPECT_THROW((GridConfig{2, 3, 3, 0}.validate()), std::invalid_argument);
  EXPECT_THROW((GridConfig{3, 3, 3, -1}.validate()), std::invalid_argument);
  EXPECT_NO_THROW((GridConfig{3, 3, 3, 0}.validate()));
}

TEST(WorstCase, ZeroUncertaintyIsDeterministicCheck) {
  fixtures::Rng rng(10);
  model::Scenario sc = fixtures::random_c1_singleton(rng, 2, 2, 1);
  sc.moments.U1 = model::SetSpec::singleton();
  sc.moments.Z1 = model::SetSpec::psd_interval(0.0, sc.moments.sigma0);
  const auto vs = model::validate_scenario(sc);
  const Eigen::VectorXd d = rng.vec(2, -1.0, 1.0);
  const oracle::WorstCaseReport r = oracle::worst_case_violation(vs, d, kSmallGrid);
  std::vector<MomentPiece> pieces;
  for (const auto& p : sc.constraint.pieces) pieces.push_back({model::affine_eval(p.a, d), p.b});
  const double expected = oracle::inner_moment_bound(pieces, d.dot(sc.moments.mu0), d.dot(sc.moments.sigma0 * d)).value;
  EXPECT_NEAR(r.max_violation, expected, 1e-7);
  EXPECT_NEAR(r.penalty, 0.0, 1e-12);
  EXPECT_NEAR(r.grid_error_bound, 0.0, 1e-12);
  EXPECT_TRUE(r.attaining_mu.isApprox(sc.moments.mu0));
}

TEST(WorstCase, ReportIdentityAtAttainingNode) {
  fixtures::Rng rng(11);
  const auto vs = model::validate_scenario(fixtures::random_c1(rng, 2, 2, 1));
  const oracle::WorstCaseReport r = oracle::worst_case_violation(vs, rng.vec(2, -1.0, 1.0), kSmallGrid);
  EXPECT_DOUBLE_EQ(r.max_violation, r.inner_bound - r.penalty);
  const auto& mm = vs.moments();
  const double pen = convex::min_distance(vs.scenario.distance.phi, r.attaining_mu, mm.U2, mm.mu0, mm.A) +
                     convex::min_distance(*vs.scenario.distance.psi, r.attaining_sigma, mm.Z2, mm.sigma0);
  EXPECT_NEAR(r.penalty, pen, 1e-9);
}

TEST(WorstCase, BuilderOptimumPassesAndScaledDecisionFails) {
  fixtures::Rng rng(12);
  for (int combo = 0; combo < 3; ++combo) {
    const auto vs = model::validate_scenario(fixtures::random_c1(rng, 2, 2, combo));
    const Eigen::VectorXd d = builder_optimum(vs);
    const oracle::Verification ok = oracle::verify_feasibility(vs, d, 1e-4, kSmallGrid);
    EXPECT_TRUE(ok.pass) << "combo " << combo << " violation " << ok.report.max_violation;
    EXPECT_LE(ok.report.max_violation, 1e-4);
    const Eigen::VectorXd bad = 2.0 * d;
    if (reform::evaluate_lhs(vs, bad) <= 0.05) continue;
    const oracle::WorstCaseReport r = oracle::worst_case_violation(vs, bad, kSmallGrid);
    EXPECT_LE(r.max_violation, reform::evaluate_lhs(vs, bad) + 1e-6);
    EXPECT_EQ(r.attaining_mu.size(), 2);
    EXPECT_EQ(r.attaining_sigma.rows(), 2);
  }
}

TEST(WorstCase, DetectsViolationWithAttainingMoments) {
  fixtures::Rng rng(13);
  model::Scenario sc = fixtures::random_c1(rng, 2, 1, 1);
  const auto vs = model::validate_scenario(sc);
  const Eigen::VectorXd d = 3.0 * builder_optimum(vs);
  const double lhs = reform::evaluate_lhs(vs, d);
  ASSERT_GT(lhs, 0.0);
  const oracle::Verification v = oracle::verify_feasibility(vs, d, 0.0, GridConfig{9, 5, 11, 3});
  EXPECT_GT(v.report.max_violation, 0.0);
  EXPECT_NEAR(v.report.max_violation, lhs, 1e-3 * (1.0 + lhs));
  EXPECT_TRUE(model::contains(sc.moments.U1, Eigen::VectorXd(v.report.attaining_mu - sc.moments.mu0), 1e-7));
}

TEST(WorstCase, DrcFeasibleDecisionHasNoViolation) {
  fixtures::Rng rng(14);
  model::Scenario sc = fixtures::random_c1(rng, 2, 2, 0);
  sc.moments.U2 = sc.moments.U1;
  sc.moments.Z2 = sc.moments.Z1;
  const auto vs = model::validate_scenario(sc);
  const reform::SolvedProgram drc = reform::solve(reform::build_drc(vs));
  ASSERT_EQ(drc.solution.status, conic::SolveStatus::Optimal);
  const oracle::WorstCaseReport r = oracle::worst_case_violation(vs, drc.decision, kSmallGrid);
  EXPECT_LE(r.max_violation, r.grid_error_bound);
  EXPECT_LE(r.max_violation, 1e-6);
}

TEST(WorstCase, ParallelMatchesSerial) {
  fixtures::Rng rng(15);
  const auto vs = model::validate_scenario(fixtures::random_c1(rng, 2, 2, 0));
  const Eigen::VectorXd d = rng.vec(2, -1.0, 1.0);
  const auto a = oracle::worst_case_violation(vs, d, kSmallGrid);
  const auto b = oracle::worst_case_violation_serial(vs, d, kSmallGrid);
  EXPECT_EQ(a.max_violation, b.max_violation);
  EXPECT_EQ(a.attaining_mu, b.attaining_mu);
  EXPECT_EQ(a.attaining_sigma, b.attaining_sigma);
  EXPECT_EQ(a.grid_error_bound, b.grid_error_bound);
  EXPECT_EQ(a.skipped, b.skipped);
}

TEST(WorstCase, EnlargingOuterSetsDoesNotDecreaseViolation) {
  fixtures::Rng rng(16);
  for (int t = 0; t < 3; ++t) {
    model::Scenario sc = fixtures::random_c1_singleton(rng, 2, 2, 1);
    const Eigen::VectorXd d = rng.vec(2, -1.0, 1.0);
    const double r = sc.moments.U1.radius, theta = sc.moments.Z1.theta;
    const auto small = oracle::worst_case_violation(model::validate_scenario(sc), d, kSmallGrid);
    sc.moments.U1.radius = 1.5 * r;
    sc.moments.Z1.theta = 1.5 * theta;
    const auto large = oracle::worst_case_violation(model::validate_scenario(sc), d, kSmallGrid);
    EXPECT_GE(large.max_violation, small.max_violation - large.grid_error_bound);
  }
}

TEST(WorstCase, RefinementStaysWithinErrorBound) {
  fixtures::Rng rng(17);
  const auto vs = model::validate_scenario(fixtures::random_c1_singleton(rng, 2, 2, 1));
  const Eigen::VectorXd d = rng.vec(2, -1.0, 1.0);
  const auto coarse = oracle::worst_case_violation(vs, d, GridConfig{5, 3, 9, 0});
  const auto fine = oracle::worst_case_violation(vs, d, GridConfig{9, 5, 9, 0});
  EXPECT_LE(std::abs(fine.max_violation - coarse.max_violation), coarse.grid_error_bound);
  EXPECT_LE(fine.grid_error_bound, coarse.grid_error_bound);
}

TEST(WorstCase, RefusesUnsupportedInput) {
  fixtures::Rng rng(18);
  const auto c2 = model::validate_scenario(fixtures::random_c2(rng, 2, 2));
  EXPECT_THROW(oracle::worst_case_violation(c2, Eigen::VectorXd::Zero(2)), oracle::OracleError);
  const auto big = model::validate_scenario(fixtures::random_c1(rng, 4, 1, 0));
  EXPECT_THROW(oracle::worst_case_violation(big, Eigen::VectorXd::Zero(4)), oracle::OracleError);
  const auto ok = model::validate_scenario(fixtures::random_c1(rng, 2, 1, 0));
  EXPECT_THROW(oracle::worst_case_violation(ok, Eigen::VectorXd::Zero(3)), std::invalid_argument);
}

TEST(WorstCase, ReportJsonHasEveryField) {
  fixtures::Rng rng(19);
  const auto vs = model::validate_scenario(fixtures::random_linear(rng, 2));
  const auto j = oracle::report_to_json(oracle::worst_case_violation(vs, rng.vec(2, -1.0, 1.0), kSmallGrid));
  for (const char* key : {"max_violation", "attaining_mu", "attaining_sigma", "inner_bound", "penalty",
                          "grid_error_bound", "nodes", "skipped"})
    EXPECT_TRUE(j.contains(key)) << key;
}

TEST(C3WorstCase, ConstantConstraintGivesItsValue) {
  fixtures::Rng rng(20);
  model::Scenario sc = fixtures::random_c3(rng, 2);
  sc.constraint.pieces[0].b = 0.0;
  sc.constraint.pieces[0].a.coeffs.setZero();
  sc.constraint.pieces[0].a.constant = -0.7;
  const auto vs = model::validate_scenario(sc);
  const auto r = oracle::c3_worst_case(vs, rng.vec(2, -1.0, 1.0), kSmallGrid);
  EXPECT_NEAR(r.max_violation, -0.7, 1e-9);
}

TEST(C3WorstCase, CoveringInnerSetLeavesPlainMaximum) {
  fixtures::Rng rng(21);
  model::Scenario sc = fixtures::random_c3(rng, 2);
  sc.moments.U2 = sc.moments.U1;
  const auto vs = model::validate_scenario(sc);
  const Eigen::VectorXd d = rng.vec(2, -1.0, 1.0);
  const auto r = oracle::c3_worst_case(vs, d, GridConfig{9, 3, 3, 3});
  EXPECT_NEAR(r.penalty, 0.0, 1e-9);
  // Affine g over mu0 + A * (l2 ball): maximum b w^T mu0 + |b| r |A w| in closed form.
  const auto& p = sc.constraint.pieces[0];
  const double expected = model::affine_eval(p.a, d) + p.b * d.dot(sc.moments.mu0) +
                          std::abs(p.b) * sc.moments.U1.radius * (vs.A() * d).norm();
  EXPECT_LE(r.max_violation, expected + 1e-9);
  EXPECT_GE(r.max_violation, expected - r.grid_error_bound);
  EXPECT_NEAR(reform::evaluate_lhs(vs, d), expected, 1e-6);
}

TEST(C3WorstCase, BuilderOptimumPasses) {
  fixtures::Rng rng(22);
  for (int t = 0; t < 4; ++t) {
    const auto vs = model::validate_scenario(fixtures::random_c3(rng, 2, t % 2 == 1));
    const Eigen::VectorXd d = builder_optimum(vs);
    const oracle::Verification v = oracle::verify_feasibility(vs, d, 1e-4, kSmallGrid);
    EXPECT_TRUE(v.pass) << v.report.max_violation;
    EXPECT_LE(v.report.max_violation, reform::evaluate_lhs(vs, d) + 1e-6);
  }
}

TEST(C3WorstCase, SkipsNodesOutsideSupport) {
  fixtures::Rng rng(23);
  model::Scenario sc = fixtures::random_c3(rng, 2);
  Eigen::MatrixXd C(2, 2);
  C << 1.0, 0.0, 0.0, 1.0;
  sc.support = model::SetSpec::polyhedron(C, sc.moments.mu0.cwiseMax(0.0) + Eigen::VectorXd::Constant(2, 0.01));
  const auto vs = model::validate_scenario(sc);
  const auto r = oracle::c3_worst_case(vs, rng.vec(2, -1.0, 1.0), kSmallGrid);
  EXPECT_GT(r.skipped, 0);
}

// For affine g every law with mean mu on the support gives E g = g(mu).
TEST(C3WorstCase, JensenTightnessForAffineG) {
  fixtures::Rng rng(24);
  for (int t = 0; t < 20; ++t) {
    const Eigen::VectorXd w = rng.vec(2, -1.0, 1.0);
    const double a = rng.uniform(-1.0, 1.0);
    std::vector<Eigen::VectorXd> pts;
    Eigen::VectorXd probs = rng.vec(6, 0.1, 1.0);
    probs /= probs.sum();
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(2);
    double eg = 0.0;
    for (int j = 0; j < 6; ++j) {
      pts.push_back(rng.vec(2, -3.0, 3.0));
      mean += probs(j) * pts.back();
      eg += probs(j) * (a + w.dot(pts.back()));
    }
    EXPECT_NEAR(eg, a + w.dot(mean), 1e-12);
  }
}
