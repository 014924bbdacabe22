#include "fixtures.hpp"

#include "gdro/convex/numeric.hpp"
#include "gdro/model/json.hpp"
#include "gdro/portfolio/portfolio.hpp"

#include <gtest/gtest.h>

#include <algorithm>

using namespace gdro::model;

namespace {

bool has_error(const ValidationError& e, const std::string& needle) {
  return std::any_of(e.errors().begin(), e.errors().end(),
                     [&](const std::string& s) { return s.find(needle) != std::string::npos; });
}

std::vector<SetSpec> vector_catalog(int k) {
  Eigen::MatrixXd C(2, k);
  C.setOnes();
  C.row(1) *= -1.0;
  return {SetSpec::singleton(),
          SetSpec::norm_ball(1.0, 0.5),
          SetSpec::norm_ball(2.0, 0.5),
          SetSpec::norm_ball(kInf, 0.5),
          SetSpec::norm_intersection({{2.0, 0.5}, {1.0, 0.6}}),
          SetSpec::polyhedron(C, Eigen::Vector2d(1.0, 0.5))};
}

std::vector<SetSpec> matrix_catalog(int k) {
  const Eigen::MatrixXd xi0 = Eigen::MatrixXd::Identity(k, k);
  return {SetSpec::singleton(),
          SetSpec::frobenius_ball(0.5),
          SetSpec::schatten_ball(1.0, 0.5),
          SetSpec::schatten_ball(2.0, 0.5),
          SetSpec::schatten_ball(kInf, 0.5),
          SetSpec::psd_interval(0.7, xi0),
          SetSpec::psd_interval_trace(0.7, xi0, 2.0 * xi0, 0.1),
          SetSpec::vec_lifted(1.0, 0.5),
          SetSpec::vec_lifted(2.0, 0.5),
          SetSpec::vec_lifted(kInf, 0.5),
          SetSpec::spectral_norm_bound(0.5),
          SetSpec::norm_intersection({{2.0, 0.5}, {1.0, 0.6}})};
}

std::string dump(const Scenario& s) { return scenario_to_json(s).dump(); }

}  // namespace

TEST(Validate, PortfolioScenarioIsValid) {
  const Scenario s = gdro::portfolio::portfolio_scenario({});
  ValidatedScenario v;
  ASSERT_NO_THROW(v = validate_scenario(s));
  EXPECT_EQ(v.k(), 3);
  EXPECT_EQ(v.n(), 5);
  EXPECT_EQ(v.scenario.constraint.m(), 2);
  EXPECT_LT((v.A() * v.A() - s.moments.sigma0).norm(), 1e-12);
  EXPECT_EQ(v.sigma0_inv.rows(), 3);
}

TEST(Validate, InnerRadiusLargerThanOuterIsContainmentError) {
  fixtures::Rng rng(1);
  Scenario s = fixtures::random_c1(rng, 2, 2, 2);
  s.moments.U1 = SetSpec::norm_ball(2.0, 0.3);
  s.moments.U2 = SetSpec::norm_ball(2.0, 0.5);
  try {
    validate_scenario(s);
    FAIL() << "expected containment error";
  } catch (const ValidationError& e) {
    EXPECT_TRUE(has_error(e, "containment: U2 is not contained in U1"));
  }
  s.moments.U2 = SetSpec::norm_ball(2.0, 0.3);
  s.moments.Z2 = SetSpec::frobenius_ball(10.0);
  try {
    validate_scenario(s);
    FAIL() << "expected containment error";
  } catch (const ValidationError& e) {
    EXPECT_TRUE(has_error(e, "containment: Z2 is not contained in Z1"));
  }
}

TEST(Validate, LinearVariantWithOnePieceIsValid) {
  fixtures::Rng rng(2);
  Scenario s = fixtures::random_linear(rng, 2);
  EXPECT_NO_THROW(validate_scenario(s));
  s.constraint.pieces.push_back(s.constraint.pieces.front());
  try {
    validate_scenario(s);
    FAIL() << "expected variant error";
  } catch (const ValidationError& e) {
    EXPECT_TRUE(has_error(e, "linear_c1 requires m = 1"));
  }
}

TEST(Validate, CollectsEveryError) {
  fixtures::Rng rng(3);
  Scenario s = fixtures::random_c1(rng, 2, 2, 0);
  s.moments.sigma0 << 1.0, 0.5, 0.4, 1.0;
  s.cost = Eigen::VectorXd::Zero(3);
  try {
    validate_scenario(s);
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_TRUE(has_error(e, "Sigma0 is not symmetric"));
    EXPECT_TRUE(has_error(e, "objective cost"));
  }
}

TEST(Validate, RejectsIndefiniteCovariance) {
  fixtures::Rng rng(4);
  Scenario s = fixtures::random_c1(rng, 2, 2, 0);
  s.moments.sigma0 << 1.0, 0.0, 0.0, -1e-6;
  try {
    validate_scenario(s);
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_TRUE(has_error(e, "not positive semidefinite"));
  }
  s.moments.sigma0(1, 1) = -1e-9;
  s.moments.A = Eigen::MatrixXd::Identity(2, 2);
  EXPECT_NO_THROW(validate_scenario(s));
}

TEST(Validate, VariantFieldRules) {
  fixtures::Rng rng(5);
  Scenario c2 = fixtures::random_c2(rng, 2, 2);
  EXPECT_NO_THROW(validate_scenario(c2));
  c2.distance.psi = DistanceSpec::cov_frobenius_sq(1.0);
  EXPECT_THROW(validate_scenario(c2), ValidationError);

  Scenario c3 = fixtures::random_c3(rng, 2);
  EXPECT_NO_THROW(validate_scenario(c3));
  c3.support.reset();
  EXPECT_THROW(validate_scenario(c3), ValidationError);

  Scenario c1 = fixtures::random_c1(rng, 2, 2, 1);
  c1.distance.phi = DistanceSpec::mean_entropy();
  try {
    validate_scenario(c1);
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_TRUE(has_error(e, "no joint conjugate"));
  }

  Scenario single = fixtures::random_c1_singleton(rng, 2, 2, 0);
  EXPECT_NO_THROW(validate_scenario(single));
  single.moments.Z1 = SetSpec::frobenius_ball(0.1);
  EXPECT_THROW(validate_scenario(single), ValidationError);
}

TEST(Validate, IsIdempotent) {
  fixtures::Rng rng(6);
  std::vector<Scenario> cases = {gdro::portfolio::portfolio_scenario({}), fixtures::random_c1(rng, 2, 2, 0),
                                 fixtures::random_c1(rng, 3, 2, 1), fixtures::random_c1(rng, 2, 3, 2),
                                 fixtures::random_c1_singleton(rng, 2, 2, 0), fixtures::random_c2(rng, 2, 2),
                                 fixtures::random_c3(rng, 2), fixtures::random_linear(rng, 3)};
  for (const auto& s : cases) {
    const ValidatedScenario once = validate_scenario(s);
    const ValidatedScenario twice = validate_scenario(once.scenario);
    EXPECT_EQ(dump(once.scenario), dump(twice.scenario));
    EXPECT_EQ(once.sigma0_sqrt, twice.sigma0_sqrt);
  }
}

TEST(Json, RoundTripPreservesScenario) {
  fixtures::Rng rng(7);
  std::vector<Scenario> cases = {gdro::portfolio::portfolio_scenario({}), fixtures::random_c1(rng, 2, 2, 0),
                                 fixtures::random_c1(rng, 2, 2, 1), fixtures::random_c1(rng, 2, 2, 2),
                                 fixtures::random_c1_singleton(rng, 2, 2, 0), fixtures::random_c2(rng, 2, 2),
                                 fixtures::random_c3(rng, 2)};
  for (const auto& s : cases) {
    const std::string text = dump(s);
    const Scenario back = scenario_from_json(nlohmann::ordered_json::parse(text));
    EXPECT_EQ(text, dump(back));
  }
}

TEST(Json, MalformedInputIsValidationError) {
  EXPECT_THROW(scenario_from_json(nlohmann::ordered_json::parse(R"({"schema": 1})")), ValidationError);
  EXPECT_THROW(scenario_from_json(nlohmann::ordered_json::parse(R"({"schema": 2, "variant": "c1"})")),
               ValidationError);
  auto j = scenario_to_json(gdro::portfolio::portfolio_scenario({}));
  j["moments"]["U1"]["tag"] = "banana";
  EXPECT_THROW(scenario_from_json(j), ValidationError);
}

TEST(Affine, Examples) {
  AffineScalar f{Eigen::Vector2d(1.0, 2.0), 0.5};
  EXPECT_DOUBLE_EQ(affine_eval(f, Eigen::Vector2d(1.0, 1.0)), 3.5);
  AffineScalar zero{Eigen::Vector3d::Zero(), -2.0};
  EXPECT_DOUBLE_EQ(affine_eval(zero, Eigen::Vector3d(4.0, -1.0, 7.0)), -2.0);

  const Scenario s = gdro::portfolio::portfolio_scenario({});
  Eigen::VectorXd d(5);
  d << 0.2, 0.3, 0.5, 0.1, 0.4;
  EXPECT_EQ(affine_eval(s.constraint.w, d), d.head(3));
  EXPECT_THROW(affine_eval(f, Eigen::Vector3d::Zero()), DimensionError);
  EXPECT_THROW(affine_eval(s.constraint.w, Eigen::Vector2d::Zero()), DimensionError);
}

TEST(Affine, PiecewiseValue) {
  const Scenario s = gdro::portfolio::portfolio_scenario({});
  Eigen::VectorXd d(5);
  d << 0.2, 0.3, 0.5, 0.1, 0.4;
  const Eigen::Vector3d xi(-0.3, 0.1, 0.0);
  const double loss = -d.head(3).dot(xi);
  const double expected = 0.1 - 0.4 + std::max(loss - 0.1, 0.0) / 0.05;
  EXPECT_NEAR(s.constraint.value(d, xi), expected, 1e-12);
}

TEST(Sets, EveryTagContainsOrigin) {
  for (int k : {1, 2, 3}) {
    for (const auto& s : matrix_catalog(k)) EXPECT_TRUE(contains(s, Eigen::MatrixXd(Eigen::MatrixXd::Zero(k, k)))) << set_tag(s.kind);
  }
  for (const auto& s : vector_catalog(2)) EXPECT_TRUE(contains(s, Eigen::VectorXd(Eigen::VectorXd::Zero(2)))) << set_tag(s.kind);
}

TEST(Sets, BoundarySamplesLieInTheSet) {
  for (const auto& s : vector_catalog(2))
    for (const auto& z : sample_vector_boundary(s, 2, 100)) EXPECT_TRUE(contains(s, z, 1e-9)) << set_tag(s.kind);
  for (const auto& s : matrix_catalog(3))
    for (const auto& x : sample_matrix_boundary(s, 3, 100)) EXPECT_TRUE(contains(s, x, 1e-9)) << set_tag(s.kind);
}

TEST(Distances, ZeroAtCoincidingArguments) {
  fixtures::Rng rng(8);
  const int k = 3;
  for (int rep = 0; rep < 20; ++rep) {
    const Eigen::VectorXd mu = rng.vec(k, 0.1, 2.0);
    const Eigen::MatrixXd sigma = rng.spd(k, 0.2, 2.0);
    for (const auto& d : {DistanceSpec::mean_norm(1.0, 2.0), DistanceSpec::mean_norm(2.0, 2.0),
                          DistanceSpec::mean_norm(kInf, 2.0), DistanceSpec::mean_mahalanobis(3.0, sigma),
                          DistanceSpec::mean_entropy()})
      EXPECT_LE(std::abs(gdro::convex::distance_value(d, mu, mu)), 1e-12) << distance_tag(d.kind);
    for (const auto& d : {DistanceSpec::cov_frobenius_sq(2.0), DistanceSpec::cov_general_quad(sigma, sigma),
                          DistanceSpec::cov_logdet(2.0), DistanceSpec::cov_psd_gauge(2.0)})
      EXPECT_LE(std::abs(gdro::convex::distance_value(d, sigma, sigma)), 1e-12) << distance_tag(d.kind);
    EXPECT_LE(gdro::convex::c2_distance_value(1.5, mu, sigma, mu), 1e-12);
  }
}
