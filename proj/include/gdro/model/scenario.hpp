#pragma once

#include "gdro/model/affine.hpp"
#include "gdro/model/sets.hpp"

#include <Eigen/Dense>

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace gdro::model {

enum class Variant { C1, C1Singleton, LinearC1, C2, C3, C3Singleton };
enum class ObjectiveKind { MinimizeCost, MinimizeEpigraph };

std::string_view variant_tag(Variant v);
Variant variant_from_tag(std::string_view tag);
std::string_view objective_tag(ObjectiveKind k);
ObjectiveKind objective_from_tag(std::string_view tag);

/// mu = mu0 + A zeta with zeta in U_i; Sigma = Sigma0 + Xi with Xi in Z_i.
struct MomentModel {
  Eigen::VectorXd mu0;
  Eigen::MatrixXd sigma0;
  /// Empty means Sigma0^{1/2}.
  Eigen::MatrixXd A;
  SetSpec U1, U2, Z1, Z2;
};

struct DistancePair {
  DistanceSpec phi;
  std::optional<DistanceSpec> psi;
};

/// G d <= g, E d = e. Empty matrices mean no rows.
struct DecisionConstraints {
  Eigen::MatrixXd G;
  Eigen::VectorXd g;
  Eigen::MatrixXd E;
  Eigen::VectorXd e;
};

struct Scenario {
  int n = 0;
  int k = 0;
  ObjectiveKind objective_kind = ObjectiveKind::MinimizeCost;
  Eigen::VectorXd cost;
  PiecewiseAffine constraint;
  MomentModel moments;
  std::optional<SetSpec> support;
  DistancePair distance;
  Variant variant = Variant::C1;
  DecisionConstraints decision;
};

class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(std::vector<std::string> errors);
  const std::vector<std::string>& errors() const { return errors_; }

 private:
  std::vector<std::string> errors_;
};

/// Scenario with resolved defaults (A, distance anchors) and derived factors.
struct ValidatedScenario {
  Scenario scenario;
  Eigen::MatrixXd sigma0_sqrt;
  /// Sigma0^{-1} when Sigma0 is positive definite, empty otherwise.
  Eigen::MatrixXd sigma0_inv;

  const MomentModel& moments() const { return scenario.moments; }
  const Eigen::MatrixXd& A() const { return scenario.moments.A; }
  int n() const { return scenario.n; }
  int k() const { return scenario.k; }
};

inline constexpr double kPsdTol = 1e-8;
inline constexpr int kContainmentSamples = 100;

/// Throws ValidationError carrying every problem found.
ValidatedScenario validate_scenario(const Scenario& s);

/// Boundary points of a set used for containment sampling (deterministic).
std::vector<Eigen::VectorXd> sample_vector_boundary(const SetSpec& s, int k, int count);
std::vector<Eigen::MatrixXd> sample_matrix_boundary(const SetSpec& s, int k, int count);

}  // namespace gdro::model
