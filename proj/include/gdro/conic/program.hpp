#pragma once

#include "gdro/conic/expr.hpp"

#include <Eigen/Dense>

#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace gdro::conic {

enum class ConeKind {
  Zero,                ///< s = 0
  NonNegative,         ///< s >= 0
  SecondOrder,         ///< s = (t, u), t >= ||u||_2
  RotatedSecondOrder,  ///< s = (a, b, w), 2ab >= ||w||^2, a, b >= 0
  Psd,                 ///< s = svec(S), S positive semidefinite
  Exponential,         ///< s = (x, y, z), y exp(x / y) <= z, y > 0
};

std::string_view cone_name(ConeKind kind);
ConeKind cone_from_name(std::string_view name);

struct Cone {
  ConeKind kind = ConeKind::NonNegative;
  int dim = 0;
  /// Matrix order for Psd cones (dim == order*(order+1)/2); 0 otherwise.
  int order = 0;

  static Cone zero(int dim) { return {ConeKind::Zero, dim, 0}; }
  static Cone nonneg(int dim) { return {ConeKind::NonNegative, dim, 0}; }
  static Cone soc(int dim) { return {ConeKind::SecondOrder, dim, 0}; }
  static Cone rsoc(int dim) { return {ConeKind::RotatedSecondOrder, dim, 0}; }
  static Cone psd(int order) { return {ConeKind::Psd, tri_size(order), order}; }
  static Cone exp() { return {ConeKind::Exponential, 3, 0}; }
};

class ProgramError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct VarDecl {
  std::string name;
  int dim = 0;
};

/// Constraint over named variables: rows stacked into s, s in cone.
struct SymConstraint {
  std::string name;
  Cone cone;
  VecExpr rows;
};

/// Exact conic graph representation of a convex function of an affine
/// argument: minimizing `epigraph` subject to `constraints` over `new_vars`
/// reproduces the function value.
struct ConicFragment {
  std::vector<VarDecl> new_vars;
  std::vector<SymConstraint> constraints;
  LinExpr epigraph;

  void declare(const std::string& name, int dim) { new_vars.push_back({name, dim}); }
  void add(std::string name, Cone cone, VecExpr rows);
  /// Absorbs another fragment's variables and constraints (not its epigraph).
  void merge(const ConicFragment& other);
};

struct Triplet {
  int row = 0;
  int col = 0;
  double value = 0.0;
};

struct VariableBlock {
  std::string name;
  int start = 0;
  int dim = 0;
};

/// s = A x + b in cone, with A stored as sorted (row, col) triplets.
struct ConstraintBlock {
  std::string name;
  Cone cone;
  std::vector<Triplet> coeffs;
  Eigen::VectorXd offset;
};

/// Standard-form conic program: minimize c^T x + c0 subject to
/// A_j x + b_j in K_j for every constraint block j.
struct ConicProgram {
  int num_vars = 0;
  std::vector<VariableBlock> variables;
  std::vector<std::pair<int, double>> objective;
  double objective_constant = 0.0;
  std::vector<ConstraintBlock> constraints;

  const VariableBlock* find(std::string_view name) const;
  Eigen::VectorXd slice(const Eigen::VectorXd& x, std::string_view name) const;
  double objective_value(const Eigen::VectorXd& x) const;
  Eigen::VectorXd evaluate(const ConstraintBlock& block, const Eigen::VectorXd& x) const;
  int count_cones(ConeKind kind) const;
};

/// Merges fragments into one program. Variables are laid out in declaration
/// order across (base, fragments...). A name declared more than once with the
/// same dimension denotes one shared variable; a conflicting dimension is an
/// error, as is any reference to an undeclared variable.
ConicProgram assemble(std::span<const ConicFragment> fragments, const ConicFragment& base,
                      const LinExpr& objective);

}  // namespace gdro::conic
