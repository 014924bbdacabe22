#pragma once

#include <Eigen/Dense>

#include <map>
#include <string>
#include <utility>
#include <vector>

namespace gdro::conic {

/// Reference to one scalar entry of a named variable block.
struct VarRef {
  std::string name;
  int index = 0;

  friend bool operator<(const VarRef& a, const VarRef& b) {
    return a.name != b.name ? a.name < b.name : a.index < b.index;
  }
  friend bool operator==(const VarRef& a, const VarRef& b) = default;
};

/// Affine expression over named variables: sum(coef * var) + constant.
/// Terms are kept in an ordered map so that iteration order (and hence any
/// program assembled from it) is deterministic.
class LinExpr {
 public:
  LinExpr() = default;
  LinExpr(double constant) : constant_(constant) {}  // NOLINT(implicit)
  LinExpr(VarRef ref, double coef = 1.0) { add_term(std::move(ref), coef); }

  static LinExpr var(const std::string& name, int index = 0) { return LinExpr(VarRef{name, index}); }

  void add_term(VarRef ref, double coef);
  double constant() const { return constant_; }
  void set_constant(double c) { constant_ = c; }
  const std::map<VarRef, double>& terms() const { return terms_; }
  bool is_constant() const { return terms_.empty(); }

  LinExpr& operator+=(const LinExpr& o);
  LinExpr& operator-=(const LinExpr& o);
  LinExpr& operator*=(double s);

  friend LinExpr operator+(LinExpr a, const LinExpr& b) { return a += b; }
  friend LinExpr operator-(LinExpr a, const LinExpr& b) { return a -= b; }
  friend LinExpr operator*(LinExpr a, double s) { return a *= s; }
  friend LinExpr operator*(double s, LinExpr a) { return a *= s; }
  friend LinExpr operator-(LinExpr a) { return a *= -1.0; }

 private:
  std::map<VarRef, double> terms_;
  double constant_ = 0.0;
};

using VecExpr = std::vector<LinExpr>;

VecExpr vec_var(const std::string& name, int dim);
VecExpr constant_vec(const Eigen::VectorXd& v);
VecExpr operator+(const VecExpr& a, const VecExpr& b);
VecExpr operator-(const VecExpr& a, const VecExpr& b);
VecExpr operator*(double s, const VecExpr& a);
/// M * a for a constant matrix M.
VecExpr mat_mul(const Eigen::MatrixXd& m, const VecExpr& a);
LinExpr dot(const Eigen::VectorXd& c, const VecExpr& a);
LinExpr sum(const VecExpr& a);

/// Symmetric k x k matrix of affine expressions, stored as the lower
/// triangle in column-major order (the same order as svec).
class SymMatExpr {
 public:
  SymMatExpr() = default;
  explicit SymMatExpr(int order);

  /// Variable block of order*(order+1)/2 entries holding the matrix entries
  /// themselves (no sqrt(2) scaling; scaling is applied only by svec()).
  static SymMatExpr variable(const std::string& name, int order);
  static SymMatExpr constant(const Eigen::MatrixXd& m);
  /// Builds [[corner, col^T], [col, block]].
  static SymMatExpr bordered(const LinExpr& corner, const VecExpr& col, const SymMatExpr& block);

  int order() const { return order_; }
  const LinExpr& at(int i, int j) const;
  LinExpr& at(int i, int j);

  /// svec: lower triangle, column-major, off-diagonals scaled by sqrt(2).
  VecExpr svec() const;
  /// tr(M * C) for a constant symmetric C.
  LinExpr trace_with(const Eigen::MatrixXd& c) const;
  LinExpr trace() const;

  SymMatExpr& operator+=(const SymMatExpr& o);
  SymMatExpr& operator-=(const SymMatExpr& o);
  SymMatExpr& operator*=(double s);
  friend SymMatExpr operator+(SymMatExpr a, const SymMatExpr& b) { return a += b; }
  friend SymMatExpr operator-(SymMatExpr a, const SymMatExpr& b) { return a -= b; }
  friend SymMatExpr operator*(double s, SymMatExpr a) { return a *= s; }

 private:
  int order_ = 0;
  std::vector<LinExpr> lower_;
};

int tri_index(int order, int i, int j);
inline int tri_size(int order) { return order * (order + 1) / 2; }

}  // namespace gdro::conic
