#include "gdro/conic/expr.hpp"

#include <cmath>
#include <stdexcept>

namespace gdro::conic {

void LinExpr::add_term(VarRef ref, double coef) {
  if (coef == 0.0) return;
  auto [it, inserted] = terms_.try_emplace(std::move(ref), coef);
  if (!inserted) {
    it->second += coef;
    if (it->second == 0.0) terms_.erase(it);
  }
}

LinExpr& LinExpr::operator+=(const LinExpr& o) {
  for (const auto& [ref, c] : o.terms_) add_term(ref, c);
  constant_ += o.constant_;
  return *this;
}

LinExpr& LinExpr::operator-=(const LinExpr& o) {
  for (const auto& [ref, c] : o.terms_) add_term(ref, -c);
  constant_ -= o.constant_;
  return *this;
}

LinExpr& LinExpr::operator*=(double s) {
  if (s == 0.0) {
    terms_.clear();
    constant_ = 0.0;
    return *this;
  }
  for (auto& [ref, c] : terms_) c *= s;
  constant_ *= s;
  return *this;
}

VecExpr vec_var(const std::string& name, int dim) {
  VecExpr out;
  out.reserve(dim);
  for (int i = 0; i < dim; ++i) out.push_back(LinExpr::var(name, i));
  return out;
}

VecExpr constant_vec(const Eigen::VectorXd& v) {
  VecExpr out;
  out.reserve(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) out.emplace_back(v(i));
  return out;
}

VecExpr operator+(const VecExpr& a, const VecExpr& b) {
  if (a.size() != b.size()) throw std::invalid_argument("VecExpr size mismatch in +");
  VecExpr out = a;
  for (std::size_t i = 0; i < a.size(); ++i) out[i] += b[i];
  return out;
}

VecExpr operator-(const VecExpr& a, const VecExpr& b) {
  if (a.size() != b.size()) throw std::invalid_argument("VecExpr size mismatch in -");
  VecExpr out = a;
  for (std::size_t i = 0; i < a.size(); ++i) out[i] -= b[i];
  return out;
}

VecExpr operator*(double s, const VecExpr& a) {
  VecExpr out = a;
  for (auto& e : out) e *= s;
  return out;
}

VecExpr mat_mul(const Eigen::MatrixXd& m, const VecExpr& a) {
  if (m.cols() != static_cast<Eigen::Index>(a.size()))
    throw std::invalid_argument("mat_mul: dimension mismatch");
  VecExpr out(m.rows());
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      if (m(i, j) != 0.0) out[i] += m(i, j) * a[j];
  return out;
}

LinExpr dot(const Eigen::VectorXd& c, const VecExpr& a) {
  if (c.size() != static_cast<Eigen::Index>(a.size()))
    throw std::invalid_argument("dot: dimension mismatch");
  LinExpr out;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (c(i) != 0.0) out += c(i) * a[i];
  return out;
}

LinExpr sum(const VecExpr& a) {
  LinExpr out;
  for (const auto& e : a) out += e;
  return out;
}

int tri_index(int order, int i, int j) {
  if (i < j) std::swap(i, j);
  return j * order - j * (j - 1) / 2 + (i - j);
}

SymMatExpr::SymMatExpr(int order) : order_(order), lower_(tri_size(order)) {}

SymMatExpr SymMatExpr::variable(const std::string& name, int order) {
  SymMatExpr m(order);
  for (int idx = 0; idx < tri_size(order); ++idx) m.lower_[idx] = LinExpr::var(name, idx);
  return m;
}

SymMatExpr SymMatExpr::constant(const Eigen::MatrixXd& c) {
  const int k = static_cast<int>(c.rows());
  SymMatExpr m(k);
  for (int j = 0; j < k; ++j)
    for (int i = j; i < k; ++i) m.at(i, j) = LinExpr(0.5 * (c(i, j) + c(j, i)));
  return m;
}

SymMatExpr SymMatExpr::bordered(const LinExpr& corner, const VecExpr& col, const SymMatExpr& block) {
  const int k = block.order();
  if (static_cast<int>(col.size()) != k) throw std::invalid_argument("bordered: size mismatch");
  SymMatExpr m(k + 1);
  m.at(0, 0) = corner;
  for (int i = 0; i < k; ++i) m.at(i + 1, 0) = col[i];
  for (int j = 0; j < k; ++j)
    for (int i = j; i < k; ++i) m.at(i + 1, j + 1) = block.at(i, j);
  return m;
}

const LinExpr& SymMatExpr::at(int i, int j) const { return lower_[tri_index(order_, i, j)]; }
LinExpr& SymMatExpr::at(int i, int j) { return lower_[tri_index(order_, i, j)]; }

VecExpr SymMatExpr::svec() const {
  VecExpr out;
  out.reserve(lower_.size());
  for (int j = 0; j < order_; ++j)
    for (int i = j; i < order_; ++i) out.push_back(i == j ? at(i, j) : std::sqrt(2.0) * at(i, j));
  return out;
}

LinExpr SymMatExpr::trace_with(const Eigen::MatrixXd& c) const {
  LinExpr out;
  for (int j = 0; j < order_; ++j)
    for (int i = j; i < order_; ++i) {
      const double w = i == j ? c(i, i) : c(i, j) + c(j, i);
      if (w != 0.0) out += w * at(i, j);
    }
  return out;
}

LinExpr SymMatExpr::trace() const {
  LinExpr out;
  for (int i = 0; i < order_; ++i) out += at(i, i);
  return out;
}

SymMatExpr& SymMatExpr::operator+=(const SymMatExpr& o) {
  if (o.order_ != order_) throw std::invalid_argument("SymMatExpr order mismatch");
  for (std::size_t i = 0; i < lower_.size(); ++i) lower_[i] += o.lower_[i];
  return *this;
}

SymMatExpr& SymMatExpr::operator-=(const SymMatExpr& o) {
  if (o.order_ != order_) throw std::invalid_argument("SymMatExpr order mismatch");
  for (std::size_t i = 0; i < lower_.size(); ++i) lower_[i] -= o.lower_[i];
  return *this;
}

SymMatExpr& SymMatExpr::operator*=(double s) {
  for (auto& e : lower_) e *= s;
  return *this;
}

}  // namespace gdro::conic
