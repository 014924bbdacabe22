#include "gdro/conic/program.hpp"

#include <algorithm>
#include <map>
#include <unordered_map>

namespace gdro::conic {

std::string_view cone_name(ConeKind kind) {
  switch (kind) {
    case ConeKind::Zero: return "zero";
    case ConeKind::NonNegative: return "nonneg";
    case ConeKind::SecondOrder: return "soc";
    case ConeKind::RotatedSecondOrder: return "rsoc";
    case ConeKind::Psd: return "psd";
    case ConeKind::Exponential: return "exp";
  }
  return "unknown";
}

ConeKind cone_from_name(std::string_view name) {
  for (ConeKind k : {ConeKind::Zero, ConeKind::NonNegative, ConeKind::SecondOrder,
                     ConeKind::RotatedSecondOrder, ConeKind::Psd, ConeKind::Exponential})
    if (cone_name(k) == name) return k;
  throw ProgramError("unknown cone '" + std::string(name) + "'");
}

void ConicFragment::add(std::string name, Cone cone, VecExpr rows) {
  if (static_cast<int>(rows.size()) != cone.dim)
    throw ProgramError("constraint '" + name + "': row count does not match cone dimension");
  constraints.push_back({std::move(name), cone, std::move(rows)});
}

void ConicFragment::merge(const ConicFragment& other) {
  new_vars.insert(new_vars.end(), other.new_vars.begin(), other.new_vars.end());
  constraints.insert(constraints.end(), other.constraints.begin(), other.constraints.end());
}

const VariableBlock* ConicProgram::find(std::string_view name) const {
  for (const auto& v : variables)
    if (v.name == name) return &v;
  return nullptr;
}

Eigen::VectorXd ConicProgram::slice(const Eigen::VectorXd& x, std::string_view name) const {
  const VariableBlock* v = find(name);
  if (!v) throw ProgramError("no variable named '" + std::string(name) + "'");
  return x.segment(v->start, v->dim);
}

double ConicProgram::objective_value(const Eigen::VectorXd& x) const {
  double v = objective_constant;
  for (const auto& [col, c] : objective) v += c * x(col);
  return v;
}

Eigen::VectorXd ConicProgram::evaluate(const ConstraintBlock& block, const Eigen::VectorXd& x) const {
  Eigen::VectorXd s = block.offset;
  for (const auto& t : block.coeffs) s(t.row) += t.value * x(t.col);
  return s;
}

int ConicProgram::count_cones(ConeKind kind) const {
  return static_cast<int>(std::count_if(constraints.begin(), constraints.end(),
                                        [&](const ConstraintBlock& b) { return b.cone.kind == kind; }));
}

namespace {

class Layout {
 public:
  void declare(const VarDecl& d) {
    if (d.dim <= 0) throw ProgramError("variable '" + d.name + "' has non-positive dimension");
    auto it = index_.find(d.name);
    if (it != index_.end()) {
      if (blocks_[it->second].dim != d.dim)
        throw ProgramError("variable name collision: '" + d.name + "' declared with dimensions " +
                           std::to_string(blocks_[it->second].dim) + " and " + std::to_string(d.dim));
      return;
    }
    index_.emplace(d.name, blocks_.size());
    blocks_.push_back({d.name, next_, d.dim});
    next_ += d.dim;
  }

  int column(const VarRef& ref, const std::string& context) const {
    auto it = index_.find(ref.name);
    if (it == index_.end())
      throw ProgramError("dangling reference to undeclared variable '" + ref.name + "' in " + context);
    const auto& b = blocks_[it->second];
    if (ref.index < 0 || ref.index >= b.dim)
      throw ProgramError("index " + std::to_string(ref.index) + " out of range for variable '" + ref.name +
                         "' in " + context);
    return b.start + ref.index;
  }

  int size() const { return next_; }
  std::vector<VariableBlock> blocks() const { return blocks_; }

 private:
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<VariableBlock> blocks_;
  int next_ = 0;
};

ConstraintBlock lower(const SymConstraint& c, const Layout& layout) {
  ConstraintBlock b;
  b.name = c.name;
  b.cone = c.cone;
  b.offset = Eigen::VectorXd::Zero(c.cone.dim);
  for (int r = 0; r < c.cone.dim; ++r) {
    const LinExpr& e = c.rows[r];
    b.offset(r) = e.constant();
    for (const auto& [ref, coef] : e.terms()) b.coeffs.push_back({r, layout.column(ref, "constraint '" + c.name + "'"), coef});
  }
  std::sort(b.coeffs.begin(), b.coeffs.end(),
            [](const Triplet& a, const Triplet& t) { return a.row != t.row ? a.row < t.row : a.col < t.col; });
  return b;
}

}  // namespace

ConicProgram assemble(std::span<const ConicFragment> fragments, const ConicFragment& base,
                      const LinExpr& objective) {
  Layout layout;
  for (const auto& d : base.new_vars) layout.declare(d);
  for (const auto& f : fragments)
    for (const auto& d : f.new_vars) layout.declare(d);

  ConicProgram p;
  p.num_vars = layout.size();
  p.variables = layout.blocks();
  for (const auto& c : base.constraints) p.constraints.push_back(lower(c, layout));
  for (const auto& f : fragments)
    for (const auto& c : f.constraints) p.constraints.push_back(lower(c, layout));

  std::map<int, double> obj;
  for (const auto& [ref, coef] : objective.terms()) obj[layout.column(ref, "objective")] += coef;
  for (const auto& [col, coef] : obj)
    if (coef != 0.0) p.objective.emplace_back(col, coef);
  p.objective_constant = objective.constant();
  return p;
}

}  // namespace gdro::conic
