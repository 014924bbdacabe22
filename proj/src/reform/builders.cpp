#include "gdro/reform/builders.hpp"

#include "gdro/conic/expr.hpp"
#include "gdro/convex/fragments.hpp"

#include <algorithm>
#include <span>

namespace gdro::reform {

using conic::Cone;
using conic::ConicFragment;
using conic::LinExpr;
using conic::SymMatExpr;
using conic::VecExpr;
using model::DistanceSpec;
using model::SetSpec;
using model::ValidatedScenario;
using model::Variant;

namespace {

class SystemBuilder {
 public:
  SystemBuilder(const ValidatedScenario& vs, const BuildOptions& opt)
      : vs_(vs), sc_(vs.scenario), n_(vs.n()), k_(vs.k()), opt_(opt) {
    if (opt.fixed_decision && opt.fixed_decision->size() != n_)
      throw BuildError("fixed decision has length " + std::to_string(opt.fixed_decision->size()) + ", expected " +
                       std::to_string(n_));
    scalar_vector("d", n_);
    d_ = conic::vec_var("d", n_);
    w_ = conic::mat_mul(sc_.constraint.w.matrix, d_) + conic::constant_vec(sc_.constraint.w.offset);
  }

  int k() const { return k_; }
  int m() const { return sc_.constraint.m(); }
  double b(int i) const { return sc_.constraint.pieces[i].b; }
  const VecExpr& w() const { return w_; }
  const Eigen::VectorXd& mu0() const { return sc_.moments.mu0; }
  const Eigen::MatrixXd& sigma0() const { return sc_.moments.sigma0; }
  const model::MomentModel& moments() const { return sc_.moments; }
  const model::Scenario& scenario() const { return sc_; }

  LinExpr a(int i) const {
    const auto& p = sc_.constraint.pieces[i].a;
    return conic::dot(p.coeffs, d_) + LinExpr(p.constant);
  }

  LinExpr scalar(const std::string& name) {
    scalar_vector(name, 1);
    return LinExpr::var(name);
  }

  VecExpr scalar_vector(const std::string& name, int dim) {
    base_.declare(name, dim);
    symbols_.push_back(name);
    return conic::vec_var(name, dim);
  }

  SymMatExpr matrix(const std::string& name) {
    base_.declare(name, conic::tri_size(k_));
    symbols_.push_back(name);
    return SymMatExpr::variable(name, k_);
  }

  /// A^T v: pairing v^T A zeta for mu = mu0 + A zeta.
  VecExpr shaped(const VecExpr& v) const { return conic::mat_mul(vs_.A().transpose(), v); }

  LinExpr support(const SetSpec& S, const VecExpr& arg, const std::string& prefix) {
    return take(convex::support_epigraph(S, arg, prefix));
  }
  LinExpr support(const SetSpec& S, const SymMatExpr& arg, const std::string& prefix) {
    return take(convex::support_epigraph(S, arg, prefix));
  }
  LinExpr joint(const DistanceSpec& phi, const VecExpr& arg, const std::string& prefix) {
    return take(convex::conjugate_joint_epigraph(phi, arg, prefix));
  }
  LinExpr joint(const DistanceSpec& psi, const SymMatExpr& arg, const std::string& prefix) {
    return take(convex::conjugate_joint_epigraph(psi, arg, prefix));
  }
  LinExpr single(const DistanceSpec& phi, const VecExpr& arg, const std::string& prefix) {
    return take(convex::conjugate_single_epigraph(phi, arg, mu0(), prefix));
  }
  LinExpr single(const DistanceSpec& psi, const SymMatExpr& arg, const std::string& prefix) {
    return take(convex::conjugate_single_epigraph(psi, arg, sigma0(), prefix));
  }

  /// expr <= 0.
  void le(const std::string& name, const LinExpr& expr) { base_.add(name, Cone::nonneg(1), VecExpr{-expr}); }
  void eq(const std::string& name, const VecExpr& rows) {
    base_.add(name, Cone::zero(static_cast<int>(rows.size())), rows);
  }
  void psd(const std::string& name, const SymMatExpr& m) { base_.add(name, Cone::psd(m.order()), m.svec()); }

  /// t^2 <= 4 z vhat, z >= z_min and the Schur block [[4z, w^T], [w, Q]] >= 0.
  void quadratic_lift(const LinExpr& t, const LinExpr& z, const LinExpr& vhat, const SymMatExpr& Q) {
    base_.add("t2_le_4zv", Cone::rsoc(3), VecExpr{2.0 * z, vhat, t});
    base_.add("z_floor", Cone::nonneg(1), VecExpr{z - LinExpr(kZMin)});
    psd("schur", SymMatExpr::bordered(4.0 * z, w_, Q));
  }

  BuiltProgram finish(const LinExpr& lhs, Variant variant, bool drc) {
    ConicFragment sys = base_;
    LinExpr objective;
    if (opt_.fixed_decision) {
      sys.add("fix_d", Cone::zero(n_), d_ - conic::constant_vec(*opt_.fixed_decision));
      objective = lhs;
    } else {
      sys.add("gdrc", Cone::nonneg(1), VecExpr{-lhs});
      const auto& dc = sc_.decision;
      if (dc.G.rows() > 0) sys.add("decision_ineq", Cone::nonneg(static_cast<int>(dc.G.rows())),
                                   conic::constant_vec(dc.g) - conic::mat_mul(dc.G, d_));
      if (dc.E.rows() > 0) sys.add("decision_eq", Cone::zero(static_cast<int>(dc.E.rows())),
                                   conic::mat_mul(dc.E, d_) - conic::constant_vec(dc.e));
      objective = conic::dot(sc_.cost, d_);
    }
    BuiltProgram out;
    out.program = conic::assemble(std::span<const ConicFragment>(parts_), sys, objective);
    out.variant = variant;
    out.drc = drc;
    out.evaluate = opt_.fixed_decision.has_value();
    for (const auto& name : symbols_) {
      const conic::VariableBlock* blk = out.program.find(name);
      std::vector<int> cols(blk->dim);
      for (int j = 0; j < blk->dim; ++j) cols[j] = blk->start + j;
      out.variable_map[name] = std::move(cols);
    }
    return out;
  }

 private:
  LinExpr take(ConicFragment f) {
    LinExpr e = f.epigraph;
    parts_.push_back(std::move(f));
    return e;
  }

  const ValidatedScenario& vs_;
  const model::Scenario& sc_;
  int n_, k_;
  BuildOptions opt_;
  ConicFragment base_;
  std::vector<ConicFragment> parts_;
  std::vector<std::string> symbols_;
  VecExpr d_, w_;
};

std::string idx(const std::string& s, int i) { return s + std::to_string(i); }

void require_variant(const ValidatedScenario& s, std::initializer_list<Variant> ok, const char* who) {
  if (std::find(ok.begin(), ok.end(), s.scenario.variant) == ok.end())
    throw BuildError(std::string(who) + ": scenario variant '" + std::string(model::variant_tag(s.scenario.variant)) +
                     "' does not match this builder");
}

/// Quadratic-lift system shared by the C1 family; `covariance` and
/// `mean` emit the two penalty-dependent rows.
template <class Cov, class Mean>
BuiltProgram c1_system(const ValidatedScenario& vs, const BuildOptions& opt, Variant variant, bool drc, Cov covariance,
                       Mean mean) {
  SystemBuilder sb(vs, opt);
  const LinExpr p = sb.scalar("p"), s = sb.scalar("s"), t = sb.scalar("t"), z = sb.scalar("z"),
                vhat = sb.scalar("vhat");
  const SymMatExpr Q = sb.matrix("Q");
  sb.quadratic_lift(t, z, vhat, Q);
  sb.le("covariance", covariance(sb, Q) + vhat - s);
  for (int i = 0; i < sb.m(); ++i) {
    const double b = sb.b(i);
    const LinExpr tail = sb.a(i) - p - b * t + b * b * z;
    sb.le(idx("mean", i), mean(sb, i) + tail);
  }
  return sb.finish(p + s, variant, drc);
}

}  // namespace

Eigen::VectorXd BuiltProgram::decision(const Eigen::VectorXd& primal) const { return program.slice(primal, "d"); }

BuiltProgram build_c1(const ValidatedScenario& vs, const BuildOptions& opt) {
  require_variant(vs, {Variant::C1}, "build_c1");
  const auto& mm = vs.moments();
  const DistanceSpec& phi = vs.scenario.distance.phi;
  const DistanceSpec& psi = *vs.scenario.distance.psi;
  auto cov = [&](SystemBuilder& sb, const SymMatExpr& Q) {
    const SymMatExpr Y = sb.matrix("Y");
    return Q.trace_with(sb.sigma0()) + sb.support(mm.Z1, Q - Y, "Z1") + sb.support(mm.Z2, Y, "Z2") +
           sb.joint(psi, Y, "psi");
  };
  auto mean = [&](SystemBuilder& sb, int i) {
    const std::string li = idx("lambda", i);
    const VecExpr lam = sb.scalar_vector(li, sb.k());
    const VecExpr bw = sb.b(i) * sb.w();
    return sb.support(mm.U1, sb.shaped(bw - lam), idx("U1_", i)) + sb.support(mm.U2, sb.shaped(lam), idx("U2_", i)) +
           sb.joint(phi, lam, idx("phi", i)) + conic::dot(sb.mu0(), bw);
  };
  return c1_system(vs, opt, Variant::C1, false, cov, mean);
}

BuiltProgram build_c1_singleton(const ValidatedScenario& vs, const BuildOptions& opt) {
  require_variant(vs, {Variant::C1Singleton}, "build_c1_singleton");
  const auto& mm = vs.moments();
  if (mm.U2.kind != model::SetKind::Singleton || mm.Z2.kind != model::SetKind::Singleton)
    throw BuildError("build_c1_singleton: inner sets must be singletons");
  const DistanceSpec& phi = vs.scenario.distance.phi;
  const DistanceSpec& psi = *vs.scenario.distance.psi;
  auto cov = [&](SystemBuilder& sb, const SymMatExpr& Q) {
    const SymMatExpr Y = sb.matrix("Y");
    return sb.support(mm.Z1, Y, "Z1") + sb.single(psi, Q - Y, "psi") + Y.trace_with(sb.sigma0());
  };
  auto mean = [&](SystemBuilder& sb, int i) {
    const VecExpr lam = sb.scalar_vector(idx("lambda", i), sb.k());
    return sb.support(mm.U1, sb.shaped(lam), idx("U1_", i)) + sb.single(phi, sb.b(i) * sb.w() - lam, idx("phi", i)) +
           conic::dot(sb.mu0(), lam);
  };
  return c1_system(vs, opt, Variant::C1Singleton, false, cov, mean);
}

BuiltProgram build_linear(const ValidatedScenario& vs, const BuildOptions& opt) {
  require_variant(vs, {Variant::LinearC1}, "build_linear");
  if (vs.scenario.constraint.m() != 1) throw BuildError("build_linear: requires m = 1");
  const auto& mm = vs.moments();
  SystemBuilder sb(vs, opt);
  const VecExpr lam = sb.scalar_vector("lambda0", sb.k());
  const VecExpr bw = sb.b(0) * sb.w();
  const LinExpr lhs = sb.a(0) + conic::dot(sb.mu0(), bw) + sb.support(mm.U1, sb.shaped(bw - lam), "U1_0") +
                      sb.support(mm.U2, sb.shaped(lam), "U2_0") + sb.joint(vs.scenario.distance.phi, lam, "phi0");
  return sb.finish(lhs, Variant::LinearC1, false);
}

BuiltProgram build_c2(const ValidatedScenario& vs, const BuildOptions& opt) {
  require_variant(vs, {Variant::C2}, "build_c2");
  const auto& mm = vs.moments();
  const DistanceSpec& phi = vs.scenario.distance.phi;
  if (phi.kind != model::DistanceKind::C2Mahalanobis) throw BuildError("build_c2: distance must be c2_mahalanobis");
  const double eta = phi.weight;
  SystemBuilder sb(vs, opt);
  const int k = sb.k();
  const LinExpr p = sb.scalar("p"), t = sb.scalar("t"), z = sb.scalar("z"), vhat = sb.scalar("vhat");
  const SymMatExpr Q = sb.matrix("Q");
  sb.quadratic_lift(t, z, vhat, Q);
  for (int i = 0; i < sb.m(); ++i) {
    const double b = sb.b(i);
    const SymMatExpr H = sb.matrix(idx("H", i));
    const VecExpr h = sb.scalar_vector(idx("h", i), k);
    const LinExpr h0 = sb.scalar(idx("h0_", i));
    const LinExpr rho = sb.scalar(idx("rho", i));
    const VecExpr bw = b * sb.w();
    const SymMatExpr QH = Q + H;
    sb.le(idx("support", i), sb.support(mm.Z1, QH, idx("Z1_", i)) + sb.support(mm.U1, sb.shaped(bw + 2.0 * h), idx("U1_", i)) +
                                 QH.trace_with(sb.sigma0()) + conic::dot(sb.mu0(), bw) - rho);
    sb.le(idx("scalar", i), rho + vhat + sb.a(i) - b * t + b * b * z - p);
    sb.le(idx("h0_le_eta", i), h0 - LinExpr(eta));
    sb.psd(idx("dual_block", i), SymMatExpr::bordered(h0, h, H));
  }
  return sb.finish(p, Variant::C2, false);
}

BuiltProgram build_c3(const ValidatedScenario& vs, const BuildOptions& opt) {
  require_variant(vs, {Variant::C3, Variant::C3Singleton}, "build_c3");
  const auto& sc = vs.scenario;
  const auto& mm = vs.moments();
  if (!sc.support) throw BuildError("build_c3: support set required");
  if (!model::contains(*sc.support, mm.mu0, 1e-9)) throw BuildError("build_c3: mu0 must lie in the support set");
  if (sc.constraint.m() != 1) throw BuildError("build_c3: g must be affine (m = 1)");
  SystemBuilder sb(vs, opt);
  const int k = sb.k();
  const VecExpr wv = sb.scalar_vector("w", k);
  const VecExpr s1 = sb.scalar_vector("s1", k);
  const VecExpr theta = sb.scalar_vector("theta", k);
  // g_*(w + s1) is finite only on w + s1 = b w(d), where it equals -a(d).
  sb.eq("conjugate_g", wv + s1 - sb.b(0) * sb.w());
  LinExpr lhs = sb.support(*sc.support, wv, "Uxi") + sb.a(0);
  if (sc.variant == Variant::C3) {
    lhs += sb.support(mm.U1, sb.shaped(s1 - theta), "U1") + sb.joint(sc.distance.phi, theta, "phi") +
           sb.support(mm.U2, sb.shaped(theta), "U2") + conic::dot(sb.mu0(), s1);
  } else {
    if (mm.U2.kind != model::SetKind::Singleton) throw BuildError("build_c3: singleton variant needs U2 = singleton");
    lhs += sb.support(mm.U1, sb.shaped(theta), "U1") + sb.single(sc.distance.phi, s1 - theta, "phi") +
           conic::dot(sb.mu0(), theta);
  }
  return sb.finish(lhs, sc.variant, false);
}

BuiltProgram build(const ValidatedScenario& s, const BuildOptions& opt) {
  switch (s.scenario.variant) {
    case Variant::C1: return build_c1(s, opt);
    case Variant::C1Singleton: return build_c1_singleton(s, opt);
    case Variant::LinearC1: return build_linear(s, opt);
    case Variant::C2: return build_c2(s, opt);
    case Variant::C3:
    case Variant::C3Singleton: return build_c3(s, opt);
  }
  throw BuildError("unknown variant");
}

BuiltProgram build_drc(const ValidatedScenario& vs, const BuildOptions& opt) {
  const auto& sc = vs.scenario;
  const auto& mm = vs.moments();
  switch (sc.variant) {
    case Variant::C1:
    case Variant::C1Singleton:
    case Variant::C2: {
      auto cov = [&](SystemBuilder& sb, const SymMatExpr& Q) {
        return Q.trace_with(sb.sigma0()) + sb.support(mm.Z1, Q, "Z1");
      };
      auto mean = [&](SystemBuilder& sb, int i) {
        const VecExpr bw = sb.b(i) * sb.w();
        return sb.support(mm.U1, sb.shaped(bw), idx("U1_", i)) + conic::dot(sb.mu0(), bw);
      };
      return c1_system(vs, opt, sc.variant, true, cov, mean);
    }
    case Variant::LinearC1: {
      SystemBuilder sb(vs, opt);
      const VecExpr bw = sb.b(0) * sb.w();
      const LinExpr lhs = sb.a(0) + conic::dot(sb.mu0(), bw) + sb.support(mm.U1, sb.shaped(bw), "U1_0");
      return sb.finish(lhs, sc.variant, true);
    }
    case Variant::C3:
    case Variant::C3Singleton: {
      if (!sc.support) throw BuildError("build_drc: support set required");
      SystemBuilder sb(vs, opt);
      const int k = sb.k();
      const VecExpr wv = sb.scalar_vector("w", k);
      const VecExpr s1 = sb.scalar_vector("s1", k);
      sb.eq("conjugate_g", wv + s1 - sb.b(0) * sb.w());
      const LinExpr lhs = sb.support(*sc.support, wv, "Uxi") + sb.a(0) + sb.support(mm.U1, sb.shaped(s1), "U1") +
                          conic::dot(sb.mu0(), s1);
      return sb.finish(lhs, sc.variant, true);
    }
  }
  throw BuildError("unknown variant");
}

SolvedProgram solve(const BuiltProgram& built, const conic::SolverOptions& options) {
  SolvedProgram out;
  out.solution = conic::solve(built.program, options);
  if (out.solution.primal.size() == built.program.num_vars) out.decision = built.decision(out.solution.primal);
  return out;
}

double evaluate_lhs(const ValidatedScenario& s, const Eigen::VectorXd& d, bool drc) {
  BuildOptions opt;
  opt.fixed_decision = d;
  const BuiltProgram built = drc ? build_drc(s, opt) : build(s, opt);
  const conic::Solution sol = conic::solve(built.program);
  if (sol.status != conic::SolveStatus::Optimal)
    throw std::runtime_error("evaluate_lhs: solve returned " + std::string(conic::status_name(sol.status)) + ": " +
                             sol.message);
  return sol.objective;
}

}  // namespace gdro::reform
