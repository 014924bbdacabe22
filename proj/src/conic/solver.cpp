#include "gdro/conic/solver.hpp"

#include "gdro/conic/cones.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <mutex>

namespace gdro::conic {

std::string_view status_name(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::Unbounded: return "unbounded";
    case SolveStatus::Inaccurate: return "inaccurate";
    case SolveStatus::BackendError: return "backend_error";
  }
  return "backend_error";
}

SolveStatus status_from_name(std::string_view s) {
  for (SolveStatus k : {SolveStatus::Optimal, SolveStatus::Infeasible, SolveStatus::Unbounded,
                        SolveStatus::Inaccurate, SolveStatus::BackendError})
    if (status_name(k) == s) return k;
  throw ProgramError("unknown solve status '" + std::string(s) + "'");
}

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// s = B y + h in cone; `source` is the program block index, -1 for internal rows.
struct Block {
  Cone cone;
  MatrixXd B;
  VectorXd h;
  int source = -1;
};

struct Barrier {
  std::vector<Block> blocks;
  VectorXd c;
  double nu = 0.0;

  int dim() const { return static_cast<int>(c.size()); }

  VectorXd slack(const Block& b, const VectorXd& y) const { return b.B * y + b.h; }

  bool interior(const VectorXd& y) const {
    for (const auto& b : blocks)
      if (!cone_interior(b.cone, slack(b, y))) return false;
    return true;
  }

  double value(const VectorXd& y, double t) const {
    double f = t * c.dot(y);
    for (const auto& b : blocks) f += barrier_value(b.cone, slack(b, y));
    return f;
  }
};

constexpr double kCenterTol = 1e-10;

class PathFollower {
 public:
  PathFollower(const Barrier& problem, int budget) : p_(problem), budget_(budget) {}

  int steps() const { return steps_; }
  bool out_of_budget() const { return steps_ >= budget_; }

  /// Damped Newton centering at parameter t. Returns false on a numerical stall.
  /// `stop` is polled after every step; when it returns true centering ends early.
  bool center(VectorXd& y, double t, const std::function<bool(const VectorXd&)>& stop) {
    const int n = p_.dim();
    VectorXd g(n), gj;
    MatrixXd H(n, n), Hj;
    for (int local = 0; local < 500 && steps_ < budget_; ++local) {
      g = t * p_.c;
      H.setZero();
      for (const auto& b : p_.blocks) {
        barrier_derivatives(b.cone, p_.slack(b, y), gj, Hj);
        g.noalias() += b.B.transpose() * gj;
        H.noalias() += b.B.transpose() * Hj * b.B;
      }
      VectorXd dy;
      if (!newton_direction(H, g, dy)) return false;
      const double lambda2 = -g.dot(dy);
      if (!std::isfinite(lambda2)) return false;
      if (lambda2 <= 2.0 * kCenterTol) return true;
      const double lambda = std::sqrt(std::max(lambda2, 0.0));
      ++steps_;

      const double f0 = p_.value(y, t);
      double alpha = 1.0;
      bool accepted = false;
      if (lambda >= 0.25) {
        VectorXd trial = y + dy;
        if (p_.interior(trial) && p_.value(trial, t) <= f0 - 0.25 * lambda2) {
          accepted = true;
        } else {
          alpha = 1.0 / (1.0 + lambda);
        }
      }
      while (!accepted) {
        if (p_.interior(y + alpha * dy)) {
          accepted = true;
        } else {
          alpha *= 0.5;
          if (alpha < 1e-14) return false;
        }
      }
      if (lambda >= 0.25) {
        // Far from the center the path may drift along a recession direction:
        // keep doubling the step while the barrier value still drops.
        double best = p_.value(y + alpha * dy, t);
        for (int grow = 0; grow < 40; ++grow) {
          const VectorXd trial = y + (2.0 * alpha) * dy;
          if (!p_.interior(trial)) break;
          const double f = p_.value(trial, t);
          if (!(f < best)) break;
          best = f;
          alpha *= 2.0;
        }
      }
      y += alpha * dy;
      if (stop && stop(y)) return true;
    }
    return steps_ < budget_;
  }

 private:
  static bool newton_direction(const MatrixXd& H, const VectorXd& g, VectorXd& dy) {
    const int n = static_cast<int>(g.size());
    VectorXd d = H.diagonal().cwiseAbs().cwiseMax(1e-300).cwiseSqrt().cwiseInverse();
    MatrixXd Hs = d.asDiagonal() * H * d.asDiagonal();
    VectorXd rhs = -d.cwiseProduct(g);
    double reg = 0.0;
    for (int attempt = 0; attempt < 8; ++attempt) {
      MatrixXd K = Hs;
      if (reg > 0.0) K.diagonal().array() += reg;
      Eigen::LDLT<MatrixXd> ldlt(K);
      if (ldlt.info() == Eigen::Success && ldlt.isPositive()) {
        VectorXd z = ldlt.solve(rhs);
        if (z.allFinite()) {
          dy = d.cwiseProduct(z);
          return true;
        }
      }
      reg = reg == 0.0 ? 1e-14 * std::max(1.0, Hs.diagonal().maxCoeff()) : reg * 100.0;
    }
    (void)n;
    return false;
  }

  const Barrier& p_;
  int budget_;
  int steps_ = 0;
};

struct Reduction {
  VectorXd x0;
  MatrixXd N;
};

MatrixXd dense_coeffs(const ConstraintBlock& b, int num_vars) {
  MatrixXd A = MatrixXd::Zero(b.cone.dim, num_vars);
  for (const auto& t : b.coeffs) A(t.row, t.col) += t.value;
  return A;
}

Solution finish(SolveStatus status, std::string message) {
  Solution s;
  s.status = status;
  s.message = std::move(message);
  return s;
}

}  // namespace

Solution BarrierBackend::solve(const ConicProgram& program, const SolverOptions& options) const {
  const int n = program.num_vars;
  const int nb = static_cast<int>(program.constraints.size());
  VectorXd c = VectorXd::Zero(n);
  for (const auto& [col, coef] : program.objective) c(col) += coef;

  std::vector<MatrixXd> dense(nb);
  for (int j = 0; j < nb; ++j) {
    const auto& blk = program.constraints[j];
    if (blk.offset.size() != blk.cone.dim) throw ProgramError("constraint '" + blk.name + "': offset size mismatch");
    for (const auto& t : blk.coeffs)
      if (t.col < 0 || t.col >= n || t.row < 0 || t.row >= blk.cone.dim)
        throw ProgramError("constraint '" + blk.name + "': triplet out of range");
    dense[j] = dense_coeffs(blk, n);
  }

  // Equality rows E x + f = 0, eliminated through x = x0 + N y.
  int eq_rows = 0;
  for (const auto& blk : program.constraints)
    if (blk.cone.kind == ConeKind::Zero) eq_rows += blk.cone.dim;
  MatrixXd E(eq_rows, n);
  VectorXd f(eq_rows);
  for (int j = 0, r = 0; j < nb; ++j) {
    const auto& blk = program.constraints[j];
    if (blk.cone.kind != ConeKind::Zero) continue;
    E.middleRows(r, blk.cone.dim) = dense[j];
    f.segment(r, blk.cone.dim) = blk.offset;
    r += blk.cone.dim;
  }
  Reduction red;
  if (eq_rows == 0) {
    red.x0 = VectorXd::Zero(n);
    red.N = MatrixXd::Identity(n, n);
  } else {
    Eigen::CompleteOrthogonalDecomposition<MatrixXd> cod(E);
    red.x0 = cod.solve(-f);
    const double resid = (E * red.x0 + f).norm();
    if (!(resid <= 1e-9 * (1.0 + f.norm() + E.norm() * red.x0.norm())))
      return finish(SolveStatus::Infeasible, "inconsistent equality constraints");
    Eigen::ColPivHouseholderQR<MatrixXd> qr(E.transpose());
    const int rank = static_cast<int>(qr.rank());
    MatrixXd Q = qr.householderQ();
    red.N = Q.rightCols(n - rank);
  }
  const int p = static_cast<int>(red.N.cols());

  const double tol = options.infeasibility_tol;
  Barrier phase2;
  phase2.c = red.N.transpose() * c;
  for (int j = 0; j < nb; ++j) {
    const auto& blk = program.constraints[j];
    if (blk.cone.kind == ConeKind::Zero) continue;
    MatrixXd B = dense[j] * red.N;
    VectorXd h = dense[j] * red.x0 + blk.offset;
    const double scale = 1e-13 * (1.0 + (B.size() > 0 ? B.cwiseAbs().maxCoeff() : 0.0));
    if (blk.cone.kind == ConeKind::NonNegative) {
      std::vector<int> keep;
      for (int r = 0; r < blk.cone.dim; ++r) {
        if (p > 0 && B.row(r).cwiseAbs().maxCoeff() > scale) {
          keep.push_back(r);
        } else if (h(r) < -tol) {
          return finish(SolveStatus::Infeasible, "constraint '" + blk.name + "' violated by fixed rows");
        }
      }
      if (keep.empty()) continue;
      Block b{Cone::nonneg(static_cast<int>(keep.size())), MatrixXd(keep.size(), p), VectorXd(keep.size()), j};
      for (std::size_t r = 0; r < keep.size(); ++r) {
        b.B.row(r) = B.row(keep[r]);
        b.h(r) = h(keep[r]);
      }
      phase2.blocks.push_back(std::move(b));
      continue;
    }
    if (p == 0 || B.cwiseAbs().maxCoeff() <= scale) {
      if (cone_distance(blk.cone, h) > tol)
        return finish(SolveStatus::Infeasible, "constraint '" + blk.name + "' violated by fixed rows");
      continue;
    }
    phase2.blocks.push_back({blk.cone, std::move(B), std::move(h), j});
  }
  if (options.box > 0.0 && p > 0) {
    Block lo{Cone::nonneg(n), red.N, red.x0.array() + options.box, -1};
    Block hi{Cone::nonneg(n), -red.N, options.box - red.x0.array(), -1};
    phase2.blocks.push_back(std::move(lo));
    phase2.blocks.push_back(std::move(hi));
  }
  for (const auto& b : phase2.blocks) phase2.nu += barrier_degree(b.cone);

  Solution sol;
  int budget = options.max_newton_steps;
  VectorXd y = VectorXd::Zero(p);
  double shift = 0.0;

  if (p > 0 && !phase2.interior(y)) {
    // Phase I: minimize sigma subject to s + sigma e in K, sigma >= -1.
    Barrier phase1;
    phase1.c = VectorXd::Zero(p + 1);
    phase1.c(p) = 1.0;
    for (const auto& b : phase2.blocks) {
      Block a{b.cone, MatrixXd(b.B.rows(), p + 1), b.h, b.source};
      a.B.leftCols(p) = b.B;
      a.B.col(p) = cone_unit(b.cone);
      phase1.blocks.push_back(std::move(a));
    }
    Block floor{Cone::nonneg(1), MatrixXd::Zero(1, p + 1), VectorXd::Ones(1), -1};
    floor.B(0, p) = 1.0;
    phase1.blocks.push_back(std::move(floor));
    for (const auto& b : phase1.blocks) phase1.nu += barrier_degree(b.cone);

    VectorXd ys = VectorXd::Zero(p + 1);
    double sigma0 = 1.0;
    ys(p) = sigma0;
    while (!phase1.interior(ys)) {
      sigma0 *= 2.0;
      ys(p) = sigma0;
      if (!std::isfinite(sigma0) || sigma0 > 1e300) return finish(SolveStatus::BackendError, "phase I start failed");
    }
    auto feasible = [&](const VectorXd& v) { return v(p) < 0.0 && phase2.interior(v.head(p)); };
    PathFollower pf(phase1, budget);
    double t = 1.0;
    bool found = false;
    for (;;) {
      const bool ok = pf.center(ys, t, feasible);
      if (feasible(ys)) {
        found = true;
        break;
      }
      const double gap = phase1.nu / t;
      if (ys(p) - gap > tol) {
        sol = finish(SolveStatus::Infeasible, "phase I optimum is positive");
        sol.iterations = pf.steps();
        return sol;
      }
      if (gap < 1e-12 || !ok || pf.out_of_budget()) break;
      t *= options.barrier_growth;
    }
    budget -= pf.steps();
    sol.iterations += pf.steps();
    if (!found) {
      if (ys(p) > tol) {
        sol = finish(SolveStatus::Infeasible, "phase I did not reach a feasible point");
        return sol;
      }
      // Feasible but without strict interior: relax every cone by the phase I level.
      shift = std::max(ys(p), 0.0) + 1e-10;
      for (auto& b : phase2.blocks) b.h += shift * cone_unit(b.cone);
      if (!phase2.interior(ys.head(p))) return finish(SolveStatus::Inaccurate, "no interior point found");
    }
    y = ys.head(p);
  }

  double t = 1.0;
  bool stalled = false;
  double gap = std::numeric_limits<double>::infinity();
  if (p > 0) {
    PathFollower pf(phase2, budget);
    for (;;) {
      const bool ok = pf.center(y, t, {});
      gap = phase2.nu / t;
      const double obj = phase2.c.dot(y);
      if (!ok) {
        stalled = true;
        break;
      }
      if (gap <= options.gap_abs + options.gap_rel * std::abs(obj)) break;
      if (pf.out_of_budget()) {
        stalled = true;
        break;
      }
      t *= options.barrier_growth;
    }
    sol.iterations += pf.steps();
  } else {
    gap = 0.0;
  }

  sol.primal = red.x0 + red.N * y;
  sol.objective = program.objective_value(sol.primal);

  if (options.box > 0.0 && p > 0 && sol.primal.cwiseAbs().maxCoeff() >= 0.5 * options.box &&
      sol.objective - program.objective_constant < -1e-2 * options.box * std::max(1e-300, c.cwiseAbs().maxCoeff())) {
    sol.status = SolveStatus::Unbounded;
    sol.message = "objective decreases to the safeguard box";
    return sol;
  }

  // Dual estimates from the central path: z_j = -grad F_j / t.
  sol.duals.assign(nb, VectorXd());
  VectorXd residual = c;
  if (p > 0) {
    VectorXd gj;
    MatrixXd Hj;
    for (const auto& b : phase2.blocks) {
      if (b.source < 0) continue;
      const auto& blk = program.constraints[b.source];
      barrier_derivatives(b.cone, phase2.slack(b, y), gj, Hj);
      VectorXd z = -gj / t;
      if (b.cone.kind == ConeKind::NonNegative && b.cone.dim != blk.cone.dim) {
        VectorXd full = VectorXd::Zero(blk.cone.dim);
        int r = 0;
        for (int row = 0; row < blk.cone.dim && r < b.cone.dim; ++row)
          if ((dense[b.source].row(row) * red.N).cwiseAbs().maxCoeff() > 0.0) full(row) = z(r++);
        z = std::move(full);
      }
      sol.duals[b.source] = z;
    }
  }
  for (int j = 0; j < nb; ++j) {
    const auto& blk = program.constraints[j];
    if (blk.cone.kind == ConeKind::Zero) continue;
    if (sol.duals[j].size() != blk.cone.dim) sol.duals[j] = VectorXd::Zero(blk.cone.dim);
    residual -= dense[j].transpose() * sol.duals[j];
  }
  if (eq_rows > 0) {
    VectorXd nu = E.transpose().colPivHouseholderQr().solve(residual);
    for (int j = 0, r = 0; j < nb; ++j) {
      const auto& blk = program.constraints[j];
      if (blk.cone.kind != ConeKind::Zero) continue;
      sol.duals[j] = nu.segment(r, blk.cone.dim);
      r += blk.cone.dim;
    }
  }

  const double scale = 1.0 + std::abs(sol.objective);
  if (!stalled || gap <= 1e-7 * scale) {
    sol.status = shift <= 1e-8 ? SolveStatus::Optimal : SolveStatus::Inaccurate;
  } else {
    sol.status = SolveStatus::Inaccurate;
    sol.message = "path following stalled with gap bound " + std::to_string(gap);
  }
  if (shift > 0.0 && sol.message.empty()) sol.message = "no strictly feasible point; cones relaxed by " + std::to_string(shift);
  return sol;
}

const SolverBackend& default_backend() {
  static const BarrierBackend backend;
  return backend;
}

Solution solve(const ConicProgram& program, const SolverOptions& options, const SolverBackend& backend) {
  static std::mutex serial;
  try {
    if (backend.reentrant()) return backend.solve(program, options);
    std::lock_guard<std::mutex> lock(serial);
    return backend.solve(program, options);
  } catch (const std::exception& e) {
    Solution s;
    s.status = SolveStatus::BackendError;
    s.message = e.what();
    return s;
  }
}

}  // namespace gdro::conic
