#include "gdro/oracle/moment.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace gdro::oracle {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kGolden = 0.6180339887498949;

/// Pieces in centred, scaled form: with y = m + sigma u the integrand is
/// alpha_max + sigma * max_i (r_i + b_i u), r_i = (alpha_i - alpha_max) / sigma.
struct Centred {
  std::vector<double> r, b;
  double alpha_max = -kInf;
  double bmin = kInf, bmax = -kInf;
  double sigma = 0.0;
};

Centred centre(std::span<const MomentPiece> pieces, double m, double s2) {
  if (pieces.empty()) throw OracleError("inner moment bound: no pieces");
  if (!(s2 >= 0.0)) throw OracleError("inner moment bound: variance must be non-negative, got " + std::to_string(s2));
  Centred c;
  c.sigma = std::sqrt(s2);
  for (const auto& p : pieces) {
    c.alpha_max = std::max(c.alpha_max, p.a + p.b * m);
    c.bmin = std::min(c.bmin, p.b);
    c.bmax = std::max(c.bmax, p.b);
  }
  for (const auto& p : pieces) {
    c.r.push_back(c.sigma > 0.0 ? (p.a + p.b * m - c.alpha_max) / c.sigma : 0.0);
    c.b.push_back(p.b);
  }
  return c;
}

bool degenerate(const Centred& c) {
  return c.sigma == 0.0 || c.bmax - c.bmin <= 1e-14 * std::max(1.0, std::abs(c.bmax));
}

/// Centred dual objective G(c, g) = max_i [r_i + (b_i - c)^2 / (4 g)] + g.
double dual_objective(const Centred& p, double c, double g) {
  double mx = -kInf;
  for (std::size_t i = 0; i < p.r.size(); ++i) mx = std::max(mx, p.r[i] + (p.b[i] - c) * (p.b[i] - c) / (4.0 * g));
  return mx + g;
}

template <class F>
double golden_min(F f, double lo, double hi, double* arg, int iters = 90) {
  double x1 = hi - kGolden * (hi - lo), x2 = lo + kGolden * (hi - lo);
  double f1 = f(x1), f2 = f(x2);
  for (int it = 0; it < iters && hi - lo > 1e-10 * (1.0 + std::abs(lo) + std::abs(hi)); ++it) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - kGolden * (hi - lo);
      f1 = f(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + kGolden * (hi - lo);
      f2 = f(x2);
    }
  }
  if (arg) *arg = f1 <= f2 ? x1 : x2;
  return std::min(f1, f2);
}

/// log g range: gamma2 in [1e-6, 1e3] * S with S = max(1, range(b) / sigma), g = gamma2 * sigma.
std::pair<double, double> log_g_range(const Centred& p) {
  const double scale = std::max(p.sigma, p.bmax - p.bmin);
  return {std::log(1e-6 * scale), std::log(1e3 * scale)};
}

struct DualPoint {
  double value = kInf;
  double c = 0.0, g = 1.0;
};

DualPoint polish(const Centred& p, double clo, double chi) {
  const auto [tlo, thi] = log_g_range(p);
  auto partial = [&](double c) {
    return golden_min([&](double t) { return dual_objective(p, c, std::exp(t)); }, tlo, thi, nullptr);
  };
  DualPoint out;
  out.value = golden_min(partial, clo, chi, &out.c);
  double t = 0.0;
  golden_min([&](double s) { return dual_objective(p, out.c, std::exp(s)); }, tlo, thi, &t);
  out.g = std::exp(t);
  out.value = dual_objective(p, out.c, out.g);
  return out;
}

DualPoint grid_search(const Centred& p, const DualSearch& search) {
  const int n = std::max(search.resolution, 3);
  double clo = p.bmin, chi = p.bmax;
  auto [tlo, thi] = log_g_range(p);
  DualPoint best;
  for (int level = 0; level <= search.refinements; ++level) {
    const double dc = (chi - clo) / (n - 1), dt = (thi - tlo) / (n - 1);
    int bi = 0, bj = 0;
    double bv = kInf;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const double v = dual_objective(p, clo + i * dc, std::exp(tlo + j * dt));
        if (v < bv) {
          bv = v;
          bi = i;
          bj = j;
        }
      }
    if (bv < best.value) best = {bv, clo + bi * dc, std::exp(tlo + bj * dt)};
    const double cc = clo + bi * dc, tc = tlo + bj * dt;
    clo = std::max(p.bmin, cc - dc);
    chi = std::min(p.bmax, cc + dc);
    tlo = tc - dt;
    thi = tc + dt;
  }
  const DualPoint fine = polish(p, p.bmin, p.bmax);
  return fine.value < best.value ? fine : best;
}

/// max c^T x s.t. A x = b, x >= 0 (b >= 0), dense two-phase tableau simplex
/// with Bland's rule. Returns -inf if infeasible.
double simplex_max(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, const Eigen::VectorXd& c) {
  const int r = static_cast<int>(A.rows()), n = static_cast<int>(A.cols());
  const int cols = n + r;
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(r, cols + 1);
  T.leftCols(n) = A;
  T.block(0, n, r, r).setIdentity();
  T.col(cols) = b;
  std::vector<int> basis(r);
  for (int i = 0; i < r; ++i) basis[i] = n + i;
  constexpr double kTol = 1e-11;

  auto run = [&](const Eigen::VectorXd& cost, int allowed) {
    for (int iter = 0; iter < 50 * (cols + 1); ++iter) {
      Eigen::VectorXd y(r);
      for (int i = 0; i < r; ++i) y(i) = cost(basis[i]);
      int enter = -1;
      for (int j = 0; j < allowed; ++j) {
        if (std::find(basis.begin(), basis.end(), j) != basis.end()) continue;
        const double rc = cost(j) - y.dot(T.col(j));
        if (rc > kTol * (1.0 + std::abs(cost(j)))) {
          enter = j;
          break;
        }
      }
      if (enter < 0) return true;
      int leave = -1;
      double best = kInf;
      for (int i = 0; i < r; ++i) {
        if (T(i, enter) <= kTol) continue;
        const double ratio = T(i, cols) / T(i, enter);
        if (ratio < best - 1e-15 || (ratio <= best + 1e-15 && leave >= 0 && basis[i] < basis[leave])) {
          best = ratio;
          leave = i;
        }
      }
      if (leave < 0) return false;
      T.row(leave) /= T(leave, enter);
      for (int i = 0; i < r; ++i)
        if (i != leave && T(i, enter) != 0.0) T.row(i) -= T(i, enter) * T.row(leave);
      basis[leave] = enter;
    }
    throw OracleError("primal LP: simplex iteration limit");
  };

  Eigen::VectorXd phase1 = Eigen::VectorXd::Zero(cols);
  phase1.tail(r).setConstant(-1.0);
  run(phase1, cols);
  double infeas = 0.0;
  for (int i = 0; i < r; ++i)
    if (basis[i] >= n) infeas += T(i, cols);
  if (infeas > 1e-9) return -kInf;
  // Pivot remaining zero-level artificials out where possible.
  for (int i = 0; i < r; ++i) {
    if (basis[i] < n) continue;
    for (int j = 0; j < n; ++j)
      if (std::abs(T(i, j)) > 1e-9 && std::find(basis.begin(), basis.end(), j) == basis.end()) {
        T.row(i) /= T(i, j);
        for (int q = 0; q < r; ++q)
          if (q != i) T.row(q) -= T(q, j) * T.row(i);
        basis[i] = j;
        break;
      }
  }
  Eigen::VectorXd phase2 = Eigen::VectorXd::Zero(cols);
  phase2.head(n) = c;
  if (!run(phase2, n)) return kInf;
  double v = 0.0;
  for (int i = 0; i < r; ++i)
    if (basis[i] < n) v += c(basis[i]) * T(i, cols);
  return v;
}

}  // namespace

double inner_dual_bound(std::span<const MomentPiece> pieces, double m, double s2) {
  const Centred p = centre(pieces, m, s2);
  if (degenerate(p)) return p.alpha_max;
  return p.alpha_max + p.sigma * polish(p, p.bmin, p.bmax).value;
}

double inner_dual_bound(std::span<const MomentPiece> pieces, double m, double s2, const DualSearch& search) {
  const Centred p = centre(pieces, m, s2);
  if (degenerate(p)) return p.alpha_max;
  return p.alpha_max + p.sigma * grid_search(p, search).value;
}

double inner_primal_lp(std::span<const MomentPiece> pieces, double m, double s2, int grid_points,
                       std::span<const double> extra) {
  const Centred p = centre(pieces, m, s2);
  if (degenerate(p)) return p.alpha_max;
  std::vector<double> u;
  for (int j = 0; j < grid_points; ++j) u.push_back(-10.0 + 20.0 * j / (grid_points - 1));
  for (double y : extra) u.push_back((y - m) / p.sigma);
  const int N = static_cast<int>(u.size());
  Eigen::MatrixXd A(3, N);
  Eigen::VectorXd f(N);
  for (int j = 0; j < N; ++j) {
    A(0, j) = 1.0;
    A(1, j) = u[j];
    A(2, j) = u[j] * u[j];
    double mx = -kInf;
    for (std::size_t i = 0; i < p.r.size(); ++i) mx = std::max(mx, p.r[i] + p.b[i] * u[j]);
    f(j) = mx;
  }
  // The centred mean row has a zero right-hand side; flip signs where needed for b >= 0.
  const Eigen::Vector3d rhs(1.0, 0.0, 1.0);
  const double v = simplex_max(A, rhs, f);
  if (!std::isfinite(v)) throw OracleError("primal LP: moment constraints infeasible on the support grid");
  return p.alpha_max + p.sigma * v;
}

MomentBound inner_moment_bound(std::span<const MomentPiece> pieces, double m, double s2, const DualSearch& search) {
  const Centred p = centre(pieces, m, s2);
  MomentBound out;
  if (degenerate(p)) {
    // Point mass (s2 = 0) or a common slope: E[max] = max_i (a_i + b_i m) exactly.
    out.value = out.primal = p.alpha_max;
    const double slope = p.bmax;
    out.gamma1 = slope;
    out.gamma0 = p.alpha_max - slope * m;
    return out;
  }
  DualSearch s = search;
  for (int attempt = 0; attempt < 3; ++attempt) {
    const DualPoint dp = grid_search(p, s);
    out.value = p.alpha_max + p.sigma * dp.value;
    out.gamma2 = dp.g / p.sigma;
    out.gamma1 = dp.c - 2.0 * out.gamma2 * m;
    double lead = -kInf;
    for (std::size_t i = 0; i < p.r.size(); ++i)
      lead = std::max(lead, p.r[i] + (p.b[i] - dp.c) * (p.b[i] - dp.c) / (4.0 * dp.g));
    out.gamma0 = p.alpha_max + p.sigma * lead - dp.c * m + out.gamma2 * m * m;
    // Tangency points of the dual quadratic with each piece.
    std::vector<double> touch;
    for (double b : p.b) touch.push_back(m + p.sigma * (b - dp.c) / (2.0 * dp.g));
    out.primal = inner_primal_lp(pieces, m, s2, 401 * (attempt + 1), touch);
    const double gap = out.value - out.primal;
    if (gap <= 1e-4 * (1.0 + std::abs(out.value)) && gap >= -1e-7 * (1.0 + std::abs(out.value))) return out;
    s.resolution *= 2;
    s.refinements += 1;
  }
  throw OracleError("inner moment bound: dual/primal gap not closed (dual " + std::to_string(out.value) + ", primal " +
                    std::to_string(out.primal) + ")");
}

}  // namespace gdro::oracle
