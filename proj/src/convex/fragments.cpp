#include "gdro/convex/fragments.hpp"

#include <cmath>

namespace gdro::convex {

using conic::Cone;
using conic::ConicFragment;
using conic::LinExpr;
using conic::SymMatExpr;
using conic::VecExpr;
using model::DistanceKind;
using model::DistanceSpec;
using model::SetKind;
using model::SetSpec;

namespace {

VecExpr lower_entries(const SymMatExpr& m) {
  VecExpr out;
  for (int j = 0; j < m.order(); ++j)
    for (int i = j; i < m.order(); ++i) out.push_back(m.at(i, j));
  return out;
}

/// Adds M = 0 entrywise (lower triangle).
void add_zero(ConicFragment& f, const std::string& name, const SymMatExpr& m) {
  const VecExpr rows = lower_entries(m);
  f.add(name, Cone::zero(static_cast<int>(rows.size())), rows);
}

void add_psd(ConicFragment& f, const std::string& name, const SymMatExpr& m) {
  f.add(name, Cone::psd(m.order()), m.svec());
}

SymMatExpr scaled_identity(const LinExpr& t, int order) {
  SymMatExpr m(order);
  for (int i = 0; i < order; ++i) m.at(i, i) = t;
  return m;
}

/// t >= ||Y||_{sigma q}; returns t.
LinExpr schatten_epigraph(ConicFragment& f, const SymMatExpr& Y, double q, const std::string& prefix) {
  const int k = Y.order();
  if (q == 2.0) return norm_epigraph(f, Y.svec(), 2.0, prefix);
  if (std::isinf(q)) {
    f.declare(prefix + ".t", 1);
    const LinExpr t = LinExpr::var(prefix + ".t");
    add_psd(f, prefix + ".upper", scaled_identity(t, k) - Y);
    add_psd(f, prefix + ".lower", scaled_identity(t, k) + Y);
    return t;
  }
  if (q == 1.0) {
    f.declare(prefix + ".P", conic::tri_size(k));
    f.declare(prefix + ".N", conic::tri_size(k));
    const SymMatExpr P = SymMatExpr::variable(prefix + ".P", k);
    const SymMatExpr N = SymMatExpr::variable(prefix + ".N", k);
    add_psd(f, prefix + ".P_psd", P);
    add_psd(f, prefix + ".N_psd", N);
    add_zero(f, prefix + ".split", Y - P + N);
    return P.trace() + N.trace();
  }
  throw UnsupportedTag("Schatten exponent must be 1, 2 or inf");
}

/// y = lower-triangular matrix variable entries Z(i, j), i >= j.
LinExpr tri_var(const std::string& name, int order, int i, int j) {
  return LinExpr::var(name, conic::tri_index(order, i, j));
}

/// r >= -ln det H for H symmetric; returns sum u with r = -sum u.
LinExpr neg_logdet_epigraph(ConicFragment& f, const SymMatExpr& H, const std::string& prefix) {
  const int k = H.order();
  const std::string zname = prefix + ".Z", uname = prefix + ".u";
  f.declare(zname, conic::tri_size(k));
  f.declare(uname, k);
  SymMatExpr block(2 * k);
  for (int j = 0; j < k; ++j)
    for (int i = j; i < k; ++i) block.at(i, j) = H.at(i, j);
  // Bottom-left block is Z^T: entry (k + i, j) = Z(j, i), nonzero for j >= i.
  for (int i = 0; i < k; ++i)
    for (int j = i; j < k; ++j) block.at(k + i, j) = tri_var(zname, k, j, i);
  for (int i = 0; i < k; ++i) block.at(k + i, k + i) = tri_var(zname, k, i, i);
  add_psd(f, prefix + ".block", block);
  LinExpr total;
  for (int i = 0; i < k; ++i) {
    f.add(prefix + ".exp" + std::to_string(i), Cone::exp(),
          {LinExpr::var(uname, i), LinExpr(1.0), tri_var(zname, k, i, i)});
    total -= LinExpr::var(uname, i);
  }
  return total;
}

LinExpr trace_with(const SymMatExpr& m, const Eigen::MatrixXd& c) { return m.trace_with(c); }

}  // namespace

LinExpr norm_epigraph(ConicFragment& f, const VecExpr& arg, double q, const std::string& prefix) {
  const int n = static_cast<int>(arg.size());
  if (n == 0) return LinExpr(0.0);
  if (q == 2.0) {
    f.declare(prefix + ".t", 1);
    const LinExpr t = LinExpr::var(prefix + ".t");
    VecExpr rows{t};
    rows.insert(rows.end(), arg.begin(), arg.end());
    f.add(prefix + ".soc", Cone::soc(n + 1), rows);
    return t;
  }
  if (std::isinf(q)) {
    f.declare(prefix + ".t", 1);
    const LinExpr t = LinExpr::var(prefix + ".t");
    VecExpr rows;
    for (const auto& a : arg) {
      rows.push_back(t - a);
      rows.push_back(t + a);
    }
    f.add(prefix + ".abs", Cone::nonneg(2 * n), rows);
    return t;
  }
  if (q == 1.0) {
    f.declare(prefix + ".u", n);
    VecExpr rows;
    for (int i = 0; i < n; ++i) {
      rows.push_back(LinExpr::var(prefix + ".u", i) - arg[i]);
      rows.push_back(LinExpr::var(prefix + ".u", i) + arg[i]);
    }
    f.add(prefix + ".abs", Cone::nonneg(2 * n), rows);
    return conic::sum(conic::vec_var(prefix + ".u", n));
  }
  throw UnsupportedTag("norm exponent must be 1, 2 or inf");
}

Eigen::MatrixXd quad_form_svec(const Eigen::MatrixXd& P1, const Eigen::MatrixXd& P2) {
  const int k = static_cast<int>(P1.rows());
  const int d = conic::tri_size(k);
  const double r2 = std::sqrt(0.5);
  std::vector<Eigen::MatrixXd> basis;
  for (int j = 0; j < k; ++j)
    for (int i = j; i < k; ++i) {
      Eigen::MatrixXd e = Eigen::MatrixXd::Zero(k, k);
      if (i == j) {
        e(i, i) = 1.0;
      } else {
        e(i, j) = r2;
        e(j, i) = r2;
      }
      basis.push_back(e);
    }
  Eigen::MatrixXd K(d, d);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      K(a, b) = 0.5 * ((basis[a] * P1 * basis[b] * P2).trace() + (basis[b] * P1 * basis[a] * P2).trace());
  return K;
}

ConicFragment support_epigraph(const SetSpec& S, const VecExpr& arg, const std::string& prefix) {
  ConicFragment f;
  const int k = static_cast<int>(arg.size());
  switch (S.kind) {
    case SetKind::Singleton: break;
    case SetKind::NormBall:
      if (S.radius > 0.0) f.epigraph = S.radius * norm_epigraph(f, arg, model::dual_exponent(S.p), prefix);
      break;
    case SetKind::NormIntersection: {
      VecExpr rest = arg;
      for (std::size_t j = 0; j < S.terms.size(); ++j) {
        const std::string name = prefix + ".u" + std::to_string(j);
        f.declare(name, k);
        const VecExpr u = conic::vec_var(name, k);
        rest = rest - u;
        f.epigraph += S.terms[j].radius *
                      norm_epigraph(f, u, model::dual_exponent(S.terms[j].p), prefix + ".n" + std::to_string(j));
      }
      f.add(prefix + ".split", Cone::zero(k), rest);
      break;
    }
    case SetKind::Polyhedron: {
      const int L = static_cast<int>(S.C.rows());
      if (L == 0) {
        f.add(prefix + ".free", Cone::zero(k), arg);
        break;
      }
      f.declare(prefix + ".u", L);
      const VecExpr u = conic::vec_var(prefix + ".u", L);
      f.add(prefix + ".u_pos", Cone::nonneg(L), u);
      f.add(prefix + ".dual", Cone::zero(k), conic::mat_mul(S.C.transpose(), u) - arg);
      f.epigraph = conic::dot(S.c, u);
      break;
    }
    default:
      throw UnsupportedTag("set '" + std::string(model::set_tag(S.kind)) + "' is not a vector set");
  }
  return f;
}

ConicFragment support_epigraph(const SetSpec& S, const SymMatExpr& arg, const std::string& prefix) {
  ConicFragment f;
  const int k = arg.order();
  switch (S.kind) {
    case SetKind::Singleton: break;
    case SetKind::FrobeniusBall:
      if (S.radius > 0.0) f.epigraph = S.radius * norm_epigraph(f, arg.svec(), 2.0, prefix);
      break;
    case SetKind::SchattenBall:
      if (S.radius > 0.0) f.epigraph = S.radius * schatten_epigraph(f, arg, model::dual_exponent(S.p), prefix);
      break;
    case SetKind::SpectralNormBound:
      if (S.radius > 0.0) f.epigraph = S.radius * schatten_epigraph(f, arg, 1.0, prefix);
      break;
    case SetKind::NormIntersection: {
      SymMatExpr rest = arg;
      for (std::size_t j = 0; j < S.terms.size(); ++j) {
        const std::string name = prefix + ".V" + std::to_string(j);
        f.declare(name, conic::tri_size(k));
        const SymMatExpr V = SymMatExpr::variable(name, k);
        rest -= V;
        f.epigraph += S.terms[j].radius *
                      schatten_epigraph(f, V, model::dual_exponent(S.terms[j].p), prefix + ".n" + std::to_string(j));
      }
      add_zero(f, prefix + ".split", rest);
      break;
    }
    case SetKind::VecLifted: {
      if (S.radius <= 0.0) break;
      const double q = model::dual_exponent(S.p);
      if (q == 2.0) {
        f.epigraph = S.radius * norm_epigraph(f, arg.svec(), 2.0, prefix);
      } else if (std::isinf(q)) {
        f.epigraph = S.radius * norm_epigraph(f, lower_entries(arg), q, prefix);
      } else {
        // ||vec Y||_1 counts each off-diagonal entry twice.
        VecExpr entries;
        for (int j = 0; j < k; ++j)
          for (int i = j; i < k; ++i) entries.push_back(i == j ? arg.at(i, j) : 2.0 * arg.at(i, j));
        f.epigraph = S.radius * norm_epigraph(f, entries, 1.0, prefix);
      }
      break;
    }
    case SetKind::PsdInterval:
    case SetKind::PsdIntervalTrace: {
      f.declare(prefix + ".H", conic::tri_size(k));
      const SymMatExpr H = SymMatExpr::variable(prefix + ".H", k);
      add_psd(f, prefix + ".H_psd", H);
      f.epigraph = S.theta * trace_with(H, S.Xi0);
      if (S.kind == SetKind::PsdInterval) {
        add_psd(f, prefix + ".H_dominates", H - arg);
        break;
      }
      // Ellipsoid part {tr(X D X) <= tau}: dual variable U (general k x k),
      // entering as sym(D^{1/2} U) with cost sqrt(tau) ||U||_F.
      const Eigen::MatrixXd R = model::psd_sqrt(S.D);
      const std::string uname = prefix + ".U";
      f.declare(uname, k * k);
      auto U = [&](int i, int j) { return LinExpr::var(uname, i + k * j); };
      SymMatExpr V(k);
      for (int j = 0; j < k; ++j)
        for (int i = j; i < k; ++i) {
          LinExpr e;
          for (int l = 0; l < k; ++l) e += 0.5 * R(i, l) * U(l, j) + 0.5 * R(j, l) * U(l, i);
          V.at(i, j) = e;
        }
      add_psd(f, prefix + ".H_dominates", H - arg + V);
      if (S.tau > 0.0) f.epigraph += std::sqrt(S.tau) * norm_epigraph(f, conic::vec_var(uname, k * k), 2.0, prefix + ".ell");
      else f.add(prefix + ".U_zero", Cone::zero(k * k), conic::vec_var(uname, k * k));
      break;
    }
    default:
      throw UnsupportedTag("set '" + std::string(model::set_tag(S.kind)) + "' is not a matrix set");
  }
  return f;
}

ConicFragment conjugate_joint_epigraph(const DistanceSpec& phi, const VecExpr& dual, const std::string& prefix) {
  ConicFragment f;
  switch (phi.kind) {
    case DistanceKind::MeanNorm: {
      const LinExpr t = norm_epigraph(f, dual, model::dual_exponent(phi.p), prefix);
      f.add(prefix + ".bound", Cone::nonneg(1), {phi.weight - t});
      break;
    }
    case DistanceKind::MeanMahalanobis: {
      f.declare(prefix + ".r", 1);
      const LinExpr r = LinExpr::var(prefix + ".r");
      VecExpr rows{phi.weight * r, LinExpr(1.0)};
      const VecExpr w = conic::mat_mul(model::psd_sqrt(phi.anchor), dual);
      rows.insert(rows.end(), w.begin(), w.end());
      f.add(prefix + ".quad", Cone::rsoc(static_cast<int>(rows.size())), rows);
      f.epigraph = r;
      break;
    }
    default:
      throw UnsupportedTag("distance '" + std::string(model::distance_tag(phi.kind)) +
                           "' has no joint conjugate on mean arguments");
  }
  return f;
}

ConicFragment conjugate_joint_epigraph(const DistanceSpec& psi, const SymMatExpr& dual, const std::string& prefix) {
  ConicFragment f;
  const int k = dual.order();
  switch (psi.kind) {
    case DistanceKind::CovFrobeniusSq: {
      f.declare(prefix + ".r", 1);
      const LinExpr r = LinExpr::var(prefix + ".r");
      VecExpr rows{2.0 * psi.weight * r, LinExpr(1.0)};
      const VecExpr s = dual.svec();
      rows.insert(rows.end(), s.begin(), s.end());
      f.add(prefix + ".quad", Cone::rsoc(static_cast<int>(rows.size())), rows);
      f.epigraph = r;
      break;
    }
    case DistanceKind::CovGeneralQuad: {
      const Eigen::MatrixXd K = quad_form_svec(psi.P1, psi.P2);
      const Eigen::MatrixXd L = model::psd_sqrt(K.inverse());
      f.declare(prefix + ".r", 1);
      const LinExpr r = LinExpr::var(prefix + ".r");
      VecExpr rows{2.0 * r, LinExpr(1.0)};
      const VecExpr s = conic::mat_mul(L, dual.svec());
      rows.insert(rows.end(), s.begin(), s.end());
      f.add(prefix + ".quad", Cone::rsoc(static_cast<int>(rows.size())), rows);
      f.epigraph = r;
      break;
    }
    case DistanceKind::CovLogDet: {
      const double beta = psi.weight;
      SymMatExpr H = dual;
      H *= -1.0;
      const LinExpr neg_logdet = neg_logdet_epigraph(f, H, prefix);
      f.epigraph = beta * neg_logdet + beta * (std::log(beta) - 1.0) * k + H.trace();
      break;
    }
    default:
      throw UnsupportedTag("distance '" + std::string(model::distance_tag(psi.kind)) +
                           "' has no joint conjugate on covariance arguments");
  }
  return f;
}

ConicFragment conjugate_single_epigraph(const DistanceSpec& phi, const VecExpr& dual, const Eigen::VectorXd& mu0,
                                        const std::string& prefix) {
  switch (phi.kind) {
    case DistanceKind::MeanNorm:
    case DistanceKind::MeanMahalanobis: {
      ConicFragment f = conjugate_joint_epigraph(phi, dual, prefix);
      f.epigraph += conic::dot(mu0, dual);
      return f;
    }
    case DistanceKind::MeanEntropy: {
      const Eigen::VectorXd& anchor = phi.anchor_mean.size() ? phi.anchor_mean : mu0;
      const int k = static_cast<int>(dual.size());
      ConicFragment f;
      f.declare(prefix + ".r", k);
      for (int i = 0; i < k; ++i) {
        const LinExpr r = LinExpr::var(prefix + ".r", i);
        f.add(prefix + ".exp" + std::to_string(i), Cone::exp(), {dual[i] - 1.0, LinExpr(1.0), r});
        f.epigraph += anchor(i) * r;
      }
      return f;
    }
    default:
      throw UnsupportedTag("distance '" + std::string(model::distance_tag(phi.kind)) +
                           "' has no single-argument conjugate on mean arguments");
  }
}

ConicFragment conjugate_single_epigraph(const DistanceSpec& psi, const SymMatExpr& dual, const Eigen::MatrixXd& sigma0,
                                        const std::string& prefix) {
  switch (psi.kind) {
    case DistanceKind::CovFrobeniusSq:
    case DistanceKind::CovGeneralQuad:
    case DistanceKind::CovLogDet: {
      ConicFragment f = conjugate_joint_epigraph(psi, dual, prefix);
      f.epigraph += dual.trace_with(sigma0);
      return f;
    }
    case DistanceKind::CovPsdGauge: {
      const Eigen::MatrixXd& anchor = psi.anchor.size() ? psi.anchor : sigma0;
      const int k = dual.order();
      const Eigen::MatrixXd inv = anchor.llt().solve(Eigen::MatrixXd::Identity(k, k));
      ConicFragment f;
      add_psd(f, prefix + ".gauge", SymMatExpr::constant(psi.weight * inv) - dual);
      f.epigraph = LinExpr(psi.weight * k);
      return f;
    }
    default:
      throw UnsupportedTag("distance '" + std::string(model::distance_tag(psi.kind)) +
                           "' has no single-argument conjugate on covariance arguments");
  }
}

}  // namespace gdro::convex
