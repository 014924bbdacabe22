#pragma once

#include <Eigen/Dense>

#include <limits>
#include <string>
#include <string_view>
#include <vector>

namespace gdro::model {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Dual exponent q with 1/p + 1/q = 1 (p in {1, 2, inf}).
double dual_exponent(double p);
/// l_p norm of a vector, p in {1, 2, inf}.
double vector_norm(const Eigen::VectorXd& v, double p);
/// Schatten p-norm of a symmetric matrix (eigenvalue magnitudes), p in {1, 2, inf}.
double schatten_norm(const Eigen::MatrixXd& m, double p);
/// Entries of a symmetric matrix stacked column by column (k*k entries).
Eigen::VectorXd full_vec(const Eigen::MatrixXd& m);
/// Symmetric square root of a PSD matrix (negative eigenvalues clipped).
Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& m);
double min_eigenvalue(const Eigen::MatrixXd& m);

enum class SetKind {
  NormBall,           ///< ||z||_p <= radius (vectors)
  NormIntersection,   ///< all ||z||_{p_j} <= r_j (vectors: l_p; matrices: Schatten p)
  Polyhedron,         ///< C z <= c (vectors)
  FrobeniusBall,      ///< ||X||_F <= radius
  SchattenBall,       ///< ||X||_{sigma p} <= radius
  PsdInterval,        ///< 0 <= X <= theta * Xi0 (Loewner order)
  PsdIntervalTrace,   ///< PsdInterval and tr(X D X) <= tau
  VecLifted,          ///< ||vec(X)||_p <= radius over all k*k entries
  SpectralNormBound,  ///< ||X||_{sigma inf} <= radius; support is radius * ||Y||_{sigma 1}
  Singleton,          ///< {0}
};

std::string_view set_tag(SetKind kind);
SetKind set_kind_from_tag(std::string_view tag);

struct NormTerm {
  double p = 2.0;
  double radius = 0.0;
};

struct SetSpec {
  SetKind kind = SetKind::Singleton;
  double p = 2.0;
  double radius = 0.0;
  std::vector<NormTerm> terms;
  Eigen::MatrixXd C;
  Eigen::VectorXd c;
  double theta = 0.0;
  Eigen::MatrixXd Xi0;
  Eigen::MatrixXd D;
  double tau = 0.0;

  static SetSpec singleton() { return {}; }
  static SetSpec norm_ball(double p, double radius);
  static SetSpec norm_intersection(std::vector<NormTerm> terms);
  static SetSpec polyhedron(Eigen::MatrixXd C, Eigen::VectorXd c);
  static SetSpec frobenius_ball(double radius);
  static SetSpec schatten_ball(double p, double radius);
  static SetSpec psd_interval(double theta, Eigen::MatrixXd Xi0);
  static SetSpec psd_interval_trace(double theta, Eigen::MatrixXd Xi0, Eigen::MatrixXd D, double tau);
  static SetSpec vec_lifted(double p, double radius);
  static SetSpec spectral_norm_bound(double radius);

  /// Usable as a mean-perturbation set over R^k.
  bool vector_set() const;
  /// Usable as a covariance-perturbation set over S^k.
  bool matrix_set() const;
};

/// Membership of a vector (vector sets) with absolute slack tol.
bool contains(const SetSpec& s, const Eigen::VectorXd& z, double tol = 1e-9);
/// Membership of a symmetric matrix (matrix sets) with absolute slack tol.
bool contains(const SetSpec& s, const Eigen::MatrixXd& x, double tol = 1e-9);

enum class DistanceKind {
  MeanNorm,         ///< beta * ||mu - mu'||_p
  MeanMahalanobis,  ///< (beta/2) (mu - mu')^T Sigma0^{-1} (mu - mu')
  MeanEntropy,      ///< sum mu_k ln(mu_k / mu0_k), single-argument
  CovFrobeniusSq,   ///< beta * ||S - S'||_F^2
  CovGeneralQuad,   ///< tr((S - S')^T P1 (S - S') P2)
  CovLogDet,        ///< beta * ln det(S - S' + I)^{-1}
  CovPsdGauge,      ///< beta (tr(Sigma0^{-1} S) - k) if S >= Sigma0 else 0, single-argument
  C2Mahalanobis,    ///< eta (mu - mu0)^T S^{-1} (mu - mu0), jointly in (mu, S)
};

std::string_view distance_tag(DistanceKind kind);
DistanceKind distance_kind_from_tag(std::string_view tag);

struct DistanceSpec {
  DistanceKind kind = DistanceKind::MeanNorm;
  double p = 2.0;
  double weight = 1.0;
  /// Anchor matrix: Sigma0 for Mahalanobis / PsdGauge; empty means scenario Sigma0.
  Eigen::MatrixXd anchor;
  /// Anchor vector: mu0 for MeanEntropy; empty means scenario mu0.
  Eigen::VectorXd anchor_mean;
  Eigen::MatrixXd P1;
  Eigen::MatrixXd P2;

  static DistanceSpec mean_norm(double p, double beta);
  static DistanceSpec mean_mahalanobis(double beta, Eigen::MatrixXd sigma0 = {});
  static DistanceSpec mean_entropy(Eigen::VectorXd mu0 = {});
  static DistanceSpec cov_frobenius_sq(double beta);
  static DistanceSpec cov_general_quad(Eigen::MatrixXd P1, Eigen::MatrixXd P2);
  static DistanceSpec cov_logdet(double beta);
  static DistanceSpec cov_psd_gauge(double beta, Eigen::MatrixXd sigma0 = {});
  static DistanceSpec c2_mahalanobis(double eta);

  bool on_mean() const;
  bool on_covariance() const;
  /// Defined through phi(mu, mu') with an explicit second argument.
  bool two_argument() const;
  /// Defined only relative to the empirical anchor.
  bool single_argument() const;
};

}  // namespace gdro::model
