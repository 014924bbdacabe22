#include "gdro/model/sets.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <stdexcept>
#include <string>

namespace gdro::model {

double dual_exponent(double p) {
  if (p == 1.0) return kInf;
  if (p == 2.0) return 2.0;
  if (std::isinf(p)) return 1.0;
  throw std::invalid_argument("norm exponent must be 1, 2 or inf");
}

double vector_norm(const Eigen::VectorXd& v, double p) {
  if (v.size() == 0) return 0.0;
  if (p == 1.0) return v.lpNorm<1>();
  if (p == 2.0) return v.norm();
  if (std::isinf(p)) return v.lpNorm<Eigen::Infinity>();
  throw std::invalid_argument("norm exponent must be 1, 2 or inf");
}

double schatten_norm(const Eigen::MatrixXd& m, double p) {
  if (m.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
  return vector_norm(es.eigenvalues(), p);
}

Eigen::VectorXd full_vec(const Eigen::MatrixXd& m) {
  return Eigen::Map<const Eigen::VectorXd>(m.data(), m.size());
}

Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (m + m.transpose()));
  return es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();
}

double min_eigenvalue(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

std::string_view set_tag(SetKind kind) {
  switch (kind) {
    case SetKind::NormBall: return "norm_ball";
    case SetKind::NormIntersection: return "norm_intersection";
    case SetKind::Polyhedron: return "polyhedron";
    case SetKind::FrobeniusBall: return "frobenius_ball";
    case SetKind::SchattenBall: return "schatten_ball";
    case SetKind::PsdInterval: return "psd_interval";
    case SetKind::PsdIntervalTrace: return "psd_interval_trace";
    case SetKind::VecLifted: return "vec_lifted";
    case SetKind::SpectralNormBound: return "spectral_norm_bound";
    case SetKind::Singleton: return "singleton";
  }
  return "unknown";
}

SetKind set_kind_from_tag(std::string_view tag) {
  for (SetKind k : {SetKind::NormBall, SetKind::NormIntersection, SetKind::Polyhedron, SetKind::FrobeniusBall,
                    SetKind::SchattenBall, SetKind::PsdInterval, SetKind::PsdIntervalTrace, SetKind::VecLifted,
                    SetKind::SpectralNormBound, SetKind::Singleton})
    if (set_tag(k) == tag) return k;
  throw std::invalid_argument("unknown set tag '" + std::string(tag) + "'");
}

SetSpec SetSpec::norm_ball(double p, double radius) {
  SetSpec s;
  s.kind = SetKind::NormBall;
  s.p = p;
  s.radius = radius;
  return s;
}

SetSpec SetSpec::norm_intersection(std::vector<NormTerm> terms) {
  SetSpec s;
  s.kind = SetKind::NormIntersection;
  s.terms = std::move(terms);
  return s;
}

SetSpec SetSpec::polyhedron(Eigen::MatrixXd C, Eigen::VectorXd c) {
  SetSpec s;
  s.kind = SetKind::Polyhedron;
  s.C = std::move(C);
  s.c = std::move(c);
  return s;
}

SetSpec SetSpec::frobenius_ball(double radius) {
  SetSpec s;
  s.kind = SetKind::FrobeniusBall;
  s.p = 2.0;
  s.radius = radius;
  return s;
}

SetSpec SetSpec::schatten_ball(double p, double radius) {
  SetSpec s;
  s.kind = SetKind::SchattenBall;
  s.p = p;
  s.radius = radius;
  return s;
}

SetSpec SetSpec::psd_interval(double theta, Eigen::MatrixXd Xi0) {
  SetSpec s;
  s.kind = SetKind::PsdInterval;
  s.theta = theta;
  s.Xi0 = std::move(Xi0);
  return s;
}

SetSpec SetSpec::psd_interval_trace(double theta, Eigen::MatrixXd Xi0, Eigen::MatrixXd D, double tau) {
  SetSpec s;
  s.kind = SetKind::PsdIntervalTrace;
  s.theta = theta;
  s.Xi0 = std::move(Xi0);
  s.D = std::move(D);
  s.tau = tau;
  return s;
}

SetSpec SetSpec::vec_lifted(double p, double radius) {
  SetSpec s;
  s.kind = SetKind::VecLifted;
  s.p = p;
  s.radius = radius;
  return s;
}

SetSpec SetSpec::spectral_norm_bound(double radius) {
  SetSpec s;
  s.kind = SetKind::SpectralNormBound;
  s.p = kInf;
  s.radius = radius;
  return s;
}

bool SetSpec::vector_set() const {
  return kind == SetKind::NormBall || kind == SetKind::NormIntersection || kind == SetKind::Polyhedron ||
         kind == SetKind::Singleton;
}

bool SetSpec::matrix_set() const { return kind != SetKind::NormBall && kind != SetKind::Polyhedron; }

bool contains(const SetSpec& s, const Eigen::VectorXd& z, double tol) {
  switch (s.kind) {
    case SetKind::Singleton: return z.size() == 0 || z.lpNorm<Eigen::Infinity>() <= tol;
    case SetKind::NormBall: return vector_norm(z, s.p) <= s.radius + tol;
    case SetKind::NormIntersection:
      for (const auto& t : s.terms)
        if (vector_norm(z, t.p) > t.radius + tol) return false;
      return true;
    case SetKind::Polyhedron:
      return s.C.rows() == 0 || (s.C * z - s.c).maxCoeff() <= tol;
    default: throw std::invalid_argument("set '" + std::string(set_tag(s.kind)) + "' is not a vector set");
  }
}

bool contains(const SetSpec& s, const Eigen::MatrixXd& x, double tol) {
  switch (s.kind) {
    case SetKind::Singleton: return x.size() == 0 || x.cwiseAbs().maxCoeff() <= tol;
    case SetKind::FrobeniusBall: return x.norm() <= s.radius + tol;
    case SetKind::SchattenBall: return schatten_norm(x, s.p) <= s.radius + tol;
    case SetKind::SpectralNormBound: return schatten_norm(x, kInf) <= s.radius + tol;
    case SetKind::NormIntersection:
      for (const auto& t : s.terms)
        if (schatten_norm(x, t.p) > t.radius + tol) return false;
      return true;
    case SetKind::VecLifted: return vector_norm(full_vec(x), s.p) <= s.radius + tol;
    case SetKind::PsdInterval:
      return min_eigenvalue(x) >= -tol && min_eigenvalue(s.theta * s.Xi0 - x) >= -tol;
    case SetKind::PsdIntervalTrace:
      return min_eigenvalue(x) >= -tol && min_eigenvalue(s.theta * s.Xi0 - x) >= -tol &&
             (x * s.D * x).trace() <= s.tau + tol;
    default: throw std::invalid_argument("set '" + std::string(set_tag(s.kind)) + "' is not a matrix set");
  }
}

std::string_view distance_tag(DistanceKind kind) {
  switch (kind) {
    case DistanceKind::MeanNorm: return "mean_norm";
    case DistanceKind::MeanMahalanobis: return "mean_mahalanobis";
    case DistanceKind::MeanEntropy: return "mean_entropy";
    case DistanceKind::CovFrobeniusSq: return "cov_frobenius_sq";
    case DistanceKind::CovGeneralQuad: return "cov_general_quad";
    case DistanceKind::CovLogDet: return "cov_logdet";
    case DistanceKind::CovPsdGauge: return "cov_psd_gauge";
    case DistanceKind::C2Mahalanobis: return "c2_mahalanobis";
  }
  return "unknown";
}

DistanceKind distance_kind_from_tag(std::string_view tag) {
  for (DistanceKind k : {DistanceKind::MeanNorm, DistanceKind::MeanMahalanobis, DistanceKind::MeanEntropy,
                         DistanceKind::CovFrobeniusSq, DistanceKind::CovGeneralQuad, DistanceKind::CovLogDet,
                         DistanceKind::CovPsdGauge, DistanceKind::C2Mahalanobis})
    if (distance_tag(k) == tag) return k;
  throw std::invalid_argument("unknown distance tag '" + std::string(tag) + "'");
}

DistanceSpec DistanceSpec::mean_norm(double p, double beta) {
  DistanceSpec d;
  d.kind = DistanceKind::MeanNorm;
  d.p = p;
  d.weight = beta;
  return d;
}

DistanceSpec DistanceSpec::mean_mahalanobis(double beta, Eigen::MatrixXd sigma0) {
  DistanceSpec d;
  d.kind = DistanceKind::MeanMahalanobis;
  d.weight = beta;
  d.anchor = std::move(sigma0);
  return d;
}

DistanceSpec DistanceSpec::mean_entropy(Eigen::VectorXd mu0) {
  DistanceSpec d;
  d.kind = DistanceKind::MeanEntropy;
  d.weight = 1.0;
  d.anchor_mean = std::move(mu0);
  return d;
}

DistanceSpec DistanceSpec::cov_frobenius_sq(double beta) {
  DistanceSpec d;
  d.kind = DistanceKind::CovFrobeniusSq;
  d.weight = beta;
  return d;
}

DistanceSpec DistanceSpec::cov_general_quad(Eigen::MatrixXd P1, Eigen::MatrixXd P2) {
  DistanceSpec d;
  d.kind = DistanceKind::CovGeneralQuad;
  d.weight = 1.0;
  d.P1 = std::move(P1);
  d.P2 = std::move(P2);
  return d;
}

DistanceSpec DistanceSpec::cov_logdet(double beta) {
  DistanceSpec d;
  d.kind = DistanceKind::CovLogDet;
  d.weight = beta;
  return d;
}

DistanceSpec DistanceSpec::cov_psd_gauge(double beta, Eigen::MatrixXd sigma0) {
  DistanceSpec d;
  d.kind = DistanceKind::CovPsdGauge;
  d.weight = beta;
  d.anchor = std::move(sigma0);
  return d;
}

DistanceSpec DistanceSpec::c2_mahalanobis(double eta) {
  DistanceSpec d;
  d.kind = DistanceKind::C2Mahalanobis;
  d.weight = eta;
  return d;
}

bool DistanceSpec::on_mean() const {
  return kind == DistanceKind::MeanNorm || kind == DistanceKind::MeanMahalanobis || kind == DistanceKind::MeanEntropy;
}

bool DistanceSpec::on_covariance() const {
  return kind == DistanceKind::CovFrobeniusSq || kind == DistanceKind::CovGeneralQuad ||
         kind == DistanceKind::CovLogDet || kind == DistanceKind::CovPsdGauge;
}

bool DistanceSpec::two_argument() const {
  return kind == DistanceKind::MeanNorm || kind == DistanceKind::MeanMahalanobis ||
         kind == DistanceKind::CovFrobeniusSq || kind == DistanceKind::CovGeneralQuad ||
         kind == DistanceKind::CovLogDet;
}

bool DistanceSpec::single_argument() const { return kind != DistanceKind::C2Mahalanobis; }

}  // namespace gdro::model
