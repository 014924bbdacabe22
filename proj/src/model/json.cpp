#include "gdro/model/json.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace gdro::model {

using nlohmann::ordered_json;

ordered_json vector_to_json(const Eigen::VectorXd& v) {
  ordered_json a = ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Eigen::VectorXd vector_from_json(const ordered_json& j) {
  if (!j.is_array()) throw std::invalid_argument("expected an array of numbers");
  Eigen::VectorXd v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  return v;
}

ordered_json matrix_to_json(const Eigen::MatrixXd& m) {
  ordered_json rows = ordered_json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) rows.push_back(vector_to_json(m.row(r).transpose()));
  return rows;
}

Eigen::MatrixXd matrix_from_json(const ordered_json& j) {
  if (!j.is_array()) throw std::invalid_argument("expected a nested array (row-major matrix)");
  if (j.empty()) return Eigen::MatrixXd(0, 0);
  const std::size_t cols = j[0].size();
  Eigen::MatrixXd m(j.size(), cols);
  for (std::size_t r = 0; r < j.size(); ++r) {
    if (!j[r].is_array() || j[r].size() != cols) throw std::invalid_argument("ragged matrix rows");
    for (std::size_t c = 0; c < cols; ++c)
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = j[r][c].get<double>();
  }
  return m;
}

namespace {

ordered_json exponent_to_json(double p) { return std::isinf(p) ? ordered_json("inf") : ordered_json(p); }

double exponent_from_json(const ordered_json& j) {
  if (j.is_string()) {
    if (j.get<std::string>() == "inf") return kInf;
    throw std::invalid_argument("norm exponent must be a number or \"inf\"");
  }
  return j.get<double>();
}

}  // namespace

ordered_json set_to_json(const SetSpec& s) {
  ordered_json j;
  j["tag"] = std::string(set_tag(s.kind));
  switch (s.kind) {
    case SetKind::NormBall:
    case SetKind::SchattenBall:
      j["p"] = exponent_to_json(s.p);
      j["radius"] = s.radius;
      break;
    case SetKind::FrobeniusBall:
    case SetKind::SpectralNormBound: j["radius"] = s.radius; break;
    case SetKind::VecLifted:
      j["inner"] = {{"tag", "norm_ball"}, {"p", exponent_to_json(s.p)}, {"radius", s.radius}};
      break;
    case SetKind::NormIntersection: {
      ordered_json terms = ordered_json::array();
      for (const auto& t : s.terms) terms.push_back({{"p", exponent_to_json(t.p)}, {"radius", t.radius}});
      j["norms"] = terms;
      break;
    }
    case SetKind::Polyhedron:
      j["C"] = matrix_to_json(s.C);
      j["c"] = vector_to_json(s.c);
      break;
    case SetKind::PsdInterval:
      j["theta"] = s.theta;
      j["Xi0"] = matrix_to_json(s.Xi0);
      break;
    case SetKind::PsdIntervalTrace:
      j["theta"] = s.theta;
      j["Xi0"] = matrix_to_json(s.Xi0);
      j["D"] = matrix_to_json(s.D);
      j["tau"] = s.tau;
      break;
    case SetKind::Singleton: break;
  }
  return j;
}

SetSpec set_from_json(const ordered_json& j) {
  const SetKind kind = set_kind_from_tag(j.at("tag").get<std::string>());
  switch (kind) {
    case SetKind::NormBall: return SetSpec::norm_ball(exponent_from_json(j.at("p")), j.at("radius").get<double>());
    case SetKind::SchattenBall:
      return SetSpec::schatten_ball(exponent_from_json(j.at("p")), j.at("radius").get<double>());
    case SetKind::FrobeniusBall: return SetSpec::frobenius_ball(j.at("radius").get<double>());
    case SetKind::SpectralNormBound: return SetSpec::spectral_norm_bound(j.at("radius").get<double>());
    case SetKind::VecLifted: {
      const auto& inner = j.at("inner");
      if (inner.at("tag") != "norm_ball") throw std::invalid_argument("vec_lifted supports an inner norm_ball only");
      return SetSpec::vec_lifted(exponent_from_json(inner.at("p")), inner.at("radius").get<double>());
    }
    case SetKind::NormIntersection: {
      std::vector<NormTerm> terms;
      for (const auto& t : j.at("norms")) terms.push_back({exponent_from_json(t.at("p")), t.at("radius").get<double>()});
      return SetSpec::norm_intersection(std::move(terms));
    }
    case SetKind::Polyhedron: return SetSpec::polyhedron(matrix_from_json(j.at("C")), vector_from_json(j.at("c")));
    case SetKind::PsdInterval: return SetSpec::psd_interval(j.at("theta").get<double>(), matrix_from_json(j.at("Xi0")));
    case SetKind::PsdIntervalTrace:
      return SetSpec::psd_interval_trace(j.at("theta").get<double>(), matrix_from_json(j.at("Xi0")),
                                         matrix_from_json(j.at("D")), j.at("tau").get<double>());
    case SetKind::Singleton: return SetSpec::singleton();
  }
  throw std::invalid_argument("unknown set tag");
}

ordered_json distance_to_json(const DistanceSpec& d) {
  ordered_json j;
  j["tag"] = std::string(distance_tag(d.kind));
  switch (d.kind) {
    case DistanceKind::MeanNorm:
      j["p"] = exponent_to_json(d.p);
      j["beta"] = d.weight;
      break;
    case DistanceKind::MeanMahalanobis:
    case DistanceKind::CovPsdGauge:
      j["beta"] = d.weight;
      if (d.anchor.size()) j["sigma0"] = matrix_to_json(d.anchor);
      break;
    case DistanceKind::MeanEntropy:
      if (d.anchor_mean.size()) j["mu0"] = vector_to_json(d.anchor_mean);
      break;
    case DistanceKind::CovFrobeniusSq:
    case DistanceKind::CovLogDet: j["beta"] = d.weight; break;
    case DistanceKind::CovGeneralQuad:
      j["P1"] = matrix_to_json(d.P1);
      j["P2"] = matrix_to_json(d.P2);
      break;
    case DistanceKind::C2Mahalanobis: j["eta"] = d.weight; break;
  }
  return j;
}

DistanceSpec distance_from_json(const ordered_json& j) {
  const DistanceKind kind = distance_kind_from_tag(j.at("tag").get<std::string>());
  switch (kind) {
    case DistanceKind::MeanNorm: return DistanceSpec::mean_norm(exponent_from_json(j.at("p")), j.at("beta").get<double>());
    case DistanceKind::MeanMahalanobis:
      return DistanceSpec::mean_mahalanobis(j.at("beta").get<double>(),
                                            j.contains("sigma0") ? matrix_from_json(j["sigma0"]) : Eigen::MatrixXd());
    case DistanceKind::CovPsdGauge:
      return DistanceSpec::cov_psd_gauge(j.at("beta").get<double>(),
                                         j.contains("sigma0") ? matrix_from_json(j["sigma0"]) : Eigen::MatrixXd());
    case DistanceKind::MeanEntropy:
      return DistanceSpec::mean_entropy(j.contains("mu0") ? vector_from_json(j["mu0"]) : Eigen::VectorXd());
    case DistanceKind::CovFrobeniusSq: return DistanceSpec::cov_frobenius_sq(j.at("beta").get<double>());
    case DistanceKind::CovLogDet: return DistanceSpec::cov_logdet(j.at("beta").get<double>());
    case DistanceKind::CovGeneralQuad:
      return DistanceSpec::cov_general_quad(matrix_from_json(j.at("P1")), matrix_from_json(j.at("P2")));
    case DistanceKind::C2Mahalanobis: return DistanceSpec::c2_mahalanobis(j.at("eta").get<double>());
  }
  throw std::invalid_argument("unknown distance tag");
}

namespace {

Scenario parse(const ordered_json& j) {
  if (!j.is_object()) throw std::invalid_argument("scenario must be a JSON object");
  if (!j.contains("schema")) throw std::invalid_argument("missing required field 'schema'");
  if (j.at("schema").get<int>() != kSchemaVersion)
    throw std::invalid_argument("unsupported schema version " + j.at("schema").dump());
  Scenario s;
  s.variant = variant_from_tag(j.at("variant").get<std::string>());
  s.n = j.at("n").get<int>();
  s.k = j.at("k").get<int>();
  const auto& obj = j.at("objective");
  s.objective_kind = objective_from_tag(obj.value("kind", std::string("minimize_cost")));
  s.cost = vector_from_json(obj.at("c"));

  const auto& con = j.at("constraint");
  for (const auto& p : con.at("pieces")) {
    Piece piece;
    piece.a.coeffs = vector_from_json(p.at("a").at("coeffs"));
    piece.a.constant = p.at("a").value("constant", 0.0);
    piece.b = p.at("b").get<double>();
    s.constraint.pieces.push_back(std::move(piece));
  }
  s.constraint.w.matrix = matrix_from_json(con.at("w").at("matrix"));
  s.constraint.w.offset = con.at("w").contains("offset") ? vector_from_json(con.at("w").at("offset"))
                                                         : Eigen::VectorXd::Zero(s.constraint.w.matrix.rows());

  const auto& mm = j.at("moments");
  s.moments.mu0 = vector_from_json(mm.at("mu0"));
  s.moments.sigma0 = matrix_from_json(mm.at("sigma0"));
  if (mm.contains("A")) s.moments.A = matrix_from_json(mm.at("A"));
  s.moments.U1 = set_from_json(mm.at("U1"));
  s.moments.U2 = set_from_json(mm.at("U2"));
  if (mm.contains("Z1")) s.moments.Z1 = set_from_json(mm.at("Z1"));
  if (mm.contains("Z2")) s.moments.Z2 = set_from_json(mm.at("Z2"));
  if (j.contains("support") && !j.at("support").is_null()) s.support = set_from_json(j.at("support"));

  const auto& dist = j.at("distance");
  s.distance.phi = distance_from_json(dist.at("phi"));
  if (dist.contains("psi") && !dist.at("psi").is_null()) s.distance.psi = distance_from_json(dist.at("psi"));

  if (j.contains("decision_constraints")) {
    const auto& dc = j.at("decision_constraints");
    if (dc.contains("G")) s.decision.G = matrix_from_json(dc.at("G"));
    if (dc.contains("g")) s.decision.g = vector_from_json(dc.at("g"));
    if (dc.contains("E")) s.decision.E = matrix_from_json(dc.at("E"));
    if (dc.contains("e")) s.decision.e = vector_from_json(dc.at("e"));
  }
  if (s.decision.G.rows() == 0) s.decision.G.resize(0, s.n);
  if (s.decision.E.rows() == 0) s.decision.E.resize(0, s.n);
  return s;
}

}  // namespace

Scenario scenario_from_json(const ordered_json& j) {
  try {
    return parse(j);
  } catch (const ValidationError&) {
    throw;
  } catch (const std::exception& e) {
    throw ValidationError({std::string("malformed scenario: ") + e.what()});
  }
}

ordered_json scenario_to_json(const Scenario& s) {
  ordered_json j;
  j["schema"] = kSchemaVersion;
  j["variant"] = std::string(variant_tag(s.variant));
  j["n"] = s.n;
  j["k"] = s.k;
  j["objective"] = {{"kind", std::string(objective_tag(s.objective_kind))}, {"c", vector_to_json(s.cost)}};
  ordered_json pieces = ordered_json::array();
  for (const auto& p : s.constraint.pieces)
    pieces.push_back({{"a", {{"coeffs", vector_to_json(p.a.coeffs)}, {"constant", p.a.constant}}}, {"b", p.b}});
  j["constraint"] = {{"pieces", pieces},
                     {"w", {{"matrix", matrix_to_json(s.constraint.w.matrix)}, {"offset", vector_to_json(s.constraint.w.offset)}}}};
  ordered_json mm;
  mm["mu0"] = vector_to_json(s.moments.mu0);
  mm["sigma0"] = matrix_to_json(s.moments.sigma0);
  if (s.moments.A.size()) mm["A"] = matrix_to_json(s.moments.A);
  mm["U1"] = set_to_json(s.moments.U1);
  mm["U2"] = set_to_json(s.moments.U2);
  mm["Z1"] = set_to_json(s.moments.Z1);
  mm["Z2"] = set_to_json(s.moments.Z2);
  j["moments"] = mm;
  if (s.support) j["support"] = set_to_json(*s.support);
  ordered_json dist;
  dist["phi"] = distance_to_json(s.distance.phi);
  if (s.distance.psi) dist["psi"] = distance_to_json(*s.distance.psi);
  j["distance"] = dist;
  j["decision_constraints"] = {{"G", matrix_to_json(s.decision.G)},
                               {"g", vector_to_json(s.decision.g)},
                               {"E", matrix_to_json(s.decision.E)},
                               {"e", vector_to_json(s.decision.e)}};
  return j;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError({"cannot open scenario file '" + path + "'"});
  ordered_json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ValidationError({std::string("malformed scenario: ") + e.what()});
  }
  return scenario_from_json(j);
}

void save_scenario(const Scenario& s, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << scenario_to_json(s).dump(2) << "\n";
}

}  // namespace gdro::model
