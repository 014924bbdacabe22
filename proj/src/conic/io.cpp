#include "gdro/conic/io.hpp"

namespace gdro::conic {

using nlohmann::ordered_json;

namespace {

ordered_json vec_json(const Eigen::VectorXd& v) {
  ordered_json a = ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Eigen::VectorXd json_vec(const ordered_json& a) {
  Eigen::VectorXd v(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) v(static_cast<Eigen::Index>(i)) = a[i].get<double>();
  return v;
}

}  // namespace

ordered_json program_to_json(const ConicProgram& program) {
  ordered_json j;
  j["format"] = "gdro-conic-program";
  j["version"] = 1;
  j["psd_vectorization"] = "lower triangle, column-major, off-diagonal scaled by sqrt(2)";
  j["num_vars"] = program.num_vars;
  ordered_json vars = ordered_json::array();
  for (const auto& v : program.variables) vars.push_back({{"name", v.name}, {"start", v.start}, {"dim", v.dim}});
  j["variables"] = vars;
  ordered_json obj = ordered_json::array();
  for (const auto& [col, coef] : program.objective) obj.push_back(ordered_json::array({col, coef}));
  j["objective"] = {{"coeffs", obj}, {"constant", program.objective_constant}};
  ordered_json cons = ordered_json::array();
  for (const auto& c : program.constraints) {
    ordered_json trip = ordered_json::array();
    for (const auto& t : c.coeffs) trip.push_back(ordered_json::array({t.row, t.col, t.value}));
    ordered_json cone = {{"kind", std::string(cone_name(c.cone.kind))}, {"dim", c.cone.dim}};
    if (c.cone.kind == ConeKind::Psd) cone["order"] = c.cone.order;
    cons.push_back({{"name", c.name}, {"cone", cone}, {"triplets", trip}, {"offset", vec_json(c.offset)}});
  }
  j["constraints"] = cons;
  return j;
}

ConicProgram program_from_json(const ordered_json& j) {
  try {
    if (j.at("format") != "gdro-conic-program") throw ProgramError("not a program dump");
    ConicProgram p;
    p.num_vars = j.at("num_vars").get<int>();
    for (const auto& v : j.at("variables"))
      p.variables.push_back({v.at("name").get<std::string>(), v.at("start").get<int>(), v.at("dim").get<int>()});
    for (const auto& t : j.at("objective").at("coeffs")) p.objective.emplace_back(t.at(0).get<int>(), t.at(1).get<double>());
    p.objective_constant = j.at("objective").at("constant").get<double>();
    for (const auto& c : j.at("constraints")) {
      ConstraintBlock b;
      b.name = c.at("name").get<std::string>();
      const auto& cone = c.at("cone");
      b.cone.kind = cone_from_name(cone.at("kind").get<std::string>());
      b.cone.dim = cone.at("dim").get<int>();
      b.cone.order = cone.contains("order") ? cone.at("order").get<int>() : 0;
      if (b.cone.kind == ConeKind::Psd && tri_size(b.cone.order) != b.cone.dim)
        throw ProgramError("constraint '" + b.name + "': psd dimension is not triangular");
      for (const auto& t : c.at("triplets")) {
        Triplet tr{t.at(0).get<int>(), t.at(1).get<int>(), t.at(2).get<double>()};
        if (tr.col < 0 || tr.col >= p.num_vars || tr.row < 0 || tr.row >= b.cone.dim)
          throw ProgramError("constraint '" + b.name + "': triplet index out of range");
        b.coeffs.push_back(tr);
      }
      b.offset = json_vec(c.at("offset"));
      if (b.offset.size() != b.cone.dim) throw ProgramError("constraint '" + b.name + "': offset size mismatch");
      p.constraints.push_back(std::move(b));
    }
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw ProgramError(std::string("malformed program dump: ") + e.what());
  }
}

std::string dump_program(const ConicProgram& program) { return program_to_json(program).dump(1) + "\n"; }

ConicProgram parse_program(const std::string& text) {
  try {
    return program_from_json(ordered_json::parse(text));
  } catch (const nlohmann::json::parse_error& e) {
    throw ProgramError(std::string("malformed program dump: ") + e.what());
  }
}

ordered_json solution_to_json(const ConicProgram& program, const Solution& solution) {
  ordered_json j;
  j["status"] = std::string(status_name(solution.status));
  j["objective"] = solution.objective;
  j["iterations"] = solution.iterations;
  if (!solution.message.empty()) j["message"] = solution.message;
  ordered_json vars = ordered_json::object();
  if (solution.primal.size() == program.num_vars)
    for (const auto& v : program.variables) vars[v.name] = vec_json(solution.primal.segment(v.start, v.dim));
  j["variables"] = vars;
  return j;
}

}  // namespace gdro::conic
