#pragma once

#include "gdro/model/scenario.hpp"

#include <nlohmann/json.hpp>

#include <string>

namespace gdro::model {

inline constexpr int kSchemaVersion = 1;

/// Parse failures (syntax, missing fields, wrong types) surface as
/// ValidationError so that callers see one error family for bad input.
Scenario scenario_from_json(const nlohmann::ordered_json& j);
nlohmann::ordered_json scenario_to_json(const Scenario& s);
Scenario load_scenario(const std::string& path);
void save_scenario(const Scenario& s, const std::string& path);

nlohmann::ordered_json set_to_json(const SetSpec& s);
SetSpec set_from_json(const nlohmann::ordered_json& j);
nlohmann::ordered_json distance_to_json(const DistanceSpec& d);
DistanceSpec distance_from_json(const nlohmann::ordered_json& j);

nlohmann::ordered_json matrix_to_json(const Eigen::MatrixXd& m);
Eigen::MatrixXd matrix_from_json(const nlohmann::ordered_json& j);
nlohmann::ordered_json vector_to_json(const Eigen::VectorXd& v);
Eigen::VectorXd vector_from_json(const nlohmann::ordered_json& j);

}  // namespace gdro::model
