#pragma once

#include "gdro/conic/program.hpp"
#include "gdro/conic/solver.hpp"

#include <nlohmann/json.hpp>

#include <string>

namespace gdro::conic {

/// Program dump: sparse triplets, cone descriptors and the variable table.
/// PSD rows hold svec(S): lower triangle stacked column by column, entries
/// below the diagonal multiplied by sqrt(2).
nlohmann::ordered_json program_to_json(const ConicProgram& program);
ConicProgram program_from_json(const nlohmann::ordered_json& j);

std::string dump_program(const ConicProgram& program);
ConicProgram parse_program(const std::string& text);

nlohmann::ordered_json solution_to_json(const ConicProgram& program, const Solution& solution);

}  // namespace gdro::conic
