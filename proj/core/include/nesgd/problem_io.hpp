#pragma once

#include <nlohmann/json.hpp>

#include "nesgd/problems.hpp"

namespace nesgd {

nlohmann::json to_json(const Point& x);
Point point_from_json(const nlohmann::json& doc);

nlohmann::json to_json(const OperatorSpace& space);
OperatorSpace space_from_json(const nlohmann::json& doc);

nlohmann::json to_json(const StructuredOperator& op);
StructuredOperator operator_from_json(const nlohmann::json& doc, const OperatorSpace& space);

nlohmann::json to_json(const SymmetricMap& map);
SymmetricMap map_from_json(const nlohmann::json& doc);

/// Full ProblemSpec document; infinite radius is written as the string "inf".
nlohmann::json to_json(const ProblemSpec& p);
ProblemSpec problem_from_json(const nlohmann::json& doc);

}  // namespace nesgd
