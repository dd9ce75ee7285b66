#pragma once

#include "pdhj/characteristics.hpp"
#include "pdhj/control.hpp"
#include "pdhj/functional.hpp"
#include "pdhj/lyapunov.hpp"
#include "pdhj/minimax.hpp"
#include "pdhj/value.hpp"

#include <nlohmann/json.hpp>

#include <string>

namespace pdhj {

// JSON views of the report types.  Object keys are sorted by nlohmann::json,
// so serializing the same report twice gives the same bytes.

nlohmann::json to_json_value(const Vector& v);
nlohmann::json to_json_value(const ValueResult& r);
nlohmann::json to_json_value(const ConditionReport& r);
nlohmann::json to_json_value(const NonanticipationReport& r);
nlohmann::json to_json_value(const CiDerivatives& r);
nlohmann::json to_json_value(const C4Report& r);
nlohmann::json to_json_value(const GrowthReport& r);
nlohmann::json to_json_value(const LipschitzReport& r);
nlohmann::json to_json_value(const HomogeneityReport& r);
nlohmann::json to_json_value(const BoundaryReport& r);
nlohmann::json to_json_value(const MReport& r);
nlohmann::json to_json_value(const OneSidedReport& r);
nlohmann::json to_json_value(const MCReport& r);
nlohmann::json to_json_value(const TouchReport& r);
nlohmann::json to_json_value(const ConsistencyReport& r);
nlohmann::json to_json_value(const StabilityReport& r);
nlohmann::json to_json_value(const DPConfig& c);

/// Two-space indented dump with a trailing newline.
std::string serialize(const nlohmann::json& report);

}  // namespace pdhj
