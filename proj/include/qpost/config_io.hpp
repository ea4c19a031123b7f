#pragma once

#include "qpost/scenarios.hpp"
#include "qpost/verify.hpp"

#include <string>
#include <string_view>

namespace qpost {

// JSON (de)serialisation of run configurations. Parsing is strict: unknown
// keys and wrongly typed values raise ErrorCode::Config naming the key path.
// Missing keys take their defaults, and serialisation always writes every key.

ScenarioConfig scenario_from_json(std::string_view text);
std::string scenario_to_json(const ScenarioConfig& config);

VerifyConfig verify_config_from_json(std::string_view text);
std::string verify_config_to_json(const VerifyConfig& config);

} // namespace qpost
