#pragma once

#include <json.hpp>

#include "fbmsteer/system_model.hpp"

namespace fbmsteer {

/// Strict JSON (de)serialization of the system description: unknown keys are
/// rejected at every level.
nlohmann::json spec_to_json(const DelaySystemSpec& spec);
DelaySystemSpec spec_from_json(const nlohmann::json& j);

DelaySystemSpec load_spec_file(const std::string& path);
void save_spec_file(const std::string& path, const DelaySystemSpec& spec);

}  // namespace fbmsteer
