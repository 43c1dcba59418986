#include "fbmsteer/config.hpp"

#include <fstream>

namespace fbmsteer {

namespace {

const char* kScenarios[] = {"sample-fbm", "check-kernel", "resolvent", "steer", "verify"};

}  // namespace

bool scenario_known(const std::string& scenario) {
  for (const char* s : kScenarios)
    if (scenario == s) return true;
  return false;
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
  static const char* allowed[] = {"scenario", "spec_path", "seed",   "n_steps", "modes",
                                  "paths",    "hurst",     "out",    "force",   "target",
                                  "sampler"};
  if (!j.is_object()) throw std::invalid_argument("config: expected a JSON object");
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* a : allowed)
      if (key == a) {
        ok = true;
        break;
      }
    if (!ok) throw std::invalid_argument("config: unknown key '" + key + "'");
  }
  ExperimentConfig c;
  if (j.contains("scenario")) c.scenario = j["scenario"].get<std::string>();
  if (!c.scenario.empty() && !scenario_known(c.scenario))
    throw std::invalid_argument("config: unknown scenario '" + c.scenario + "'");
  if (j.contains("spec_path")) c.spec_path = j["spec_path"].get<std::string>();
  if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("n_steps")) c.n_steps = j["n_steps"].get<std::size_t>();
  if (j.contains("modes")) c.modes = j["modes"].get<std::size_t>();
  if (j.contains("paths")) c.paths = j["paths"].get<std::size_t>();
  if (j.contains("hurst")) c.hurst = j["hurst"].get<double>();
  if (j.contains("out")) c.out = j["out"].get<std::string>();
  if (j.contains("force")) c.force = j["force"].get<bool>();
  if (j.contains("target")) c.target = j["target"].get<std::string>();
  if (j.contains("sampler")) c.sampler = j["sampler"].get<std::string>();
  if (c.target != "first-mode" && c.target != "zero")
    throw std::invalid_argument("config: target must be 'first-mode' or 'zero'");
  if (c.sampler != "volterra" && c.sampler != "cholesky" && c.sampler != "both")
    throw std::invalid_argument("config: sampler must be volterra, cholesky or both");
  return c;
}

nlohmann::json config_to_json(const ExperimentConfig& c) {
  nlohmann::json j = {{"scenario", c.scenario}, {"seed", c.seed},     {"out", c.out},
                      {"force", c.force},       {"target", c.target}, {"sampler", c.sampler}};
  if (!c.spec_path.empty()) j["spec_path"] = c.spec_path;
  if (c.n_steps) j["n_steps"] = *c.n_steps;
  if (c.modes) j["modes"] = *c.modes;
  if (c.paths) j["paths"] = *c.paths;
  if (c.hurst) j["hurst"] = *c.hurst;
  return j;
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot open '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw std::invalid_argument("config: JSON parse error in '" + path + "': " + e.what());
  }
  return config_from_json(j);
}

}  // namespace fbmsteer
