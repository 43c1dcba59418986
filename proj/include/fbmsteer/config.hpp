#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

namespace fbmsteer {

inline constexpr std::uint64_t kDefaultSeed = 42;

/// Experiment configuration: the CLI's --config document. Strict schema;
/// command-line flags override file values.
struct ExperimentConfig {
  std::string scenario;  // sample-fbm | check-kernel | resolvent | steer | verify
  std::string spec_path;
  std::uint64_t seed = kDefaultSeed;
  std::optional<std::size_t> n_steps;
  std::optional<std::size_t> modes;
  std::optional<std::size_t> paths;
  std::optional<double> hurst;
  std::string out;
  bool force = false;
  std::string target = "first-mode";  // steer target: first-mode | zero
  std::string sampler = "both";       // sample-fbm: volterra | cholesky | both
};

bool scenario_known(const std::string& scenario);

ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& c);
ExperimentConfig load_config_file(const std::string& path);

}  // namespace fbmsteer
