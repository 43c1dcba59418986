#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <json.hpp>

namespace fbmsteer::io {

std::uint64_t fnv1a64(const std::string& bytes);
std::uint64_t fnv1a64_file(const std::filesystem::path& path);

/// Writes <dir>/manifest.json: config echo, versions, wall clock, and an
/// fnv1a64 checksum per output file. Written exactly once, after all outputs.
void write_manifest(const std::filesystem::path& dir, const std::string& scenario,
                    const nlohmann::json& config_echo, std::uint64_t seed, double wall_seconds);

}  // namespace fbmsteer::io
