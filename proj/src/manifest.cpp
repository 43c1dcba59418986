#include "fbmsteer/manifest.hpp"

#include <fstream>
#include <sstream>

namespace fbmsteer::io {

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::uint64_t fnv1a64_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return fnv1a64(ss.str());
}

void write_manifest(const std::filesystem::path& dir, const std::string& scenario,
                    const nlohmann::json& config_echo, std::uint64_t seed, double wall_seconds) {
  nlohmann::json files = nlohmann::json::object();
  std::vector<std::filesystem::path> entries;
  for (const auto& e : std::filesystem::directory_iterator(dir))
    if (e.is_regular_file() && e.path().filename() != "manifest.json")
      entries.push_back(e.path());
  std::sort(entries.begin(), entries.end());
  for (const auto& p : entries) {
    char hex[32];
    std::snprintf(hex, sizeof(hex), "%016llx",
                  static_cast<unsigned long long>(fnv1a64_file(p)));
    files[p.filename().string()] = {{"bytes", std::filesystem::file_size(p)},
                                    {"fnv1a64", std::string(hex)}};
  }
  nlohmann::json m = {{"artifact", "fbmsteer"},
                      {"version", "1.0.0"},
                      {"scenario", scenario},
                      {"config", config_echo},
                      {"seed", seed},
                      {"wall_seconds", wall_seconds},
                      {"files", files}};
  std::ofstream out(dir / "manifest.json", std::ios::binary);
  out << m.dump(2) << "\n";
}

}  // namespace fbmsteer::io
