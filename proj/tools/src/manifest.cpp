#include "pdmplab_cli/manifest.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

#include "pdmplab_cli/config.hpp"

namespace pdmplab::cli {

std::uint64_t fnv1a64_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  char buf[4096];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      hash ^= static_cast<unsigned char>(buf[i]);
      hash *= 0x100000001b3ULL;
    }
  }
  return hash;
}

nlohmann::json RunManifest::to_json() const {
  nlohmann::json j;
  j["scenario"] = scenario;
  j["seed"] = seed;
  j["toolkit_version"] = kToolkitVersion;
  j["config"] = config;
  j["wall_clock_seconds"] = wall_clock_seconds;
  nlohmann::json outs = nlohmann::json::object();
  for (const auto& path : outputs) {
    std::ostringstream hex;
    hex << std::hex << std::setfill('0') << std::setw(16) << fnv1a64_file(path);
    outs[path.filename().string()] = {
        {"bytes", std::filesystem::file_size(path)}, {"fnv1a64", hex.str()}};
  }
  j["outputs"] = outs;
  return j;
}

void RunManifest::write(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  out << to_json().dump(2) << "\n";
}

}  // namespace pdmplab::cli
