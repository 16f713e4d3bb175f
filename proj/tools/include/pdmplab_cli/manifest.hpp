#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

namespace pdmplab::cli {

std::uint64_t fnv1a64_file(const std::filesystem::path& path);

// Records what a run produced: the echoed configuration, the seed, the
// toolkit version and one checksum per output file. Re-running with the same
// configuration and seed reproduces identical checksums.
struct RunManifest {
  std::string scenario;
  std::uint64_t seed = 0;
  nlohmann::json config;
  double wall_clock_seconds = 0.0;
  std::vector<std::filesystem::path> outputs;

  nlohmann::json to_json() const;
  void write(const std::filesystem::path& path) const;
};

}  // namespace pdmplab::cli
