#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "pdmplab_cli/config.hpp"
#include "pdmplab_cli/manifest.hpp"

namespace pdmplab::cli {

struct RunOptions {
  std::string scenario;
  std::filesystem::path config_path;
  std::filesystem::path out_dir;
  std::uint64_t seed = 0;
  std::optional<std::int64_t> replicas;  // overrides the scenario's replica knob
  std::optional<double> horizon;         // overrides the scenario's horizon
  int n_threads = 0;
};

// Validates the configuration, dispatches to the owning module, writes the
// CSV artifacts and the JSON manifest into out_dir. Throws std::runtime_error
// with scenario context on failure.
RunManifest run_scenario(const RunOptions& opt);

}  // namespace pdmplab::cli
