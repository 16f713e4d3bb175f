#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

namespace pdmplab::cli {

inline constexpr const char* kToolkitVersion = "0.1.0";

// Scenario names accepted on the command line.
const std::vector<std::string>& scenario_names();

struct ValidationResult {
  bool ok = false;
  nlohmann::json config;            // normalized (defaults filled in)
  std::vector<std::string> errors;  // one entry per violation

  std::string joined_errors() const;
};

// Parses and schema-validates a scenario configuration file. Parse errors
// carry the line number; schema errors carry the offending key path. All
// violations are collected, not just the first.
ValidationResult validate_config(const std::string& scenario,
                                 const std::filesystem::path& path);
ValidationResult validate_config_json(const std::string& scenario,
                                      const nlohmann::json& raw);

}  // namespace pdmplab::cli
