#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace tscreen {

inline constexpr std::string_view kToolVersion = "0.1.0";

std::string sha256_hex(std::string_view data);
std::string sha256_file(const std::string& path);

/// Provenance record written next to every command's outputs.
struct RunManifest {
  std::string command;
  std::vector<std::string> inputs;
  std::vector<std::string> input_digests;
  nlohmann::json config;        // effective configuration after flag overrides
  std::string config_digest;    // sha256 of config + tool version; referenced by outputs
  std::string tool_version{kToolVersion};
  std::string created;          // ISO-8601 UTC; SOURCE_DATE_EPOCH when set
  std::vector<std::string> outputs;

  static RunManifest start(std::string command, const nlohmann::json& config, const std::vector<std::string>& inputs);
  nlohmann::json to_json() const;
  void write(const std::string& path) const;
};

}  // namespace tscreen
