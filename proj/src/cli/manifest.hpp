#pragma once

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace qcontrol::cli {

inline constexpr const char* kToolVersion = "0.3.0";
inline constexpr const char* kManifestSchema = "qcontrol.manifest/1";

struct RunManifest {
  std::string command;
  std::vector<std::string> argv;
  nlohmann::ordered_json config = nlohmann::ordered_json::object();
  nlohmann::ordered_json instance;
  std::string instance_path;
  nlohmann::ordered_json seeds = nlohmann::ordered_json::object();
  std::string started_at;
  std::string finished_at;
  std::string status = "ok";
  std::string error;
  std::vector<std::string> outputs;
  nlohmann::ordered_json result = nlohmann::ordered_json::object();
};

/// ISO 8601 UTC, second resolution.
std::string utc_now();

nlohmann::ordered_json to_json(const RunManifest& m);
RunManifest manifest_from_json(const nlohmann::json& doc);

/// Stamps finished_at, drops outputs that were never written, and writes
/// dir/manifest.json atomically.
void write_manifest(const std::filesystem::path& dir, RunManifest& m);
RunManifest read_manifest(const std::filesystem::path& path);

}  // namespace qcontrol::cli
