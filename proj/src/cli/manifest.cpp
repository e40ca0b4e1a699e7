#include "cli/manifest.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>

#include "qcontrol/tables.hpp"

namespace qcontrol::cli {

namespace fs = std::filesystem;

std::string utc_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

nlohmann::ordered_json to_json(const RunManifest& m) {
  nlohmann::ordered_json doc;
  doc["schema"] = kManifestSchema;
  doc["tool"] = "qcontrol";
  doc["version"] = kToolVersion;
  doc["command"] = m.command;
  doc["argv"] = m.argv;
  doc["config"] = m.config;
  if (!m.instance.is_null()) {
    doc["instance_path"] = m.instance_path;
    doc["instance"] = m.instance;
  }
  doc["seeds"] = m.seeds;
  doc["started_at"] = m.started_at;
  doc["finished_at"] = m.finished_at;
  doc["status"] = m.status;
  if (!m.error.empty()) doc["error"] = m.error;
  doc["outputs"] = m.outputs;
  doc["result"] = m.result;
  return doc;
}

RunManifest manifest_from_json(const nlohmann::json& doc) {
  if (!doc.is_object() || doc.value("schema", "") != kManifestSchema) {
    throw std::invalid_argument(std::string("manifest needs schema '") + kManifestSchema + "'");
  }
  RunManifest m;
  m.command = doc.at("command").get<std::string>();
  m.argv = doc.at("argv").get<std::vector<std::string>>();
  m.config = nlohmann::ordered_json::parse(doc.at("config").dump());
  if (doc.contains("instance")) {
    m.instance = nlohmann::ordered_json::parse(doc.at("instance").dump());
    m.instance_path = doc.value("instance_path", "");
  }
  m.seeds = nlohmann::ordered_json::parse(doc.value("seeds", nlohmann::json::object()).dump());
  m.started_at = doc.value("started_at", "");
  m.finished_at = doc.value("finished_at", "");
  m.status = doc.value("status", "ok");
  m.error = doc.value("error", "");
  m.outputs = doc.value("outputs", std::vector<std::string>{});
  m.result = nlohmann::ordered_json::parse(doc.value("result", nlohmann::json::object()).dump());
  return m;
}

void write_manifest(const fs::path& dir, RunManifest& m) {
  m.finished_at = utc_now();
  std::erase_if(m.outputs, [&](const std::string& f) { return !fs::exists(dir / f); });
  write_text_atomic(dir / "manifest.json", to_json(m).dump(2) + "\n");
}

RunManifest read_manifest(const fs::path& path) { return manifest_from_json(nlohmann::json::parse(read_text(path))); }

}  // namespace qcontrol::cli
