#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include <json.hpp>

#include "predism/chip.hpp"
#include "predism/disaster.hpp"
#include "predism/ensemble.hpp"
#include "predism/probability.hpp"

namespace predism {

struct BackendDecl {
  BackboneKind kind = BackboneKind::ReferenceOrdinal;
  std::string command;  // external, child process
  std::string url;      // external, HTTP
  std::chrono::milliseconds timeout = ExternalBackbone::kDefaultTimeout;
};

struct AppConfig {
  int chip_size = kDefaultChipSize;
  double confidence_threshold = kDefaultConfidenceThreshold;
  std::optional<nlohmann::json> threshold_overrides;
  nlohmann::json palette_overrides = nlohmann::json::object();
  std::map<DisasterType, BackendDecl> backends;
  std::optional<CooccurrenceMatrix> cooccurrence;
  std::filesystem::path model_path;
  std::filesystem::path data_root;
  std::string listen = "127.0.0.1:8080";
  std::filesystem::path artifact_dir = "artifacts";
};

inline constexpr const char* kConfigEnvVar = "PREDISM_CONFIG";

/// Throws InvalidConfig for out-of-range values, unknown keys or bad backend
/// declarations (UnknownDisasterType for unknown types).
AppConfig parse_config(const nlohmann::json& doc);
void validate(const AppConfig& config);

/// Reads `explicit_path` if given, else the file named by PREDISM_CONFIG,
/// else returns defaults. Command-line flags are applied by the caller.
AppConfig load_config(const std::optional<std::filesystem::path>& explicit_path);

nlohmann::json to_json(const AppConfig& config);

/// Splits "host:port". Throws InvalidConfig.
std::pair<std::string, int> parse_listen_address(const std::string& listen);

}  // namespace predism
