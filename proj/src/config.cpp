#include "predism/config.hpp"

#include <cstdlib>
#include <set>

#include "predism/damagemap.hpp"
#include "predism/error.hpp"
#include "predism/hazard.hpp"
#include "predism/image.hpp"

namespace predism {

using nlohmann::json;

namespace {

BackendDecl parse_backend(const json& doc) {
  BackendDecl decl;
  if (doc.is_string()) {
    decl.kind = parse_backbone_kind(doc.get<std::string>());
  } else if (doc.is_object()) {
    decl.kind = parse_backbone_kind(doc.value("kind", "reference-ordinal"));
    decl.command = doc.value("command", "");
    decl.url = doc.value("url", "");
    if (doc.contains("timeout_ms")) decl.timeout = std::chrono::milliseconds(doc["timeout_ms"].get<long>());
  } else {
    throw Error(ErrorCode::InvalidConfig, "backend declarations are strings or objects");
  }
  if (decl.kind == BackboneKind::External && decl.command.empty() == decl.url.empty()) {
    throw Error(ErrorCode::InvalidConfig, "external backends need exactly one of 'command' or 'url'");
  }
  if (decl.timeout.count() <= 0) throw Error(ErrorCode::InvalidConfig, "timeout_ms must be positive");
  return decl;
}

}  // namespace

void validate(const AppConfig& config) {
  if (!(config.confidence_threshold > 0.0 && config.confidence_threshold < 1.0)) {
    throw Error(ErrorCode::InvalidConfig, "tau must be in (0, 1)");
  }
  if (config.chip_size < 8) throw Error(ErrorCode::InvalidConfig, "chip_size must be at least 8");
  try {
    load_thresholds(config.threshold_overrides);
  } catch (const Error& e) {
    throw Error(ErrorCode::InvalidConfig, e.what());
  }
  palette_with_overrides(config.palette_overrides);
  if (config.cooccurrence) {
    BackboneRegistry probe;
    probe.set_cooccurrence(*config.cooccurrence);
  }
  parse_listen_address(config.listen);
}

AppConfig parse_config(const json& doc) {
  static const std::set<std::string> kKeys = {"chip_size", "tau",        "thresholds", "palette",  "backends",
                                              "cooccurrence", "model",   "data_root",  "listen",   "artifact_dir"};
  if (!doc.is_object()) throw Error(ErrorCode::InvalidConfig, "config must be a JSON object");
  AppConfig config;
  try {
    for (const auto& [key, value] : doc.items()) {
      if (!kKeys.count(key)) throw Error(ErrorCode::InvalidConfig, "unknown config key '" + key + "'");
    }
    config.chip_size = doc.value("chip_size", config.chip_size);
    config.confidence_threshold = doc.value("tau", config.confidence_threshold);
    if (doc.contains("thresholds")) config.threshold_overrides = doc["thresholds"];
    if (doc.contains("palette")) config.palette_overrides = doc["palette"];
    if (doc.contains("backends")) {
      for (const auto& [name, decl] : doc["backends"].items()) {
        const DisasterType type = parse_disaster_type(name);
        config.backends[type] = parse_backend(decl);
      }
    }
    if (doc.contains("cooccurrence")) {
      const json& c = doc["cooccurrence"];
      CooccurrenceMatrix m{};
      if (c.is_array()) {
        if (c.size() != kDisasterTypeCount) throw Error(ErrorCode::InvalidConfig, "co-occurrence matrix must be 7x7");
        for (std::size_t i = 0; i < kDisasterTypeCount; ++i) {
          if (!c[i].is_array() || c[i].size() != kDisasterTypeCount) {
            throw Error(ErrorCode::InvalidConfig, "co-occurrence matrix must be 7x7");
          }
          for (std::size_t j = 0; j < kDisasterTypeCount; ++j) m[i][j] = c[i][j].get<double>();
        }
      } else if (c.is_object()) {
        // {"flood": {"flood": 4, "hurricane": 1}, ...}; mirrored to stay symmetric
        for (const auto& [row, cols] : c.items()) {
          for (const auto& [col, v] : cols.items()) {
            const auto i = index_of(parse_disaster_type(row)), j = index_of(parse_disaster_type(col));
            m[i][j] = m[j][i] = v.get<double>();
          }
        }
      } else {
        throw Error(ErrorCode::InvalidConfig, "co-occurrence must be a 7x7 array or a nested object");
      }
      config.cooccurrence = m;
    }
    if (doc.contains("model")) config.model_path = doc["model"].get<std::string>();
    if (doc.contains("data_root")) config.data_root = doc["data_root"].get<std::string>();
    if (doc.contains("listen")) config.listen = doc["listen"].get<std::string>();
    if (doc.contains("artifact_dir")) config.artifact_dir = doc["artifact_dir"].get<std::string>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, e.what());
  }
  validate(config);
  return config;
}

AppConfig load_config(const std::optional<std::filesystem::path>& explicit_path) {
  std::optional<std::filesystem::path> path = explicit_path;
  if (!path) {
    if (const char* env = std::getenv(kConfigEnvVar); env && *env) path = env;
  }
  if (!path) return AppConfig{};
  json doc;
  try {
    doc = json::parse(read_text_file(*path));
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::InvalidConfig, path->string() + ": " + e.what());
  }
  return parse_config(doc);
}

json to_json(const AppConfig& config) {
  json backends = json::object();
  for (const auto& [type, decl] : config.backends) {
    json d = {{"kind", std::string(to_string(decl.kind))}};
    if (decl.kind == BackboneKind::External) {
      if (!decl.command.empty()) d["command"] = decl.command;
      if (!decl.url.empty()) d["url"] = decl.url;
      d["timeout_ms"] = decl.timeout.count();
    }
    backends[std::string(to_string(type))] = d;
  }
  json doc = {{"chip_size", config.chip_size},
              {"tau", config.confidence_threshold},
              {"thresholds", to_json(load_thresholds(config.threshold_overrides))},
              {"palette", to_json(palette_with_overrides(config.palette_overrides))},
              {"backends", backends},
              {"listen", config.listen},
              {"artifact_dir", config.artifact_dir.string()}};
  if (config.cooccurrence) doc["cooccurrence"] = *config.cooccurrence;
  if (!config.model_path.empty()) doc["model"] = config.model_path.string();
  if (!config.data_root.empty()) doc["data_root"] = config.data_root.string();
  return doc;
}

std::pair<std::string, int> parse_listen_address(const std::string& listen) {
  const auto colon = listen.rfind(':');
  if (colon == std::string::npos || colon == 0) throw Error(ErrorCode::InvalidConfig, "listen must be host:port");
  try {
    const int port = std::stoi(listen.substr(colon + 1));
    if (port < 0 || port > 65535) throw Error(ErrorCode::InvalidConfig, "port out of range");
    return {listen.substr(0, colon), port};
  } catch (const std::logic_error&) {
    throw Error(ErrorCode::InvalidConfig, "listen must be host:port");
  }
}

}  // namespace predism
