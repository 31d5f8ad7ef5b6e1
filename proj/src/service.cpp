#include "predism/service.hpp"

#include <httplib.h>

#include <cstdio>

#include "predism/error.hpp"
#include "predism/pipeline.hpp"

namespace predism {

using nlohmann::json;

std::string_view to_string(JobStatus status) {
  switch (status) {
    case JobStatus::Pending: return "pending";
    case JobStatus::Running: return "running";
    case JobStatus::Done: return "done";
    case JobStatus::Failed: return "failed";
  }
  return "unknown";
}

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

JobRecord JobStore::create(const std::string& inputs_digest) {
  std::lock_guard lock(mutex_);
  JobRecord record;
  record.job_id = "job-" + std::to_string(++counter_) + "-" + inputs_digest.substr(0, 8);
  record.inputs_digest = inputs_digest;
  jobs_[record.job_id] = record;
  return record;
}

void JobStore::update(const JobRecord& record) {
  std::lock_guard lock(mutex_);
  jobs_[record.job_id] = record;
}

std::optional<JobRecord> JobStore::find(const std::string& job_id) const {
  std::lock_guard lock(mutex_);
  auto it = jobs_.find(job_id);
  if (it == jobs_.end()) return std::nullopt;
  return it->second;
}

JobRecord JobStore::finish(const std::string& job_id, std::vector<std::filesystem::path> artifacts) {
  std::lock_guard lock(mutex_);
  JobRecord& record = jobs_.at(job_id);
  record.artifacts = std::move(artifacts);
  const bool complete = std::all_of(record.artifacts.begin(), record.artifacts.end(),
                                    [](const auto& p) { return std::filesystem::exists(p); });
  record.status = complete ? JobStatus::Done : JobStatus::Failed;
  return record;
}

int http_status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedRequest: return 400;
    case ErrorCode::NotFound: return 404;
    case ErrorCode::BackboneFailure:
    case ErrorCode::BackendStartupFailure:
    case ErrorCode::PortUnavailable:
    case ErrorCode::IoError:
      return 500;
    default:
      return 422;
  }
}

namespace {

HttpReply json_reply(const json& doc, int status = 200) { return {status, doc.dump(), "application/json"}; }

HttpReply error_reply(ErrorCode code, const std::string& message) {
  return json_reply({{"error", {{"code", std::string(error_code_name(code))}, {"message", message}}}},
                    http_status_for(code));
}

json parse_body(const std::string& body) {
  try {
    json doc = json::parse(body);
    if (!doc.is_object()) throw Error(ErrorCode::MalformedRequest, "request body must be a JSON object");
    return doc;
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::MalformedRequest, e.what());
  }
}

struct SceneRequest {
  Scene scene;
  std::vector<Footprint> footprints;
  DisasterType type = DisasterType::Flood;
  HazardInput hazard;
};

std::vector<Footprint> request_footprints(const json& labels) {
  if (labels.is_string()) return footprints_of(parse_label_document(labels.get<std::string>()));
  if (labels.is_object()) return footprints_of(parse_label_document(labels.dump()));
  if (labels.is_array()) {
    std::vector<Footprint> out;
    for (const auto& item : labels) {
      if (!item.is_object() || !item.contains("wkt")) throw Error(ErrorCode::MalformedRequest, "label items need 'wkt'");
      std::string uid = item.value("uid", "");
      if (uid.empty()) uid = "b" + std::to_string(out.size());
      out.push_back(parse_wkt(item["wkt"].get<std::string>(), uid));
    }
    return out;
  }
  throw Error(ErrorCode::MalformedRequest, "'labels' must be a label document or an array of {wkt, uid}");
}

SceneRequest parse_scene_request(const json& doc, const Model& model) {
  SceneRequest req;
  if (doc.contains("scene_b64")) {
    const auto bytes = base64_decode(doc["scene_b64"].get<std::string>());
    req.scene.pixels = decode_png(bytes);
    req.scene.scene_id = doc.value("scene_id", "scene");
  } else if (doc.contains("scene_path")) {
    req.scene = load_scene(doc["scene_path"].get<std::string>());
    if (doc.contains("scene_id")) req.scene.scene_id = doc["scene_id"].get<std::string>();
  } else {
    throw Error(ErrorCode::MalformedRequest, "one of 'scene_b64' or 'scene_path' is required");
  }
  if (doc.contains("geo_bounds")) req.scene.geo_bounds = parse_geo_bounds(doc["geo_bounds"].dump());
  validate_scene(req.scene);
  if (!doc.contains("labels")) throw Error(ErrorCode::MalformedRequest, "'labels' is required");
  req.footprints = request_footprints(doc["labels"]);
  if (!doc.contains("disaster_type") || !doc["disaster_type"].is_string()) {
    throw Error(ErrorCode::MalformedRequest, "'disaster_type' is required");
  }
  req.type = parse_disaster_type(doc["disaster_type"].get<std::string>());
  if (doc.contains("attrs")) req.hazard.attributes = parse_hazard_attributes(doc["attrs"]);
  if (doc.contains("hazard_level")) {
    if (!doc["hazard_level"].is_number_integer()) throw Error(ErrorCode::MalformedRequest, "'hazard_level' must be an integer");
    req.hazard.level = HazardLevel(doc["hazard_level"].get<int>());
  }
  (void)model;
  return req;
}

std::string content_type_for(const std::filesystem::path& p) {
  const auto ext = p.extension().string();
  if (ext == ".png") return "image/png";
  if (ext == ".geojson") return "application/geo+json";
  return "application/json";
}

}  // namespace

struct Service::Server {
  httplib::Server http;
};

Service::Service(AppConfig config)
    : config_(std::move(config)), model_(build_model(config_)), jobs_(config_.artifact_dir),
      server_(std::make_unique<Server>()) {
  auto dispatch = [this](const httplib::Request& req, httplib::Response& res) {
    const HttpReply reply = handle(req.method, req.path, req.body);
    res.status = reply.status;
    res.set_content(reply.body, reply.content_type);
  };
  server_->http.Get(".*", dispatch);
  server_->http.Post(".*", dispatch);
}

Service::~Service() { stop(); }

HttpReply Service::handle(const std::string& method, const std::string& path, const std::string& body) {
  try {
    if (method == "GET" && path == "/health") return health();
    if (method == "GET" && path == "/config") return config_reply();
    if (method == "POST" && path == "/hazard-score") return hazard_score(body);
    if (method == "POST" && path == "/predict") return predict(body);
    if (method == "POST" && path == "/sweep") return sweep_request(body);
    if (method == "GET" && path.rfind("/artifacts/", 0) == 0) return artifact(path.substr(11));
    return error_reply(ErrorCode::NotFound, method + " " + path);
  } catch (const Error& e) {
    return error_reply(e.code(), e.message());
  } catch (const nlohmann::json::exception& e) {
    return error_reply(ErrorCode::MalformedRequest, e.what());
  } catch (const std::exception& e) {
    return error_reply(ErrorCode::IoError, e.what());
  }
}

HttpReply Service::health() const {
  json backbones = json::array();
  for (DisasterType type : model_.registry->types()) {
    backbones.push_back({{"disaster_type", std::string(to_string(type))},
                         {"kind", std::string(to_string(model_.registry->find(type)->kind()))}});
  }
  return json_reply({{"status", "ok"}, {"backbones", backbones}});
}

HttpReply Service::config_reply() const { return json_reply(to_json(config_)); }

HttpReply Service::hazard_score(const std::string& body) const {
  const json doc = parse_body(body);
  const HazardAttributes attrs = parse_hazard_attributes(doc.contains("attrs") ? doc["attrs"] : doc);
  json per_attribute = json::object();
  const auto levels = attribute_levels(attrs, model_.thresholds);
  for (HazardAttribute a : kAllHazardAttributes) {
    if (levels[index_of(a)]) per_attribute[std::string(to_string(a))] = *levels[index_of(a)];
  }
  return json_reply({{"per_attribute_levels", per_attribute}, {"overall", overall_level(attrs, model_.thresholds).value()}});
}

HttpReply Service::predict(const std::string& body) const {
  const json doc = parse_body(body);
  const SceneRequest req = parse_scene_request(doc, model_);
  const DamageMap map = predict_scene(req.scene, req.footprints, req.type, req.hazard, model_);
  json out = to_json(map);
  if (req.scene.geo_bounds) {
    out["geojson"] = json::parse(
        to_geojson(map, req.footprints, req.scene.geo_bounds, req.scene.pixels.width(), req.scene.pixels.height()));
  }
  return json_reply(out);
}

HttpReply Service::sweep_request(const std::string& body) {
  const json doc = parse_body(body);
  const SceneRequest req = parse_scene_request(doc, model_);
  if (!doc.contains("levels") || !doc["levels"].is_array()) throw Error(ErrorCode::MalformedRequest, "'levels' is required");
  std::vector<HazardLevel> levels;
  for (const auto& v : doc["levels"]) {
    if (!v.is_number_integer()) throw Error(ErrorCode::MalformedRequest, "levels must be integers");
    levels.emplace_back(v.get<int>());
  }
  if (!req.scene.geo_bounds) throw Error(ErrorCode::MissingGeoBounds, "sweep artifacts need geo bounds");

  JobRecord job = jobs_.create(fnv1a_hex(body));
  job.status = JobStatus::Running;
  jobs_.update(job);
  const auto maps = sweep(req.scene, req.footprints, req.type, levels, model_, req.hazard.attributes);
  const auto dir = jobs_.directory(job.job_id);
  const json manifest = write_sweep_artifacts(dir, maps, req.scene, req.footprints, model_.palette);

  std::vector<std::filesystem::path> files{dir / "manifest.json"};
  json geojson_docs = json::array(), renders = json::array();
  for (const auto& entry : manifest["maps"]) {
    for (const char* key : {"geojson", "render", "damage_map"}) files.push_back(dir / entry[key].get<std::string>());
    geojson_docs.push_back(json::parse(read_text_file(dir / entry["geojson"].get<std::string>())));
    renders.push_back("/artifacts/" + job.job_id + "/" + entry["render"].get<std::string>());
  }
  job = jobs_.finish(job.job_id, files);
  return json_reply({{"job_id", job.job_id},
                     {"status", std::string(to_string(job.status))},
                     {"manifest", manifest},
                     {"maps", geojson_docs},
                     {"renders", renders}});
}

HttpReply Service::artifact(const std::string& id) const {
  const auto slash = id.find('/');
  if (slash == std::string::npos) {
    const auto job = jobs_.find(id);
    if (!job) throw Error(ErrorCode::NotFound, "no job '" + id + "'");
    json files = json::array();
    for (const auto& p : job->artifacts) files.push_back(p.filename().string());
    return json_reply({{"job_id", job->job_id}, {"status", std::string(to_string(job->status))},
                       {"inputs_digest", job->inputs_digest}, {"artifacts", files}});
  }
  const std::string job_id = id.substr(0, slash);
  const std::string name = id.substr(slash + 1);
  if (name.empty() || name.find('/') != std::string::npos || name.find("..") != std::string::npos) {
    throw Error(ErrorCode::NotFound, "bad artifact path");
  }
  const auto job = jobs_.find(job_id);
  if (!job) throw Error(ErrorCode::NotFound, "no job '" + job_id + "'");
  const auto path = jobs_.directory(job_id) / name;
  if (!std::filesystem::exists(path)) throw Error(ErrorCode::NotFound, "no artifact '" + name + "'");
  return {200, read_text_file(path), content_type_for(path)};
}

void Service::listen(const std::string& host, int port) {
  if (!server_->http.bind_to_port(host, port)) {
    throw Error(ErrorCode::PortUnavailable, "cannot bind " + host + ":" + std::to_string(port));
  }
  run();
}

int Service::bind_any_port(const std::string& host) {
  const int port = server_->http.bind_to_any_port(host);
  if (port < 0) throw Error(ErrorCode::PortUnavailable, "cannot bind " + host);
  return port;
}

void Service::run() { server_->http.listen_after_bind(); }

void Service::stop() {
  if (server_) server_->http.stop();
}

bool Service::running() const { return server_->http.is_running(); }

void serve(const AppConfig& config) {
  Service service(config);
  const auto [host, port] = parse_listen_address(config.listen);
  service.listen(host, port);
}

}  // namespace predism
