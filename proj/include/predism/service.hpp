#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "predism/config.hpp"
#include "predism/damagemap.hpp"
#include "predism/error.hpp"

namespace predism {

enum class JobStatus { Pending, Running, Done, Failed };
std::string_view to_string(JobStatus status);

struct JobRecord {
  std::string job_id;
  std::string inputs_digest;
  JobStatus status = JobStatus::Pending;
  std::vector<std::filesystem::path> artifacts;
};

/// Sweep jobs and their artifacts. All mutation goes through one lock.
class JobStore {
 public:
  explicit JobStore(std::filesystem::path root) : root_(std::move(root)) {}

  JobRecord create(const std::string& inputs_digest);
  void update(const JobRecord& record);
  std::optional<JobRecord> find(const std::string& job_id) const;
  /// Marks done only when every artifact exists; otherwise failed.
  JobRecord finish(const std::string& job_id, std::vector<std::filesystem::path> artifacts);
  std::filesystem::path directory(const std::string& job_id) const { return root_ / job_id; }
  const std::filesystem::path& root() const { return root_; }

 private:
  std::filesystem::path root_;
  mutable std::mutex mutex_;
  std::map<std::string, JobRecord> jobs_;
  std::uint64_t counter_ = 0;
};

/// 64-bit FNV-1a, hex encoded.
std::string fnv1a_hex(std::string_view bytes);

/// HTTP status for an error code: 400 malformed, 404 missing, 422 domain, 500 backend.
int http_status_for(ErrorCode code);

struct HttpReply {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

/// The JSON API, independent of the socket layer. The registry and config are
/// read-only after construction; requests may run concurrently.
class Service {
 public:
  /// Builds the model. Throws BackendStartupFailure.
  explicit Service(AppConfig config);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  HttpReply handle(const std::string& method, const std::string& path, const std::string& body);

  /// Binds and serves until stop(). Throws PortUnavailable.
  void listen(const std::string& host, int port);
  /// Binds an ephemeral port and returns it; serve with run().
  int bind_any_port(const std::string& host);
  void run();
  void stop();
  bool running() const;

  const AppConfig& config() const { return config_; }
  const Model& model() const { return model_; }

 private:
  HttpReply health() const;
  HttpReply config_reply() const;
  HttpReply hazard_score(const std::string& body) const;
  HttpReply predict(const std::string& body) const;
  HttpReply sweep_request(const std::string& body);
  HttpReply artifact(const std::string& id) const;

  AppConfig config_;
  Model model_;
  JobStore jobs_;
  struct Server;
  std::unique_ptr<Server> server_;
};

/// Blocking entry point for `predism serve`.
void serve(const AppConfig& config);

}  // namespace predism
