#include "predism/ensemble.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cmath>
#include <cstring>

#include <httplib.h>
#include <json.hpp>

#include "predism/error.hpp"

namespace predism {

using nlohmann::json;

std::string_view to_string(BackboneKind kind) {
  switch (kind) {
    case BackboneKind::ReferenceOrdinal: return "reference-ordinal";
    case BackboneKind::ReferenceSoftmax: return "reference-softmax";
    case BackboneKind::External: return "external";
  }
  return "unknown";
}

BackboneKind parse_backbone_kind(std::string_view text) {
  const std::string key = normalize_token(text);
  if (key == "referenceordinal") return BackboneKind::ReferenceOrdinal;
  if (key == "referencesoftmax") return BackboneKind::ReferenceSoftmax;
  if (key == "external") return BackboneKind::External;
  throw Error(ErrorCode::InvalidConfig, "unknown backbone kind '" + std::string(text) + "'");
}

Probs Backbone::probs(const Chip& chip, const FeatureVector& features, const MetaVector& meta) const {
  return softmax(logits(chip, features, meta));
}

Logits OrdinalBackbone::logits(const Chip& chip, const FeatureVector& features, const MetaVector& meta) const {
  const Probs p = probs(chip, features, meta);
  Logits out{};
  for (int k = 0; k < kLevelCount; ++k) out[k] = std::log(std::max(p[k], 1e-300));
  return out;
}

Probs OrdinalBackbone::probs(const Chip&, const FeatureVector& features, const MetaVector& meta) const {
  return head_.probs(join(features, meta));
}

Logits SoftmaxBackbone::logits(const Chip&, const FeatureVector& features, const MetaVector& meta) const {
  return head_.logits(join(features, meta));
}

// ---------------------------------------------------------------- process transport

ProcessTransport::ProcessTransport(std::string command) : command_(std::move(command)) {
  std::lock_guard lock(mutex_);
  spawn();
}

ProcessTransport::~ProcessTransport() { shutdown(); }

void ProcessTransport::spawn() {
  int sockets[2];
  if (::socketpair(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0, sockets) != 0) {
    throw Error(ErrorCode::BackendStartupFailure, "socketpair: " + std::string(std::strerror(errno)));
  }
  // Reports exec failure from the child; closes on successful exec.
  int status_pipe[2];
  if (::pipe2(status_pipe, O_CLOEXEC) != 0) {
    ::close(sockets[0]);
    ::close(sockets[1]);
    throw Error(ErrorCode::BackendStartupFailure, "pipe: " + std::string(std::strerror(errno)));
  }
  const pid_t pid = ::fork();
  if (pid < 0) {
    ::close(sockets[0]);
    ::close(sockets[1]);
    ::close(status_pipe[0]);
    ::close(status_pipe[1]);
    throw Error(ErrorCode::BackendStartupFailure, "fork: " + std::string(std::strerror(errno)));
  }
  if (pid == 0) {
    ::dup2(sockets[1], STDIN_FILENO);
    ::dup2(sockets[1], STDOUT_FILENO);
    ::execl("/bin/sh", "sh", "-c", command_.c_str(), static_cast<char*>(nullptr));
    const int err = errno;
    [[maybe_unused]] auto ignored = ::write(status_pipe[1], &err, sizeof(err));
    ::_exit(127);
  }
  ::close(sockets[1]);
  ::close(status_pipe[1]);
  int child_errno = 0;
  const ssize_t n = ::read(status_pipe[0], &child_errno, sizeof(child_errno));
  ::close(status_pipe[0]);
  if (n == static_cast<ssize_t>(sizeof(child_errno))) {
    ::close(sockets[0]);
    ::waitpid(pid, nullptr, 0);
    throw Error(ErrorCode::BackendStartupFailure, "exec: " + std::string(std::strerror(child_errno)));
  }
  pid_ = pid;
  fd_ = sockets[0];
  pending_.clear();
}

void ProcessTransport::shutdown() {
  if (fd_ >= 0) ::close(fd_);
  fd_ = -1;
  if (pid_ > 0) {
    ::kill(pid_, SIGKILL);
    ::waitpid(pid_, nullptr, 0);
  }
  pid_ = -1;
  pending_.clear();
}

std::string ProcessTransport::exchange(const std::string& request, std::chrono::milliseconds timeout) {
  std::lock_guard lock(mutex_);
  if (fd_ < 0) {
    try {
      spawn();
    } catch (const Error& e) {
      throw Error(ErrorCode::BackboneFailure, e.message());
    }
  }
  auto fail = [&](const std::string& why) -> std::string {
    shutdown();
    throw Error(ErrorCode::BackboneFailure, describe() + ": " + why);
  };

  const std::string line = request + "\n";
  std::size_t sent = 0;
  while (sent < line.size()) {
    const ssize_t n = ::send(fd_, line.data() + sent, line.size() - sent, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      return fail("write failed: " + std::string(std::strerror(errno)));
    }
    sent += static_cast<std::size_t>(n);
  }

  const auto deadline = std::chrono::steady_clock::now() + timeout;
  for (;;) {
    const auto newline = pending_.find('\n');
    if (newline != std::string::npos) {
      std::string reply = pending_.substr(0, newline);
      pending_.erase(0, newline + 1);
      return reply;
    }
    const auto remaining =
        std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
    if (remaining.count() <= 0) return fail("timed out after " + std::to_string(timeout.count()) + " ms");
    pollfd pfd{fd_, POLLIN, 0};
    const int ready = ::poll(&pfd, 1, static_cast<int>(remaining.count()));
    if (ready < 0) {
      if (errno == EINTR) continue;
      return fail("poll failed");
    }
    if (ready == 0) continue;
    char buf[4096];
    const ssize_t n = ::recv(fd_, buf, sizeof(buf), 0);
    if (n == 0) return fail("backend closed its output");
    if (n < 0) {
      if (errno == EINTR) continue;
      return fail("read failed: " + std::string(std::strerror(errno)));
    }
    pending_.append(buf, static_cast<std::size_t>(n));
  }
}

// ---------------------------------------------------------------- http transport

HttpTransport::HttpTransport(std::string base_url) : base_url_(std::move(base_url)) {
  while (!base_url_.empty() && base_url_.back() == '/') base_url_.pop_back();
}

std::string HttpTransport::exchange(const std::string& request, std::chrono::milliseconds timeout) {
  // "http://host:port/prefix" posts to /prefix/infer
  const auto scheme_end = base_url_.find("://");
  const auto path_start = base_url_.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
  const std::string origin = base_url_.substr(0, path_start);
  std::string prefix = path_start == std::string::npos ? "" : base_url_.substr(path_start);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  httplib::Client client(origin);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());
  auto res = client.Post(prefix + "/infer", request, "application/json");
  if (!res) throw Error(ErrorCode::BackboneFailure, describe() + ": " + httplib::to_string(res.error()));
  if (res->status != 200) {
    throw Error(ErrorCode::BackboneFailure, describe() + ": HTTP " + std::to_string(res->status));
  }
  return res->body;
}

// ---------------------------------------------------------------- external backbone

ExternalBackbone::ExternalBackbone(std::unique_ptr<Transport> transport, std::chrono::milliseconds timeout)
    : transport_(std::move(transport)), timeout_(timeout) {}

Logits ExternalBackbone::logits(const Chip& chip, const FeatureVector&, const MetaVector& meta) const {
  const std::string request_id = std::to_string(next_request_.fetch_add(1));
  const json request = {{"chip_png_b64", base64_encode(encode_png(chip.pixels))},
                        {"meta", meta.values},
                        {"request_id", request_id}};
  const std::string reply = transport_->exchange(request.dump(), timeout_);

  json doc;
  try {
    doc = json::parse(reply);
  } catch (const json::parse_error&) {
    throw Error(ErrorCode::BackboneFailure, describe() + ": reply is not JSON");
  }
  if (!doc.is_object() || !doc.contains("logits") || !doc["logits"].is_array() || doc["logits"].size() != kLevelCount) {
    throw Error(ErrorCode::BackboneFailure, describe() + ": reply must carry 5 logits");
  }
  if (doc.contains("request_id") && doc["request_id"] != request_id) {
    throw Error(ErrorCode::BackboneFailure, describe() + ": request_id mismatch");
  }
  Logits out{};
  for (int k = 0; k < kLevelCount; ++k) {
    const json& v = doc["logits"][k];
    if (!v.is_number() || !std::isfinite(v.get<double>())) {
      throw Error(ErrorCode::BackboneFailure, describe() + ": logits must be finite numbers");
    }
    out[k] = v.get<double>();
  }
  return out;
}

// ---------------------------------------------------------------- registry & routing

void BackboneRegistry::add(DisasterType type, std::shared_ptr<const Backbone> backbone) {
  backbones_[type] = std::move(backbone);
}

const Backbone* BackboneRegistry::find(DisasterType type) const {
  auto it = backbones_.find(type);
  return it == backbones_.end() ? nullptr : it->second.get();
}

std::vector<DisasterType> BackboneRegistry::types() const {
  std::vector<DisasterType> out;
  for (const auto& [type, backbone] : backbones_) out.push_back(type);
  return out;
}

void BackboneRegistry::set_cooccurrence(const CooccurrenceMatrix& matrix) {
  for (std::size_t i = 0; i < kDisasterTypeCount; ++i) {
    for (std::size_t j = 0; j < kDisasterTypeCount; ++j) {
      const double v = matrix[i][j];
      if (!std::isfinite(v) || v < 0.0) throw Error(ErrorCode::InvalidConfig, "co-occurrence entries must be non-negative");
      if (v != matrix[j][i]) throw Error(ErrorCode::InvalidConfig, "co-occurrence matrix must be symmetric");
    }
  }
  cooccurrence_ = matrix;
}

RoutingWeights route(DisasterType type, const BackboneRegistry& registry) {
  RoutingWeights weights;
  if (!registry.cooccurrence()) {
    if (!registry.find(type)) {
      throw Error(ErrorCode::NoBackboneAvailable, "no backbone registered for " + std::string(to_string(type)));
    }
    weights[type] = 1.0;
    return weights;
  }
  const auto& row = (*registry.cooccurrence())[index_of(type)];
  double total = 0.0;
  for (DisasterType u : kAllDisasterTypes) {
    const double c = row[index_of(u)];
    if (c > 0.0 && registry.find(u)) {
      weights[u] = c;
      total += c;
    }
  }
  if (total <= 0.0) {
    throw Error(ErrorCode::NoBackboneAvailable,
                "no registered backbone co-occurs with " + std::string(to_string(type)));
  }
  for (auto& [u, w] : weights) w /= total;
  return weights;
}

RoutingWeights route(std::string_view type, const BackboneRegistry& registry) {
  return route(parse_disaster_type(type), registry);
}

Probs ensemble_predict(const Chip& chip, const MetaVector& meta, const BackboneRegistry& registry,
                       const RoutingWeights& weights) {
  return ensemble_predict(chip, extract_features(chip), meta, registry, weights);
}

Probs ensemble_predict(const Chip& chip, const FeatureVector& features, const MetaVector& meta,
                       const BackboneRegistry& registry, const RoutingWeights& weights) {
  double total = 0.0;
  for (const auto& [type, w] : weights) {
    if (!(w >= 0.0)) throw Error(ErrorCode::InvalidArgument, "routing weights must be non-negative");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-9) throw Error(ErrorCode::InvalidArgument, "routing weights must sum to 1");

  Probs mix{};
  for (const auto& [type, w] : weights) {
    const Backbone* backbone = registry.find(type);
    if (!backbone) throw Error(ErrorCode::NoBackboneAvailable, "no backbone registered for " + std::string(to_string(type)));
    Probs p;
    try {
      p = backbone->probs(chip, features, meta);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::BackboneFailure) throw;
      throw Error(ErrorCode::BackboneFailure, std::string(to_string(type)) + " backbone: " + e.message());
    }
    for (int k = 0; k < kLevelCount; ++k) mix[k] += w * p[k];
  }
  return mix;
}

}  // namespace predism
