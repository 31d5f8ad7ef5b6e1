#pragma once

#include <array>
#include <atomic>
#include <chrono>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "predism/chip.hpp"
#include "predism/disaster.hpp"
#include "predism/features.hpp"
#include "predism/heads.hpp"
#include "predism/probability.hpp"

namespace predism {

enum class BackboneKind { ReferenceOrdinal, ReferenceSoftmax, External };

std::string_view to_string(BackboneKind kind);
/// "reference-ordinal", "reference-softmax" or "external". Throws InvalidConfig.
BackboneKind parse_backbone_kind(std::string_view text);

/// Per-disaster-type damage model. Implementations are immutable once
/// built and may be called from several threads.
class Backbone {
 public:
  virtual ~Backbone() = default;
  virtual BackboneKind kind() const = 0;
  /// Exactly five finite numbers; throws BackboneFailure otherwise.
  virtual Logits logits(const Chip& chip, const FeatureVector& features, const MetaVector& meta) const = 0;
  /// Damage-level distribution; softmax of logits() unless overridden.
  virtual Probs probs(const Chip& chip, const FeatureVector& features, const MetaVector& meta) const;
};

class OrdinalBackbone final : public Backbone {
 public:
  explicit OrdinalBackbone(OrdinalHead head) : head_(std::move(head)) {}
  BackboneKind kind() const override { return BackboneKind::ReferenceOrdinal; }
  /// Log-probabilities, so softmax(logits) reproduces probs().
  Logits logits(const Chip& chip, const FeatureVector& features, const MetaVector& meta) const override;
  Probs probs(const Chip& chip, const FeatureVector& features, const MetaVector& meta) const override;
  const OrdinalHead& head() const { return head_; }

 private:
  OrdinalHead head_;
};

class SoftmaxBackbone final : public Backbone {
 public:
  explicit SoftmaxBackbone(SoftmaxHead head) : head_(std::move(head)) {}
  BackboneKind kind() const override { return BackboneKind::ReferenceSoftmax; }
  Logits logits(const Chip& chip, const FeatureVector& features, const MetaVector& meta) const override;
  const SoftmaxHead& head() const { return head_; }

 private:
  SoftmaxHead head_;
};

/// Carries one request line to an inference server and returns its reply line.
class Transport {
 public:
  virtual ~Transport() = default;
  /// Throws BackboneFailure on timeout, disconnect or transport error.
  virtual std::string exchange(const std::string& request, std::chrono::milliseconds timeout) = 0;
  virtual std::string describe() const = 0;
};

/// Child process speaking line-delimited JSON on stdin/stdout. One request is
/// in flight at a time; a timed-out child is killed and respawned on the
/// next request.
class ProcessTransport final : public Transport {
 public:
  /// Spawns `/bin/sh -c command`. Throws BackendStartupFailure.
  explicit ProcessTransport(std::string command);
  ~ProcessTransport() override;
  ProcessTransport(const ProcessTransport&) = delete;
  ProcessTransport& operator=(const ProcessTransport&) = delete;

  std::string exchange(const std::string& request, std::chrono::milliseconds timeout) override;
  std::string describe() const override { return "process: " + command_; }

 private:
  void spawn();
  void shutdown();

  std::string command_;
  std::mutex mutex_;
  int pid_ = -1;
  int fd_ = -1;
  std::string pending_;
};

/// HTTP server exposing `POST /infer`.
class HttpTransport final : public Transport {
 public:
  explicit HttpTransport(std::string base_url);
  std::string exchange(const std::string& request, std::chrono::milliseconds timeout) override;
  std::string describe() const override { return "http: " + base_url_; }

 private:
  std::string base_url_;
};

/// Backbone served by an out-of-process model. Request:
/// {"chip_png_b64", "meta": [15 numbers], "request_id"}; reply:
/// {"logits": [5 numbers], "request_id"}.
class ExternalBackbone final : public Backbone {
 public:
  static constexpr std::chrono::milliseconds kDefaultTimeout{5000};

  ExternalBackbone(std::unique_ptr<Transport> transport, std::chrono::milliseconds timeout = kDefaultTimeout);
  BackboneKind kind() const override { return BackboneKind::External; }
  Logits logits(const Chip& chip, const FeatureVector& features, const MetaVector& meta) const override;
  std::string describe() const { return transport_->describe(); }

 private:
  std::unique_ptr<Transport> transport_;
  std::chrono::milliseconds timeout_;
  mutable std::atomic<std::uint64_t> next_request_{1};
};

using CooccurrenceMatrix = std::array<std::array<double, kDisasterTypeCount>, kDisasterTypeCount>;

/// Backbones keyed by disaster type, plus optional co-occurrence weights.
class BackboneRegistry {
 public:
  void add(DisasterType type, std::shared_ptr<const Backbone> backbone);
  const Backbone* find(DisasterType type) const;
  std::vector<DisasterType> types() const;
  bool empty() const { return backbones_.empty(); }

  /// Non-negative, finite and symmetric; throws InvalidConfig.
  void set_cooccurrence(const CooccurrenceMatrix& matrix);
  const std::optional<CooccurrenceMatrix>& cooccurrence() const { return cooccurrence_; }

 private:
  std::map<DisasterType, std::shared_ptr<const Backbone>> backbones_;
  std::optional<CooccurrenceMatrix> cooccurrence_;
};

/// Convex weights over registered backbones.
using RoutingWeights = std::map<DisasterType, double>;

/// Without a co-occurrence matrix: all weight on the requested type. With
/// one: the type's row restricted to registered backbones and renormalised.
/// Throws NoBackboneAvailable.
RoutingWeights route(DisasterType type, const BackboneRegistry& registry);
/// Throws UnknownDisasterType.
RoutingWeights route(std::string_view type, const BackboneRegistry& registry);

/// Probability mixture sum_u weight(u) * probs_u. Weights must sum to 1
/// within 1e-9. Backend errors surface as BackboneFailure naming the type.
Probs ensemble_predict(const Chip& chip, const MetaVector& meta, const BackboneRegistry& registry,
                       const RoutingWeights& weights);
Probs ensemble_predict(const Chip& chip, const FeatureVector& features, const MetaVector& meta,
                       const BackboneRegistry& registry, const RoutingWeights& weights);

}  // namespace predism
