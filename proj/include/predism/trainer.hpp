#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "predism/heads.hpp"

namespace predism {

/// Adam with a step learning-rate decay. Defaults are the published
/// fine-tuning schedule: lr 0.001, multiplied by 0.1 every 7 epochs, 20 epochs.
struct TrainConfig {
  int epochs = 20;
  double learning_rate = 1e-3;
  double gamma = 0.1;
  int step_size = 7;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  int batch_size = 1;
  LossKind loss = LossKind::CrossEntropy;
  std::uint64_t seed = 0;
  /// Fit the head's standardizer to the training inputs before the first step.
  bool fit_standardizer = true;
  /// Replace the initial parameters with the linear-probe start before the first step.
  bool warm_start = true;
};

/// Learning rate in effect during 1-based `epoch`.
double learning_rate_at(const TrainConfig& config, int epoch);

struct TrainingSample {
  InputVector input{};
  int level = 1;
};

struct EpochRecord {
  int epoch = 0;
  double learning_rate = 0.0;
  double mean_loss = 0.0;   // averaged over the epoch's steps
  double accuracy = 0.0;    // argmax accuracy on the training set after the epoch
};

template <typename Head>
struct TrainResult {
  Head head;
  std::vector<EpochRecord> history;
};

/// Ridge least-squares fit of the level on the standardized inputs.
struct LinearProbe {
  InputVector weights{};
  double intercept = 0.0;
  /// Root-mean-square residual, floored at kMinResidual.
  double residual = 1.0;

  static constexpr double kMinResidual = 0.05;
};

LinearProbe fit_linear_probe(const Standardizer& standardizer, std::span<const TrainingSample> data);

/// Start values from a probe. Ordinal: score = c (w.z), cut k at
/// c (k + 0.5 - intercept), with c = pi / (sqrt(3) residual) so the logistic
/// noise matches the residual spread. Softmax: logit_k = (k s - k^2 / 2) / residual^2
/// with s = intercept + w.z, the posterior of Gaussian noise around each level.
void warm_start(OrdinalHead& head, const LinearProbe& probe);
void warm_start(SoftmaxHead& head, const LinearProbe& probe);

/// Single-threaded and deterministic in (data, config). Constraints are
/// restored by projection after every step. Throws DegenerateDataset when the
/// data has fewer than two distinct levels.
TrainResult<OrdinalHead> train(const OrdinalHead& initial, std::span<const TrainingSample> data, const TrainConfig& config);
TrainResult<SoftmaxHead> train(const SoftmaxHead& initial, std::span<const TrainingSample> data, const TrainConfig& config);

template <typename Head>
double accuracy(const Head& head, std::span<const TrainingSample> data) {
  if (data.empty()) return 0.0;
  std::size_t hits = 0;
  for (const auto& s : data) hits += argmax_level(head.probs(s.input)) == s.level;
  return static_cast<double>(hits) / static_cast<double>(data.size());
}

}  // namespace predism
