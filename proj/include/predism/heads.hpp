#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include <json.hpp>

#include "predism/features.hpp"
#include "predism/probability.hpp"

namespace predism {

inline constexpr std::size_t kInputSize = FeatureVector::kSize + MetaVector::kSize;
/// Position of the overall hazard level inside the joined input.
inline constexpr std::size_t kHazardInput = FeatureVector::kSize + MetaVector::kHazardLevel;

/// Image features followed by meta-information. Meta enters the head, never the pixels.
using InputVector = std::array<double, kInputSize>;

InputVector join(const FeatureVector& features, const MetaVector& meta);

/// Per-input affine normalisation (x - mean) / scale, scale > 0.
struct Standardizer {
  InputVector mean{};
  InputVector scale = filled(1.0);

  InputVector apply(const InputVector& x) const;
  /// Constant inputs keep scale 1.
  static Standardizer fit(std::span<const InputVector> inputs);

 private:
  static InputVector filled(double v) {
    InputVector a;
    a.fill(v);
    return a;
  }
};

/// Cumulative-link (proportional odds) head: one linear score over the
/// standardized input and four increasing cut points. The hazard-level
/// weight is kept non-negative, so the expected damage level never falls
/// when only the hazard level rises.
class OrdinalHead {
 public:
  static constexpr double kMinCutGap = 1e-4;
  static constexpr std::size_t kParameterCount = kInputSize + 4;

  OrdinalHead();

  /// Untrained head whose prediction follows the hazard level alone.
  static OrdinalHead prior();

  double score(const InputVector& x) const;
  Probs probs(const InputVector& x) const;

  std::vector<double> parameters() const;
  void set_parameters(std::span<const double> params);
  /// Clamps the hazard weight at zero and restores strictly increasing cut points.
  void project();

  Standardizer standardizer;
  InputVector weights{};
  CutPoints cut_points{};
};

/// Multinomial logistic head: five linear scores and a softmax.
class SoftmaxHead {
 public:
  static constexpr std::size_t kParameterCount = kLevelCount * kInputSize + kLevelCount;

  static SoftmaxHead prior();

  Logits logits(const InputVector& x) const;
  Probs probs(const InputVector& x) const { return softmax(logits(x)); }

  std::vector<double> parameters() const;
  void set_parameters(std::span<const double> params);
  void project() {}

  Standardizer standardizer;
  std::array<InputVector, kLevelCount> weights{};
  Logits bias{};
};

enum class LossKind { CrossEntropy, OrdinalCrossEntropy };

struct LossGradient {
  double loss = 0.0;
  std::vector<double> gradient;  // w.r.t. parameters()
};

/// The ordinal distance factor is treated as locally constant (it only
/// changes where the argmax flips).
LossGradient loss_and_gradient(const OrdinalHead& head, const InputVector& x, int level, LossKind kind);
LossGradient loss_and_gradient(const SoftmaxHead& head, const InputVector& x, int level, LossKind kind);

double loss_value(const Probs& probs, int level, LossKind kind);

nlohmann::json to_json(const OrdinalHead& head);
nlohmann::json to_json(const SoftmaxHead& head);
/// Throws MalformedModel.
OrdinalHead ordinal_head_from_json(const nlohmann::json& doc);
SoftmaxHead softmax_head_from_json(const nlohmann::json& doc);

}  // namespace predism
