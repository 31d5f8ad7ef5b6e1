#pragma once

#include <array>
#include <optional>
#include <span>

namespace predism {

inline constexpr int kLevelCount = 5;

using Logits = std::array<double, kLevelCount>;
/// Probabilities of damage levels 1..5 (index 0 is level 1).
using Probs = std::array<double, kLevelCount>;
using CutPoints = std::array<double, kLevelCount - 1>;

/// Clamp applied to the true-class probability inside the log.
inline constexpr double kProbabilityFloor = 1e-12;
/// Default minimum top probability for a confident prediction.
inline constexpr double kDefaultConfidenceThreshold = 0.35;

double logistic(double x);

/// Max-subtracted softmax.
Probs softmax(const Logits& logits);

/// Cumulative-link probabilities: p_k = F(c_k - s) - F(c_{k-1} - s) with F the
/// logistic CDF, c_0 = -inf and c_5 = +inf. Throws NonMonotoneCutPoints.
Probs ordinal_probs(double score, const CutPoints& cut_points);

/// Most probable level; ties go to the lowest level.
int argmax_level(const Probs& probs);
double expected_level(const Probs& probs);

/// -log(max(p_level, 1e-12)).
double cross_entropy(const Probs& probs, int level);

/// Cross-entropy scaled by 1 + |predicted - level| / 4, where predicted is the
/// argmax level. Equals cross_entropy when the prediction is right.
double ordinal_cross_entropy(const Probs& probs, int level);
double ordinal_distance_factor(const Probs& probs, int level);

/// Argmax level when its probability reaches `threshold`, otherwise empty
/// (unclassified).
std::optional<int> classify(const Probs& probs, double threshold = kDefaultConfidenceThreshold);

/// Throws InvalidArgument unless entries are finite, non-negative and sum to 1 within `tolerance`.
void check_distribution(const Probs& probs, double tolerance = 1e-9);

}  // namespace predism
