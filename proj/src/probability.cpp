#include "predism/probability.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "predism/error.hpp"

namespace predism {

double logistic(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Probs softmax(const Logits& logits) {
  const double top = *std::max_element(logits.begin(), logits.end());
  Probs p{};
  double total = 0.0;
  for (int k = 0; k < kLevelCount; ++k) {
    p[k] = std::exp(logits[k] - top);
    total += p[k];
  }
  for (double& v : p) v /= total;
  return p;
}

Probs ordinal_probs(double score, const CutPoints& cut_points) {
  for (std::size_t k = 1; k < cut_points.size(); ++k) {
    if (!(cut_points[k - 1] < cut_points[k])) {
      throw Error(ErrorCode::NonMonotoneCutPoints, "cut points must strictly increase");
    }
  }
  Probs p{};
  double below = 0.0;
  for (int k = 0; k < kLevelCount - 1; ++k) {
    const double cdf = logistic(cut_points[k] - score);
    p[k] = cdf - below;
    below = cdf;
  }
  p[kLevelCount - 1] = 1.0 - below;
  return p;
}

int argmax_level(const Probs& probs) {
  int best = 0;
  for (int k = 1; k < kLevelCount; ++k) {
    if (probs[k] > probs[best]) best = k;
  }
  return best + 1;
}

double expected_level(const Probs& probs) {
  double e = 0.0;
  for (int k = 0; k < kLevelCount; ++k) e += (k + 1) * probs[k];
  return e;
}

double cross_entropy(const Probs& probs, int level) {
  if (level < 1 || level > kLevelCount) throw Error(ErrorCode::InvalidArgument, "level out of range");
  return -std::log(std::max(probs[level - 1], kProbabilityFloor));
}

double ordinal_distance_factor(const Probs& probs, int level) {
  return 1.0 + std::abs(argmax_level(probs) - level) / static_cast<double>(kLevelCount - 1);
}

double ordinal_cross_entropy(const Probs& probs, int level) {
  return cross_entropy(probs, level) * ordinal_distance_factor(probs, level);
}

std::optional<int> classify(const Probs& probs, double threshold) {
  const int level = argmax_level(probs);
  if (probs[level - 1] >= threshold) return level;
  return std::nullopt;
}

void check_distribution(const Probs& probs, double tolerance) {
  double total = 0.0;
  for (double p : probs) {
    if (!std::isfinite(p) || p < 0.0) throw Error(ErrorCode::InvalidArgument, "probabilities must be finite and non-negative");
    total += p;
  }
  if (std::abs(total - 1.0) > tolerance) {
    throw Error(ErrorCode::InvalidArgument, "probabilities sum to " + std::to_string(total));
  }
}

}  // namespace predism
