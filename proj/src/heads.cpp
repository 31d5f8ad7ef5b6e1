#include "predism/heads.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "predism/error.hpp"

namespace predism {

using nlohmann::json;

InputVector join(const FeatureVector& features, const MetaVector& meta) {
  InputVector x{};
  std::copy(features.values.begin(), features.values.end(), x.begin());
  std::copy(meta.values.begin(), meta.values.end(), x.begin() + FeatureVector::kSize);
  return x;
}

InputVector Standardizer::apply(const InputVector& x) const {
  InputVector out{};
  for (std::size_t i = 0; i < kInputSize; ++i) out[i] = (x[i] - mean[i]) / scale[i];
  return out;
}

Standardizer Standardizer::fit(std::span<const InputVector> inputs) {
  Standardizer s;
  if (inputs.empty()) return s;
  const double n = static_cast<double>(inputs.size());
  for (std::size_t i = 0; i < kInputSize; ++i) {
    double sum = 0.0;
    for (const auto& x : inputs) sum += x[i];
    const double mean = sum / n;
    double var = 0.0;
    for (const auto& x : inputs) var += (x[i] - mean) * (x[i] - mean);
    const double sd = std::sqrt(var / n);
    s.mean[i] = mean;
    s.scale[i] = sd > 1e-12 ? sd : 1.0;
  }
  return s;
}

// ---------------------------------------------------------------- ordinal

OrdinalHead::OrdinalHead() : cut_points{-1.5, -0.5, 0.5, 1.5} {}

OrdinalHead OrdinalHead::prior() {
  // score = 4 * level with cut points halfway between the scaled levels; the
  // factor 4 keeps the middle levels more likely than their neighbours.
  OrdinalHead head;
  head.weights[kHazardInput] = 20.0;
  head.cut_points = {6.0, 10.0, 14.0, 18.0};
  return head;
}

double OrdinalHead::score(const InputVector& x) const {
  const InputVector z = standardizer.apply(x);
  double s = 0.0;
  for (std::size_t i = 0; i < kInputSize; ++i) s += weights[i] * z[i];
  return s;
}

Probs OrdinalHead::probs(const InputVector& x) const { return ordinal_probs(score(x), cut_points); }

std::vector<double> OrdinalHead::parameters() const {
  std::vector<double> p(weights.begin(), weights.end());
  p.insert(p.end(), cut_points.begin(), cut_points.end());
  return p;
}

void OrdinalHead::set_parameters(std::span<const double> params) {
  if (params.size() != kParameterCount) throw Error(ErrorCode::MalformedModel, "ordinal head parameter count");
  std::copy(params.begin(), params.begin() + kInputSize, weights.begin());
  std::copy(params.begin() + kInputSize, params.end(), cut_points.begin());
}

void OrdinalHead::project() {
  weights[kHazardInput] = std::max(0.0, weights[kHazardInput]);
  for (std::size_t k = 1; k < cut_points.size(); ++k) {
    cut_points[k] = std::max(cut_points[k], cut_points[k - 1] + kMinCutGap);
  }
}

LossGradient loss_and_gradient(const OrdinalHead& head, const InputVector& x, int level, LossKind kind) {
  const InputVector z = head.standardizer.apply(x);
  double s = 0.0;
  for (std::size_t i = 0; i < kInputSize; ++i) s += head.weights[i] * z[i];
  const Probs p = ordinal_probs(s, head.cut_points);

  LossGradient out;
  out.gradient.assign(OrdinalHead::kParameterCount, 0.0);
  const double factor = kind == LossKind::OrdinalCrossEntropy ? ordinal_distance_factor(p, level) : 1.0;
  const double py = p[level - 1];
  out.loss = factor * -std::log(std::max(py, kProbabilityFloor));
  if (py < kProbabilityFloor) return out;  // clamped: flat

  // p_y = F(c_y - s) - F(c_{y-1} - s); the logistic derivative is F(1 - F).
  double upper_slope = 0.0, lower_slope = 0.0;
  if (level < kLevelCount) {
    const double a = logistic(head.cut_points[level - 1] - s);
    upper_slope = a * (1.0 - a);
    out.gradient[kInputSize + level - 1] = -factor * upper_slope / py;
  }
  if (level > 1) {
    const double b = logistic(head.cut_points[level - 2] - s);
    lower_slope = b * (1.0 - b);
    out.gradient[kInputSize + level - 2] = factor * lower_slope / py;
  }
  const double d_score = factor * (upper_slope - lower_slope) / py;
  for (std::size_t i = 0; i < kInputSize; ++i) out.gradient[i] = d_score * z[i];
  return out;
}

// ---------------------------------------------------------------- softmax

SoftmaxHead SoftmaxHead::prior() {
  // logit_k = 2 (k h - k^2 / 2) with h = 5 * hazard input: a Gaussian bump
  // centred on the hazard level.
  SoftmaxHead head;
  for (int k = 0; k < kLevelCount; ++k) {
    const double level = k + 1;
    head.weights[k][kHazardInput] = 10.0 * level;
    head.bias[k] = -level * level;
  }
  return head;
}

Logits SoftmaxHead::logits(const InputVector& x) const {
  const InputVector z = standardizer.apply(x);
  Logits out = bias;
  for (int k = 0; k < kLevelCount; ++k) {
    for (std::size_t i = 0; i < kInputSize; ++i) out[k] += weights[k][i] * z[i];
  }
  return out;
}

std::vector<double> SoftmaxHead::parameters() const {
  std::vector<double> p;
  p.reserve(kParameterCount);
  for (const auto& row : weights) p.insert(p.end(), row.begin(), row.end());
  p.insert(p.end(), bias.begin(), bias.end());
  return p;
}

void SoftmaxHead::set_parameters(std::span<const double> params) {
  if (params.size() != kParameterCount) throw Error(ErrorCode::MalformedModel, "softmax head parameter count");
  auto it = params.begin();
  for (auto& row : weights) {
    std::copy(it, it + kInputSize, row.begin());
    it += kInputSize;
  }
  std::copy(it, params.end(), bias.begin());
}

LossGradient loss_and_gradient(const SoftmaxHead& head, const InputVector& x, int level, LossKind kind) {
  const InputVector z = head.standardizer.apply(x);
  Logits logits = head.bias;
  for (int k = 0; k < kLevelCount; ++k) {
    for (std::size_t i = 0; i < kInputSize; ++i) logits[k] += head.weights[k][i] * z[i];
  }
  const Probs p = softmax(logits);

  LossGradient out;
  out.gradient.assign(SoftmaxHead::kParameterCount, 0.0);
  const double factor = kind == LossKind::OrdinalCrossEntropy ? ordinal_distance_factor(p, level) : 1.0;
  const double py = p[level - 1];
  out.loss = factor * -std::log(std::max(py, kProbabilityFloor));
  if (py < kProbabilityFloor) return out;

  for (int k = 0; k < kLevelCount; ++k) {
    const double d_logit = factor * (p[k] - (k == level - 1 ? 1.0 : 0.0));
    for (std::size_t i = 0; i < kInputSize; ++i) out.gradient[k * kInputSize + i] = d_logit * z[i];
    out.gradient[kLevelCount * kInputSize + k] = d_logit;
  }
  return out;
}

double loss_value(const Probs& probs, int level, LossKind kind) {
  return kind == LossKind::OrdinalCrossEntropy ? ordinal_cross_entropy(probs, level) : cross_entropy(probs, level);
}

// ---------------------------------------------------------------- serialization

namespace {

json standardizer_json(const Standardizer& s) { return {{"mean", s.mean}, {"scale", s.scale}}; }

template <std::size_t N>
std::array<double, N> read_array(const json& doc, const char* key) {
  if (!doc.contains(key) || !doc[key].is_array() || doc[key].size() != N) {
    throw Error(ErrorCode::MalformedModel, std::string("'") + key + "' must hold " + std::to_string(N) + " numbers");
  }
  std::array<double, N> out{};
  for (std::size_t i = 0; i < N; ++i) {
    if (!doc[key][i].is_number()) throw Error(ErrorCode::MalformedModel, std::string("'") + key + "' must be numeric");
    out[i] = doc[key][i].get<double>();
  }
  return out;
}

Standardizer read_standardizer(const json& doc) {
  Standardizer s;
  if (!doc.contains("standardizer")) return s;
  s.mean = read_array<kInputSize>(doc["standardizer"], "mean");
  s.scale = read_array<kInputSize>(doc["standardizer"], "scale");
  for (double v : s.scale) {
    if (!(v > 0.0)) throw Error(ErrorCode::MalformedModel, "standardizer scale must be positive");
  }
  return s;
}

}  // namespace

json to_json(const OrdinalHead& head) {
  return {{"kind", "reference-ordinal"},
          {"standardizer", standardizer_json(head.standardizer)},
          {"weights", head.weights},
          {"cut_points", head.cut_points}};
}

json to_json(const SoftmaxHead& head) {
  return {{"kind", "reference-softmax"},
          {"standardizer", standardizer_json(head.standardizer)},
          {"weights", head.weights},
          {"bias", head.bias}};
}

OrdinalHead ordinal_head_from_json(const json& doc) {
  OrdinalHead head;
  head.standardizer = read_standardizer(doc);
  head.weights = read_array<kInputSize>(doc, "weights");
  head.cut_points = read_array<4>(doc, "cut_points");
  for (std::size_t k = 1; k < 4; ++k) {
    if (!(head.cut_points[k - 1] < head.cut_points[k])) {
      throw Error(ErrorCode::NonMonotoneCutPoints, "stored cut points must strictly increase");
    }
  }
  if (head.weights[kHazardInput] < 0.0) throw Error(ErrorCode::MalformedModel, "hazard weight must be non-negative");
  return head;
}

SoftmaxHead softmax_head_from_json(const json& doc) {
  SoftmaxHead head;
  head.standardizer = read_standardizer(doc);
  if (!doc.contains("weights") || !doc["weights"].is_array() || doc["weights"].size() != kLevelCount) {
    throw Error(ErrorCode::MalformedModel, "'weights' must hold 5 rows");
  }
  for (int k = 0; k < kLevelCount; ++k) {
    json row = {{"r", doc["weights"][k]}};
    head.weights[k] = read_array<kInputSize>(row, "r");
  }
  head.bias = read_array<kLevelCount>(doc, "bias");
  return head;
}

}  // namespace predism
