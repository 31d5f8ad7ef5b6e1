#include <doctest.h>

#include <cmath>
#include <random>

#include "predism/error.hpp"
#include "predism/trainer.hpp"
#include "synthetic.hpp"

using namespace predism;

namespace {

InputVector random_input(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  InputVector x;
  for (auto& v : x) v = u(rng);
  return x;
}

template <typename Head>
double loss_at(const Head& head, const InputVector& x, int level, LossKind kind) {
  return loss_value(head.probs(x), level, kind);
}

// Central differences on loss_value, compared in vector norm.
template <typename Head>
double gradient_error(const Head& head, const InputVector& x, int level, LossKind kind) {
  const LossGradient lg = loss_and_gradient(head, x, level, kind);
  CHECK(lg.loss == doctest::Approx(loss_at(head, x, level, kind)).epsilon(1e-12));
  std::vector<double> params = head.parameters();
  double diff = 0.0, norm_a = 0.0, norm_n = 0.0;
  const double h = 1e-6;
  for (std::size_t i = 0; i < params.size(); ++i) {
    Head plus = head, minus = head;
    auto p = params;
    p[i] += h;
    plus.set_parameters(p);
    p[i] -= 2 * h;
    minus.set_parameters(p);
    const double numeric = (loss_at(plus, x, level, kind) - loss_at(minus, x, level, kind)) / (2 * h);
    diff += (numeric - lg.gradient[i]) * (numeric - lg.gradient[i]);
    norm_a += lg.gradient[i] * lg.gradient[i];
    norm_n += numeric * numeric;
  }
  return std::sqrt(diff) / std::max({std::sqrt(norm_a), std::sqrt(norm_n), 1e-12});
}

OrdinalHead random_ordinal(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1, 1);
  OrdinalHead head;
  for (auto& w : head.weights) w = u(rng);
  head.cut_points = {-1.2 + u(rng) * 0.2, -0.3 + u(rng) * 0.2, 0.4 + u(rng) * 0.2, 1.3 + u(rng) * 0.2};
  return head;
}

SoftmaxHead random_softmax(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  SoftmaxHead head;
  for (auto& row : head.weights)
    for (auto& w : row) w = u(rng);
  for (auto& b : head.bias) b = u(rng);
  return head;
}

}  // namespace

TEST_CASE("learning-rate schedule") {
  const TrainConfig cfg;
  CHECK(cfg.epochs == 20);
  CHECK(cfg.learning_rate == 1e-3);
  for (int e = 1; e <= 7; ++e) CHECK(learning_rate_at(cfg, e) == doctest::Approx(1e-3));
  for (int e = 8; e <= 14; ++e) CHECK(learning_rate_at(cfg, e) == doctest::Approx(1e-4));
  for (int e = 15; e <= 20; ++e) CHECK(learning_rate_at(cfg, e) == doctest::Approx(1e-5));
}

TEST_CASE("analytic gradients match central differences") {
  std::mt19937_64 rng(21);
  for (LossKind kind : {LossKind::CrossEntropy, LossKind::OrdinalCrossEntropy}) {
    for (int t = 0; t < 20; ++t) {
      const InputVector x = random_input(rng);
      const int level = 1 + static_cast<int>(rng() % 5);
      CHECK(gradient_error(random_ordinal(rng), x, level, kind) < 1e-4);
      CHECK(gradient_error(random_softmax(rng), x, level, kind) < 1e-4);
    }
  }
}

TEST_CASE("projection keeps the ordinal constraints") {
  OrdinalHead head;
  head.weights[kHazardInput] = -3.0;
  head.cut_points = {1.0, 0.5, 0.5, -2.0};
  head.project();
  CHECK(head.weights[kHazardInput] == 0.0);
  for (std::size_t k = 1; k < 4; ++k) CHECK(head.cut_points[k] > head.cut_points[k - 1]);
}

TEST_CASE("expected level never falls as the hazard input rises") {
  std::mt19937_64 rng(13);
  for (int t = 0; t < 200; ++t) {
    OrdinalHead head = random_ordinal(rng);
    head.project();
    InputVector x = random_input(rng);
    double prev = -1.0;
    for (int h = 1; h <= 5; ++h) {
      x[kHazardInput] = h / 5.0;
      const double e = expected_level(head.probs(x));
      CHECK(e >= prev - 1e-12);
      prev = e;
    }
  }
}

TEST_CASE("prior heads follow the hazard level") {
  const OrdinalHead ord = OrdinalHead::prior();
  const SoftmaxHead soft = SoftmaxHead::prior();
  for (int h = 1; h <= 5; ++h) {
    InputVector x{};
    x[kHazardInput] = h / 5.0;
    CHECK(argmax_level(ord.probs(x)) == h);
  }
  InputVector lo{}, hi{};
  lo[kHazardInput] = 0.2;
  hi[kHazardInput] = 1.0;
  CHECK(argmax_level(soft.probs(lo)) == 1);
  CHECK(argmax_level(soft.probs(hi)) == 5);
}

TEST_CASE("training is deterministic and learns the separable set") {
  const auto data = synth::separable_samples(200, 4);
  TrainConfig cfg;
  cfg.seed = 9;
  const auto a = train(OrdinalHead(), data, cfg);
  const auto b = train(OrdinalHead(), data, cfg);
  REQUIRE(a.history.size() == 20);
  for (std::size_t i = 0; i < a.history.size(); ++i) {
    CHECK(a.history[i].mean_loss == b.history[i].mean_loss);
    CHECK(a.history[i].learning_rate == doctest::Approx(learning_rate_at(cfg, static_cast<int>(i) + 1)));
  }
  CHECK(a.head.parameters() == b.head.parameters());
  CHECK(a.head.weights[kHazardInput] >= 0.0);
  CHECK(accuracy(a.head, std::span<const TrainingSample>(data)) >= 0.9);

  cfg.seed = 10;
  const auto c = train(OrdinalHead(), data, cfg);
  CHECK(c.head.parameters() != a.head.parameters());

  cfg.loss = LossKind::OrdinalCrossEntropy;
  const auto s = train(SoftmaxHead(), data, cfg);
  CHECK(accuracy(s.head, std::span<const TrainingSample>(data)) >= 0.9);
}

TEST_CASE("training without warm start still reduces the loss") {
  const auto data = synth::separable_samples(100, 5);
  TrainConfig cfg;
  cfg.warm_start = false;
  cfg.epochs = 5;
  const auto r = train(OrdinalHead(), data, cfg);
  CHECK(r.history.back().mean_loss < r.history.front().mean_loss);
}

TEST_CASE("degenerate data") {
  std::vector<TrainingSample> same(10);
  for (auto& s : same) s.level = 3;
  CHECK_THROWS_WITH_AS(train(OrdinalHead(), same, TrainConfig{}), doctest::Contains("DegenerateDataset"), Error);
  CHECK_THROWS_WITH_AS(train(SoftmaxHead(), std::span<const TrainingSample>{}, TrainConfig{}),
                       doctest::Contains("DegenerateDataset"), Error);
}

TEST_CASE("linear probe recovers an exact linear relation") {
  std::mt19937_64 rng(3);
  std::vector<TrainingSample> data;
  for (int i = 0; i < 200; ++i) {
    TrainingSample s;
    s.input = random_input(rng);
    s.level = 1 + static_cast<int>(rng() % 5);
    data.push_back(s);
  }
  // replace the first input by the level itself
  for (auto& s : data) s.input[0] = s.level;
  const LinearProbe probe = fit_linear_probe(Standardizer{}, data);
  CHECK(probe.weights[0] == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(probe.intercept == doctest::Approx(0.0).scale(1.0).epsilon(1e-3));
  CHECK(probe.residual == LinearProbe::kMinResidual);
}

TEST_CASE("heads round-trip through JSON") {
  std::mt19937_64 rng(17);
  OrdinalHead ord = random_ordinal(rng);
  ord.project();
  const OrdinalHead ord2 = ordinal_head_from_json(to_json(ord));
  CHECK(ord2.parameters() == ord.parameters());
  const SoftmaxHead soft = random_softmax(rng);
  CHECK(softmax_head_from_json(to_json(soft)).parameters() == soft.parameters());
  CHECK_THROWS_WITH_AS(ordinal_head_from_json(nlohmann::json{{"kind", "reference-ordinal"}}),
                       doctest::Contains("MalformedModel"), Error);
  nlohmann::json bad = to_json(ord);
  bad["cut_points"] = {1, 0, 2, 3};
  CHECK_THROWS_AS(ordinal_head_from_json(bad), Error);
}
