#include "predism/trainer.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <set>

#include <Eigen/Dense>

#include "predism/error.hpp"

namespace predism {

double learning_rate_at(const TrainConfig& config, int epoch) {
  const int decays = config.step_size > 0 ? (epoch - 1) / config.step_size : 0;
  return config.learning_rate * std::pow(config.gamma, decays);
}

LinearProbe fit_linear_probe(const Standardizer& standardizer, std::span<const TrainingSample> data) {
  constexpr Eigen::Index d = static_cast<Eigen::Index>(kInputSize) + 1;
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(d, d);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(d);
  Eigen::VectorXd row(d);
  for (const auto& s : data) {
    const InputVector z = standardizer.apply(s.input);
    for (std::size_t i = 0; i < kInputSize; ++i) row[static_cast<Eigen::Index>(i)] = z[i];
    row[d - 1] = 1.0;
    gram.selfadjointView<Eigen::Lower>().rankUpdate(row);
    rhs += row * static_cast<double>(s.level);
  }
  gram = gram.selfadjointView<Eigen::Lower>();
  // small ridge on the weights only; constant inputs standardize to zero
  const double ridge = 1e-6 * static_cast<double>(std::max<std::size_t>(data.size(), 1));
  for (Eigen::Index i = 0; i + 1 < d; ++i) gram(i, i) += ridge;
  const Eigen::VectorXd beta = gram.ldlt().solve(rhs);

  LinearProbe probe;
  for (std::size_t i = 0; i < kInputSize; ++i) probe.weights[i] = beta[static_cast<Eigen::Index>(i)];
  probe.intercept = beta[d - 1];
  double sse = 0.0;
  for (const auto& s : data) {
    const InputVector z = standardizer.apply(s.input);
    double fit = probe.intercept;
    for (std::size_t i = 0; i < kInputSize; ++i) fit += probe.weights[i] * z[i];
    sse += (fit - s.level) * (fit - s.level);
  }
  const double rms = data.empty() ? 1.0 : std::sqrt(sse / static_cast<double>(data.size()));
  probe.residual = std::isfinite(rms) ? std::max(rms, LinearProbe::kMinResidual) : 1.0;
  return probe;
}

void warm_start(OrdinalHead& head, const LinearProbe& probe) {
  const double c = std::numbers::pi / (std::sqrt(3.0) * probe.residual);
  for (std::size_t i = 0; i < kInputSize; ++i) head.weights[i] = c * probe.weights[i];
  for (std::size_t k = 0; k < head.cut_points.size(); ++k) {
    head.cut_points[k] = c * (static_cast<double>(k) + 1.5 - probe.intercept);
  }
  head.project();
}

void warm_start(SoftmaxHead& head, const LinearProbe& probe) {
  const double inv_var = 1.0 / (probe.residual * probe.residual);
  for (int k = 1; k <= kLevelCount; ++k) {
    auto& row = head.weights[static_cast<std::size_t>(k - 1)];
    for (std::size_t i = 0; i < kInputSize; ++i) row[i] = k * probe.weights[i] * inv_var;
    head.bias[static_cast<std::size_t>(k - 1)] = (k * probe.intercept - 0.5 * k * k) * inv_var;
  }
}

namespace {

template <typename Head>
TrainResult<Head> run(const Head& initial, std::span<const TrainingSample> data, const TrainConfig& config) {
  std::set<int> levels;
  for (const auto& s : data) {
    if (s.level < 1 || s.level > kLevelCount) throw Error(ErrorCode::InvalidArgument, "training level out of range");
    levels.insert(s.level);
  }
  if (levels.size() < 2) throw Error(ErrorCode::DegenerateDataset, "training data needs at least two distinct levels");
  if (config.epochs < 1 || config.batch_size < 1) throw Error(ErrorCode::InvalidArgument, "epochs and batch size must be positive");

  TrainResult<Head> result{initial, {}};
  Head& head = result.head;
  if (config.fit_standardizer) {
    std::vector<InputVector> inputs;
    inputs.reserve(data.size());
    for (const auto& s : data) inputs.push_back(s.input);
    head.standardizer = Standardizer::fit(inputs);
  }
  if (config.warm_start) warm_start(head, fit_linear_probe(head.standardizer, data));
  head.project();

  std::vector<double> params = head.parameters();
  std::vector<double> m(params.size(), 0.0), v(params.size(), 0.0), grad(params.size());
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(config.seed);
  long step = 0;

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    const double lr = learning_rate_at(config, epoch);
    for (std::size_t i = order.size() - 1; i > 0; --i) std::swap(order[i], order[rng() % (i + 1)]);

    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t stop = std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
      std::fill(grad.begin(), grad.end(), 0.0);
      double batch_loss = 0.0;
      for (std::size_t b = start; b < stop; ++b) {
        const auto& sample = data[order[b]];
        const LossGradient lg = loss_and_gradient(head, sample.input, sample.level, config.loss);
        batch_loss += lg.loss;
        for (std::size_t p = 0; p < grad.size(); ++p) grad[p] += lg.gradient[p];
      }
      const double count = static_cast<double>(stop - start);
      ++step;
      const double bc1 = 1.0 - std::pow(config.beta1, static_cast<double>(step));
      const double bc2 = 1.0 - std::pow(config.beta2, static_cast<double>(step));
      for (std::size_t p = 0; p < params.size(); ++p) {
        const double g = grad[p] / count;
        m[p] = config.beta1 * m[p] + (1.0 - config.beta1) * g;
        v[p] = config.beta2 * v[p] + (1.0 - config.beta2) * g * g;
        params[p] -= lr * (m[p] / bc1) / (std::sqrt(v[p] / bc2) + config.epsilon);
      }
      head.set_parameters(params);
      head.project();
      params = head.parameters();
      loss_sum += batch_loss / count;
      ++batches;
    }
    result.history.push_back({epoch, lr, loss_sum / static_cast<double>(batches), accuracy(head, data)});
  }
  return result;
}

}  // namespace

TrainResult<OrdinalHead> train(const OrdinalHead& initial, std::span<const TrainingSample> data, const TrainConfig& config) {
  return run(initial, data, config);
}

TrainResult<SoftmaxHead> train(const SoftmaxHead& initial, std::span<const TrainingSample> data, const TrainConfig& config) {
  return run(initial, data, config);
}

}  // namespace predism
