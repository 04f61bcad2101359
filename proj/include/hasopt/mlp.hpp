#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <numeric>
#include <set>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "hasopt/domain.hpp"
#include "hasopt/features.hpp"
#include "hasopt/rng.hpp"
#include "hasopt/simulator.hpp"

namespace hasopt {

// Fully connected net: inputs -> sigmoid hidden layer -> softmax outputs.
// Weight matrices are row-major, w1[k*H + j] connecting input k to hidden j,
// w2[j*R + o] connecting hidden j to output o.
struct MlpModel {
  std::size_t n_inputs = 0;
  std::size_t n_hidden = 0;
  std::size_t n_outputs = 0;
  std::vector<double> w1, b1, w2, b2;
  ScalingContext scaling;
};

struct TrainConfig {
  double learning_rate = 0.05;
  std::size_t batch_size = 64;
  std::size_t epochs = 30;
  std::uint64_t seed = 1;
  double validation_fraction = 1.0 / 9.0;  // 800k/100k split of the reference setup
  double weight_decay = 0.0;
};

struct TrainReport {
  std::vector<double> epoch_loss;
  std::vector<double> epoch_val_accuracy;
  double final_val_accuracy = 0.0;
};

namespace detail {

inline double sigmoid(double x) {
  return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

// Hidden activations and output probabilities for one input.
template <typename FeatureT>
inline void forward_layers(const MlpModel& m, std::span<const FeatureT> x,
                           std::vector<double>& hidden, std::vector<double>& probs) {
  hidden.assign(m.b1.begin(), m.b1.end());
  for (std::size_t k = 0; k < m.n_inputs; ++k) {
    const double xk = static_cast<double>(x[k]);
    if (xk == 0.0) continue;
    const double* row = &m.w1[k * m.n_hidden];
    for (std::size_t j = 0; j < m.n_hidden; ++j) hidden[j] += xk * row[j];
  }
  for (double& hj : hidden) hj = sigmoid(hj);

  probs.assign(m.b2.begin(), m.b2.end());
  for (std::size_t j = 0; j < m.n_hidden; ++j) {
    const double hj = hidden[j];
    const double* row = &m.w2[j * m.n_outputs];
    for (std::size_t o = 0; o < m.n_outputs; ++o) probs[o] += hj * row[o];
  }
  const double zmax = *std::max_element(probs.begin(), probs.end());
  double sum = 0.0;
  for (double& z : probs) {
    z = std::exp(z - zmax);
    sum += z;
  }
  for (double& z : probs) z /= sum;
}

struct Gradients {
  std::vector<double> w1, b1, w2, b2;

  explicit Gradients(const MlpModel& m)
      : w1(m.w1.size(), 0.0), b1(m.b1.size(), 0.0), w2(m.w2.size(), 0.0), b2(m.b2.size(), 0.0) {}

  void reset() {
    std::fill(w1.begin(), w1.end(), 0.0);
    std::fill(b1.begin(), b1.end(), 0.0);
    std::fill(w2.begin(), w2.end(), 0.0);
    std::fill(b2.begin(), b2.end(), 0.0);
  }
};

// Accumulates the cross-entropy gradient of one sample; returns its loss.
template <typename FeatureT>
inline double backward(const MlpModel& m, std::span<const FeatureT> x, int label,
                       std::vector<double>& hidden, std::vector<double>& probs,
                       std::vector<double>& delta_hidden, Gradients& grads) {
  forward_layers(m, x, hidden, probs);
  const double loss = -std::log(std::max(probs[static_cast<std::size_t>(label)], 1e-300));

  // dL/dz = p - onehot(label)
  for (std::size_t o = 0; o < m.n_outputs; ++o) {
    const double dz = probs[o] - (static_cast<int>(o) == label ? 1.0 : 0.0);
    probs[o] = dz;
    grads.b2[o] += dz;
  }
  delta_hidden.assign(m.n_hidden, 0.0);
  for (std::size_t j = 0; j < m.n_hidden; ++j) {
    const double hj = hidden[j];
    double* grow = &grads.w2[j * m.n_outputs];
    const double* wrow = &m.w2[j * m.n_outputs];
    double acc = 0.0;
    for (std::size_t o = 0; o < m.n_outputs; ++o) {
      grow[o] += hj * probs[o];
      acc += wrow[o] * probs[o];
    }
    delta_hidden[j] = acc * hj * (1.0 - hj);
    grads.b1[j] += delta_hidden[j];
  }
  for (std::size_t k = 0; k < m.n_inputs; ++k) {
    const double xk = static_cast<double>(x[k]);
    if (xk == 0.0) continue;
    double* grow = &grads.w1[k * m.n_hidden];
    for (std::size_t j = 0; j < m.n_hidden; ++j) grow[j] += xk * delta_hidden[j];
  }
  return loss;
}

}  // namespace detail

// Output probabilities; strictly positive, summing to 1.
inline std::vector<double> forward(const MlpModel& m, std::span<const double> features) {
  if (features.size() != m.n_inputs) throw std::invalid_argument("forward: feature size mismatch");
  std::vector<double> hidden, probs;
  detail::forward_layers(m, features, hidden, probs);
  return probs;
}

inline std::vector<double> forward(const MlpModel& m, const std::vector<float>& features) {
  if (features.size() != m.n_inputs) throw std::invalid_argument("forward: feature size mismatch");
  std::vector<double> hidden, probs;
  detail::forward_layers(m, std::span<const float>(features), hidden, probs);
  return probs;
}

inline int argmax_lowest(const std::vector<double>& probs) {
  std::size_t best = 0;
  for (std::size_t o = 1; o < probs.size(); ++o)
    if (probs[o] > probs[best]) best = o;
  return static_cast<int>(best);
}

// Cross-entropy loss of one sample; used by tests and the gradient check.
inline double loss(const MlpModel& m, std::span<const double> features, int label) {
  const std::vector<double> p = forward(m, features);
  return -std::log(std::max(p[static_cast<std::size_t>(label)], 1e-300));
}

// Deterministically initialized model: Glorot-uniform weights with
// s = sqrt(6 / (fan_in + fan_out)), zero biases.
inline MlpModel init_model(std::size_t n_inputs, std::size_t n_hidden, std::size_t n_outputs,
                           std::uint64_t seed, const ScalingContext& scaling) {
  MlpModel m;
  m.n_inputs = n_inputs;
  m.n_hidden = n_hidden;
  m.n_outputs = n_outputs;
  m.scaling = scaling;
  SplitMix64 rng(seed);
  const double s1 = std::sqrt(6.0 / static_cast<double>(n_inputs + n_hidden));
  const double s2 = std::sqrt(6.0 / static_cast<double>(n_hidden + n_outputs));
  m.w1.resize(n_inputs * n_hidden);
  m.w2.resize(n_hidden * n_outputs);
  for (double& w : m.w1) w = rng.next_uniform(-s1, s1);
  for (double& w : m.w2) w = rng.next_uniform(-s2, s2);
  m.b1.assign(n_hidden, 0.0);
  m.b2.assign(n_outputs, 0.0);
  return m;
}

// Mini-batch gradient descent on softmax cross-entropy. Fully sequential and
// seeded, so retraining reproduces identical weights. The validation split is
// a shuffled hold-out of the given samples.
inline std::pair<MlpModel, TrainReport> train(const std::vector<Sample>& samples,
                                              const TrainConfig& cfg, std::size_t hidden_size,
                                              const ScalingContext& scaling) {
  if (samples.size() < 2) throw std::invalid_argument("train: need at least two samples");
  if (cfg.learning_rate <= 0.0) throw std::invalid_argument("train: learning rate must be > 0");
  if (cfg.batch_size < 1) throw std::invalid_argument("train: batch size must be >= 1");
  if (cfg.validation_fraction <= 0.0 || cfg.validation_fraction >= 1.0)
    throw std::invalid_argument("train: validation fraction must be in (0,1)");

  const std::size_t n_inputs = samples.front().features.size();
  int max_label = 0;
  std::set<int> labels;
  for (const Sample& s : samples) {
    if (s.features.size() != n_inputs) throw std::invalid_argument("train: ragged feature rows");
    if (s.label < 0) throw std::invalid_argument("train: negative label");
    labels.insert(s.label);
    max_label = std::max(max_label, s.label);
  }
  if (labels.size() < 2) throw std::invalid_argument("train: corpus contains a single class");
  const auto n_outputs = static_cast<std::size_t>(max_label) + 1;

  SplitMix64 rng(cfg.seed);
  MlpModel model = init_model(n_inputs, hidden_size, n_outputs, rng.next_u64(), scaling);

  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t i = order.size(); i-- > 1;)
    std::swap(order[i], order[rng.next_below(i + 1)]);
  std::size_t val_count = static_cast<std::size_t>(
      std::floor(static_cast<double>(samples.size()) * cfg.validation_fraction));
  val_count = std::clamp<std::size_t>(val_count, 1, samples.size() - 1);
  std::vector<std::size_t> val_idx(order.end() - static_cast<std::ptrdiff_t>(val_count),
                                   order.end());
  std::vector<std::size_t> train_idx(order.begin(),
                                     order.end() - static_cast<std::ptrdiff_t>(val_count));

  detail::Gradients grads(model);
  std::vector<double> hidden, probs, delta_hidden;

  const auto validation_accuracy = [&] {
    std::size_t hits = 0;
    for (std::size_t idx : val_idx) {
      detail::forward_layers(model, std::span<const float>(samples[idx].features), hidden, probs);
      hits += argmax_lowest(probs) == samples[idx].label;
    }
    return static_cast<double>(hits) / static_cast<double>(val_idx.size());
  };

  TrainReport report;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (std::size_t i = train_idx.size(); i-- > 1;)
      std::swap(train_idx[i], train_idx[rng.next_below(i + 1)]);

    double loss_sum = 0.0;
    for (std::size_t begin = 0; begin < train_idx.size(); begin += cfg.batch_size) {
      const std::size_t end = std::min(begin + cfg.batch_size, train_idx.size());
      grads.reset();
      for (std::size_t k = begin; k < end; ++k) {
        const Sample& s = samples[train_idx[k]];
        loss_sum += detail::backward(model, std::span<const float>(s.features), s.label, hidden,
                                     probs, delta_hidden, grads);
      }
      const double scale = cfg.learning_rate / static_cast<double>(end - begin);
      const double decay = cfg.learning_rate * cfg.weight_decay;
      for (std::size_t p = 0; p < model.w1.size(); ++p)
        model.w1[p] -= scale * grads.w1[p] + decay * model.w1[p];
      for (std::size_t p = 0; p < model.b1.size(); ++p) model.b1[p] -= scale * grads.b1[p];
      for (std::size_t p = 0; p < model.w2.size(); ++p)
        model.w2[p] -= scale * grads.w2[p] + decay * model.w2[p];
      for (std::size_t p = 0; p < model.b2.size(); ++p) model.b2[p] -= scale * grads.b2[p];
    }
    report.epoch_loss.push_back(loss_sum / static_cast<double>(train_idx.size()));
    report.epoch_val_accuracy.push_back(validation_accuracy());
  }
  report.final_val_accuracy =
      report.epoch_val_accuracy.empty() ? 0.0 : report.epoch_val_accuracy.back();
  return {std::move(model), std::move(report)};
}

// Largest discrepancy between analytic gradients and central finite
// differences (step 1e-5) over every parameter, measured relative to
// max(1, |analytic|, |numeric|).
inline double gradient_check(const MlpModel& model, std::span<const double> features, int label) {
  MlpModel m = model;
  detail::Gradients grads(m);
  std::vector<double> hidden, probs, delta_hidden;
  detail::backward(m, features, label, hidden, probs, delta_hidden, grads);

  constexpr double kStep = 1e-5;
  double worst = 0.0;
  const auto probe = [&](std::vector<double> MlpModel::* params, const std::vector<double>& g) {
    auto& vec = m.*params;
    for (std::size_t p = 0; p < vec.size(); ++p) {
      const double saved = vec[p];
      vec[p] = saved + kStep;
      const double up = loss(m, features, label);
      vec[p] = saved - kStep;
      const double down = loss(m, features, label);
      vec[p] = saved;
      const double numeric = (up - down) / (2.0 * kStep);
      const double denom = std::max({1.0, std::abs(numeric), std::abs(g[p])});
      worst = std::max(worst, std::abs(numeric - g[p]) / denom);
    }
  };
  probe(&MlpModel::w1, grads.w1);
  probe(&MlpModel::b1, grads.b1);
  probe(&MlpModel::w2, grads.w2);
  probe(&MlpModel::b2, grads.b2);
  return worst;
}

// Adaptation logic driven by the trained model: extract features, run the
// net, pick the most probable level (lowest index on ties).
class MlpLogic final : public AdaptationLogic {
public:
  MlpLogic(std::shared_ptr<const MlpModel> model, const Video& video)
      : model_(std::move(model)), video_(&video) {
    if (model_->n_outputs != video.num_levels())
      throw std::invalid_argument("mlp logic: model classes do not match video levels");
    if (model_->n_inputs != feature_count(model_->scaling, video.num_levels()))
      throw std::invalid_argument("mlp logic: model inputs do not match the feature layout");
  }

  int decide(const PlayerStateView& view) const override {
    const std::vector<double> features = extract(view, *video_, model_->scaling);
    std::vector<double> hidden, probs;
    detail::forward_layers(*model_, std::span<const double>(features), hidden, probs);
    return argmax_lowest(probs) + 1;
  }

  std::string name() const override { return "model"; }

private:
  std::shared_ptr<const MlpModel> model_;
  const Video* video_;
};

inline MlpLogic as_logic(std::shared_ptr<const MlpModel> model, const Video& video) {
  return MlpLogic(std::move(model), video);
}

inline MlpLogic as_logic(const MlpModel& model, const Video& video) {
  return MlpLogic(std::make_shared<MlpModel>(model), video);
}

}  // namespace hasopt
