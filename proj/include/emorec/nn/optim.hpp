#pragma once

#include "emorec/nn/model.hpp"

#include <numeric>
#include <utility>
#include <vector>

namespace emorec::nn {

struct TrainConfig {
  double learning_rate = 0.01;
  std::size_t batch_size = 32;
  std::size_t epochs = 20;
  double momentum = 0.9;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(learning_rate >= 0.0)) throw Error(Errc::InvalidArgument, "learning_rate must be >= 0");
    if (batch_size < 1) throw Error(Errc::InvalidArgument, "batch_size must be >= 1");
    if (!(momentum >= 0.0 && momentum < 1.0)) throw Error(Errc::InvalidArgument, "momentum must lie in [0,1)");
  }
};

/// Momentum buffers, one per parameter tensor.
template <typename Scalar>
struct SgdState {
  ParameterSet<Scalar> velocity;
};

/// update = momentum * velocity + grad; p -= lr * update; velocity = update.
template <typename Scalar>
void sgd_step(Model<Scalar>& model, const Gradients<Scalar>& grads, const TrainConfig& config,
              SgdState<Scalar>& state) {
  auto& params = model.parameters();
  if (grads.size() != params.size()) throw ShapeError(-1, "gradient set does not match model layers");
  if (state.velocity.empty()) state.velocity = model.zero_gradients();
  const auto lr = static_cast<Scalar>(config.learning_rate);
  const auto mu = static_cast<Scalar>(config.momentum);
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (grads[i].size() != params[i].size()) throw ShapeError(static_cast<int>(i), "gradient count mismatch");
    for (std::size_t j = 0; j < params[i].size(); ++j) {
      if (grads[i][j].shape() != params[i][j].shape()) {
        throw ShapeError(static_cast<int>(i), "gradient shape " + shape_string(grads[i][j].shape()) +
                                                  " vs parameter " + shape_string(params[i][j].shape()));
      }
      auto& v = state.velocity[i][j].data();
      v = mu * v + grads[i][j].data();
      params[i][j].data() -= lr * v;
    }
  }
}

template <typename Scalar>
struct Sample {
  Tensor<Scalar> input;
  Index label = 0;
};

template <typename Scalar>
struct TrainResult {
  Model<Scalar> model;
  std::vector<double> loss_history;
};

/// Mini-batch SGD. Each epoch reshuffles with a generator seeded from
/// config.seed; each step applies the batch-mean gradient. loss_history
/// holds the mean sample loss seen during each epoch.
template <typename Scalar>
TrainResult<Scalar> train(Model<Scalar> model, const std::vector<Sample<Scalar>>& dataset,
                          const TrainConfig& config) {
  if (dataset.empty()) throw Error(Errc::EmptyDataset, "training set is empty");
  config.validate();

  Rng rng(config.seed);
  SgdState<Scalar> state;
  std::vector<std::size_t> order(dataset.size());
  std::vector<double> history;
  history.reserve(config.epochs);

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng.shuffle(order);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t stop = std::min(order.size(), start + config.batch_size);
      auto grads = model.zero_gradients();
      for (std::size_t k = start; k < stop; ++k) {
        const auto& s = dataset[order[k]];
        epoch_loss += accumulate_gradients(model, s.input, s.label, grads);
      }
      const auto scale = static_cast<Scalar>(1.0 / static_cast<double>(stop - start));
      for (auto& layer : grads)
        for (auto& t : layer) t.data() *= scale;
      sgd_step(model, grads, config, state);
    }
    history.push_back(epoch_loss / static_cast<double>(dataset.size()));
  }
  return {std::move(model), std::move(history)};
}

template <typename Scalar>
double mean_loss(const Model<Scalar>& model, const std::vector<Sample<Scalar>>& dataset) {
  if (dataset.empty()) throw Error(Errc::EmptyDataset, "dataset is empty");
  double total = 0.0;
  for (const auto& s : dataset) total += loss_cross_entropy(model.forward(s.input), s.label);
  return total / static_cast<double>(dataset.size());
}

}  // namespace emorec::nn
