#pragma once

#include "emorec/nn/layers.hpp"
#include "emorec/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

namespace emorec::nn {

/// Per-layer parameter tensors; layers without parameters hold an empty list.
template <typename Scalar>
using ParameterSet = std::vector<std::vector<Tensor<Scalar>>>;

template <typename Scalar>
using Gradients = ParameterSet<Scalar>;

inline constexpr double kProbabilityFloor = 1e-12;

/// A fixed sequence of layers with validated shapes and owned parameters.
template <typename Scalar>
class Model {
 public:
  /// Validates the layer chain against `input_shape` and draws the initial
  /// weights uniformly in +-sqrt(6/(fan_in+fan_out)); biases start at zero.
  static Model build(Shape input_shape, std::vector<LayerSpec> layers, std::uint64_t seed) {
    Model m(std::move(input_shape), std::move(layers), seed);
    Rng rng(seed);
    for (std::size_t i = 0; i < m.layers_.size(); ++i) {
      const auto param_shapes = parameter_shapes(m.layers_[i], m.input_shape_of(i));
      if (param_shapes.empty()) continue;
      const auto [fan_in, fan_out] = fan_in_out(m.layers_[i], m.input_shape_of(i));
      const double limit = std::sqrt(6.0 / (fan_in + fan_out));
      auto& p = m.params_[i];
      p.emplace_back(param_shapes[0]);
      for (Index k = 0; k < p[0].size(); ++k) p[0][k] = static_cast<Scalar>(rng.uniform(-limit, limit));
      for (std::size_t j = 1; j < param_shapes.size(); ++j) p.emplace_back(param_shapes[j]);
    }
    return m;
  }

  /// Adopts existing parameters; shapes must match the layer chain.
  static Model from_parameters(Shape input_shape, std::vector<LayerSpec> layers, std::uint64_t seed,
                               ParameterSet<Scalar> params) {
    Model m(std::move(input_shape), std::move(layers), seed);
    if (params.size() != m.layers_.size()) {
      throw ShapeError(-1, "parameter set has " + std::to_string(params.size()) + " layers, model has " +
                               std::to_string(m.layers_.size()));
    }
    for (std::size_t i = 0; i < m.layers_.size(); ++i) {
      const auto expected = parameter_shapes(m.layers_[i], m.input_shape_of(i));
      if (params[i].size() != expected.size()) {
        throw ShapeError(static_cast<int>(i), "wrong number of parameter tensors");
      }
      for (std::size_t j = 0; j < expected.size(); ++j) {
        if (params[i][j].shape() != expected[j]) {
          throw ShapeError(static_cast<int>(i), "parameter " + std::to_string(j) + " has shape " +
                                                    shape_string(params[i][j].shape()) + ", expected " +
                                                    shape_string(expected[j]));
        }
      }
    }
    m.params_ = std::move(params);
    return m;
  }

  const Shape& input_shape() const noexcept { return input_shape_; }
  const Shape& output_shape() const noexcept { return shapes_.back(); }
  const std::vector<LayerSpec>& layers() const noexcept { return layers_; }
  std::uint64_t seed() const noexcept { return seed_; }

  /// Input shape of layer i.
  const Shape& input_shape_of(std::size_t i) const { return i == 0 ? input_shape_ : shapes_[i - 1]; }
  /// Output shape of layer i.
  const Shape& output_shape_of(std::size_t i) const { return shapes_[i]; }

  const ParameterSet<Scalar>& parameters() const noexcept { return params_; }
  ParameterSet<Scalar>& parameters() noexcept { return params_; }

  Index parameter_count() const {
    Index n = 0;
    for (const auto& layer : params_)
      for (const auto& t : layer) n += t.size();
    return n;
  }

  ParameterSet<Scalar> zero_gradients() const {
    ParameterSet<Scalar> g(params_.size());
    for (std::size_t i = 0; i < params_.size(); ++i)
      for (const auto& t : params_[i]) g[i].emplace_back(t.shape());
    return g;
  }

  bool ends_with_softmax() const { return !layers_.empty() && layers_.back().kind == LayerKind::Softmax; }

  /// Activations of every layer; element 0 is the input.
  std::vector<Tensor<Scalar>> trace(const Tensor<Scalar>& input) const {
    if (input.shape() != input_shape_) {
      throw ShapeError(0, "input shape " + shape_string(input.shape()) + " does not match expected " +
                              shape_string(input_shape_));
    }
    std::vector<Tensor<Scalar>> acts;
    acts.reserve(layers_.size() + 1);
    acts.push_back(input);
    for (std::size_t i = 0; i < layers_.size(); ++i) {
      Tensor<Scalar> out(shapes_[i]);
      forward_layer(layers_[i], params_[i], acts.back(), out, static_cast<int>(i));
      acts.push_back(std::move(out));
    }
    return acts;
  }

  Tensor<Scalar> forward(const Tensor<Scalar>& input) const {
    if (input.shape() != input_shape_) {
      throw ShapeError(0, "input shape " + shape_string(input.shape()) + " does not match expected " +
                              shape_string(input_shape_));
    }
    Tensor<Scalar> current = input;
    for (std::size_t i = 0; i < layers_.size(); ++i) {
      Tensor<Scalar> out(shapes_[i]);
      forward_layer(layers_[i], params_[i], current, out, static_cast<int>(i));
      current = std::move(out);
    }
    return current;
  }

  template <typename To>
  Model<To> cast() const {
    ParameterSet<To> p(params_.size());
    for (std::size_t i = 0; i < params_.size(); ++i)
      for (const auto& t : params_[i]) p[i].push_back(t.template cast<To>());
    return Model<To>::from_parameters(input_shape_, layers_, seed_, std::move(p));
  }

 private:
  Model(Shape input_shape, std::vector<LayerSpec> layers, std::uint64_t seed)
      : input_shape_(std::move(input_shape)), layers_(std::move(layers)), seed_(seed) {
    if (layers_.empty()) throw ShapeError(-1, "model has no layers");
    for (Index d : input_shape_) {
      if (d <= 0) throw ShapeError(0, "input dimensions must be positive");
    }
    Shape current = input_shape_;
    for (std::size_t i = 0; i < layers_.size(); ++i) {
      current = infer_output_shape(layers_[i], current, static_cast<int>(i));
      shapes_.push_back(current);
    }
    params_.resize(layers_.size());
  }

  Shape input_shape_;
  std::vector<LayerSpec> layers_;
  std::vector<Shape> shapes_;
  ParameterSet<Scalar> params_;
  std::uint64_t seed_ = 0;
};

/// -ln(max(probs[true_class], 1e-12)).
template <typename Scalar>
double loss_cross_entropy(const Tensor<Scalar>& probs, Index true_class) {
  if (true_class < 0 || true_class >= probs.size()) {
    throw Error(Errc::IndexOutOfRange, "class " + std::to_string(true_class) + " outside " +
                                           std::to_string(probs.size()) + " outputs");
  }
  return -std::log(std::max(static_cast<double>(probs[true_class]), kProbabilityFloor));
}

/// Adds the cross-entropy gradient of one sample into `grads` and returns
/// the sample loss. The model must end in softmax.
template <typename Scalar>
double accumulate_gradients(const Model<Scalar>& model, const Tensor<Scalar>& input, Index true_class,
                            Gradients<Scalar>& grads) {
  if (!model.ends_with_softmax()) {
    throw Error(Errc::InvalidArgument, "cross-entropy backpropagation requires a softmax output layer");
  }
  const auto acts = model.trace(input);
  const auto& probs = acts.back();
  const double loss = loss_cross_entropy(probs, true_class);

  // softmax + cross-entropy: d loss / d logits = probs - onehot
  const std::size_t n = model.layers().size();
  Tensor<Scalar> grad = probs;
  grad[true_class] -= Scalar(1);
  for (std::size_t i = n - 1; i-- > 0;) {
    Tensor<Scalar> grad_in(model.input_shape_of(i));
    backward_layer(model.layers()[i], model.parameters()[i], acts[i], acts[i + 1], grad, grad_in, grads[i],
                   static_cast<int>(i));
    grad = std::move(grad_in);
  }
  return loss;
}

template <typename Scalar>
Gradients<Scalar> backward(const Model<Scalar>& model, const Tensor<Scalar>& input, Index true_class) {
  auto grads = model.zero_gradients();
  accumulate_gradients(model, input, true_class, grads);
  return grads;
}

template <typename Scalar>
bool all_finite(const ParameterSet<Scalar>& set) {
  return std::all_of(set.begin(), set.end(), [](const auto& layer) {
    return std::all_of(layer.begin(), layer.end(), [](const auto& t) { return t.all_finite(); });
  });
}

}  // namespace emorec::nn
