#pragma once

#include "emorec/nn/tensor.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace emorec::nn {

enum class LayerKind { Embedding, Conv1d, Conv2d, MaxPool2d, GlobalMaxPool, Dense, Relu, Softmax };

std::string_view to_string(LayerKind kind) noexcept;
std::optional<LayerKind> parse_layer_kind(std::string_view name) noexcept;

/// Layer hyperparameters. Only the fields relevant to `kind` are meaningful.
///
/// Layouts (row-major):
///   embedding      [L] ids        -> [L, units]        W [vocab, units]
///   conv1d         [T, C]         -> [T-kw+1, units]   W [units, kw, C], b [units]
///   conv2d         [H, W, C]      -> [H-kh+1, W-kw+1, units]  W [units, kh, kw, C], b [units]
///   maxpool2d      [H, W, C]      -> [H/window, W/window, C]
///   global_maxpool [T, C]         -> [C]
///   dense          any (flattened)-> [units]           W [units, in], b [units]
/// Convolutions use valid padding and stride 1; pooling stride equals window.
struct LayerSpec {
  LayerKind kind = LayerKind::Relu;
  Index units = 0;
  Index vocab = 0;
  Index kernel_h = 0;
  Index kernel_w = 0;
  Index window = 0;

  static LayerSpec embedding(Index vocab, Index dim) { return {LayerKind::Embedding, dim, vocab, 0, 0, 0}; }
  static LayerSpec conv1d(Index filters, Index width) { return {LayerKind::Conv1d, filters, 0, 0, width, 0}; }
  static LayerSpec conv2d(Index filters, Index kh, Index kw) {
    return {LayerKind::Conv2d, filters, 0, kh, kw, 0};
  }
  static LayerSpec maxpool2d(Index window) { return {LayerKind::MaxPool2d, 0, 0, 0, 0, window}; }
  static LayerSpec global_maxpool() { return {LayerKind::GlobalMaxPool, 0, 0, 0, 0, 0}; }
  static LayerSpec dense(Index units) { return {LayerKind::Dense, units, 0, 0, 0, 0}; }
  static LayerSpec relu() { return {LayerKind::Relu, 0, 0, 0, 0, 0}; }
  static LayerSpec softmax() { return {LayerKind::Softmax, 0, 0, 0, 0, 0}; }

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

/// "conv2d units=8 kernel_h=3 kernel_w=3" style description.
std::string describe(const LayerSpec& spec);
LayerSpec parse_layer_spec(std::string_view text);

/// Output shape of `spec` applied to `in`. Throws ShapeError tagged with `layer`.
Shape infer_output_shape(const LayerSpec& spec, const Shape& in, int layer);

/// Parameter shapes of `spec` for input shape `in` (weights first, then bias).
std::vector<Shape> parameter_shapes(const LayerSpec& spec, const Shape& in);

/// (fan_in, fan_out) used by the uniform initializer.
std::pair<double, double> fan_in_out(const LayerSpec& spec, const Shape& in);

namespace kernels {

template <typename Scalar>
using ColMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using RowMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Windows of a [T, C] row-major signal are contiguous and overlap with
// stride C, so the im2col matrix is a strided view, not a copy.
template <typename Scalar>
auto conv1d_columns(const Scalar* x, Index channels, Index width, Index positions) {
  using Map = Eigen::Map<const ColMatrix<Scalar>, 0, Eigen::OuterStride<>>;
  return Map(x, width * channels, positions, Eigen::OuterStride<>(channels));
}

template <typename Scalar>
ColMatrix<Scalar> im2col(const Tensor<Scalar>& in, Index kh, Index kw) {
  const Index h = in.shape()[0], w = in.shape()[1], c = in.shape()[2];
  const Index oh = h - kh + 1, ow = w - kw + 1;
  const Index row_chunk = kw * c;
  ColMatrix<Scalar> cols(kh * row_chunk, oh * ow);
  const Scalar* x = in.data().data();
  for (Index oy = 0; oy < oh; ++oy) {
    for (Index ox = 0; ox < ow; ++ox) {
      Scalar* dst = cols.col(oy * ow + ox).data();
      for (Index dy = 0; dy < kh; ++dy) {
        const Scalar* src = x + ((oy + dy) * w + ox) * c;
        std::copy(src, src + row_chunk, dst + dy * row_chunk);
      }
    }
  }
  return cols;
}

template <typename Scalar>
void col2im_add(const ColMatrix<Scalar>& cols, Index kh, Index kw, Tensor<Scalar>& grad_in) {
  const Index w = grad_in.shape()[1], c = grad_in.shape()[2];
  const Index oh = grad_in.shape()[0] - kh + 1, ow = w - kw + 1;
  const Index row_chunk = kw * c;
  Scalar* g = grad_in.data().data();
  for (Index oy = 0; oy < oh; ++oy) {
    for (Index ox = 0; ox < ow; ++ox) {
      const Scalar* src = cols.col(oy * ow + ox).data();
      for (Index dy = 0; dy < kh; ++dy) {
        Scalar* dst = g + ((oy + dy) * w + ox) * c;
        for (Index j = 0; j < row_chunk; ++j) dst[j] += src[dy * row_chunk + j];
      }
    }
  }
}

template <typename Scalar>
Index checked_id(Scalar value, Index vocab, int layer) {
  const double v = static_cast<double>(value);
  if (!(v >= 0.0) || v >= static_cast<double>(vocab) || v != std::floor(v)) {
    throw Error(Errc::IndexOutOfRange,
                "layer " + std::to_string(layer) + ": token id " + std::to_string(v) +
                    " outside embedding vocabulary of " + std::to_string(vocab));
  }
  return static_cast<Index>(v);
}

}  // namespace kernels

/// Applies one layer. `params` holds the layer's parameter tensors in
/// parameter_shapes() order; `out` must already have the inferred shape.
template <typename Scalar>
void forward_layer(const LayerSpec& spec, const std::vector<Tensor<Scalar>>& params, const Tensor<Scalar>& in,
                   Tensor<Scalar>& out, int layer) {
  using namespace kernels;
  const Shape& s = in.shape();
  switch (spec.kind) {
    case LayerKind::Embedding: {
      const auto& table = params[0];
      const Index dim = spec.units;
      for (Index t = 0; t < s[0]; ++t) {
        const Index id = checked_id(in[t], spec.vocab, layer);
        out.data().segment(t * dim, dim) = table.data().segment(id * dim, dim);
      }
      break;
    }
    case LayerKind::Conv1d: {
      const Index c = s[1], kw = spec.kernel_w, positions = s[0] - kw + 1;
      Eigen::Map<const RowMatrix<Scalar>> weights(params[0].data().data(), spec.units, kw * c);
      Eigen::Map<ColMatrix<Scalar>> y(out.data().data(), spec.units, positions);
      y.noalias() = weights * conv1d_columns(in.data().data(), c, kw, positions);
      y.colwise() += params[1].data();
      break;
    }
    case LayerKind::Conv2d: {
      const Index c = s[2];
      const auto cols = im2col(in, spec.kernel_h, spec.kernel_w);
      Eigen::Map<const RowMatrix<Scalar>> weights(params[0].data().data(), spec.units,
                                                   spec.kernel_h * spec.kernel_w * c);
      Eigen::Map<ColMatrix<Scalar>> y(out.data().data(), spec.units, cols.cols());
      y.noalias() = weights * cols;
      y.colwise() += params[1].data();
      break;
    }
    case LayerKind::MaxPool2d: {
      const Index w = s[1], c = s[2], p = spec.window;
      const Index oh = s[0] / p, ow = w / p;
      for (Index oy = 0; oy < oh; ++oy)
        for (Index ox = 0; ox < ow; ++ox)
          for (Index ch = 0; ch < c; ++ch) {
            Scalar best = -std::numeric_limits<Scalar>::infinity();
            for (Index dy = 0; dy < p; ++dy)
              for (Index dx = 0; dx < p; ++dx)
                best = std::max(best, in[((oy * p + dy) * w + ox * p + dx) * c + ch]);
            out[(oy * ow + ox) * c + ch] = best;
          }
      break;
    }
    case LayerKind::GlobalMaxPool: {
      Eigen::Map<const ColMatrix<Scalar>> x(in.data().data(), s[1], s[0]);
      out.data() = x.rowwise().maxCoeff();
      break;
    }
    case LayerKind::Dense: {
      Eigen::Map<const RowMatrix<Scalar>> weights(params[0].data().data(), spec.units, in.size());
      out.data().noalias() = weights * in.data();
      out.data() += params[1].data();
      break;
    }
    case LayerKind::Relu:
      out.data() = in.data().cwiseMax(Scalar(0));
      break;
    case LayerKind::Softmax: {
      const Scalar peak = in.data().maxCoeff();
      out.data() = (in.data().array() - peak).exp();
      out.data() /= out.data().sum();
      break;
    }
  }
}

/// Backpropagates `grad_out` through one layer: accumulates into
/// `grad_params` and writes the input gradient into `grad_in` (left zero for
/// embeddings, whose inputs are not differentiable).
template <typename Scalar>
void backward_layer(const LayerSpec& spec, const std::vector<Tensor<Scalar>>& params, const Tensor<Scalar>& in,
                    const Tensor<Scalar>& out, const Tensor<Scalar>& grad_out, Tensor<Scalar>& grad_in,
                    std::vector<Tensor<Scalar>>& grad_params, int layer) {
  using namespace kernels;
  const Shape& s = in.shape();
  switch (spec.kind) {
    case LayerKind::Embedding: {
      const Index dim = spec.units;
      grad_in.set_zero();
      for (Index t = 0; t < s[0]; ++t) {
        const Index id = checked_id(in[t], spec.vocab, layer);
        grad_params[0].data().segment(id * dim, dim) += grad_out.data().segment(t * dim, dim);
      }
      break;
    }
    case LayerKind::Conv1d: {
      const Index c = s[1], kw = spec.kernel_w, positions = s[0] - kw + 1;
      Eigen::Map<const RowMatrix<Scalar>> weights(params[0].data().data(), spec.units, kw * c);
      Eigen::Map<const ColMatrix<Scalar>> dy(grad_out.data().data(), spec.units, positions);
      Eigen::Map<RowMatrix<Scalar>> dw(grad_params[0].data().data(), spec.units, kw * c);
      const auto cols = conv1d_columns(in.data().data(), c, kw, positions);
      dw.noalias() += dy * cols.transpose();
      grad_params[1].data() += dy.rowwise().sum();
      const ColMatrix<Scalar> dcols = weights.transpose() * dy;
      grad_in.set_zero();
      for (Index p = 0; p < positions; ++p) grad_in.data().segment(p * c, kw * c) += dcols.col(p);
      break;
    }
    case LayerKind::Conv2d: {
      const auto cols = im2col(in, spec.kernel_h, spec.kernel_w);
      Eigen::Map<const RowMatrix<Scalar>> weights(params[0].data().data(), spec.units, cols.rows());
      Eigen::Map<const ColMatrix<Scalar>> dy(grad_out.data().data(), spec.units, cols.cols());
      Eigen::Map<RowMatrix<Scalar>> dw(grad_params[0].data().data(), spec.units, cols.rows());
      dw.noalias() += dy * cols.transpose();
      grad_params[1].data() += dy.rowwise().sum();
      const ColMatrix<Scalar> dcols = weights.transpose() * dy;
      grad_in.set_zero();
      col2im_add(dcols, spec.kernel_h, spec.kernel_w, grad_in);
      break;
    }
    case LayerKind::MaxPool2d: {
      // gradient goes to the first maximal element of each window
      const Index w = s[1], c = s[2], p = spec.window;
      const Index oh = s[0] / p, ow = w / p;
      grad_in.set_zero();
      for (Index oy = 0; oy < oh; ++oy)
        for (Index ox = 0; ox < ow; ++ox)
          for (Index ch = 0; ch < c; ++ch) {
            const Index o = (oy * ow + ox) * c + ch;
            bool routed = false;
            for (Index dy = 0; dy < p && !routed; ++dy)
              for (Index dx = 0; dx < p && !routed; ++dx) {
                const Index i = ((oy * p + dy) * w + ox * p + dx) * c + ch;
                if (in[i] == out[o]) {
                  grad_in[i] += grad_out[o];
                  routed = true;
                }
              }
          }
      break;
    }
    case LayerKind::GlobalMaxPool: {
      const Index t_len = s[0], c = s[1];
      grad_in.set_zero();
      for (Index ch = 0; ch < c; ++ch) {
        for (Index t = 0; t < t_len; ++t) {
          if (in[t * c + ch] == out[ch]) {
            grad_in[t * c + ch] += grad_out[ch];
            break;
          }
        }
      }
      break;
    }
    case LayerKind::Dense: {
      Eigen::Map<const RowMatrix<Scalar>> weights(params[0].data().data(), spec.units, in.size());
      Eigen::Map<RowMatrix<Scalar>> dw(grad_params[0].data().data(), spec.units, in.size());
      dw.noalias() += grad_out.data() * in.data().transpose();
      grad_params[1].data() += grad_out.data();
      grad_in.data().noalias() = weights.transpose() * grad_out.data();
      break;
    }
    case LayerKind::Relu:
      grad_in.data() = (in.data().array() > Scalar(0)).select(grad_out.data(), Scalar(0));
      break;
    case LayerKind::Softmax: {
      const Scalar dot = grad_out.data().dot(out.data());
      grad_in.data() = out.data().cwiseProduct((grad_out.data().array() - dot).matrix());
      break;
    }
  }
}

}  // namespace emorec::nn
