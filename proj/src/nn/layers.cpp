#include "emorec/nn/layers.hpp"

#include <array>
#include <sstream>

namespace emorec::nn {

namespace {

constexpr std::array<std::pair<LayerKind, std::string_view>, 8> kKindNames = {{
    {LayerKind::Embedding, "embedding"},
    {LayerKind::Conv1d, "conv1d"},
    {LayerKind::Conv2d, "conv2d"},
    {LayerKind::MaxPool2d, "maxpool2d"},
    {LayerKind::GlobalMaxPool, "global_maxpool"},
    {LayerKind::Dense, "dense"},
    {LayerKind::Relu, "relu"},
    {LayerKind::Softmax, "softmax"},
}};

void require_positive(Index value, std::string_view what, int layer) {
  if (value <= 0) throw ShapeError(layer, std::string(what) + " must be positive");
}

void require_rank(const Shape& in, std::size_t rank, const LayerSpec& spec, int layer) {
  if (in.size() != rank) {
    throw ShapeError(layer, std::string(to_string(spec.kind)) + " expects a rank-" + std::to_string(rank) +
                                " input, got " + shape_string(in));
  }
}

}  // namespace

std::string_view to_string(LayerKind kind) noexcept {
  for (const auto& [k, name] : kKindNames) {
    if (k == kind) return name;
  }
  return "unknown";
}

std::optional<LayerKind> parse_layer_kind(std::string_view name) noexcept {
  for (const auto& [k, n] : kKindNames) {
    if (n == name) return k;
  }
  return std::nullopt;
}

std::string describe(const LayerSpec& spec) {
  std::ostringstream os;
  os << to_string(spec.kind);
  switch (spec.kind) {
    case LayerKind::Embedding: os << " vocab=" << spec.vocab << " units=" << spec.units; break;
    case LayerKind::Conv1d: os << " units=" << spec.units << " kernel_w=" << spec.kernel_w; break;
    case LayerKind::Conv2d:
      os << " units=" << spec.units << " kernel_h=" << spec.kernel_h << " kernel_w=" << spec.kernel_w;
      break;
    case LayerKind::MaxPool2d: os << " window=" << spec.window; break;
    case LayerKind::Dense: os << " units=" << spec.units; break;
    default: break;
  }
  return os.str();
}

LayerSpec parse_layer_spec(std::string_view text) {
  std::istringstream is{std::string(text)};
  std::string word;
  is >> word;
  const auto kind = parse_layer_kind(word);
  if (!kind) throw Error(Errc::Parse, "unknown layer kind '" + word + "'");
  LayerSpec spec;
  spec.kind = *kind;
  while (is >> word) {
    const auto eq = word.find('=');
    if (eq == std::string::npos) throw Error(Errc::Parse, "bad layer attribute '" + word + "'");
    const std::string key = word.substr(0, eq);
    const Index value = std::stoll(word.substr(eq + 1));
    if (key == "units") spec.units = value;
    else if (key == "vocab") spec.vocab = value;
    else if (key == "kernel_h") spec.kernel_h = value;
    else if (key == "kernel_w") spec.kernel_w = value;
    else if (key == "window") spec.window = value;
    else throw Error(Errc::Parse, "unknown layer attribute '" + key + "'");
  }
  return spec;
}

Shape infer_output_shape(const LayerSpec& spec, const Shape& in, int layer) {
  switch (spec.kind) {
    case LayerKind::Embedding:
      require_rank(in, 1, spec, layer);
      require_positive(spec.vocab, "embedding vocab", layer);
      require_positive(spec.units, "embedding units", layer);
      return {in[0], spec.units};
    case LayerKind::Conv1d:
      require_rank(in, 2, spec, layer);
      require_positive(spec.units, "conv1d units", layer);
      require_positive(spec.kernel_w, "conv1d kernel_w", layer);
      if (in[0] < spec.kernel_w) {
        throw ShapeError(layer, "conv1d kernel wider than input " + shape_string(in));
      }
      return {in[0] - spec.kernel_w + 1, spec.units};
    case LayerKind::Conv2d:
      require_rank(in, 3, spec, layer);
      require_positive(spec.units, "conv2d units", layer);
      require_positive(spec.kernel_h, "conv2d kernel_h", layer);
      require_positive(spec.kernel_w, "conv2d kernel_w", layer);
      if (in[0] < spec.kernel_h || in[1] < spec.kernel_w) {
        throw ShapeError(layer, "conv2d kernel larger than input " + shape_string(in));
      }
      return {in[0] - spec.kernel_h + 1, in[1] - spec.kernel_w + 1, spec.units};
    case LayerKind::MaxPool2d:
      require_rank(in, 3, spec, layer);
      require_positive(spec.window, "maxpool2d window", layer);
      if (in[0] < spec.window || in[1] < spec.window) {
        throw ShapeError(layer, "pool window larger than input " + shape_string(in));
      }
      return {in[0] / spec.window, in[1] / spec.window, in[2]};
    case LayerKind::GlobalMaxPool:
      require_rank(in, 2, spec, layer);
      return {in[1]};
    case LayerKind::Dense:
      require_positive(spec.units, "dense units", layer);
      return {spec.units};
    case LayerKind::Relu:
    case LayerKind::Softmax:
      return in;
  }
  throw ShapeError(layer, "unhandled layer kind");
}

std::vector<Shape> parameter_shapes(const LayerSpec& spec, const Shape& in) {
  switch (spec.kind) {
    case LayerKind::Embedding: return {{spec.vocab, spec.units}};
    case LayerKind::Conv1d: return {{spec.units, spec.kernel_w, in[1]}, {spec.units}};
    case LayerKind::Conv2d: return {{spec.units, spec.kernel_h, spec.kernel_w, in[2]}, {spec.units}};
    case LayerKind::Dense: return {{spec.units, numel(in)}, {spec.units}};
    default: return {};
  }
}

std::pair<double, double> fan_in_out(const LayerSpec& spec, const Shape& in) {
  switch (spec.kind) {
    case LayerKind::Embedding:
      return {static_cast<double>(spec.vocab), static_cast<double>(spec.units)};
    case LayerKind::Conv1d:
      return {static_cast<double>(spec.kernel_w * in[1]), static_cast<double>(spec.kernel_w * spec.units)};
    case LayerKind::Conv2d: {
      const double area = static_cast<double>(spec.kernel_h * spec.kernel_w);
      return {area * static_cast<double>(in[2]), area * static_cast<double>(spec.units)};
    }
    case LayerKind::Dense:
      return {static_cast<double>(numel(in)), static_cast<double>(spec.units)};
    default: return {0.0, 0.0};
  }
}

}  // namespace emorec::nn
