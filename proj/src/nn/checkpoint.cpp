#include "emorec/nn/checkpoint.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace emorec::nn {

namespace {

constexpr std::string_view kMagic = "emorec-checkpoint 1";

std::string join_shape(const Shape& shape) {
  std::string s;
  for (std::size_t i = 0; i < shape.size(); ++i) s += (i ? "," : "") + std::to_string(shape[i]);
  return s;
}

Shape split_shape(const std::string& text) {
  Shape shape;
  std::istringstream is(text);
  std::string part;
  while (std::getline(is, part, ',')) shape.push_back(std::stoll(part));
  return shape;
}

[[noreturn]] void bad(const std::string& what) { throw Error(Errc::Parse, "checkpoint: " + what); }

std::string next_line(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) bad("unexpected end of manifest");
  return line;
}

std::pair<std::string, std::string> split_key(const std::string& line) {
  const auto sp = line.find(' ');
  if (sp == std::string::npos) return {line, {}};
  return {line.substr(0, sp), line.substr(sp + 1)};
}

std::string expect_key(std::istream& in, std::string_view key) {
  auto [k, v] = split_key(next_line(in));
  if (k != key) bad("expected '" + std::string(key) + "', found '" + k + "'");
  return v;
}

}  // namespace

void write_checkpoint(std::ostream& out, const Model<float>& model,
                      const std::map<std::string, std::string>& meta) {
  out << kMagic << '\n';
  out << "seed " << model.seed() << '\n';
  out << "input " << join_shape(model.input_shape()) << '\n';
  out << "layers " << model.layers().size() << '\n';
  for (const auto& spec : model.layers()) out << describe(spec) << '\n';
  for (const auto& [k, v] : meta) {
    if (k.find_first_of(" \n") != std::string::npos || v.find('\n') != std::string::npos) {
      throw Error(Errc::InvalidArgument, "checkpoint metadata must be single-line, key without spaces");
    }
    out << "meta " << k << ' ' << v << '\n';
  }

  const auto& params = model.parameters();
  std::size_t tensors = 0;
  for (const auto& layer : params) tensors += layer.size();
  out << "tensors " << tensors << '\n';
  std::size_t offset = 0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    for (std::size_t j = 0; j < params[i].size(); ++j) {
      const auto& t = params[i][j];
      out << "tensor " << i << ' ' << j << ' ' << join_shape(t.shape()) << ' ' << offset << ' ' << t.size()
          << '\n';
      offset += static_cast<std::size_t>(t.size()) * 4;
    }
  }
  out << "data\n";

  for (const auto& layer : params) {
    for (const auto& t : layer) {
      for (Index k = 0; k < t.size(); ++k) {
        const auto bits = std::bit_cast<std::uint32_t>(t[k]);
        const std::array<char, 4> bytes = {static_cast<char>(bits & 0xff), static_cast<char>((bits >> 8) & 0xff),
                                           static_cast<char>((bits >> 16) & 0xff),
                                           static_cast<char>((bits >> 24) & 0xff)};
        out.write(bytes.data(), 4);
      }
    }
  }
  if (!out) throw Error(Errc::Io, "checkpoint write failed");
}

Checkpoint read_checkpoint(std::istream& in) {
  if (next_line(in) != kMagic) bad("missing header");
  const std::uint64_t seed = std::stoull(expect_key(in, "seed"));
  const Shape input = split_shape(expect_key(in, "input"));
  const std::size_t n_layers = std::stoull(expect_key(in, "layers"));
  std::vector<LayerSpec> layers;
  for (std::size_t i = 0; i < n_layers; ++i) layers.push_back(parse_layer_spec(next_line(in)));

  std::map<std::string, std::string> meta;
  std::string line = next_line(in);
  while (line.rfind("meta ", 0) == 0) {
    auto [key, value] = split_key(line.substr(5));
    meta[key] = value;
    line = next_line(in);
  }
  auto [tkey, tcount] = split_key(line);
  if (tkey != "tensors") bad("expected tensor table");

  struct Entry {
    std::size_t layer, index, offset;
    Shape shape;
    Index count;
  };
  std::vector<Entry> entries;
  for (std::size_t k = 0, n = std::stoull(tcount); k < n; ++k) {
    std::istringstream is(expect_key(in, "tensor"));
    Entry e;
    std::string shape;
    if (!(is >> e.layer >> e.index >> shape >> e.offset >> e.count)) bad("malformed tensor line");
    e.shape = split_shape(shape);
    entries.push_back(std::move(e));
  }
  if (next_line(in) != "data") bad("missing data marker");

  std::vector<char> payload((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  ParameterSet<float> params(layers.size());
  for (const auto& e : entries) {
    if (e.layer >= layers.size() || e.index != params[e.layer].size()) bad("tensor table out of order");
    if (numel(e.shape) != e.count) bad("tensor count does not match its shape");
    const std::size_t bytes = static_cast<std::size_t>(e.count) * 4;
    if (e.offset + bytes > payload.size()) bad("payload truncated");
    Tensor<float> t(e.shape);
    for (Index k = 0; k < e.count; ++k) {
      const auto* p = reinterpret_cast<const unsigned char*>(payload.data() + e.offset + k * 4);
      const std::uint32_t bits = std::uint32_t{p[0]} | (std::uint32_t{p[1]} << 8) |
                                 (std::uint32_t{p[2]} << 16) | (std::uint32_t{p[3]} << 24);
      t[k] = std::bit_cast<float>(bits);
    }
    params[e.layer].push_back(std::move(t));
  }
  return {Model<float>::from_parameters(input, std::move(layers), seed, std::move(params)), std::move(meta)};
}

void save_checkpoint(const std::filesystem::path& path, const Model<float>& model,
                     const std::map<std::string, std::string>& meta) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::Io, "cannot write checkpoint " + path.string());
  write_checkpoint(out, model, meta);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::Io, "cannot open checkpoint " + path.string());
  return read_checkpoint(in);
}

}  // namespace emorec::nn
