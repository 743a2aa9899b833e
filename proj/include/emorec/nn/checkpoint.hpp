#pragma once

#include "emorec/nn/model.hpp"

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>

namespace emorec::nn {

/// Checkpoint layout: a text manifest (layer specs, seed, free-form metadata
/// and one line per parameter tensor with its byte offset into the payload),
/// a line reading "data", then every parameter as a little-endian float32 in
/// layer order.
struct Checkpoint {
  Model<float> model;
  std::map<std::string, std::string> meta;
};

void write_checkpoint(std::ostream& out, const Model<float>& model,
                      const std::map<std::string, std::string>& meta = {});
Checkpoint read_checkpoint(std::istream& in);

void save_checkpoint(const std::filesystem::path& path, const Model<float>& model,
                     const std::map<std::string, std::string>& meta = {});
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace emorec::nn
