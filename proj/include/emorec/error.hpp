#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace emorec {

enum class Errc {
  InvalidDistribution,
  InvalidArgument,
  LengthMismatch,
  EmptyInput,
  EmptyCorpus,
  SingleClassCorpus,
  EmptyDataset,
  EmptyTestSet,
  ShapeMismatch,
  IndexOutOfRange,
  BadImageShape,
  MissingTags,
  ZeroVector,
  EmptyCatalog,
  InvalidRecord,
  InvalidAmount,
  OutOfOrder,
  UnknownLabel,
  Io,
  Parse,
};

std::string_view errc_name(Errc code) noexcept;

/// Single exception type for the library; the code identifies the failure.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

/// Raised by the neural engine; carries the index of the offending layer
/// (or -1 when the mismatch is at the model input).
class ShapeError : public Error {
 public:
  ShapeError(int layer, const std::string& what)
      : Error(Errc::ShapeMismatch, "layer " + std::to_string(layer) + ": " + what), layer_(layer) {}

  int layer() const noexcept { return layer_; }

 private:
  int layer_;
};

}  // namespace emorec
