#pragma once

#include "emorec/emotion.hpp"
#include "emorec/recommender.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace emorec {

/// Flat `key = value` file; '#' starts a comment. Keys:
///   port, mood_threshold, weights (three comma-separated reals),
///   blend_lambda, chain_path, catalog_path, checkpoint_path,
///   image_checkpoint_path, static_dir, seed, session_idle_minutes
struct ServiceConfig {
  int port = 8080;
  double mood_threshold = kDefaultMoodThreshold;
  ScoreWeights weights;
  double blend_lambda = kDefaultBlendLambda;
  /// Empty chain_path keeps the ledger in memory.
  std::filesystem::path chain_path;
  std::filesystem::path catalog_path;
  /// Lyric classifier used to predict catalog tags; optional.
  std::filesystem::path checkpoint_path;
  /// Mood image classifier; when empty one is trained on synthetic glyphs
  /// from `seed` at startup.
  std::filesystem::path image_checkpoint_path;
  std::filesystem::path static_dir;
  std::uint64_t seed = 0;
  int session_idle_minutes = 60;

  /// Throws InvalidArgument.
  void validate() const;
};

/// Throws Parse naming the line for syntax errors and unknown keys, and
/// InvalidArgument for values out of range.
ServiceConfig parse_config(std::string_view text);

/// Relative paths in the file resolve against the file's directory.
ServiceConfig load_config(const std::filesystem::path& path);

}  // namespace emorec
