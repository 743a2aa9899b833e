#pragma once

#include "emorec/emotion.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace emorec {

/// One line of the songs JSON-lines format:
///   {"id", "title", "artist", "lyrics", "emotion"[, "catalog_ref"]}
/// "emotion" is a label name, an array of label names (equal weight), or an
/// object mapping label names to non-negative weights.
struct SongEntry {
  std::string id;
  std::string title;
  std::string artist;
  std::string lyrics;
  EmotionDistribution emotion = EmotionDistribution::uniform();
  std::optional<std::string> catalog_ref;

  /// Dominant annotated label (ties to the lowest ordinal).
  EmotionLabel label() const { return emotion.argmax(); }
};

EmotionDistribution parse_emotion_tags(const nlohmann::json& value);
nlohmann::json emotion_tags_to_json(const EmotionDistribution& dist);

SongEntry song_from_json(const nlohmann::json& j);
nlohmann::json song_to_json(const SongEntry& song);

/// Throws Error(Parse) naming the offending line; blank lines are skipped.
std::vector<SongEntry> read_songs_jsonl(const std::filesystem::path& path);
void write_songs_jsonl(const std::filesystem::path& path, const std::vector<SongEntry>& songs);

}  // namespace emorec
