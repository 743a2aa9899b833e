#pragma once

#include "emorec/classifier.hpp"
#include "emorec/recommender.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace emorec {

struct ExternalTrack {
  std::string ref;
  std::string title;
  std::string artist;
  std::string url;
};

/// External music catalog (the real system would call a streaming service).
class CatalogProvider {
 public:
  virtual ~CatalogProvider() = default;
  virtual std::optional<ExternalTrack> lookup(const std::string& song_id) const = 0;
  /// Refs of tracks whose title and artist contain the given text,
  /// case-insensitively; an empty argument matches everything.
  virtual std::vector<std::string> search(const std::string& title, const std::string& artist) const = 0;
};

/// Offline provider built from the catalog itself. Songs without a
/// catalog_ref get a stable ref derived from their id.
class StubCatalogProvider final : public CatalogProvider {
 public:
  explicit StubCatalogProvider(std::span<const SongRecord> catalog);
  std::optional<ExternalTrack> lookup(const std::string& song_id) const override;
  std::vector<std::string> search(const std::string& title, const std::string& artist) const override;

 private:
  std::map<std::string, ExternalTrack> tracks_;
};

/// Catalog records from songs; predicted tags come from `classifier` when
/// one is given and the song has lyrics.
std::vector<SongRecord> build_catalog(std::span<const SongEntry> songs, const LyricClassifier* classifier = nullptr);

/// read_songs_jsonl + build_catalog + validate_catalog.
std::vector<SongRecord> load_catalog(const std::filesystem::path& path, const LyricClassifier* classifier = nullptr);

}  // namespace emorec
