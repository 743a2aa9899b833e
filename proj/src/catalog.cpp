#include "emorec/catalog.hpp"

#include "emorec/ledger.hpp"

#include <algorithm>
#include <cctype>

namespace emorec {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

bool contains_folded(const std::string& haystack, const std::string& needle) {
  return needle.empty() || lower(haystack).find(lower(needle)) != std::string::npos;
}

}  // namespace

StubCatalogProvider::StubCatalogProvider(std::span<const SongRecord> catalog) {
  for (const auto& s : catalog) {
    ExternalTrack t;
    t.ref = s.catalog_ref ? *s.catalog_ref : "stub:track:" + sha256_hex(s.song_id).substr(0, 16);
    t.title = s.title;
    t.artist = s.artist;
    t.url = "https://open.example.invalid/track/" + t.ref;
    tracks_.emplace(s.song_id, std::move(t));
  }
}

std::optional<ExternalTrack> StubCatalogProvider::lookup(const std::string& song_id) const {
  const auto it = tracks_.find(song_id);
  if (it == tracks_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::string> StubCatalogProvider::search(const std::string& title, const std::string& artist) const {
  std::vector<std::string> out;
  for (const auto& [id, t] : tracks_) {
    if (contains_folded(t.title, title) && contains_folded(t.artist, artist)) out.push_back(t.ref);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<SongRecord> build_catalog(std::span<const SongEntry> songs, const LyricClassifier* classifier) {
  std::vector<SongRecord> out;
  out.reserve(songs.size());
  for (const auto& s : songs) {
    auto r = song_record_from_entry(s);
    if (classifier && !s.lyrics.empty()) r.predicted_tags = classifier->classify(s.lyrics);
    out.push_back(std::move(r));
  }
  validate_catalog(out);
  return out;
}

std::vector<SongRecord> load_catalog(const std::filesystem::path& path, const LyricClassifier* classifier) {
  const auto songs = read_songs_jsonl(path);
  return build_catalog(songs, classifier);
}

}  // namespace emorec
