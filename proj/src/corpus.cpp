#include "emorec/corpus.hpp"

#include "emorec/error.hpp"

#include <fstream>

namespace emorec {

EmotionDistribution parse_emotion_tags(const nlohmann::json& value) {
  if (value.is_string()) return EmotionDistribution::one_hot(parse_emotion(value.get<std::string>()));
  EmotionVector weights = EmotionVector::Zero();
  if (value.is_array()) {
    if (value.empty()) throw Error(Errc::MissingTags, "empty emotion tag list");
    for (const auto& v : value) weights(ordinal(parse_emotion(v.get<std::string>()))) += 1.0;
  } else if (value.is_object()) {
    for (const auto& [k, v] : value.items()) weights(ordinal(parse_emotion(k))) = v.get<double>();
  } else {
    throw Error(Errc::MissingTags, "emotion must be a label, a list of labels or a label->weight object");
  }
  return EmotionDistribution::normalized(weights);
}

nlohmann::json emotion_tags_to_json(const EmotionDistribution& dist) {
  nlohmann::json out = nlohmann::json::object();
  for (EmotionLabel e : kAllEmotions) out[std::string(to_string(e))] = dist[e];
  return out;
}

SongEntry song_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(Errc::Parse, "song entry must be a JSON object");
  SongEntry s;
  s.id = j.at("id").get<std::string>();
  if (s.id.empty()) throw Error(Errc::Parse, "song id must be non-empty");
  s.title = j.value("title", "");
  s.artist = j.value("artist", "");
  s.lyrics = j.value("lyrics", "");
  if (!j.contains("emotion")) throw Error(Errc::MissingTags, "song '" + s.id + "' has no emotion tags");
  s.emotion = parse_emotion_tags(j.at("emotion"));
  if (j.contains("catalog_ref") && !j.at("catalog_ref").is_null()) {
    s.catalog_ref = j.at("catalog_ref").get<std::string>();
  }
  return s;
}

nlohmann::json song_to_json(const SongEntry& song) {
  nlohmann::json j = {{"id", song.id}, {"title", song.title}, {"artist", song.artist}, {"lyrics", song.lyrics}};
  const auto& p = song.emotion.probs();
  if (p.maxCoeff() == 1.0) {
    j["emotion"] = std::string(to_string(song.emotion.argmax()));
  } else {
    j["emotion"] = emotion_tags_to_json(song.emotion);
  }
  if (song.catalog_ref) j["catalog_ref"] = *song.catalog_ref;
  return j;
}

std::vector<SongEntry> read_songs_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::Io, "cannot open " + path.string());
  std::vector<SongEntry> songs;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      songs.push_back(song_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::Parse, path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    } catch (const Error& e) {
      throw Error(Errc::Parse, path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return songs;
}

void write_songs_jsonl(const std::filesystem::path& path, const std::vector<SongEntry>& songs) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::Io, "cannot write " + path.string());
  for (const auto& s : songs) out << song_to_json(s).dump() << '\n';
}

}  // namespace emorec
