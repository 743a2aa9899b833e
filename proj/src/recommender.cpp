#include "emorec/recommender.hpp"

#include "emorec/error.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <unordered_map>

namespace emorec {

namespace {

const std::set<std::string> kNone;

// |A ∩ B| for sorted sets, skipping `skip`.
std::size_t overlap_without(const std::set<std::string>& a, const std::set<std::string>& b,
                            const std::string& skip) {
  std::size_t n = 0;
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (*i < *j) {
      ++i;
    } else if (*j < *i) {
      ++j;
    } else {
      n += (*i != skip);
      ++i;
      ++j;
    }
  }
  return n;
}

std::size_t size_without(const std::set<std::string>& s, const std::string& skip) {
  return s.size() - s.count(skip);
}

double clamp01(double x) { return std::clamp(x, 0.0, 1.0); }

}  // namespace

SongRecord song_record_from_entry(const SongEntry& entry) {
  SongRecord r;
  r.song_id = entry.id;
  r.title = entry.title;
  r.artist = entry.artist;
  r.curated_tags = entry.emotion;
  r.catalog_ref = entry.catalog_ref;
  return r;
}

void validate_catalog(std::span<const SongRecord> catalog) {
  std::set<std::string_view> seen;
  for (const auto& s : catalog) {
    if (s.song_id.empty()) throw Error(Errc::InvalidRecord, "song with empty id");
    if (!seen.insert(s.song_id).second) throw Error(Errc::InvalidRecord, "duplicate song id '" + s.song_id + "'");
    if (!s.curated_tags) throw Error(Errc::MissingTags, "song '" + s.song_id + "' has no curated tags");
  }
}

std::string_view to_string(Feedback f) noexcept { return f == Feedback::Like ? "like" : "skip"; }

Feedback parse_feedback(std::string_view s) {
  if (s == "like") return Feedback::Like;
  if (s == "skip") return Feedback::Skip;
  throw Error(Errc::InvalidArgument, "feedback must be 'like' or 'skip', got '" + std::string(s) + "'");
}

const std::set<std::string>& LikeIndex::liked_by(const std::string& user) const {
  const auto it = songs_by_user.find(user);
  return it == songs_by_user.end() ? kNone : it->second;
}

const std::set<std::string>& LikeIndex::likers_of(const std::string& song) const {
  const auto it = users_by_song.find(song);
  return it == users_by_song.end() ? kNone : it->second;
}

void InteractionStore::append(InteractionEvent event) {
  if (event.user_id.empty() || event.song_id.empty()) {
    throw Error(Errc::InvalidArgument, "interaction needs a user id and a song id");
  }
  std::unique_lock lock(mutex_);
  const auto last = last_timestamp_.find(event.user_id);
  if (last != last_timestamp_.end() && event.timestamp < last->second) {
    throw Error(Errc::OutOfOrder, "event for '" + event.user_id + "' is older than the previous one");
  }
  if (event.feedback == Feedback::Like && !likes_->liked_by(event.user_id).contains(event.song_id)) {
    auto next = std::make_shared<LikeIndex>(*likes_);
    next->songs_by_user[event.user_id].insert(event.song_id);
    next->users_by_song[event.song_id].insert(event.user_id);
    likes_ = std::move(next);
  }
  last_timestamp_[event.user_id] = event.timestamp;
  events_.push_back(std::move(event));
}

std::vector<InteractionEvent> InteractionStore::events() const {
  std::shared_lock lock(mutex_);
  return events_;
}

std::size_t InteractionStore::size() const {
  std::shared_lock lock(mutex_);
  return events_.size();
}

std::shared_ptr<const LikeIndex> InteractionStore::likes() const {
  std::shared_lock lock(mutex_);
  return likes_;
}

EmotionDistribution song_emotion_profile(const SongRecord& song, double lambda) {
  if (!song.curated_tags) throw Error(Errc::MissingTags, "song '" + song.song_id + "' has no curated tags");
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw Error(Errc::InvalidArgument, "lambda must lie in [0,1]");
  if (!song.predicted_tags || lambda == 1.0) return *song.curated_tags;
  if (lambda == 0.0) return *song.predicted_tags;
  return EmotionDistribution::normalized(lambda * song.curated_tags->probs() +
                                         (1.0 - lambda) * song.predicted_tags->probs());
}

double emotion_affinity(const EmotionDistribution& mood, const EmotionDistribution& profile) {
  return clamp01(mood.probs().dot(profile.probs()));
}

double cosine_similarity(const EmotionVector& a, const EmotionVector& b) {
  const double na = a.norm(), nb = b.norm();
  if (na == 0.0 || nb == 0.0) throw Error(Errc::ZeroVector, "cosine of a zero vector");
  return clamp01(a.dot(b) / (na * nb));
}

double content_similarity(const SongRecord& a, const SongRecord& b, double lambda) {
  return cosine_similarity(song_emotion_profile(a, lambda).probs(), song_emotion_profile(b, lambda).probs());
}

double cf_score(const std::string& user, const std::string& song_id, const LikeIndex& likes) {
  const auto& liked = likes.liked_by(user);
  if (liked.empty()) return 0.0;
  const auto& column = likes.likers_of(song_id);
  const std::size_t column_size = size_without(column, user);
  if (column_size == 0) return 0.0;
  double total = 0.0;
  for (const auto& other : liked) {
    const auto& other_column = likes.likers_of(other);
    const std::size_t other_size = size_without(other_column, user);
    if (other_size == 0) continue;
    const auto shared = static_cast<double>(overlap_without(column, other_column, user));
    total += shared / std::sqrt(static_cast<double>(column_size) * static_cast<double>(other_size));
  }
  return clamp01(total / static_cast<double>(liked.size()));
}

double cf_score(const std::string& user, const std::string& song_id, const InteractionStore& store) {
  return cf_score(user, song_id, *store.likes());
}

void ScoreWeights::validate() const {
  if (!(emotion >= 0.0 && collaborative >= 0.0 && content >= 0.0)) {
    throw Error(Errc::InvalidArgument, "score weights must be non-negative");
  }
  if (std::abs(emotion + collaborative + content - 1.0) > 1e-9) {
    throw Error(Errc::InvalidArgument, "score weights must sum to 1");
  }
}

std::vector<Recommendation> recommend(const std::string& user, const EmotionDistribution& mood,
                                      std::span<const SongRecord> catalog, const LikeIndex& likes,
                                      const RecommendOptions& options) {
  if (catalog.empty()) throw Error(Errc::EmptyCatalog, "catalog is empty");
  if (options.k < 1) throw Error(Errc::InvalidArgument, "k must be >= 1");
  options.weights.validate();
  validate_catalog(catalog);

  std::vector<EmotionDistribution> profiles;
  profiles.reserve(catalog.size());
  std::unordered_map<std::string_view, std::size_t> index;
  for (std::size_t i = 0; i < catalog.size(); ++i) {
    profiles.push_back(song_emotion_profile(catalog[i], options.lambda));
    index.emplace(catalog[i].song_id, i);
  }
  std::vector<std::size_t> liked_in_catalog;
  for (const auto& id : likes.liked_by(user)) {
    if (const auto it = index.find(id); it != index.end()) liked_in_catalog.push_back(it->second);
  }

  const auto& w = options.weights;
  std::vector<Recommendation> out;
  for (std::size_t i = 0; i < catalog.size(); ++i) {
    const auto& song = catalog[i];
    if (options.exclude.contains(song.song_id)) continue;
    Recommendation r;
    r.song_id = song.song_id;
    r.components.emotion_affinity = emotion_affinity(mood, profiles[i]);
    r.components.cf_score = cf_score(user, song.song_id, likes);
    if (!liked_in_catalog.empty()) {
      double sum = 0.0;
      for (std::size_t j : liked_in_catalog) sum += cosine_similarity(profiles[i].probs(), profiles[j].probs());
      r.components.content_score = clamp01(sum / static_cast<double>(liked_in_catalog.size()));
    }
    r.score = clamp01(w.emotion * r.components.emotion_affinity + w.collaborative * r.components.cf_score +
                      w.content * r.components.content_score);
    out.push_back(std::move(r));
  }
  const auto by_rank = [](const Recommendation& a, const Recommendation& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.song_id < b.song_id;
  };
  if (out.size() > options.k) {
    std::partial_sort(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(options.k), out.end(), by_rank);
    out.resize(options.k);
  } else {
    std::sort(out.begin(), out.end(), by_rank);
  }
  return out;
}

std::vector<Recommendation> recommend(const std::string& user, const EmotionDistribution& mood,
                                      std::span<const SongRecord> catalog, const InteractionStore& store,
                                      const RecommendOptions& options) {
  return recommend(user, mood, catalog, *store.likes(), options);
}

}  // namespace emorec
