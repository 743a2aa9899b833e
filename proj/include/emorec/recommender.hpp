#pragma once

#include "emorec/corpus.hpp"
#include "emorec/emotion.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <shared_mutex>
#include <span>
#include <string>
#include <vector>

namespace emorec {

inline constexpr double kDefaultBlendLambda = 0.5;

struct SongRecord {
  std::string song_id;
  std::string title;
  std::string artist;
  std::optional<EmotionDistribution> curated_tags;
  std::optional<EmotionDistribution> predicted_tags;
  std::optional<std::string> catalog_ref;
};

/// Curated tags come from the entry's annotated emotion.
SongRecord song_record_from_entry(const SongEntry& entry);

/// Throws InvalidRecord on an empty or repeated song id, MissingTags when a
/// song has no curated tags.
void validate_catalog(std::span<const SongRecord> catalog);

enum class Feedback { Skip = 0, Like = 1 };

std::string_view to_string(Feedback f) noexcept;
/// "like" / "skip"; throws InvalidArgument otherwise.
Feedback parse_feedback(std::string_view s);

struct InteractionEvent {
  std::string user_id;
  std::string song_id;
  Feedback feedback = Feedback::Skip;
  std::int64_t timestamp = 0;  // UTC seconds
};

/// Who liked what. A pair counts as liked after at least one like event;
/// later skips do not undo it.
struct LikeIndex {
  std::map<std::string, std::set<std::string>> songs_by_user;
  std::map<std::string, std::set<std::string>> users_by_song;

  const std::set<std::string>& liked_by(const std::string& user) const;
  const std::set<std::string>& likers_of(const std::string& song) const;
};

/// Append-only feedback log. Appends are serialized; readers get an
/// immutable LikeIndex snapshot that later appends never touch.
class InteractionStore {
 public:
  InteractionStore() = default;
  InteractionStore(const InteractionStore&) = delete;
  InteractionStore& operator=(const InteractionStore&) = delete;

  /// Throws InvalidArgument on empty ids, OutOfOrder if the timestamp is
  /// older than this user's previous event.
  void append(InteractionEvent event);

  std::vector<InteractionEvent> events() const;
  std::size_t size() const;
  std::shared_ptr<const LikeIndex> likes() const;

 private:
  mutable std::shared_mutex mutex_;
  std::vector<InteractionEvent> events_;
  std::map<std::string, std::int64_t> last_timestamp_;
  std::shared_ptr<const LikeIndex> likes_ = std::make_shared<const LikeIndex>();
};

/// lambda * curated + (1 - lambda) * predicted, renormalized; curated alone
/// when there is no prediction. Throws MissingTags, InvalidArgument.
EmotionDistribution song_emotion_profile(const SongRecord& song, double lambda = kDefaultBlendLambda);

/// Dot product of the two distributions, in [0,1].
double emotion_affinity(const EmotionDistribution& mood, const EmotionDistribution& profile);

/// Cosine of two non-negative vectors. Throws ZeroVector.
double cosine_similarity(const EmotionVector& a, const EmotionVector& b);
double content_similarity(const SongRecord& a, const SongRecord& b, double lambda = kDefaultBlendLambda);

/// Item-item score: mean over the songs `user` liked of the cosine between
/// like-columns, where the columns leave out `user`'s own row. 0 for a cold
/// user or a song nobody else liked.
double cf_score(const std::string& user, const std::string& song_id, const LikeIndex& likes);
double cf_score(const std::string& user, const std::string& song_id, const InteractionStore& store);

struct ScoreWeights {
  double emotion = 0.6;
  double collaborative = 0.3;
  double content = 0.1;

  /// Each weight >= 0 and the sum within 1e-9 of 1; throws InvalidArgument.
  void validate() const;
};

struct ScoreComponents {
  double emotion_affinity = 0.0;
  double cf_score = 0.0;
  double content_score = 0.0;
};

struct Recommendation {
  std::string song_id;
  double score = 0.0;
  ScoreComponents components;
};

struct RecommendOptions {
  std::size_t k = 10;
  ScoreWeights weights;
  double lambda = kDefaultBlendLambda;
  /// Songs liked during the current session; never returned.
  std::set<std::string> exclude;
};

/// Top-k songs by blended score, ties by ascending song id. The content
/// score is the mean profile similarity to the user's liked songs that are
/// in the catalog (0 when there are none). Throws EmptyCatalog,
/// InvalidArgument.
std::vector<Recommendation> recommend(const std::string& user, const EmotionDistribution& mood,
                                      std::span<const SongRecord> catalog, const LikeIndex& likes,
                                      const RecommendOptions& options = {});
std::vector<Recommendation> recommend(const std::string& user, const EmotionDistribution& mood,
                                      std::span<const SongRecord> catalog, const InteractionStore& store,
                                      const RecommendOptions& options = {});

}  // namespace emorec
