#pragma once

// Builders that turn the oracles' plain data into library inputs.

#include "emorec/recommender.hpp"
#include "emorec/rng.hpp"

#include "oracles.hpp"

#include <cmath>
#include <map>
#include <string>
#include <vector>

namespace fixture {

inline std::string user_name(int u) { return "u" + std::to_string(u); }
inline std::string song_name(int s) { return "s" + std::to_string(s / 10) + std::to_string(s % 10); }

inline emorec::LikeIndex like_index(const oracle::LikeMatrix& likes) {
  emorec::LikeIndex index;
  for (std::size_t u = 0; u < likes.size(); ++u)
    for (std::size_t s = 0; s < likes[u].size(); ++s)
      if (likes[u][s]) {
        index.songs_by_user[user_name(static_cast<int>(u))].insert(song_name(static_cast<int>(s)));
        index.users_by_song[song_name(static_cast<int>(s))].insert(user_name(static_cast<int>(u)));
      }
  return index;
}

inline oracle::LikeMatrix random_likes(emorec::Rng& rng, int users, int songs, double density) {
  oracle::LikeMatrix m(static_cast<std::size_t>(users), std::vector<int>(static_cast<std::size_t>(songs)));
  for (auto& row : m)
    for (int& x : row) x = rng.uniform() < density;
  return m;
}

/// A distribution with a random number of exactly-zero entries, so ties and
/// zero-probability labels show up often.
inline oracle::Probs random_probs(emorec::Rng& rng) {
  oracle::Probs p{};
  double total = 0;
  while (total == 0) {
    for (double& x : p) {
      x = rng.below(3) == 0 ? 0.0 : static_cast<double>(1 + rng.below(4));
      total += x;
    }
  }
  for (double& x : p) x /= total;
  return p;
}

inline emorec::EmotionVector to_vector(const oracle::Probs& p) {
  emorec::EmotionVector v;
  for (int i = 0; i < 5; ++i) v(i) = p[i];
  return v;
}

inline emorec::SongRecord song(int s, const oracle::Probs& curated) {
  emorec::SongRecord r;
  r.song_id = song_name(s);
  r.title = "Song " + std::to_string(s);
  r.artist = "Artist";
  r.curated_tags = emorec::EmotionDistribution::normalized(to_vector(curated));
  return r;
}

/// Empty when `got` is a valid top-k of `expected`: at every position the
/// expected score of the returned song equals the score the oracle placed
/// there, so the two orders differ at most between songs whose scores agree
/// to 1e-12. Otherwise a description of the first mismatch.
inline std::string ranking_mismatch(const std::vector<emorec::Recommendation>& got,
                                    const std::vector<oracle::Scored>& expected, std::size_t k) {
  std::map<std::string, const oracle::Scored*> by_id;
  for (const auto& e : expected) by_id[e.id] = &e;
  if (got.size() != std::min(k, expected.size())) return "wrong result count " + std::to_string(got.size());
  for (std::size_t i = 0; i < got.size(); ++i) {
    const auto it = by_id.find(got[i].song_id);
    if (it == by_id.end()) return "unexpected song " + got[i].song_id;
    const auto& want = *it->second;
    if (std::abs(got[i].score - want.score) > 1e-9 ||
        std::abs(got[i].components.emotion_affinity - want.affinity) > 1e-9 ||
        std::abs(got[i].components.cf_score - want.cf) > 1e-9 ||
        std::abs(got[i].components.content_score - want.content) > 1e-9) {
      return "score mismatch for " + got[i].song_id;
    }
    if (got[i].song_id != expected[i].id && std::abs(want.score - expected[i].score) > 1e-12) {
      return "position " + std::to_string(i) + ": got " + got[i].song_id + ", expected " + expected[i].id;
    }
  }
  return {};
}

}  // namespace fixture
