#pragma once

// Independent reference computations used as test oracles. Deliberately
// written as plain loops over the definitions, sharing no code with the
// library paths they check.

#include "emorec/emotion.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <set>
#include <string>
#include <vector>

namespace oracle {

struct Metrics {
  long long counts[5][5] = {};
  double accuracy = 0;
  double precision[5] = {}, recall[5] = {}, f1[5] = {};
  double macro_p = 0, macro_r = 0, macro_f1 = 0;
};

inline Metrics brute_force_metrics(const std::vector<int>& pred, const std::vector<int>& truth) {
  Metrics m;
  const std::size_t n = truth.size();
  for (int t = 0; t < 5; ++t)
    for (int p = 0; p < 5; ++p)
      for (std::size_t i = 0; i < n; ++i)
        if (truth[i] == t && pred[i] == p) ++m.counts[t][p];
  long long correct = 0;
  for (std::size_t i = 0; i < n; ++i) correct += (pred[i] == truth[i]);
  m.accuracy = n ? double(correct) / double(n) : 0.0;
  for (int c = 0; c < 5; ++c) {
    long long tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (pred[i] == c && truth[i] == c) ++tp;
      if (pred[i] == c && truth[i] != c) ++fp;
      if (pred[i] != c && truth[i] == c) ++fn;
    }
    m.precision[c] = (tp + fp) ? double(tp) / double(tp + fp) : 0.0;
    m.recall[c] = (tp + fn) ? double(tp) / double(tp + fn) : 0.0;
    const double s = m.precision[c] + m.recall[c];
    m.f1[c] = s > 0 ? 2 * m.precision[c] * m.recall[c] / s : 0.0;
    m.macro_p += m.precision[c] / 5;
    m.macro_r += m.recall[c] / 5;
    m.macro_f1 += m.f1[c] / 5;
  }
  return m;
}

// likes[user][song] is 1 when that user liked that song.
using LikeMatrix = std::vector<std::vector<int>>;

inline double column_cosine_without(const LikeMatrix& likes, int skip_user, int a, int b) {
  double dot = 0, na = 0, nb = 0;
  for (int v = 0; v < static_cast<int>(likes.size()); ++v) {
    if (v == skip_user) continue;
    dot += likes[v][a] * likes[v][b];
    na += likes[v][a] * likes[v][a];
    nb += likes[v][b] * likes[v][b];
  }
  if (na == 0 || nb == 0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

inline double brute_force_cf(const LikeMatrix& likes, int user, int song) {
  const int songs = static_cast<int>(likes[user].size());
  int liked = 0;
  double sum = 0;
  for (int t = 0; t < songs; ++t) {
    if (!likes[user][t]) continue;
    ++liked;
    sum += column_cosine_without(likes, user, song, t);
  }
  return liked ? sum / liked : 0.0;
}

using Probs = std::array<double, 5>;

inline Probs blend_profile(const Probs& curated, const Probs* predicted, double lambda) {
  if (!predicted) return curated;
  Probs p{};
  double total = 0;
  for (int i = 0; i < 5; ++i) {
    p[i] = lambda * curated[i] + (1 - lambda) * (*predicted)[i];
    total += p[i];
  }
  for (double& x : p) x /= total;
  return p;
}

inline double profile_cosine(const Probs& a, const Probs& b) {
  double dot = 0, na = 0, nb = 0;
  for (int i = 0; i < 5; ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  return dot / std::sqrt(na * nb);
}

struct Scored {
  std::string id;
  double score, affinity, cf, content;
};

/// Scores every song from the definitions, then sorts by (score desc, id asc).
inline std::vector<Scored> brute_force_ranking(const LikeMatrix& likes, int user, const Probs& mood,
                                               const std::vector<std::string>& ids,
                                               const std::vector<Probs>& profiles, const double weights[3],
                                               const std::set<std::string>& exclude) {
  std::vector<Scored> all;
  for (std::size_t s = 0; s < ids.size(); ++s) {
    if (exclude.count(ids[s])) continue;
    Scored r{ids[s], 0, 0, 0, 0};
    for (int i = 0; i < 5; ++i) r.affinity += mood[i] * profiles[s][i];
    r.cf = likes.empty() ? 0.0 : brute_force_cf(likes, user, static_cast<int>(s));
    int liked = 0;
    for (std::size_t t = 0; t < ids.size() && !likes.empty(); ++t) {
      if (!likes[user][t]) continue;
      ++liked;
      r.content += profile_cosine(profiles[s], profiles[t]);
    }
    if (liked) r.content /= liked;
    r.score = weights[0] * r.affinity + weights[1] * r.cf + weights[2] * r.content;
    all.push_back(r);
  }
  std::sort(all.begin(), all.end(), [](const Scored& a, const Scored& b) {
    return a.score != b.score ? a.score > b.score : a.id < b.id;
  });
  return all;
}

}  // namespace oracle
