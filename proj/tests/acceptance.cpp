// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include "emorec/classifier.hpp"
#include "emorec/config.hpp"
#include "emorec/ledger.hpp"
#include "emorec/nn/architectures.hpp"
#include "emorec/nn/grad_check.hpp"
#include "emorec/recommender.hpp"
#include "emorec/synthetic.hpp"

#include "fixtures.hpp"
#include "oracles.hpp"
#include "service_fixture.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

using namespace emorec;
using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

/// Records the first failure and keeps going so the detail reports it.
struct Checker {
  Outcome out;
  void require(bool ok, const std::string& what) {
    if (!ok && out.pass) {
      out.pass = false;
      out.detail = what;
    }
  }
  bool failed() const { return !out.pass; }
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

fs::path scratch_dir(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("emorec_acceptance_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

template <typename Scalar = double>
nn::Tensor<Scalar> random_tensor(const nn::Shape& shape, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
  Rng rng(seed);
  nn::Tensor<Scalar> t(shape);
  for (nn::Index i = 0; i < t.size(); ++i) t[i] = static_cast<Scalar>(rng.uniform(lo, hi));
  return t;
}

nn::Tensor<double> random_ids(nn::Index length, nn::Index vocab, std::uint64_t seed) {
  Rng rng(seed);
  nn::Tensor<double> t({length});
  for (nn::Index i = 0; i < length; ++i) t[i] = static_cast<double>(rng.below(static_cast<std::uint64_t>(vocab)));
  return t;
}

// ---------------------------------------------------------------------------

Outcome gradients() {
  // Caps only the image model's 1600x64 dense weights; every other tensor is
  // checked in full.
  constexpr nn::Index kImageEntries = 20000;
  using nn::LayerSpec;
  using nn::Model;
  const auto start = std::chrono::steady_clock::now();
  struct Case {
    std::string name;
    Model<double> model;
    nn::Tensor<double> input;
    nn::Index label;
    nn::Index max_entries;
  };
  std::vector<Case> cases;
  cases.push_back({"dense", Model<double>::build({6}, {LayerSpec::dense(5), LayerSpec::softmax()}, 1),
                   random_tensor({6}, 2), 3, 0});
  cases.push_back({"relu",
                   Model<double>::build({6}, {LayerSpec::dense(8), LayerSpec::relu(), LayerSpec::dense(5), LayerSpec::softmax()}, 2),
                   random_tensor({6}, 3), 0, 0});
  cases.push_back({"softmax",
                   Model<double>::build({4}, {LayerSpec::dense(5), LayerSpec::softmax(), LayerSpec::dense(5), LayerSpec::softmax()}, 3),
                   random_tensor({4}, 4), 4, 0});
  cases.push_back({"embedding",
                   Model<double>::build({7}, {LayerSpec::embedding(10, 4), LayerSpec::dense(5), LayerSpec::softmax()}, 4),
                   random_ids(7, 10, 5), 1, 0});
  cases.push_back({"conv1d",
                   Model<double>::build({9, 3}, {LayerSpec::conv1d(4, 3), LayerSpec::dense(5), LayerSpec::softmax()}, 5),
                   random_tensor({9, 3}, 6), 2, 0});
  cases.push_back({"conv2d",
                   Model<double>::build({6, 5, 2}, {LayerSpec::conv2d(3, 3, 2), LayerSpec::dense(5), LayerSpec::softmax()}, 6),
                   random_tensor({6, 5, 2}, 7), 0, 0});
  cases.push_back({"maxpool2d",
                   Model<double>::build({6, 6, 2},
                                        {LayerSpec::conv2d(2, 1, 1), LayerSpec::maxpool2d(2), LayerSpec::dense(5), LayerSpec::softmax()}, 7),
                   random_tensor({6, 6, 2}, 8), 3, 0});
  cases.push_back({"global_maxpool",
                   Model<double>::build({8, 3},
                                        {LayerSpec::conv1d(4, 2), LayerSpec::global_maxpool(), LayerSpec::dense(5), LayerSpec::softmax()}, 8),
                   random_tensor({8, 3}, 9), 4, 0});
  cases.push_back({"lyric model", Model<double>::build(nn::lyric_input_shape(64), nn::lyric_model_layers(40), 11),
                   random_ids(64, 40, 12), 2, 0});
  cases.push_back({"mood image model", Model<double>::build(nn::mood_image_input_shape(), nn::mood_image_model_layers(), 13),
                   random_tensor(nn::mood_image_input_shape(), 14, 0.0, 1.0), 1, kImageEntries});

  Checker c;
  double worst = 0.0;
  std::string worst_name;
  nn::Index entries = 0, retried = 0;
  for (const auto& k : cases) {
    nn::GradCheckOptions opt;
    opt.epsilon = 1e-3;
    opt.max_entries_per_tensor = k.max_entries;
    const auto r = nn::grad_check_report(k.model, k.input, k.label, opt);
    entries += r.entries_checked;
    retried += r.kink_retried;
    if (r.max_relative_error >= worst) {
      worst = r.max_relative_error;
      worst_name = k.name;
    }
    c.require(r.max_relative_error <= 1e-3, fmt("%s: relative error %.3g", k.name.c_str(), r.max_relative_error));
    c.require(r.kink_excluded == 0, fmt("%s: %lld entries left unscored at a kink", k.name.c_str(),
                                        static_cast<long long>(r.kink_excluded)));
  }
  const double elapsed = seconds_since(start);
  c.require(elapsed < 60.0, fmt("took %.1fs", elapsed));
  if (!c.failed()) {
    c.out.detail = fmt("8 layer kinds + 2 architectures, %lld entries (%lld re-measured at a kink, 0 unscored), worst %.2e (%s), "
                       "image model capped at %lld entries per tensor, %.1fs",
                       static_cast<long long>(entries), static_cast<long long>(retried), worst, worst_name.c_str(),
                       static_cast<long long>(kImageEntries), elapsed);
  }
  return c.out;
}

Outcome learnability() {
  const auto start = std::chrono::steady_clock::now();
  constexpr std::uint64_t seed = 2024;
  const auto songs = synthetic::lyric_corpus(40, seed);
  auto [train_songs, test_songs] = split_train_test(songs, seed);
  TrainConfig config;
  config.seed = seed;
  const auto clf = train_lyric_classifier(train_songs, config);
  const auto train_m = evaluate(clf, label_songs(train_songs, clf.pipeline()));
  const auto test_m = evaluate(clf, label_songs(test_songs, clf.pipeline()));
  const double elapsed = seconds_since(start);
  Checker c;
  c.require(train_m.accuracy >= 0.95, fmt("training accuracy %.4f", train_m.accuracy));
  c.require(test_m.accuracy >= 0.90, fmt("held-out accuracy %.4f", test_m.accuracy));
  c.require(elapsed < 300.0, fmt("took %.1fs", elapsed));
  if (!c.failed()) {
    c.out.detail = fmt("%zu train / %zu held out, training accuracy %.4f, held-out accuracy %.4f, macro F1 %.4f, %.1fs",
                       train_songs.size(), test_songs.size(), train_m.accuracy, test_m.accuracy, test_m.macro_f1, elapsed);
  }
  return c.out;
}

Outcome metric_oracle() {
  Rng rng(3);
  Checker c;
  double worst = 0.0;
  for (int trial = 0; trial < 1000 && !c.failed(); ++trial) {
    const std::size_t n = 1 + rng.below(100);
    std::vector<int> p(n), t(n);
    std::vector<EmotionLabel> pl, tl;
    // Skew some lists towards fewer classes so empty rows and columns occur.
    const std::uint64_t classes = 1 + rng.below(5);
    for (std::size_t i = 0; i < n; ++i) {
      p[i] = static_cast<int>(rng.below(trial % 2 ? 5 : classes));
      t[i] = static_cast<int>(rng.below(classes));
      pl.push_back(label_from_ordinal(p[i]));
      tl.push_back(label_from_ordinal(t[i]));
    }
    const auto m = compute_metrics(pl, tl);
    const auto o = oracle::brute_force_metrics(p, t);
    for (int a = 0; a < 5; ++a)
      for (int b = 0; b < 5; ++b)
        c.require(m.confusion(a, b) == o.counts[a][b], fmt("trial %d: count (%d,%d) differs", trial, a, b));
    const auto near = [&](double got, double want, const char* what) {
      worst = std::max(worst, std::abs(got - want));
      c.require(std::abs(got - want) <= 1e-9, fmt("trial %d: %s %.17g vs %.17g", trial, what, got, want));
    };
    near(m.accuracy, o.accuracy, "accuracy");
    for (int k = 0; k < 5; ++k) {
      near(m.per_class_precision(k), o.precision[k], "precision");
      near(m.per_class_recall(k), o.recall[k], "recall");
      near(m.per_class_f1(k), o.f1[k], "f1");
    }
    near(m.macro_precision, o.macro_p, "macro precision");
    near(m.macro_recall, o.macro_r, "macro recall");
    near(m.macro_f1, o.macro_f1, "macro f1");
  }
  if (!c.failed()) c.out.detail = fmt("1000 lists of length 1-100, counts exact, worst ratio error %.1e", worst);
  return c.out;
}

Outcome combined_mood() {
  Rng rng(4);
  Checker c;
  {
    const auto report = make_mood_report(EmotionDistribution::normalized((EmotionVector() << 0.45, 0.40, 0.05, 0.05, 0.05).finished()));
    c.require(report.reported == std::vector<EmotionLabel>{EmotionLabel::Happy, EmotionLabel::Sad},
              "happy 0.45 / sad 0.40 did not report exactly {happy, sad}");
  }
  int two = 0, one = 0;
  for (const double tau : {0.2, kDefaultMoodThreshold, 1.0 / 3.0}) {
    for (int trial = 0; trial < 2000 && !c.failed(); ++trial) {
      const int peaks = trial % 2 == 0 ? 2 : 1;
      std::vector<int> order{0, 1, 2, 3, 4};
      rng.shuffle(order);
      // Labels past the peaks stay below tau and leave at least tau per peak.
      EmotionVector v = EmotionVector::Zero();
      double rest = 0.0;
      for (int i = peaks; i < 5; ++i) rest += v(order[i]) = rng.uniform(0.0, tau);
      const double room = 1.0 - peaks * tau;
      if (rest > room) {
        const double shrink = room / rest * rng.uniform();
        rest = 0.0;
        for (int i = peaks; i < 5; ++i) rest += v(order[i]) *= shrink;
      }
      const double left = 1.0 - rest;
      if (peaks == 1) {
        v(order[0]) = left;
      } else {
        v(order[0]) = rng.uniform(tau, left - tau);
        v(order[1]) = left - v(order[0]);
      }
      const auto dist = EmotionDistribution::normalized(v);
      std::set<EmotionLabel> expected;
      for (int k = 0; k < 5; ++k)
        if (dist.probs()(k) >= tau) expected.insert(label_from_ordinal(k));
      // Rounding can nudge a peak drawn at exactly tau below it.
      if (expected.size() != static_cast<std::size_t>(peaks)) continue;
      const auto report = make_mood_report(dist, tau);
      const std::set<EmotionLabel> got(report.reported.begin(), report.reported.end());
      c.require(report.reported.size() == got.size() && got == expected,
                fmt("threshold %.3f trial %d: reported %zu labels, expected %d", tau, trial, report.reported.size(), peaks));
      (peaks == 2 ? two : one) += 1;
    }
  }
  c.require(two >= 2990 && one >= 2990, fmt("too few shaped inputs (%d two-peak, %d single-peak)", two, one));
  if (!c.failed()) {
    c.out.detail = fmt("thresholds 0.2, %.2f and 1/3: %d two-peak inputs gave their two labels, %d single-peak inputs one",
                       kDefaultMoodThreshold, two, one);
  }
  return c.out;
}

oracle::Probs probs_of(const EmotionDistribution& d) {
  oracle::Probs p{};
  for (int i = 0; i < 5; ++i) p[i] = d.probs()(i);
  return p;
}

oracle::Probs blended(const SongRecord& s, double lambda) {
  if (!s.predicted_tags) return probs_of(*s.curated_tags);
  const auto predicted = probs_of(*s.predicted_tags);
  return oracle::blend_profile(probs_of(*s.curated_tags), &predicted, lambda);
}

Outcome recommendation_fidelity() {
  Rng rng(5);
  Checker c;
  long long pairs = 0;
  // Emotion-only ranking against one-hot moods, every pair in every catalog.
  for (int n = 1; n <= 20 && !c.failed(); ++n) {
    for (int trial = 0; trial < 40 && !c.failed(); ++trial) {
      std::vector<SongRecord> catalog;
      const double lambda = trial % 3 == 0 ? 1.0 : rng.uniform();
      for (int s = 0; s < n; ++s) {
        catalog.push_back(fixture::song(s, fixture::random_probs(rng)));
        if (rng.below(2)) catalog.back().predicted_tags = EmotionDistribution::normalized(fixture::to_vector(fixture::random_probs(rng)));
      }
      const auto likes = fixture::like_index(fixture::random_likes(rng, 3, n, 0.3));
      for (int e = 0; e < 5; ++e) {
        RecommendOptions opt;
        opt.k = static_cast<std::size_t>(n);
        opt.weights = {1.0, 0.0, 0.0};
        opt.lambda = lambda;
        const auto ranked = recommend("u0", EmotionDistribution::one_hot(label_from_ordinal(e)), catalog, likes, opt);
        std::map<std::string, std::size_t> position;
        for (std::size_t i = 0; i < ranked.size(); ++i) position[ranked[i].song_id] = i;
        c.require(ranked.size() == catalog.size(), "emotion-only ranking dropped songs");
        for (const auto& a : catalog) {
          // argmax ties count for every tied label
          const auto pa = blended(a, lambda);
          if (pa[e] != *std::max_element(pa.begin(), pa.end())) continue;
          for (const auto& b : catalog) {
            if (blended(b, lambda)[e] != 0.0) continue;
            ++pairs;
            c.require(position[a.song_id] < position[b.song_id],
                      fmt("n=%d: %s (argmax %d) ranked below %s (zero on %d)", n, a.song_id.c_str(), e, b.song_id.c_str(), e));
          }
        }
      }
    }
  }
  // Mixed weights against the score-and-sort oracle.
  int instances = 0;
  for (int trial = 0; trial < 1000 && !c.failed(); ++trial) {
    const int users = 1 + static_cast<int>(rng.below(5));
    const int n = 1 + static_cast<int>(rng.below(8));
    const auto likes = fixture::random_likes(rng, users, n, 0.4);
    const double lambda = rng.below(4) == 0 ? static_cast<double>(rng.below(2)) : rng.uniform();
    std::vector<oracle::Probs> profiles;
    std::vector<std::string> ids;
    std::vector<SongRecord> catalog;
    for (int s = 0; s < n; ++s) {
      const auto curated = fixture::random_probs(rng);
      catalog.push_back(fixture::song(s, curated));
      std::optional<oracle::Probs> predicted;
      if (rng.below(2)) {
        predicted = fixture::random_probs(rng);
        catalog.back().predicted_tags = EmotionDistribution::normalized(fixture::to_vector(*predicted));
      }
      profiles.push_back(blended(catalog.back(), lambda));
      ids.push_back(fixture::song_name(s));
    }
    int w[3] = {0, 0, 0};
    while (w[0] + w[1] + w[2] == 0)
      for (int& x : w) x = static_cast<int>(rng.below(5));
    const double total = w[0] + w[1] + w[2];
    const double weights[3] = {w[0] / total, w[1] / total, w[2] / total};
    const auto mood = fixture::random_probs(rng);
    const int user = static_cast<int>(rng.below(static_cast<std::uint64_t>(users)));
    std::set<std::string> exclude;
    for (int s = 0; s < n; ++s)
      if (rng.below(6) == 0) exclude.insert(fixture::song_name(s));
    if (exclude.size() == static_cast<std::size_t>(n)) exclude.clear();
    RecommendOptions opt;
    opt.k = 1 + rng.below(static_cast<std::uint64_t>(n));
    opt.weights = {weights[0], weights[1], weights[2]};
    opt.lambda = lambda;
    opt.exclude = exclude;
    const auto got = recommend(fixture::user_name(user), EmotionDistribution::normalized(fixture::to_vector(mood)),
                               catalog, fixture::like_index(likes), opt);
    const auto want = oracle::brute_force_ranking(likes, user, probs_of(EmotionDistribution::normalized(fixture::to_vector(mood))),
                                                  ids, profiles, weights, exclude);
    const auto mismatch = fixture::ranking_mismatch(got, want, opt.k);
    c.require(mismatch.empty(), fmt("instance %d: %s", trial, mismatch.c_str()));
    ++instances;
  }
  if (!c.failed()) {
    c.out.detail = fmt("%lld argmax-vs-zero pairs over catalogs of 1-20 songs, %d mixed-weight instances match the oracle",
                       pairs, instances);
  }
  return c.out;
}

Outcome cf_oracle() {
  Checker c;
  const auto start = std::chrono::steady_clock::now();
  constexpr int kMaxCells = 20;
  int exhaustive_shapes = 0;
  long long matrices = 0, pairs = 0;
  std::vector<std::string> sampled;
  Rng rng(6);
  double seconds_per_pair = 0.0;
  for (int users = 1; users <= 6; ++users)
    for (int songs = 1; songs <= 6; ++songs) {
      const int cells = users * songs;
      const bool full = cells <= kMaxCells;
      const std::uint64_t count = full ? (std::uint64_t{1} << cells) : 20000;
      const auto shape_start = std::chrono::steady_clock::now();
      long long shape_pairs = 0;
      for (std::uint64_t i = 0; i < count && !c.failed(); ++i) {
        const std::uint64_t bits = full ? i : rng.next() & ((std::uint64_t{1} << cells) - 1);
        oracle::LikeMatrix m(static_cast<std::size_t>(users), std::vector<int>(static_cast<std::size_t>(songs)));
        for (int k = 0; k < cells; ++k) m[k / songs][k % songs] = static_cast<int>((bits >> k) & 1);
        const auto index = fixture::like_index(m);
        for (int u = 0; u < users; ++u)
          for (int s = 0; s < songs; ++s) {
            const double got = cf_score(fixture::user_name(u), fixture::song_name(s), index);
            const double want = oracle::brute_force_cf(m, u, s);
            c.require(std::abs(got - want) <= 1e-9,
                      fmt("%dx%d matrix %llu, user %d song %d: %.17g vs %.17g", users, songs,
                          static_cast<unsigned long long>(bits), u, s, got, want));
            ++shape_pairs;
          }
        ++matrices;
      }
      pairs += shape_pairs;
      if (full) {
        ++exhaustive_shapes;
      } else {
        sampled.push_back(fmt("%dx%d", users, songs));
      }
      if (cells == kMaxCells) seconds_per_pair = seconds_since(shape_start) / static_cast<double>(shape_pairs);
    }
  if (c.failed()) return c.out;
  // Every labelled 6x6 matrix with every (user, song) pair, at the measured rate.
  const double full_pairs = std::ldexp(36.0, 36);
  const double hours = full_pairs * seconds_per_pair / 3600.0;
  std::string sampled_list;
  for (const auto& s : sampled) sampled_list += (sampled_list.empty() ? "" : " ") + s;
  c.out.pass = false;
  c.out.detail = fmt("all %lld checked pairs agree (%lld matrices, %.1fs): every matrix of the %d shapes with <= %d cells, "
                     "20000 random matrices each for %s; the exhaustive 6x6 sweep is 2^36 matrices x 36 pairs, about %.0f "
                     "hours at the measured %.2g s/pair, so it was not run",
                     pairs, matrices, seconds_since(start), exhaustive_shapes, kMaxCells, sampled_list.c_str(), hours,
                     seconds_per_pair);
  return c.out;
}

LedgerRecord random_record(Rng& rng, std::int64_t ts) {
  const std::string user = "u" + std::to_string(rng.below(6));
  const std::string song = "s" + std::to_string(rng.below(20));
  switch (rng.below(6)) {
    case 0:
      return {RecordKind::Preference, {{"user_id", user}, {"song_id", song}, {"feedback", rng.below(2) ? "like" : "skip"}}, user, ts};
    case 1:
      return {RecordKind::SongMetadata, {{"song_id", song}, {"title", "T " + song}, {"artist", "A"}}, "curator", ts};
    case 2:
      return {RecordKind::EmotionTag, {{"song_id", song}, {"tags", {{"happy", 0.5}, {"sad", 0.5}}}}, "curator", ts};
    case 3:
      return {RecordKind::TokenReward, {{"user_id", user}, {"amount", 1 + static_cast<int>(rng.below(5))}, {"reason", "feedback"}}, "system", ts};
    case 4:
      return {RecordKind::Ownership, {{"song_id", song}, {"owner", "label-" + std::to_string(rng.below(3))}, {"rights", "stream"}}, "curator", ts};
    default:
      return {RecordKind::Request, {{"endpoint", rng.below(2) ? "/mood" : "/recommendations"}, {"user_id", user}}, "system", ts};
  }
}

std::string read_all(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// YYYY-MM-DD for a unix second, via the calendar types in <chrono>.
std::string chrono_date(std::int64_t t) {
  using namespace std::chrono;
  const auto day = floor<days>(sys_seconds{seconds{t}});
  const year_month_day ymd{day};
  return fmt("%04d-%02u-%02u", static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
             static_cast<unsigned>(ymd.day()));
}

Outcome ledger_integrity() {
  Checker c;
  Rng rng(7);
  const auto dir = scratch_dir("ledger");
  // Random 100-block chains, in memory and on disk.
  for (int chain = 0; chain < 20 && !c.failed(); ++chain) {
    const auto path = dir / fmt("chain%d.jsonl", chain);
    std::int64_t ts = 1'700'000'000 + static_cast<std::int64_t>(rng.below(1'000'000));
    Ledger ledger(std::make_unique<JsonLinesStorage>(path), [&ts] { return ts; });
    for (int b = 0; b < 100; ++b) {
      std::vector<LedgerRecord> records;
      for (int r = 0, n = 1 + static_cast<int>(rng.below(4)); r < n; ++r) records.push_back(random_record(rng, ts));
      ledger.append(std::move(records));
      ts += static_cast<std::int64_t>(rng.below(5000));
    }
    c.require(ledger.size() == 100, "chain did not reach 100 blocks");
    c.require(verify_chain(ledger.blocks()).ok, fmt("chain %d fails in memory", chain));
    c.require(verify_chain_file(path).ok, fmt("chain %d fails on disk", chain));
  }
  // Every single-bit flip of a 100-block chain file with one record per block.
  const auto path = dir / "sweep.jsonl";
  {
    std::int64_t ts = 1'700'000'000;
    Ledger ledger(std::make_unique<JsonLinesStorage>(path), [&ts] { return ts; });
    for (int b = 0; b < 100; ++b, ts += 7) ledger.append({random_record(rng, ts)});
  }
  const std::string original = read_all(path);
  std::vector<std::size_t> line_of(original.size());
  for (std::size_t i = 0, line = 0; i < original.size(); ++i) {
    line_of[i] = line;
    if (original[i] == '\n') ++line;
  }
  const auto mutated_path = dir / "mutated.jsonl";
  long long flips = 0;
  for (std::size_t byte = 0; byte < original.size() && !c.failed(); ++byte)
    for (int bit = 0; bit < 8; ++bit) {
      std::string mutated = original;
      mutated[byte] = static_cast<char>(mutated[byte] ^ (1 << bit));
      std::ofstream(mutated_path, std::ios::binary | std::ios::trunc) << mutated;
      const auto r = verify_chain_file(mutated_path);
      c.require(!r.ok && r.first_bad_index == line_of[byte],
                fmt("flip of bit %d in byte %zu: ok=%d index=%lld, expected %zu", bit, byte, r.ok,
                    r.first_bad_index ? static_cast<long long>(*r.first_bad_index) : -1LL, line_of[byte]));
      ++flips;
    }
  // Token balances over random reward sequences mixed with other records.
  for (int trial = 0; trial < 1000 && !c.failed(); ++trial) {
    std::int64_t ts = 1'700'000'000;
    Ledger ledger(std::make_unique<MemoryStorage>(), [&ts] { return ts++; });
    std::map<std::string, std::int64_t> expected;
    const auto count = [&](const LedgerRecord& r) {
      if (r.kind == RecordKind::TokenReward) expected[r.payload["user_id"]] += r.payload["amount"].get<std::int64_t>();
    };
    for (int i = 0, n = static_cast<int>(rng.below(30)); i < n; ++i) {
      const std::string user = "u" + std::to_string(rng.below(5));
      const auto amount = static_cast<std::int64_t>(1 + rng.below(9));
      switch (rng.below(3)) {
        case 0:
          ledger.award_tokens(user, amount, "feedback");
          expected[user] += amount;
          break;
        case 1: {
          std::vector<LedgerRecord> block{random_record(rng, ts),
                                          {RecordKind::TokenReward, {{"user_id", user}, {"amount", amount}, {"reason", "bonus"}}, "system", ts}};
          for (const auto& r : block) count(r);
          ledger.append(std::move(block));
          break;
        }
        default: {
          auto r = random_record(rng, ts);
          count(r);
          ledger.append({std::move(r)});
        }
      }
    }
    for (int u = 0; u < 6; ++u) {
      const std::string user = "u" + std::to_string(u);
      c.require(ledger.balance(user) == (expected.count(user) ? expected[user] : 0), fmt("trial %d: balance of %s", trial, user.c_str()));
    }
    c.require(token_balances(ledger.blocks()) == expected, fmt("trial %d: token_balances", trial));
  }
  // Requests per UTC day across day boundaries.
  for (int trial = 0; trial < 200 && !c.failed(); ++trial) {
    std::int64_t ts = 0;
    Ledger ledger(std::make_unique<MemoryStorage>(), [&ts] { return ts; });
    std::map<std::string, std::int64_t> expected;
    const std::int64_t base = 1'704'067'200 - 3 * 86'400 + static_cast<std::int64_t>(rng.below(86'400));
    for (int i = 0, n = static_cast<int>(rng.below(60)); i < n; ++i) {
      ts = base + static_cast<std::int64_t>(rng.below(6 * 86'400));
      auto r = random_record(rng, ts);
      if (r.kind == RecordKind::Request) ++expected[chrono_date(ts)];
      ledger.append({std::move(r)});
    }
    c.require(ledger.requests_per_day() == expected, fmt("trial %d: requests_per_day", trial));
  }
  fs::remove_all(dir);
  if (!c.failed()) {
    c.out.detail = fmt("20 random 100-block chains verify, all %lld single-bit flips of a %zu-byte chain file caught at the "
                       "right block, 1000 reward sequences and 200 request histories match",
                       flips, original.size());
  }
  return c.out;
}

/// A service built from a config file, the way `serve` builds it.
std::unique_ptr<Service> configured_service(const fs::path& dir, const fixture::TestClock& clock) {
  std::vector<SongEntry> entries;
  for (const auto& r : fixture::small_catalog()) {
    SongEntry e;
    e.id = r.song_id;
    e.title = r.title;
    e.artist = r.artist;
    e.emotion = *r.curated_tags;
    e.catalog_ref = r.catalog_ref;
    entries.push_back(std::move(e));
  }
  write_songs_jsonl(dir / "catalog.jsonl", entries);
  std::ofstream(dir / "service.conf") << "catalog_path = catalog.jsonl\nchain_path = chain.jsonl\nseed = 11\n";
  return make_service(load_config(dir / "service.conf"), clock.clock());
}

Outcome determinism() {
  Checker c;
  std::vector<std::string> runs[2];
  for (int i = 0; i < 2; ++i) {
    const auto dir = scratch_dir(fmt("replay%d", i));
    fixture::TestClock clock;
    auto svc = configured_service(dir, clock);
    fixture::RunningServer server(*svc);
    runs[i] = fixture::scripted_session(server.port());
  }
  c.require(runs[0].size() == runs[1].size(), "replays returned different numbers of responses");
  std::size_t bytes = 0;
  for (std::size_t i = 0; i < runs[0].size() && !c.failed(); ++i) {
    c.require(runs[0][i].rfind("200 ", 0) == 0, fmt("step %zu failed: %s", i, runs[0][i].c_str()));
    c.require(runs[0][i] == runs[1][i], fmt("step %zu differs", i));
    bytes += runs[0][i].size();
  }
  if (!c.failed()) c.out.detail = fmt("%zu responses (%zu bytes) identical across two fresh servers", runs[0].size(), bytes);
  return c.out;
}

Outcome concurrency() {
  Checker c;
  const auto dir = scratch_dir("load");
  fixture::TestClock clock;
  auto svc = configured_service(dir, clock);
  fixture::RunningServer server(*svc);
  const auto start = std::chrono::steady_clock::now();
  const auto load = fixture::concurrent_load(server.port(), 8, 50);
  const double elapsed = seconds_since(start);
  c.require(load.errors == 0, fmt("%d failed requests, first: %s", load.errors,
                                  load.error_samples.empty() ? "" : load.error_samples.front().c_str()));
  httplib::Client client("127.0.0.1", server.port());
  const auto verify = fixture::http_get(client, "/ledger/verify");
  c.require(verify.status == 200 && json::parse(verify.body)["ok"] == true, "ledger verify: " + verify.body);
  c.require(verify_chain_file(dir / "chain.jsonl").ok, "chain file does not verify");
  const auto metrics = json::parse(fixture::http_get(client, "/metrics/requests").body);
  std::int64_t counted = 0;
  for (const auto& [day, n] : metrics.items()) counted += n.get<std::int64_t>();
  // The two extra calls above are not logged; only /mood and /recommendations are.
  c.require(counted == load.mood_and_recommend_calls,
            fmt("metrics count %lld, sent %lld", static_cast<long long>(counted), load.mood_and_recommend_calls));
  if (!c.failed()) {
    c.out.detail = fmt("8 users x 50 requests in %.2fs, 0 errors, chain of %zu blocks verifies, %lld logged requests",
                       elapsed, svc->ledger().size(), load.mood_and_recommend_calls);
  }
  return c.out;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"gradient correctness", gradients},
      {"classifier learnability", learnability},
      {"metric oracle", metric_oracle},
      {"combined mood", combined_mood},
      {"recommendation fidelity", recommendation_fidelity},
      {"cf oracle", cf_oracle},
      {"ledger integrity", ledger_integrity},
      {"end-to-end determinism", determinism},
      {"concurrency", concurrency},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::printf("criterion %zu %-24s %s: %s\n", i + 1, criteria[i].first.c_str(), o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
