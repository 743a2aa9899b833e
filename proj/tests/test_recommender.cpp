#include "emorec/error.hpp"
#include "emorec/recommender.hpp"

#include "fixtures.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace emorec;

namespace {

EmotionDistribution dist(std::initializer_list<double> v) {
  EmotionVector p;
  int i = 0;
  for (double x : v) p(i++) = x;
  return EmotionDistribution(p);
}

SongRecord tagged(std::string id, EmotionDistribution curated) {
  SongRecord r;
  r.song_id = std::move(id);
  r.curated_tags = std::move(curated);
  return r;
}

Errc code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return Errc::Io;
}

const auto happy = EmotionDistribution::one_hot(EmotionLabel::Happy);
const auto sad = EmotionDistribution::one_hot(EmotionLabel::Sad);

}  // namespace

TEST_CASE("song emotion profile") {
  auto s = tagged("a", happy);
  s.predicted_tags = happy;
  for (double lambda : {0.0, 0.3, 0.5, 1.0}) CHECK(song_emotion_profile(s, lambda) == happy);

  s.predicted_tags = sad;
  CHECK(song_emotion_profile(s, 1.0) == happy);
  CHECK(song_emotion_profile(s, 0.0) == sad);
  CHECK(song_emotion_profile(s, 0.5).probs().isApprox(dist({0.5, 0.5, 0, 0, 0}).probs()));

  const auto c = dist({0.1, 0.2, 0.3, 0.4, 0.0});
  auto curated_only = tagged("b", c);
  CHECK(song_emotion_profile(curated_only, 0.2) == c);

  SongRecord none;
  none.song_id = "c";
  CHECK(code_of([&] { song_emotion_profile(none); }) == Errc::MissingTags);
  CHECK(code_of([&] { song_emotion_profile(s, 1.5); }) == Errc::InvalidArgument);
}

TEST_CASE("emotion affinity") {
  CHECK(emotion_affinity(happy, happy) == 1.0);
  CHECK(emotion_affinity(happy, sad) == 0.0);
  CHECK(emotion_affinity(EmotionDistribution::uniform(), EmotionDistribution::uniform()) == doctest::Approx(0.2));

  Rng rng(1);
  for (int i = 0; i < 500; ++i) {
    const auto a = EmotionDistribution::normalized(fixture::to_vector(fixture::random_probs(rng)));
    const auto b = EmotionDistribution::normalized(fixture::to_vector(fixture::random_probs(rng)));
    const double x = emotion_affinity(a, b);
    CHECK(x >= 0.0);
    CHECK(x <= 1.0);
    CHECK(x == doctest::Approx(emotion_affinity(b, a)));
  }
}

TEST_CASE("content similarity") {
  const auto a = tagged("a", dist({0.2, 0.3, 0.1, 0.4, 0.0}));
  CHECK(content_similarity(a, a) == doctest::Approx(1.0));
  CHECK(content_similarity(tagged("h", happy), tagged("s", sad)) == 0.0);
  CHECK(content_similarity(tagged("m", dist({0.5, 0.5, 0, 0, 0})), tagged("h", happy)) ==
        doctest::Approx(0.7071).epsilon(1e-4));
  CHECK(code_of([] { cosine_similarity(EmotionVector::Zero(), EmotionVector::Ones()); }) == Errc::ZeroVector);
}

TEST_CASE("cf score examples") {
  LikeIndex empty;
  CHECK(cf_score("nobody", "s00", empty) == 0.0);

  // two users liked both songs; the third liked only s01
  const oracle::LikeMatrix m{{1, 1}, {1, 1}, {0, 1}};
  const auto index = fixture::like_index(m);
  CHECK(cf_score("u2", "s00", index) == doctest::Approx(1.0));
  CHECK(oracle::brute_force_cf(m, 2, 0) == doctest::Approx(1.0));

  // a song nobody liked scores zero
  const oracle::LikeMatrix m2{{1, 0}, {1, 0}};
  CHECK(cf_score("u0", "s01", fixture::like_index(m2)) == 0.0);
}

TEST_CASE("cf score matches the dense brute force on random 4x4 matrices") {
  Rng rng(44);
  for (int trial = 0; trial < 300; ++trial) {
    const auto m = fixture::random_likes(rng, 4, 4, 0.5);
    const auto index = fixture::like_index(m);
    for (int u = 0; u < 4; ++u)
      for (int s = 0; s < 4; ++s) {
        const double got = cf_score(fixture::user_name(u), fixture::song_name(s), index);
        CHECK(std::abs(got - oracle::brute_force_cf(m, u, s)) <= 1e-9);
        CHECK(got >= 0.0);
        CHECK(got <= 1.0);
      }
  }
}

TEST_CASE("cf score matches exhaustively on every 3x3 and 2x4 matrix") {
  for (const auto [users, songs] : {std::pair{3, 3}, std::pair{2, 4}, std::pair{4, 2}}) {
    const int cells = users * songs;
    for (std::uint32_t bits = 0; bits < (1u << cells); ++bits) {
      oracle::LikeMatrix m(users, std::vector<int>(songs));
      for (int c = 0; c < cells; ++c) m[c / songs][c % songs] = (bits >> c) & 1;
      const auto index = fixture::like_index(m);
      for (int u = 0; u < users; ++u)
        for (int s = 0; s < songs; ++s)
          REQUIRE(std::abs(cf_score(fixture::user_name(u), fixture::song_name(s), index) -
                           oracle::brute_force_cf(m, u, s)) <= 1e-9);
    }
  }
}

TEST_CASE("interaction store") {
  InteractionStore store;
  store.append({"ann", "s1", Feedback::Like, 10});
  const auto snapshot = store.likes();
  store.append({"ann", "s2", Feedback::Skip, 10});
  store.append({"bob", "s1", Feedback::Like, 5});
  store.append({"ann", "s1", Feedback::Skip, 12});
  CHECK(store.size() == 4);
  CHECK(store.likes()->liked_by("ann") == std::set<std::string>{"s1"});  // a later skip keeps the like
  CHECK(store.likes()->likers_of("s1") == std::set<std::string>{"ann", "bob"});
  CHECK(snapshot->likers_of("s1") == std::set<std::string>{"ann"});  // snapshots are immutable

  CHECK(code_of([&] { store.append({"ann", "s3", Feedback::Like, 11}); }) == Errc::OutOfOrder);
  CHECK(code_of([&] { store.append({"", "s3", Feedback::Like, 20}); }) == Errc::InvalidArgument);
  CHECK(store.size() == 4);

  CHECK(parse_feedback("like") == Feedback::Like);
  CHECK(parse_feedback("skip") == Feedback::Skip);
  CHECK(to_string(Feedback::Like) == "like");
  CHECK(code_of([] { parse_feedback("love"); }) == Errc::InvalidArgument);
}

TEST_CASE("recommend examples") {
  const std::vector<SongRecord> catalog{tagged("sad-song", sad), tagged("happy-song", happy)};
  LikeIndex none;
  RecommendOptions opt;
  opt.weights = {1, 0, 0};
  const auto r = recommend("ann", happy, catalog, none, opt);
  REQUIRE(r.size() == 2);
  CHECK(r[0].song_id == "happy-song");
  CHECK(r[0].score == 1.0);
  CHECK(r[1].score == 0.0);

  const std::vector<SongRecord> twins{tagged("b", dist({0.3, 0.3, 0.4, 0, 0})), tagged("a", dist({0.3, 0.3, 0.4, 0, 0}))};
  const auto t = recommend("ann", EmotionDistribution::uniform(), twins, none);
  CHECK(t[0].song_id == "a");
  CHECK(t[1].song_id == "b");
  CHECK(t[0].score == t[1].score);

  opt.k = 1;
  CHECK(recommend("ann", sad, catalog, none, opt).front().song_id == "sad-song");
  opt.exclude = {"sad-song"};
  CHECK(recommend("ann", sad, catalog, none, opt).front().song_id == "happy-song");
}

TEST_CASE("recommend errors") {
  LikeIndex none;
  const std::vector<SongRecord> catalog{tagged("a", happy)};
  CHECK(code_of([&] { recommend("u", happy, std::span<const SongRecord>{}, none); }) == Errc::EmptyCatalog);
  RecommendOptions opt;
  opt.k = 0;
  CHECK(code_of([&] { recommend("u", happy, catalog, none, opt); }) == Errc::InvalidArgument);
  opt.k = 1;
  opt.weights = {0.5, 0.5, 0.5};
  CHECK(code_of([&] { recommend("u", happy, catalog, none, opt); }) == Errc::InvalidArgument);
  opt.weights = {1.2, -0.2, 0.0};
  CHECK(code_of([&] { recommend("u", happy, catalog, none, opt); }) == Errc::InvalidArgument);
  const std::vector<SongRecord> dup{tagged("a", happy), tagged("a", sad)};
  CHECK(code_of([&] { recommend("u", happy, dup, none); }) == Errc::InvalidRecord);
}

TEST_CASE("recommend matches the score-and-sort oracle on a 6-song catalog with history") {
  Rng rng(606);
  const double weights[3] = {0.6, 0.3, 0.1};
  for (int trial = 0; trial < 200; ++trial) {
    const auto likes = fixture::random_likes(rng, 3, 6, 0.4);
    std::vector<oracle::Probs> profiles;
    std::vector<std::string> ids;
    std::vector<SongRecord> catalog;
    for (int s = 0; s < 6; ++s) {
      profiles.push_back(fixture::random_probs(rng));
      ids.push_back(fixture::song_name(s));
      catalog.push_back(fixture::song(s, profiles.back()));
    }
    const auto mood = fixture::random_probs(rng);
    const int user = static_cast<int>(rng.below(3));
    RecommendOptions opt;
    opt.k = 6;
    opt.weights = {0.6, 0.3, 0.1};
    const auto got = recommend(fixture::user_name(user), EmotionDistribution::normalized(fixture::to_vector(mood)),
                               catalog, fixture::like_index(likes), opt);
    const auto want = oracle::brute_force_ranking(likes, user, mood, ids, profiles, weights, {});
    REQUIRE(fixture::ranking_mismatch(got, want, opt.k) == "");
  }
}

TEST_CASE("ranking properties") {
  Rng rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + static_cast<int>(rng.below(10));
    std::vector<SongRecord> catalog;
    for (int s = 0; s < n; ++s) {
      catalog.push_back(fixture::song(s, fixture::random_probs(rng)));
      if (rng.below(2)) catalog.back().predicted_tags = EmotionDistribution::normalized(fixture::to_vector(fixture::random_probs(rng)));
    }
    const auto likes = fixture::like_index(fixture::random_likes(rng, 4, n, 0.3));
    const auto mood = EmotionDistribution::normalized(fixture::to_vector(fixture::random_probs(rng)));
    RecommendOptions opt;
    opt.k = static_cast<std::size_t>(n);
    const auto base = recommend("u1", mood, catalog, likes, opt);

    for (const auto& r : base) {
      CHECK(r.score >= 0.0);
      CHECK(r.score <= 1.0);
      for (double c : {r.components.emotion_affinity, r.components.cf_score, r.components.content_score}) {
        CHECK(c >= 0.0);
        CHECK(c <= 1.0);
      }
      CHECK(r.score == doctest::Approx(0.6 * r.components.emotion_affinity + 0.3 * r.components.cf_score +
                                       0.1 * r.components.content_score));
    }
    CHECK(recommend("u1", mood, catalog, likes, opt).size() == base.size());

    auto shuffled = catalog;
    rng.shuffle(shuffled);
    const auto again = recommend("u1", mood, shuffled, likes, opt);
    REQUIRE(again.size() == base.size());
    for (std::size_t i = 0; i < base.size(); ++i) {
      CHECK(again[i].song_id == base[i].song_id);
      CHECK(again[i].score == base[i].score);
    }

    // emotion-only ranking never puts lower affinity above higher affinity
    opt.weights = {1, 0, 0};
    const auto emotional = recommend("u1", mood, catalog, likes, opt);
    for (std::size_t i = 1; i < emotional.size(); ++i) {
      CHECK(emotional[i - 1].components.emotion_affinity >= emotional[i].components.emotion_affinity);
    }
  }
}

TEST_CASE("raising a song's affinity raises its emotion-only score") {
  RecommendOptions opt;
  opt.weights = {1, 0, 0};
  opt.k = 1;
  LikeIndex none;
  double previous = -1.0;
  for (int step = 0; step <= 10; ++step) {
    const double h = step / 10.0;
    const std::vector<SongRecord> one{tagged("x", dist({h, 1 - h, 0, 0, 0}))};
    const double score = recommend("u", happy, one, none, opt).front().score;
    CHECK(score > previous);
    previous = score;
  }
}

TEST_CASE("songs from the corpus format become catalog records") {
  SongEntry e;
  e.id = "x1";
  e.title = "T";
  e.artist = "A";
  e.emotion = sad;
  e.catalog_ref = "spotify:track:1";
  const auto r = song_record_from_entry(e);
  CHECK(r.song_id == "x1");
  CHECK(r.curated_tags == sad);
  CHECK_FALSE(r.predicted_tags.has_value());
  CHECK(r.catalog_ref == e.catalog_ref);
  const std::vector<SongRecord> bad{tagged("", happy)};
  CHECK(code_of([&] { validate_catalog(bad); }) == Errc::InvalidRecord);
}
