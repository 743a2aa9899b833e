#include "emorec/synthetic.hpp"

#include "emorec/rng.hpp"

#include <array>
#include <cmath>
#include <numbers>

namespace emorec::synthetic {

namespace {

constexpr std::array<std::string_view, kEmotionCount> kKeywords = {"sunshine", "teardrops", "astonished",
                                                                   "rotten", "ordinary"};

constexpr std::array<std::string_view, 32> kFiller = {
    "night", "road",  "heart",  "city",  "dream",  "time",  "light", "river",
    "train", "window", "summer", "winter", "shadow", "ocean", "radio", "highway",
    "morning", "street", "fire",  "rain",  "moon",   "stars", "home",  "voice",
    "letter", "garden", "mirror", "echo",  "bridge", "song",  "wheel", "paper"};

constexpr std::array<std::string_view, 8> kStopFiller = {"the", "and", "my", "you", "in", "of", "to", "on"};

constexpr int kSide = kMoodImageSide;

void stamp(GrayImage& img, double x, double y) {
  // 3x3 pen
  const int cx = static_cast<int>(std::lround(x)), cy = static_cast<int>(std::lround(y));
  for (int dy = -1; dy <= 1; ++dy)
    for (int dx = -1; dx <= 1; ++dx) {
      const int r = cy + dy, c = cx + dx;
      if (r >= 0 && r < kSide && c >= 0 && c < kSide) img(r, c) = 1.0f;
    }
}

void line(GrayImage& img, double x0, double y0, double x1, double y1) {
  const int steps = 96;
  for (int i = 0; i <= steps; ++i) {
    const double t = static_cast<double>(i) / steps;
    stamp(img, x0 + t * (x1 - x0), y0 + t * (y1 - y0));
  }
}

/// Arc of a circle; angles in radians, image y grows downward.
void arc(GrayImage& img, double cx, double cy, double r, double from, double to) {
  const int steps = 128;
  for (int i = 0; i <= steps; ++i) {
    const double a = from + (to - from) * static_cast<double>(i) / steps;
    stamp(img, cx + r * std::cos(a), cy + r * std::sin(a));
  }
}

}  // namespace

std::string_view class_keyword(EmotionLabel e) noexcept { return kKeywords[static_cast<std::size_t>(ordinal(e))]; }

std::vector<SongEntry> lyric_corpus(std::size_t per_class, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<SongEntry> out;
  out.reserve(per_class * kEmotionCount);
  for (std::size_t n = 0; n < per_class; ++n) {
    for (EmotionLabel e : kAllEmotions) {
      std::vector<std::string> words;
      const std::size_t length = 8 + rng.below(13);
      for (std::size_t i = 0; i < length; ++i) {
        if (rng.below(4) == 0) {
          words.emplace_back(kStopFiller[rng.below(kStopFiller.size())]);
        } else {
          words.emplace_back(kFiller[rng.below(kFiller.size())]);
        }
      }
      const std::size_t mentions = 1 + rng.below(2);
      for (std::size_t m = 0; m < mentions; ++m) {
        words.insert(words.begin() + static_cast<std::ptrdiff_t>(rng.below(words.size() + 1)),
                     std::string(class_keyword(e)));
      }
      SongEntry s;
      s.id = "syn-" + std::string(to_string(e)) + "-" + std::to_string(n);
      s.title = "Synthetic " + std::string(to_string(e)) + " " + std::to_string(n);
      s.artist = "Generator " + std::to_string(rng.below(7));
      for (std::size_t i = 0; i < words.size(); ++i) s.lyrics += (i ? " " : "") + words[i];
      s.emotion = EmotionDistribution::one_hot(e);
      out.push_back(std::move(s));
    }
  }
  return out;
}

GrayImage glyph(EmotionLabel e) {
  using std::numbers::pi;
  GrayImage img = GrayImage::Zero(kSide, kSide);
  switch (e) {
    case EmotionLabel::Happy:  // U-shaped smile, high
      arc(img, 24, 18, 13, 0.15 * pi, 0.85 * pi);
      break;
    case EmotionLabel::Sad:  // inverted-U frown, low
      arc(img, 24, 40, 13, 1.15 * pi, 1.85 * pi);
      break;
    case EmotionLabel::Surprise:  // vertical bar
      line(img, 24, 8, 24, 40);
      break;
    case EmotionLabel::Disgust:  // diagonal cross
      line(img, 10, 10, 38, 38);
      line(img, 38, 10, 10, 38);
      break;
    case EmotionLabel::Neutral:  // flat horizontal line
      line(img, 8, 24, 40, 24);
      break;
  }
  return img;
}

GrayImage noisy_glyph(EmotionLabel e, Rng& rng, float noise) {
  const GrayImage clean = glyph(e);
  const int sx = static_cast<int>(rng.below(5)) - 2;
  const int sy = static_cast<int>(rng.below(5)) - 2;
  GrayImage out(kSide, kSide);
  for (int r = 0; r < kSide; ++r)
    for (int c = 0; c < kSide; ++c) {
      const int rr = r - sy, cc = c - sx;
      const float base = (rr >= 0 && rr < kSide && cc >= 0 && cc < kSide) ? clean(rr, cc) : 0.0f;
      const auto jitter = static_cast<float>(rng.uniform(-noise, noise));
      out(r, c) = std::clamp(base + jitter, 0.0f, 1.0f);
    }
  return out;
}

std::vector<LabeledMoodImage> glyph_dataset(std::size_t per_class, std::uint64_t seed, float noise) {
  Rng rng(seed);
  std::vector<LabeledMoodImage> out;
  out.reserve(per_class * kEmotionCount);
  for (std::size_t n = 0; n < per_class; ++n)
    for (EmotionLabel e : kAllEmotions) out.push_back({noisy_glyph(e, rng, noise), e});
  return out;
}

GrayImage blend(const GrayImage& a, const GrayImage& b, float weight) {
  return (weight * a.array() + (1.0f - weight) * b.array()).matrix();
}

}  // namespace emorec::synthetic
