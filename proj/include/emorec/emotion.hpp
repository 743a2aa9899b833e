#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace emorec {

/// Emotion taxonomy. The ordinal order is part of the contract: it breaks
/// every tie in the system.
enum class EmotionLabel : std::uint8_t { Happy = 0, Sad, Surprise, Disgust, Neutral };

inline constexpr int kEmotionCount = 5;

inline constexpr std::array<EmotionLabel, kEmotionCount> kAllEmotions = {
    EmotionLabel::Happy, EmotionLabel::Sad, EmotionLabel::Surprise, EmotionLabel::Disgust,
    EmotionLabel::Neutral};

constexpr int ordinal(EmotionLabel e) noexcept { return static_cast<int>(e); }

EmotionLabel label_from_ordinal(int index);

/// Lowercase wire name ("happy", "sad", ...).
std::string_view to_string(EmotionLabel e) noexcept;

/// Case-insensitive parse; nullopt on an unknown name.
std::optional<EmotionLabel> try_parse_emotion(std::string_view text);

/// Case-insensitive parse; throws Error(UnknownLabel).
EmotionLabel parse_emotion(std::string_view text);

using EmotionVector = Eigen::Matrix<double, kEmotionCount, 1>;

/// Probability vector over the taxonomy. Construction validates:
/// entries in [0,1] and |sum - 1| <= kSumTolerance.
class EmotionDistribution {
 public:
  static constexpr double kSumTolerance = 1e-6;

  explicit EmotionDistribution(const EmotionVector& probs);

  static EmotionDistribution one_hot(EmotionLabel e);
  static EmotionDistribution uniform();
  /// Scales a non-negative vector to unit sum. Throws on a zero or negative vector.
  static EmotionDistribution normalized(const EmotionVector& weights);

  /// True when `probs` would pass construction.
  static bool is_valid(const EmotionVector& probs) noexcept;

  double operator[](EmotionLabel e) const noexcept { return probs_(ordinal(e)); }
  const EmotionVector& probs() const noexcept { return probs_; }

  /// Highest-probability label, ties to the lowest ordinal.
  EmotionLabel argmax() const noexcept;

  friend bool operator==(const EmotionDistribution& a, const EmotionDistribution& b) {
    return a.probs_ == b.probs_;
  }

 private:
  EmotionVector probs_;
};

inline constexpr double kDefaultMoodThreshold = 0.30;

struct MoodReport {
  EmotionDistribution distribution;
  std::vector<EmotionLabel> reported;
  double threshold;
};

/// Labels at or above `threshold`, by descending probability then ordinal.
/// Falls back to the argmax when nothing reaches the threshold.
MoodReport make_mood_report(const EmotionDistribution& dist, double threshold = kDefaultMoodThreshold);

using ConfusionMatrix = Eigen::Matrix<std::int64_t, kEmotionCount, kEmotionCount>;

struct ClassificationMetrics {
  double accuracy = 0.0;
  EmotionVector per_class_precision = EmotionVector::Zero();
  EmotionVector per_class_recall = EmotionVector::Zero();
  EmotionVector per_class_f1 = EmotionVector::Zero();
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double macro_f1 = 0.0;
  /// confusion(truth, prediction)
  ConfusionMatrix confusion = ConfusionMatrix::Zero();
};

/// Scores predictions against truths. 0/0 ratios are defined as 0.
ClassificationMetrics compute_metrics(std::span<const EmotionLabel> predictions,
                                      std::span<const EmotionLabel> truths);

/// Plain-text metric table (one row per class plus macro/accuracy lines).
std::string format_metrics(const ClassificationMetrics& m);

}  // namespace emorec
