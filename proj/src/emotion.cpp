#include "emorec/emotion.hpp"

#include "emorec/error.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <sstream>

namespace emorec {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::InvalidDistribution: return "InvalidDistribution";
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::EmptyInput: return "EmptyInput";
    case Errc::EmptyCorpus: return "EmptyCorpus";
    case Errc::SingleClassCorpus: return "SingleClassCorpus";
    case Errc::EmptyDataset: return "EmptyDataset";
    case Errc::EmptyTestSet: return "EmptyTestSet";
    case Errc::ShapeMismatch: return "ShapeMismatch";
    case Errc::IndexOutOfRange: return "IndexOutOfRange";
    case Errc::BadImageShape: return "BadImageShape";
    case Errc::MissingTags: return "MissingTags";
    case Errc::ZeroVector: return "ZeroVector";
    case Errc::EmptyCatalog: return "EmptyCatalog";
    case Errc::InvalidRecord: return "InvalidRecord";
    case Errc::InvalidAmount: return "InvalidAmount";
    case Errc::OutOfOrder: return "OutOfOrder";
    case Errc::UnknownLabel: return "UnknownLabel";
    case Errc::Io: return "Io";
    case Errc::Parse: return "Parse";
  }
  return "Unknown";
}

namespace {
constexpr std::array<std::string_view, kEmotionCount> kNames = {"happy", "sad", "surprise", "disgust",
                                                                "neutral"};
}

EmotionLabel label_from_ordinal(int index) {
  if (index < 0 || index >= kEmotionCount) {
    throw Error(Errc::IndexOutOfRange, "emotion ordinal " + std::to_string(index));
  }
  return static_cast<EmotionLabel>(index);
}

std::string_view to_string(EmotionLabel e) noexcept { return kNames[static_cast<std::size_t>(e)]; }

std::optional<EmotionLabel> try_parse_emotion(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  for (int i = 0; i < kEmotionCount; ++i) {
    if (kNames[static_cast<std::size_t>(i)] == lower) return static_cast<EmotionLabel>(i);
  }
  return std::nullopt;
}

EmotionLabel parse_emotion(std::string_view text) {
  if (auto e = try_parse_emotion(text)) return *e;
  throw Error(Errc::UnknownLabel, "unknown emotion label '" + std::string(text) + "'");
}

bool EmotionDistribution::is_valid(const EmotionVector& probs) noexcept {
  if (!probs.allFinite()) return false;
  if ((probs.array() < 0.0).any() || (probs.array() > 1.0).any()) return false;
  return std::abs(probs.sum() - 1.0) <= kSumTolerance;
}

EmotionDistribution::EmotionDistribution(const EmotionVector& probs) : probs_(probs) {
  if (!is_valid(probs)) {
    std::ostringstream os;
    os << "entries must lie in [0,1] and sum to 1 (sum=" << probs.sum() << ")";
    throw Error(Errc::InvalidDistribution, os.str());
  }
}

EmotionDistribution EmotionDistribution::one_hot(EmotionLabel e) {
  EmotionVector v = EmotionVector::Zero();
  v(ordinal(e)) = 1.0;
  return EmotionDistribution(v);
}

EmotionDistribution EmotionDistribution::uniform() {
  return EmotionDistribution(EmotionVector::Constant(1.0 / kEmotionCount));
}

EmotionDistribution EmotionDistribution::normalized(const EmotionVector& weights) {
  if (!weights.allFinite() || (weights.array() < 0.0).any()) {
    throw Error(Errc::InvalidDistribution, "weights must be finite and non-negative");
  }
  const double total = weights.sum();
  if (total <= 0.0) throw Error(Errc::InvalidDistribution, "weights sum to zero");
  return EmotionDistribution(weights / total);
}

EmotionLabel EmotionDistribution::argmax() const noexcept {
  int best = 0;
  for (int i = 1; i < kEmotionCount; ++i) {
    if (probs_(i) > probs_(best)) best = i;
  }
  return static_cast<EmotionLabel>(best);
}

MoodReport make_mood_report(const EmotionDistribution& dist, double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw Error(Errc::InvalidArgument, "mood threshold must lie in (0,1)");
  }
  std::vector<EmotionLabel> reported;
  for (EmotionLabel e : kAllEmotions) {
    if (dist[e] >= threshold) reported.push_back(e);
  }
  std::stable_sort(reported.begin(), reported.end(),
                   [&](EmotionLabel a, EmotionLabel b) { return dist[a] > dist[b]; });
  if (reported.empty()) reported.push_back(dist.argmax());
  return MoodReport{dist, std::move(reported), threshold};
}

ClassificationMetrics compute_metrics(std::span<const EmotionLabel> predictions,
                                      std::span<const EmotionLabel> truths) {
  if (predictions.size() != truths.size()) {
    throw Error(Errc::LengthMismatch, std::to_string(predictions.size()) + " predictions vs " +
                                          std::to_string(truths.size()) + " truths");
  }
  if (truths.empty()) throw Error(Errc::EmptyInput, "no predictions to score");

  ClassificationMetrics m;
  for (std::size_t i = 0; i < truths.size(); ++i) {
    ++m.confusion(ordinal(truths[i]), ordinal(predictions[i]));
  }

  const auto ratio = [](double num, double den) { return den > 0.0 ? num / den : 0.0; };
  const double total = static_cast<double>(m.confusion.sum());
  m.accuracy = ratio(static_cast<double>(m.confusion.trace()), total);

  for (int c = 0; c < kEmotionCount; ++c) {
    const double tp = static_cast<double>(m.confusion(c, c));
    const double predicted = static_cast<double>(m.confusion.col(c).sum());
    const double actual = static_cast<double>(m.confusion.row(c).sum());
    const double p = ratio(tp, predicted);
    const double r = ratio(tp, actual);
    m.per_class_precision(c) = p;
    m.per_class_recall(c) = r;
    m.per_class_f1(c) = ratio(2.0 * p * r, p + r);
  }
  m.macro_precision = m.per_class_precision.mean();
  m.macro_recall = m.per_class_recall.mean();
  m.macro_f1 = m.per_class_f1.mean();
  return m;
}

std::string format_metrics(const ClassificationMetrics& m) {
  std::ostringstream os;
  char line[128];
  std::snprintf(line, sizeof line, "%-10s %9s %9s %9s %8s\n", "class", "precision", "recall", "f1",
                "support");
  os << line;
  for (EmotionLabel e : kAllEmotions) {
    const int c = ordinal(e);
    std::snprintf(line, sizeof line, "%-10s %9.4f %9.4f %9.4f %8lld\n",
                  std::string(to_string(e)).c_str(), m.per_class_precision(c), m.per_class_recall(c),
                  m.per_class_f1(c), static_cast<long long>(m.confusion.row(c).sum()));
    os << line;
  }
  std::snprintf(line, sizeof line, "%-10s %9.4f %9.4f %9.4f %8lld\n", "macro", m.macro_precision,
                m.macro_recall, m.macro_f1, static_cast<long long>(m.confusion.sum()));
  os << line;
  std::snprintf(line, sizeof line, "accuracy   %9.4f\n", m.accuracy);
  os << line;
  return os.str();
}

}  // namespace emorec
