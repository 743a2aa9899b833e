#pragma once

#include "emorec/corpus.hpp"
#include "emorec/emotion.hpp"
#include "emorec/image.hpp"
#include "emorec/nn/model.hpp"
#include "emorec/nn/optim.hpp"
#include "emorec/rng.hpp"
#include "emorec/text.hpp"

#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace emorec {

using nn::TrainConfig;

inline constexpr std::string_view kTaxonomyVersion = "emotions-v1";

struct LabeledLyric {
  std::string song_id;
  EncodedLyrics encoded;
  EmotionLabel label;
};

/// Text preprocessing shared by training and inference.
struct LyricPipeline {
  std::shared_ptr<const Vocabulary> vocabulary;
  StopList stoplist = default_stoplist();
  std::size_t sequence_length = kDefaultSequenceLength;

  EncodedLyrics encode(std::string_view lyrics) const;
};

/// Frozen lyric classifier. Copies share the same immutable model.
class LyricClassifier {
 public:
  LyricClassifier(nn::Model<float> model, LyricPipeline pipeline, std::vector<double> loss_history = {});

  /// tokenize -> remove stop words -> encode -> forward.
  EmotionDistribution classify(std::string_view lyrics) const;
  EmotionDistribution classify_encoded(const EncodedLyrics& ids) const;

  const nn::Model<float>& model() const noexcept { return *model_; }
  const LyricPipeline& pipeline() const noexcept { return pipeline_; }
  const std::vector<double>& loss_history() const noexcept { return loss_history_; }
  std::string_view taxonomy_version() const noexcept { return kTaxonomyVersion; }

  /// Writes the checkpoint to `path` and the vocabulary next to it as
  /// `<path>.vocab`.
  void save(const std::filesystem::path& path) const;
  static LyricClassifier load(const std::filesystem::path& path);

 private:
  std::shared_ptr<const nn::Model<float>> model_;
  LyricPipeline pipeline_;
  std::vector<double> loss_history_;
};

/// Frozen 48x48 mood-image classifier.
class MoodImageClassifier {
 public:
  explicit MoodImageClassifier(nn::Model<float> model, double threshold = kDefaultMoodThreshold,
                               std::vector<double> loss_history = {});

  EmotionDistribution distribution(const GrayImage& pixels) const;
  /// Forward pass followed by make_mood_report. Throws BadImageShape unless
  /// the image is 48x48 with values in [0,1].
  MoodReport classify(const GrayImage& pixels) const;

  double threshold() const noexcept { return threshold_; }
  const nn::Model<float>& model() const noexcept { return *model_; }
  const std::vector<double>& loss_history() const noexcept { return loss_history_; }

  void save(const std::filesystem::path& path) const;
  static MoodImageClassifier load(const std::filesystem::path& path);

 private:
  std::shared_ptr<const nn::Model<float>> model_;
  double threshold_;
  std::vector<double> loss_history_;
};

/// Encodes labeled songs with `pipeline`.
std::vector<LabeledLyric> label_songs(std::span<const SongEntry> songs, const LyricPipeline& pipeline);

/// Vocabulary over the stop-word-filtered tokens of `songs`.
Vocabulary build_lyric_vocabulary(std::span<const SongEntry> songs, const StopList& stoplist,
                                  std::size_t max_size = kDefaultVocabularySize);

/// Trains the reference lyric model. Parameters are initialised from
/// config.seed. Throws EmptyCorpus / SingleClassCorpus.
LyricClassifier train_lyric_classifier(std::span<const LabeledLyric> corpus, LyricPipeline pipeline,
                                       const TrainConfig& config);

/// Builds the vocabulary from `songs`, then trains.
LyricClassifier train_lyric_classifier(std::span<const SongEntry> songs, const TrainConfig& config,
                                       const StopList& stoplist = default_stoplist(),
                                       std::size_t sequence_length = kDefaultSequenceLength,
                                       std::size_t vocabulary_size = kDefaultVocabularySize);

MoodImageClassifier train_mood_image_classifier(std::span<const LabeledMoodImage> images,
                                                const TrainConfig& config,
                                                double threshold = kDefaultMoodThreshold);

/// Argmax predictions scored with compute_metrics. Throws EmptyTestSet.
ClassificationMetrics evaluate(const LyricClassifier& c, std::span<const LabeledLyric> test);
ClassificationMetrics evaluate(const MoodImageClassifier& c, std::span<const LabeledMoodImage> test);

/// Continues training from the classifier's parameters and returns a new
/// classifier; `c` is left untouched. Throws EmptyCorpus.
LyricClassifier retrain(const LyricClassifier& c, std::span<const LabeledLyric> new_data, const TrainConfig& config);
MoodImageClassifier retrain(const MoodImageClassifier& c, std::span<const LabeledMoodImage> new_data,
                            const TrainConfig& config);

/// Seeded shuffle, then the first `train_fraction` go to the training side.
template <typename T>
std::pair<std::vector<T>, std::vector<T>> split_train_test(std::vector<T> items, std::uint64_t seed,
                                                           double train_fraction = 0.8) {
  Rng rng(seed);
  rng.shuffle(items);
  const auto cut = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(items.size())));
  std::vector<T> test(std::make_move_iterator(items.begin() + static_cast<std::ptrdiff_t>(cut)),
                      std::make_move_iterator(items.end()));
  items.resize(cut);
  return {std::move(items), std::move(test)};
}

}  // namespace emorec
