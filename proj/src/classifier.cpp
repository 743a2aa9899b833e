#include "emorec/classifier.hpp"

#include "emorec/error.hpp"
#include "emorec/nn/architectures.hpp"
#include "emorec/nn/checkpoint.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace emorec {

namespace {

nn::Tensor<float> ids_tensor(const EncodedLyrics& ids) {
  nn::Tensor<float> t({static_cast<nn::Index>(ids.size())});
  for (std::size_t i = 0; i < ids.size(); ++i) t[static_cast<nn::Index>(i)] = static_cast<float>(ids[i]);
  return t;
}

nn::Tensor<float> image_tensor(const GrayImage& pixels) {
  if (pixels.rows() != kMoodImageSide || pixels.cols() != kMoodImageSide) {
    throw Error(Errc::BadImageShape, "expected a 48x48 image, got " + std::to_string(pixels.rows()) + "x" +
                                         std::to_string(pixels.cols()));
  }
  if (!pixels.allFinite() || pixels.minCoeff() < 0.0f || pixels.maxCoeff() > 1.0f) {
    throw Error(Errc::BadImageShape, "pixel values must lie in [0,1]");
  }
  nn::Tensor<float> t(nn::mood_image_input_shape());
  std::copy(pixels.data(), pixels.data() + pixels.size(), t.data().data());
  return t;
}

EmotionDistribution to_distribution(const nn::Tensor<float>& probs) {
  if (probs.size() != kEmotionCount) {
    throw ShapeError(-1, "classifier must output " + std::to_string(kEmotionCount) + " probabilities");
  }
  EmotionVector v;
  for (int i = 0; i < kEmotionCount; ++i) v(i) = static_cast<double>(probs[i]);
  return EmotionDistribution::normalized(v);
}

EmotionLabel argmax_label(const nn::Tensor<float>& probs) {
  nn::Index best = 0;
  for (nn::Index i = 1; i < probs.size(); ++i) {
    if (probs[i] > probs[best]) best = i;
  }
  return label_from_ordinal(static_cast<int>(best));
}

template <typename Range, typename LabelOf>
void require_two_classes(const Range& items, LabelOf label_of) {
  std::set<int> seen;
  for (const auto& item : items) seen.insert(ordinal(label_of(item)));
  if (seen.size() < 2) throw Error(Errc::SingleClassCorpus, "training data needs at least two labels");
}

std::vector<nn::Sample<float>> lyric_samples(std::span<const LabeledLyric> data, std::size_t length) {
  std::vector<nn::Sample<float>> samples;
  samples.reserve(data.size());
  for (const auto& d : data) {
    if (d.encoded.size() != length) {
      throw ShapeError(0, "lyric '" + d.song_id + "' encoded to " + std::to_string(d.encoded.size()) +
                              " ids, pipeline expects " + std::to_string(length));
    }
    samples.push_back({ids_tensor(d.encoded), ordinal(d.label)});
  }
  return samples;
}

std::vector<nn::Sample<float>> image_samples(std::span<const LabeledMoodImage> data) {
  std::vector<nn::Sample<float>> samples;
  samples.reserve(data.size());
  for (const auto& d : data) samples.push_back({image_tensor(d.pixels), ordinal(d.label)});
  return samples;
}

std::string join_stoplist(const StopList& list) {
  const std::set<std::string> sorted(list.begin(), list.end());
  std::string out;
  for (const auto& w : sorted) out += (out.empty() ? "" : ",") + w;
  return out;
}

StopList split_stoplist(const std::string& joined) {
  StopList out;
  std::istringstream is(joined);
  std::string w;
  while (std::getline(is, w, ',')) {
    if (!w.empty()) out.insert(w);
  }
  return out;
}

std::filesystem::path vocab_path(const std::filesystem::path& checkpoint) {
  auto p = checkpoint;
  p += ".vocab";
  return p;
}

}  // namespace

EncodedLyrics LyricPipeline::encode(std::string_view lyrics) const {
  if (!vocabulary) throw Error(Errc::InvalidArgument, "lyric pipeline has no vocabulary");
  return encode_lyrics(lyrics, *vocabulary, stoplist, sequence_length);
}

LyricClassifier::LyricClassifier(nn::Model<float> model, LyricPipeline pipeline, std::vector<double> loss_history)
    : model_(std::make_shared<const nn::Model<float>>(std::move(model))),
      pipeline_(std::move(pipeline)),
      loss_history_(std::move(loss_history)) {
  if (!pipeline_.vocabulary) throw Error(Errc::InvalidArgument, "lyric classifier needs a vocabulary");
  if (model_->input_shape() != nn::lyric_input_shape(static_cast<nn::Index>(pipeline_.sequence_length))) {
    throw ShapeError(0, "model input does not match the pipeline sequence length");
  }
}

EmotionDistribution LyricClassifier::classify(std::string_view lyrics) const {
  return classify_encoded(pipeline_.encode(lyrics));
}

EmotionDistribution LyricClassifier::classify_encoded(const EncodedLyrics& ids) const {
  return to_distribution(model_->forward(ids_tensor(ids)));
}

void LyricClassifier::save(const std::filesystem::path& path) const {
  nn::save_checkpoint(path, *model_,
                      {{"kind", "lyrics"},
                       {"taxonomy", std::string(kTaxonomyVersion)},
                       {"sequence_length", std::to_string(pipeline_.sequence_length)},
                       {"stoplist", join_stoplist(pipeline_.stoplist)}});
  pipeline_.vocabulary->save(vocab_path(path));
}

LyricClassifier LyricClassifier::load(const std::filesystem::path& path) {
  auto ck = nn::load_checkpoint(path);
  if (ck.meta["kind"] != "lyrics") throw Error(Errc::Parse, path.string() + " is not a lyric classifier");
  if (ck.meta["taxonomy"] != kTaxonomyVersion) throw Error(Errc::Parse, "checkpoint taxonomy mismatch");
  LyricPipeline pipeline;
  pipeline.vocabulary = std::make_shared<const Vocabulary>(Vocabulary::load(vocab_path(path)));
  pipeline.sequence_length = std::stoull(ck.meta.at("sequence_length"));
  pipeline.stoplist = split_stoplist(ck.meta["stoplist"]);
  return LyricClassifier(std::move(ck.model), std::move(pipeline));
}

MoodImageClassifier::MoodImageClassifier(nn::Model<float> model, double threshold, std::vector<double> loss_history)
    : model_(std::make_shared<const nn::Model<float>>(std::move(model))),
      threshold_(threshold),
      loss_history_(std::move(loss_history)) {
  if (model_->input_shape() != nn::mood_image_input_shape()) {
    throw ShapeError(0, "mood image model must take 48x48x1 input");
  }
  if (!(threshold_ > 0.0 && threshold_ < 1.0)) throw Error(Errc::InvalidArgument, "threshold must lie in (0,1)");
}

EmotionDistribution MoodImageClassifier::distribution(const GrayImage& pixels) const {
  return to_distribution(model_->forward(image_tensor(pixels)));
}

MoodReport MoodImageClassifier::classify(const GrayImage& pixels) const {
  return make_mood_report(distribution(pixels), threshold_);
}

void MoodImageClassifier::save(const std::filesystem::path& path) const {
  std::ostringstream t;
  t.precision(17);
  t << threshold_;
  nn::save_checkpoint(path, *model_,
                      {{"kind", "mood_image"}, {"taxonomy", std::string(kTaxonomyVersion)}, {"threshold", t.str()}});
}

MoodImageClassifier MoodImageClassifier::load(const std::filesystem::path& path) {
  auto ck = nn::load_checkpoint(path);
  if (ck.meta["kind"] != "mood_image") throw Error(Errc::Parse, path.string() + " is not a mood image classifier");
  if (ck.meta["taxonomy"] != kTaxonomyVersion) throw Error(Errc::Parse, "checkpoint taxonomy mismatch");
  return MoodImageClassifier(std::move(ck.model), std::stod(ck.meta.at("threshold")));
}

std::vector<LabeledLyric> label_songs(std::span<const SongEntry> songs, const LyricPipeline& pipeline) {
  std::vector<LabeledLyric> out;
  out.reserve(songs.size());
  for (const auto& s : songs) out.push_back({s.id, pipeline.encode(s.lyrics), s.label()});
  return out;
}

Vocabulary build_lyric_vocabulary(std::span<const SongEntry> songs, const StopList& stoplist,
                                  std::size_t max_size) {
  std::vector<TokenList> docs;
  docs.reserve(songs.size());
  for (const auto& s : songs) {
    const auto tokens = tokenize(s.lyrics);
    docs.push_back(remove_stopwords(tokens, stoplist));
  }
  return Vocabulary::build(docs, max_size);
}

LyricClassifier train_lyric_classifier(std::span<const LabeledLyric> corpus, LyricPipeline pipeline,
                                       const TrainConfig& config) {
  if (corpus.empty()) throw Error(Errc::EmptyCorpus, "no labeled lyrics");
  require_two_classes(corpus, [](const LabeledLyric& l) { return l.label; });
  if (!pipeline.vocabulary) throw Error(Errc::InvalidArgument, "lyric pipeline has no vocabulary");
  const auto length = static_cast<nn::Index>(pipeline.sequence_length);
  auto model = nn::Model<float>::build(
      nn::lyric_input_shape(length),
      nn::lyric_model_layers(static_cast<nn::Index>(pipeline.vocabulary->id_space())), config.seed);
  auto result = nn::train(std::move(model), lyric_samples(corpus, pipeline.sequence_length), config);
  return LyricClassifier(std::move(result.model), std::move(pipeline), std::move(result.loss_history));
}

LyricClassifier train_lyric_classifier(std::span<const SongEntry> songs, const TrainConfig& config,
                                       const StopList& stoplist, std::size_t sequence_length,
                                       std::size_t vocabulary_size) {
  if (songs.empty()) throw Error(Errc::EmptyCorpus, "no songs to train on");
  LyricPipeline pipeline;
  pipeline.vocabulary = std::make_shared<const Vocabulary>(build_lyric_vocabulary(songs, stoplist, vocabulary_size));
  pipeline.stoplist = stoplist;
  pipeline.sequence_length = sequence_length;
  const auto labeled = label_songs(songs, pipeline);
  return train_lyric_classifier(labeled, std::move(pipeline), config);
}

MoodImageClassifier train_mood_image_classifier(std::span<const LabeledMoodImage> images,
                                                const TrainConfig& config, double threshold) {
  if (images.empty()) throw Error(Errc::EmptyCorpus, "no labeled images");
  require_two_classes(images, [](const LabeledMoodImage& l) { return l.label; });
  auto model = nn::Model<float>::build(nn::mood_image_input_shape(), nn::mood_image_model_layers(), config.seed);
  auto result = nn::train(std::move(model), image_samples(images), config);
  return MoodImageClassifier(std::move(result.model), threshold, std::move(result.loss_history));
}

ClassificationMetrics evaluate(const LyricClassifier& c, std::span<const LabeledLyric> test) {
  if (test.empty()) throw Error(Errc::EmptyTestSet, "no lyrics to evaluate");
  std::vector<EmotionLabel> predictions, truths;
  for (const auto& t : test) {
    predictions.push_back(argmax_label(c.model().forward(ids_tensor(t.encoded))));
    truths.push_back(t.label);
  }
  return compute_metrics(predictions, truths);
}

ClassificationMetrics evaluate(const MoodImageClassifier& c, std::span<const LabeledMoodImage> test) {
  if (test.empty()) throw Error(Errc::EmptyTestSet, "no images to evaluate");
  std::vector<EmotionLabel> predictions, truths;
  for (const auto& t : test) {
    predictions.push_back(argmax_label(c.model().forward(image_tensor(t.pixels))));
    truths.push_back(t.label);
  }
  return compute_metrics(predictions, truths);
}

LyricClassifier retrain(const LyricClassifier& c, std::span<const LabeledLyric> new_data,
                        const TrainConfig& config) {
  if (new_data.empty()) throw Error(Errc::EmptyCorpus, "no new lyrics to retrain on");
  auto result = nn::train(c.model(), lyric_samples(new_data, c.pipeline().sequence_length), config);
  return LyricClassifier(std::move(result.model), c.pipeline(), std::move(result.loss_history));
}

MoodImageClassifier retrain(const MoodImageClassifier& c, std::span<const LabeledMoodImage> new_data,
                            const TrainConfig& config) {
  if (new_data.empty()) throw Error(Errc::EmptyCorpus, "no new images to retrain on");
  auto result = nn::train(c.model(), image_samples(new_data), config);
  return MoodImageClassifier(std::move(result.model), c.threshold(), std::move(result.loss_history));
}

}  // namespace emorec
