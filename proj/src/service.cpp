#include "emorec/service.hpp"

#include "emorec/error.hpp"
#include "emorec/image.hpp"
#include "emorec/synthetic.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <charconv>
#include <limits>

namespace emorec {

namespace {

using json = nlohmann::json;

constexpr int kMaxK = 100;

Response fail(int status, std::string_view code, std::string message) {
  return {status, {{"error", code}, {"message", std::move(message)}}};
}

json distribution_json(const EmotionDistribution& d) {
  json out = json::object();
  for (EmotionLabel e : kAllEmotions) out[std::string(to_string(e))] = d[e];
  return out;
}

json labels_json(const std::vector<EmotionLabel>& labels) {
  json out = json::array();
  for (EmotionLabel e : labels) out.push_back(to_string(e));
  return out;
}

std::optional<json> parse_object(std::string_view body) {
  auto j = json::parse(body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) return std::nullopt;
  return j;
}

std::optional<std::string> string_field(const json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end() || !it->is_string()) return std::nullopt;
  return it->get<std::string>();
}

}  // namespace

std::string decode_base64(std::string_view text) {
  if (const auto comma = text.find(','); text.starts_with("data:") && comma != std::string_view::npos) {
    text.remove_prefix(comma + 1);
  }
  std::string clean;
  clean.reserve(text.size());
  for (char c : text)
    if (c != ' ' && c != '\n' && c != '\r' && c != '\t') clean += c;
  if (clean.size() % 4 != 0) throw Error(Errc::InvalidArgument, "base64 length is not a multiple of 4");
  std::string out(clean.size() / 4 * 3, '\0');
  const int n = EVP_DecodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                                reinterpret_cast<const unsigned char*>(clean.data()), static_cast<int>(clean.size()));
  if (n < 0) throw Error(Errc::InvalidArgument, "invalid base64");
  std::size_t padding = 0;
  while (padding < 2 && padding < clean.size() && clean[clean.size() - 1 - padding] == '=') ++padding;
  out.resize(static_cast<std::size_t>(n) - padding);
  return out;
}

std::string encode_base64(std::string_view bytes) {
  std::string out(4 * ((bytes.size() + 2) / 3) + 1, '\0');
  const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                                reinterpret_cast<const unsigned char*>(bytes.data()), static_cast<int>(bytes.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

Service::Service(ServiceParts parts)
    : config_(std::move(parts.config)),
      catalog_(std::move(parts.catalog)),
      ledger_(std::move(parts.ledger)),
      provider_(std::move(parts.provider)),
      clock_(std::move(parts.clock)),
      mood_classifier_(std::move(parts.mood_classifier)) {
  config_.validate();
  if (catalog_.empty()) throw Error(Errc::EmptyCatalog, "the service needs a non-empty catalog");
  validate_catalog(catalog_);
  if (!mood_classifier_) throw Error(Errc::InvalidArgument, "the service needs a mood classifier");
  if (!ledger_) ledger_ = std::make_unique<Ledger>(std::make_unique<MemoryStorage>(), clock_);
  if (!provider_) provider_ = std::make_unique<StubCatalogProvider>(catalog_);
  for (std::size_t i = 0; i < catalog_.size(); ++i) catalog_index_.emplace(catalog_[i].song_id, i);
  for (const auto& r : ledger_->query(RecordKind::Preference)) {
    store_.append({r.payload.at("user_id").get<std::string>(), r.payload.at("song_id").get<std::string>(),
                   parse_feedback(r.payload.at("feedback").get<std::string>()), r.timestamp});
  }
}

std::shared_ptr<Service::Slot> Service::find_session(const std::string& user, bool create) {
  const std::int64_t now = clock_();
  const std::int64_t idle = static_cast<std::int64_t>(config_.session_idle_minutes) * 60;
  std::lock_guard lock(sessions_mutex_);
  std::erase_if(sessions_, [&](const auto& kv) { return now - kv.second->last_seen.load() > idle; });
  auto it = sessions_.find(user);
  if (it == sessions_.end()) {
    if (!create) return nullptr;
    auto slot = std::make_shared<Slot>();
    slot->state.user_id = user;
    slot->state.created_at = now;
    slot->state.last_event = std::numeric_limits<std::int64_t>::min();
    it = sessions_.emplace(user, std::move(slot)).first;
  }
  it->second->last_seen = now;
  return it->second;
}

std::size_t Service::session_count() const {
  std::lock_guard lock(sessions_mutex_);
  return sessions_.size();
}

std::shared_ptr<const MoodImageClassifier> Service::mood_classifier() const {
  std::lock_guard lock(classifier_mutex_);
  return mood_classifier_;
}

void Service::swap_mood_classifier(std::shared_ptr<const MoodImageClassifier> next) {
  if (!next) throw Error(Errc::InvalidArgument, "cannot swap in an empty classifier");
  std::lock_guard lock(classifier_mutex_);
  mood_classifier_ = std::move(next);
}

Response Service::log_request(std::string_view endpoint, const std::string& user, Response r) {
  LedgerRecord rec;
  rec.kind = RecordKind::Request;
  rec.payload = {{"endpoint", endpoint}, {"user_id", user}, {"status", r.status}};
  rec.actor = user.empty() ? "system" : user;
  rec.timestamp = clock_();
  ledger_->append({std::move(rec)});
  return r;
}

Response Service::post_mood(std::string_view body) {
  const auto j = parse_object(body);
  std::string user;
  const auto handle = [&]() -> Response {
    if (!j) return fail(400, "BadJson", "body must be a JSON object");
    const auto user_id = string_field(*j, "user_id");
    if (!user_id || user_id->empty()) return fail(400, "InvalidUserId", "user_id must be a non-empty string");
    user = *user_id;
    const bool has_label = j->contains("self_report"), has_image = j->contains("image");
    if (has_label == has_image) {
      return fail(400, "BothOrNeitherChannel", "send exactly one of self_report and image");
    }
    std::optional<MoodReport> report;
    if (has_label) {
      const auto label = string_field(*j, "self_report");
      const auto parsed = label ? try_parse_emotion(*label) : std::nullopt;
      if (!parsed) return fail(400, "UnknownLabel", "self_report must be one of happy, sad, surprise, disgust, neutral");
      report = make_mood_report(EmotionDistribution::one_hot(*parsed), config_.mood_threshold);
    } else {
      const auto encoded = string_field(*j, "image");
      if (!encoded) return fail(400, "BadImage", "image must be a base64 string");
      try {
        report = mood_classifier()->classify(decode_pgm(decode_base64(*encoded)));
      } catch (const Error& e) {
        return fail(400, "BadImage", e.what());
      }
    }
    const auto slot = find_session(user, true);
    {
      std::lock_guard lock(slot->mutex);
      slot->state.mood = report;
    }
    return {200,
            {{"user_id", user},
             {"channel", has_label ? "self_report" : "image"},
             {"reported", labels_json(report->reported)},
             {"distribution", distribution_json(report->distribution)},
             {"threshold", report->threshold}}};
  };
  return log_request("/mood", user, handle());
}

Response Service::get_recommendations(const std::optional<std::string>& user_id, const std::optional<std::string>& k) {
  std::string user;
  const auto handle = [&]() -> Response {
    if (!user_id || user_id->empty()) return fail(400, "InvalidUserId", "user_id query parameter is required");
    user = *user_id;
    int count = 10;
    if (k) {
      const auto [ptr, ec] = std::from_chars(k->data(), k->data() + k->size(), count);
      if (ec != std::errc{} || ptr != k->data() + k->size() || count < 1 || count > kMaxK) {
        return fail(400, "BadK", "k must be an integer in [1, 100]");
      }
    }
    const auto slot = find_session(user, false);
    if (!slot) return fail(409, "NoMoodSet", "submit a mood first");
    std::lock_guard lock(slot->mutex);
    if (!slot->state.mood) return fail(409, "NoMoodSet", "submit a mood first");

    RecommendOptions opt;
    opt.k = static_cast<std::size_t>(count);
    opt.weights = config_.weights;
    opt.lambda = config_.blend_lambda;
    opt.exclude = slot->state.liked;
    const auto ranked = recommend(user, slot->state.mood->distribution, catalog_, store_, opt);

    json items = json::array();
    for (std::size_t i = 0; i < ranked.size(); ++i) {
      const auto& r = ranked[i];
      const auto& song = catalog_[catalog_index_.at(r.song_id)];
      json item = {{"rank", i + 1},
                   {"song_id", r.song_id},
                   {"title", song.title},
                   {"artist", song.artist},
                   {"score", r.score},
                   {"components",
                    {{"emotion_affinity", r.components.emotion_affinity},
                     {"cf_score", r.components.cf_score},
                     {"content_score", r.components.content_score}}}};
      if (const auto ext = provider_->lookup(r.song_id)) {
        item["catalog_ref"] = ext->ref;
        item["url"] = ext->url;
      }
      items.push_back(std::move(item));
    }
    return {200, {{"user_id", user}, {"mood", labels_json(slot->state.mood->reported)}, {"recommendations", items}}};
  };
  return log_request("/recommendations", user, handle());
}

Response Service::post_feedback(std::string_view body) {
  const auto j = parse_object(body);
  if (!j) return fail(400, "BadJson", "body must be a JSON object");
  const auto user = string_field(*j, "user_id");
  if (!user || user->empty()) return fail(400, "InvalidUserId", "user_id must be a non-empty string");
  const auto song = string_field(*j, "song_id");
  if (!song) return fail(400, "InvalidSongId", "song_id must be a string");
  const auto fb_text = string_field(*j, "feedback");
  std::optional<Feedback> feedback;
  if (fb_text && (*fb_text == "like" || *fb_text == "skip")) feedback = parse_feedback(*fb_text);
  if (!feedback) return fail(400, "BadFeedback", "feedback must be \"like\" or \"skip\"");
  if (!catalog_index_.contains(*song)) return fail(404, "UnknownSong", "no song '" + *song + "' in the catalog");
  const auto slot = find_session(*user, false);
  if (!slot) return fail(409, "NoSession", "submit a mood first");

  std::lock_guard lock(slot->mutex);
  const std::int64_t ts = std::max(clock_(), slot->state.last_event);
  LedgerRecord pref{RecordKind::Preference,
                    {{"user_id", *user}, {"song_id", *song}, {"feedback", to_string(*feedback)}},
                    *user,
                    ts};
  LedgerRecord reward{RecordKind::TokenReward, {{"user_id", *user}, {"amount", 1}, {"reason", "feedback"}}, "system", ts};
  ledger_->append({std::move(pref), std::move(reward)});
  store_.append({*user, *song, *feedback, ts});
  slot->state.last_event = ts;
  if (*feedback == Feedback::Like) slot->state.liked.insert(*song);
  return {200,
          {{"user_id", *user},
           {"song_id", *song},
           {"feedback", to_string(*feedback)},
           {"tokens_awarded", 1},
           {"token_balance", ledger_->balance(*user)}}};
}

Response Service::get_ledger_verify() const {
  const auto result = !config_.chain_path.empty() && std::filesystem::exists(config_.chain_path)
                          ? verify_chain_file(config_.chain_path)
                          : ledger_->verify();
  json body = {{"ok", result.ok}};
  if (!result.ok) {
    body["first_bad_index"] = *result.first_bad_index;
    body["reason"] = result.reason;
  }
  return {200, body};
}

Response Service::get_requests_metrics() const {
  json body = json::object();
  for (const auto& [date, n] : ledger_->requests_per_day()) body[date] = n;
  return {200, body};
}

Response Service::get_balance(const std::optional<std::string>& user_id) const {
  if (!user_id || user_id->empty()) return fail(400, "InvalidUserId", "user_id query parameter is required");
  return {200, {{"user_id", *user_id}, {"token_balance", ledger_->balance(*user_id)}}};
}

Response Service::get_catalog() const {
  json songs = json::array();
  for (const auto& s : catalog_) {
    songs.push_back({{"song_id", s.song_id},
                     {"title", s.title},
                     {"artist", s.artist},
                     {"profile", distribution_json(song_emotion_profile(s, config_.blend_lambda))}});
  }
  return {200, {{"songs", songs}}};
}

MoodImageClassifier default_mood_classifier(std::uint64_t seed, double threshold) {
  TrainConfig cfg;
  cfg.seed = seed;
  return train_mood_image_classifier(synthetic::glyph_dataset(30, seed), cfg, threshold);
}

std::unique_ptr<Service> make_service(const ServiceConfig& config, Clock clock) {
  config.validate();
  if (config.catalog_path.empty()) throw Error(Errc::InvalidArgument, "catalog_path is required");
  ServiceParts parts;
  parts.config = config;
  parts.clock = clock;
  std::optional<LyricClassifier> lyrics;
  if (!config.checkpoint_path.empty()) lyrics = LyricClassifier::load(config.checkpoint_path);
  parts.catalog = load_catalog(config.catalog_path, lyrics ? &*lyrics : nullptr);
  if (!config.image_checkpoint_path.empty()) {
    const auto loaded = MoodImageClassifier::load(config.image_checkpoint_path);
    parts.mood_classifier = std::make_shared<const MoodImageClassifier>(loaded.model(), config.mood_threshold);
  } else {
    parts.mood_classifier =
        std::make_shared<const MoodImageClassifier>(default_mood_classifier(config.seed, config.mood_threshold));
  }
  if (config.chain_path.empty()) {
    parts.ledger = std::make_unique<Ledger>(std::make_unique<MemoryStorage>(), clock);
  } else {
    parts.ledger = std::make_unique<Ledger>(std::make_unique<JsonLinesStorage>(config.chain_path), clock);
  }
  return std::make_unique<Service>(std::move(parts));
}

}  // namespace emorec
