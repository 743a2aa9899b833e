#pragma once

#include "emorec/catalog.hpp"
#include "emorec/classifier.hpp"
#include "emorec/config.hpp"
#include "emorec/ledger.hpp"
#include "emorec/recommender.hpp"

#include <nlohmann/json.hpp>

#include <atomic>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>

namespace emorec {

/// Status code plus JSON body; errors are {"error": <code>, "message": ...}.
struct Response {
  int status = 200;
  nlohmann::json body;
};

struct SessionState {
  std::string user_id;
  std::optional<MoodReport> mood;
  std::set<std::string> liked;
  std::int64_t created_at = 0;
  std::int64_t last_event = 0;
};

/// Everything a Service runs on. The catalog and classifier are shared
/// read-only between requests.
struct ServiceParts {
  ServiceConfig config;
  std::vector<SongRecord> catalog;
  std::shared_ptr<const MoodImageClassifier> mood_classifier;
  std::unique_ptr<Ledger> ledger;
  /// Defaults to a StubCatalogProvider over `catalog`.
  std::unique_ptr<CatalogProvider> provider;
  Clock clock = system_clock_seconds;
};

/// Decodes standard base64, ignoring whitespace and an optional
/// "data:...;base64," prefix. Throws InvalidArgument.
std::string decode_base64(std::string_view text);
std::string encode_base64(std::string_view bytes);

/// Request handlers independent of the HTTP transport. Each /mood and
/// /recommendations call appends exactly one request record to the ledger,
/// whatever its outcome.
class Service {
 public:
  explicit Service(ServiceParts parts);
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  Response post_mood(std::string_view body);
  Response get_recommendations(const std::optional<std::string>& user_id, const std::optional<std::string>& k);
  Response post_feedback(std::string_view body);
  Response get_ledger_verify() const;
  Response get_requests_metrics() const;
  Response get_balance(const std::optional<std::string>& user_id) const;
  Response get_catalog() const;

  /// Replaces the mood classifier; requests already running keep the old one.
  void swap_mood_classifier(std::shared_ptr<const MoodImageClassifier> next);

  const ServiceConfig& config() const noexcept { return config_; }
  const Ledger& ledger() const noexcept { return *ledger_; }
  const InteractionStore& interactions() const noexcept { return store_; }
  std::size_t session_count() const;

 private:
  struct Slot {
    std::mutex mutex;
    SessionState state;
    std::atomic<std::int64_t> last_seen{0};
  };

  std::shared_ptr<Slot> find_session(const std::string& user, bool create);
  std::shared_ptr<const MoodImageClassifier> mood_classifier() const;
  Response log_request(std::string_view endpoint, const std::string& user, Response r);

  ServiceConfig config_;
  std::vector<SongRecord> catalog_;
  std::unordered_map<std::string, std::size_t> catalog_index_;
  std::unique_ptr<Ledger> ledger_;
  std::unique_ptr<CatalogProvider> provider_;
  Clock clock_;
  InteractionStore store_;

  mutable std::mutex classifier_mutex_;
  std::shared_ptr<const MoodImageClassifier> mood_classifier_;

  mutable std::mutex sessions_mutex_;
  std::map<std::string, std::shared_ptr<Slot>> sessions_;
};

/// Builds a service from files named in `config`. Catalog tags are predicted
/// when checkpoint_path is set. Without image_checkpoint_path a mood
/// classifier is trained on synthetic glyphs from config.seed. Feedback
/// history is rebuilt from the chain.
std::unique_ptr<Service> make_service(const ServiceConfig& config, Clock clock = system_clock_seconds);

/// The mood classifier used when no image checkpoint is configured.
MoodImageClassifier default_mood_classifier(std::uint64_t seed, double threshold);

}  // namespace emorec
