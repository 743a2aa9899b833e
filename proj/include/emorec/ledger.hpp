#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace emorec {

enum class RecordKind { Preference, SongMetadata, EmotionTag, TokenReward, Ownership, Request };

std::string_view to_string(RecordKind k) noexcept;
/// Throws InvalidRecord for an unknown kind name.
RecordKind parse_record_kind(std::string_view s);

struct LedgerRecord {
  RecordKind kind = RecordKind::Request;
  nlohmann::json payload = nlohmann::json::object();
  std::string actor = "system";
  std::int64_t timestamp = 0;  // UTC seconds

  friend bool operator==(const LedgerRecord&, const LedgerRecord&) = default;
};

/// Payload fields each kind must carry.
std::span<const std::string_view> required_fields(RecordKind k) noexcept;

/// Throws InvalidRecord naming the kind and the missing field, or
/// InvalidAmount when a token_reward amount is not an integer >= 1.
void validate_record(const LedgerRecord& r);

inline constexpr std::string_view kGenesisPrevHash = "0000000000000000000000000000000000000000000000000000000000000000";

struct LedgerBlock {
  std::int64_t index = 0;
  std::string prev_hash;
  std::vector<LedgerRecord> records;
  std::int64_t timestamp = 0;
  std::string hash;

  friend bool operator==(const LedgerBlock&, const LedgerBlock&) = default;
};

/// SHA-256 as 64 lowercase hex characters.
std::string sha256_hex(std::string_view bytes);

nlohmann::json record_to_json(const LedgerRecord& r);
LedgerRecord record_from_json(const nlohmann::json& j);

/// Sorted keys, no whitespace.
std::string canonical_json(const nlohmann::json& j);

/// Hash over index, prev_hash, records and timestamp (everything but `hash`).
std::string compute_block_hash(const LedgerBlock& b);

/// The block's line in the chain file, hash included.
std::string serialize_block(const LedgerBlock& b);
/// Throws Parse on malformed JSON or missing fields.
LedgerBlock parse_block(std::string_view line);

struct VerifyResult {
  bool ok = true;
  std::optional<std::size_t> first_bad_index;
  std::string reason;
};

/// Recomputes every hash and link. Corruption is reported, never thrown.
VerifyResult verify_chain(std::span<const LedgerBlock> chain);

/// Verifies a chain file line by line. A line that does not parse, or that
/// differs from the canonical serialization of what it parses to, is bad.
VerifyResult verify_chain_file(const std::filesystem::path& path);

/// Records of `kind` whose payload has every key in `filter` with an equal
/// value, in chain order.
std::vector<LedgerRecord> query(std::span<const LedgerBlock> chain, RecordKind kind,
                                const nlohmann::json& filter = nlohmann::json::object());

/// Sum of token_reward amounts per user.
std::map<std::string, std::int64_t> token_balances(std::span<const LedgerBlock> chain);

/// "YYYY-MM-DD" for a UTC timestamp.
std::string utc_date(std::int64_t timestamp);

/// Count of request records per UTC calendar date.
std::map<std::string, std::int64_t> requests_per_day(std::span<const LedgerBlock> chain);

/// Where committed blocks live. The ledger only ever appends.
class BlockStorage {
 public:
  virtual ~BlockStorage() = default;
  virtual std::vector<LedgerBlock> load() = 0;
  /// Must be durable (or throw) before returning.
  virtual void store(const LedgerBlock& block) = 0;
};

class MemoryStorage final : public BlockStorage {
 public:
  std::vector<LedgerBlock> load() override { return {}; }
  void store(const LedgerBlock&) override {}
};

/// One canonical JSON block per line.
class JsonLinesStorage final : public BlockStorage {
 public:
  explicit JsonLinesStorage(std::filesystem::path path) : path_(std::move(path)) {}
  /// Throws Parse if the existing file fails verification.
  std::vector<LedgerBlock> load() override;
  void store(const LedgerBlock& block) override;

 private:
  std::filesystem::path path_;
};

using Clock = std::function<std::int64_t()>;

/// Seconds since the epoch from the system clock.
std::int64_t system_clock_seconds();

/// Append-only hash chain. Appends are serialized; readers see committed
/// blocks only. Token balances are cached and always equal the chain sums.
class Ledger {
 public:
  explicit Ledger(std::unique_ptr<BlockStorage> storage = std::make_unique<MemoryStorage>(),
                  Clock clock = system_clock_seconds);
  Ledger(const Ledger&) = delete;
  Ledger& operator=(const Ledger&) = delete;

  /// One block per call. Throws InvalidRecord / InvalidAmount for the first
  /// failing record, InvalidRecord for an empty list.
  LedgerBlock append(std::vector<LedgerRecord> records);

  /// Appends one token_reward record. Throws InvalidAmount when amount < 1.
  LedgerBlock award_tokens(const std::string& user, std::int64_t amount, const std::string& reason);

  std::int64_t balance(const std::string& user) const;
  std::size_t size() const;
  std::vector<LedgerBlock> blocks() const;
  VerifyResult verify() const;
  std::vector<LedgerRecord> query(RecordKind kind, const nlohmann::json& filter = nlohmann::json::object()) const;
  std::map<std::string, std::int64_t> requests_per_day() const;
  std::int64_t now() const { return clock_(); }

 private:
  mutable std::shared_mutex mutex_;
  std::unique_ptr<BlockStorage> storage_;
  Clock clock_;
  std::vector<LedgerBlock> chain_;
  std::map<std::string, std::int64_t> balances_;
};

}  // namespace emorec
