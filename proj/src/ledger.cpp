#include "emorec/ledger.hpp"

#include "emorec/error.hpp"

#include <openssl/evp.h>

#include <array>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <mutex>

namespace emorec {

namespace {

using json = nlohmann::json;

constexpr std::array<std::string_view, 6> kKindNames = {"preference", "song_metadata", "emotion_tag",
                                                        "token_reward", "ownership",     "request"};

constexpr std::array<std::string_view, 3> kPreferenceFields = {"user_id", "song_id", "feedback"};
constexpr std::array<std::string_view, 3> kSongMetadataFields = {"song_id", "title", "artist"};
constexpr std::array<std::string_view, 2> kEmotionTagFields = {"song_id", "tags"};
constexpr std::array<std::string_view, 3> kTokenRewardFields = {"user_id", "amount", "reason"};
constexpr std::array<std::string_view, 3> kOwnershipFields = {"song_id", "owner", "rights"};
constexpr std::array<std::string_view, 1> kRequestFields = {"endpoint"};

bool is_hex64(const std::string& s) {
  if (s.size() != 64) return false;
  for (char c : s)
    if (!((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'))) return false;
  return true;
}

VerifyResult bad(std::size_t i, std::string why) { return {false, i, std::move(why)}; }

// Checks block `i` against its predecessor's hash.
/// `computed_hash` saves rehashing when the caller already has the digest.
std::optional<std::string> block_problem(const LedgerBlock& b, std::size_t i, const std::string& expected_prev,
                                         const std::string* computed_hash = nullptr) {
  if (b.index != static_cast<std::int64_t>(i)) return "index " + std::to_string(b.index) + " at position " + std::to_string(i);
  if (b.prev_hash != expected_prev) return "prev_hash does not match the previous block";
  if (!is_hex64(b.hash)) return "hash is not 64 lowercase hex characters";
  if (b.records.empty()) return "block has no records";
  try {
    for (const auto& r : b.records) validate_record(r);
  } catch (const Error& e) {
    return std::string("invalid record: ") + e.what();
  }
  if ((computed_hash ? *computed_hash : compute_block_hash(b)) != b.hash) return "hash mismatch";
  return std::nullopt;
}

}  // namespace

std::string_view to_string(RecordKind k) noexcept { return kKindNames[static_cast<std::size_t>(k)]; }

RecordKind parse_record_kind(std::string_view s) {
  for (std::size_t i = 0; i < kKindNames.size(); ++i)
    if (kKindNames[i] == s) return static_cast<RecordKind>(i);
  throw Error(Errc::InvalidRecord, "unknown record kind '" + std::string(s) + "'");
}

std::span<const std::string_view> required_fields(RecordKind k) noexcept {
  switch (k) {
    case RecordKind::Preference: return kPreferenceFields;
    case RecordKind::SongMetadata: return kSongMetadataFields;
    case RecordKind::EmotionTag: return kEmotionTagFields;
    case RecordKind::TokenReward: return kTokenRewardFields;
    case RecordKind::Ownership: return kOwnershipFields;
    case RecordKind::Request: return kRequestFields;
  }
  return {};
}

void validate_record(const LedgerRecord& r) {
  const std::string kind(to_string(r.kind));
  if (!r.payload.is_object()) throw Error(Errc::InvalidRecord, kind + " payload must be an object");
  if (r.actor.empty()) throw Error(Errc::InvalidRecord, kind + " record needs an actor");
  for (auto field : required_fields(r.kind)) {
    if (!r.payload.contains(field)) {
      throw Error(Errc::InvalidRecord, kind + " record is missing \"" + std::string(field) + "\"");
    }
  }
  if (r.kind == RecordKind::TokenReward) {
    const auto& amount = r.payload["amount"];
    if (!amount.is_number_integer() || amount.get<std::int64_t>() < 1) {
      throw Error(Errc::InvalidAmount, "token_reward amount must be an integer >= 1");
    }
  }
  try {
    (void)r.payload.dump();
  } catch (const json::exception&) {
    throw Error(Errc::InvalidRecord, kind + " payload is not valid UTF-8");
  }
}

std::string sha256_hex(std::string_view bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest.data(), &len, EVP_sha256(), nullptr) != 1) {
    throw Error(Errc::Io, "SHA-256 failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned i = 0; i < len; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 15];
  }
  return out;
}

json record_to_json(const LedgerRecord& r) {
  return {{"kind", to_string(r.kind)}, {"payload", r.payload}, {"actor", r.actor}, {"timestamp", r.timestamp}};
}

LedgerRecord record_from_json(const json& j) {
  LedgerRecord r;
  r.kind = parse_record_kind(j.at("kind").get<std::string>());
  r.payload = j.at("payload");
  r.actor = j.at("actor").get<std::string>();
  r.timestamp = j.at("timestamp").get<std::int64_t>();
  return r;
}

std::string canonical_json(const json& j) { return j.dump(); }

namespace {

json unhashed_block_json(const LedgerBlock& b) {
  json records = json::array();
  for (const auto& r : b.records) records.push_back(record_to_json(r));
  return {{"index", b.index}, {"prev_hash", b.prev_hash}, {"records", std::move(records)}, {"timestamp", b.timestamp}};
}

}  // namespace

std::string compute_block_hash(const LedgerBlock& b) { return sha256_hex(canonical_json(unhashed_block_json(b))); }

std::string serialize_block(const LedgerBlock& b) {
  auto j = unhashed_block_json(b);
  j["hash"] = b.hash;
  return canonical_json(j);
}

namespace {

/// Strict enough that the block re-serializes to exactly `j`.
LedgerBlock block_from_json(const json& j) {
  const auto integer = [](const json& v) { return v.is_number_integer(); };
  if (!j.is_object() || j.size() != 5 || !integer(j.value("index", json())) || !integer(j.value("timestamp", json())) ||
      !j.contains("records") || !j["records"].is_array()) {
    throw Error(Errc::Parse, "malformed block: unexpected fields or types");
  }
  for (const auto& r : j["records"]) {
    if (!r.is_object() || r.size() != 4 || !integer(r.value("timestamp", json()))) {
      throw Error(Errc::Parse, "malformed block: unexpected record fields or types");
    }
  }
  try {
    LedgerBlock b;
    b.index = j.at("index").get<std::int64_t>();
    b.prev_hash = j.at("prev_hash").get<std::string>();
    b.timestamp = j.at("timestamp").get<std::int64_t>();
    b.hash = j.at("hash").get<std::string>();
    for (const auto& r : j.at("records")) b.records.push_back(record_from_json(r));
    return b;
  } catch (const json::exception& e) {
    throw Error(Errc::Parse, std::string("malformed block: ") + e.what());
  }
}

}  // namespace

LedgerBlock parse_block(std::string_view line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception& e) {
    throw Error(Errc::Parse, std::string("malformed block: ") + e.what());
  }
  return block_from_json(j);
}

VerifyResult verify_chain(std::span<const LedgerBlock> chain) {
  std::string prev(kGenesisPrevHash);
  for (std::size_t i = 0; i < chain.size(); ++i) {
    if (auto problem = block_problem(chain[i], i, prev)) return bad(i, *problem);
    prev = chain[i].hash;
  }
  return {};
}

VerifyResult verify_chain_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return bad(0, "cannot open " + path.string());
  const std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::string prev(kGenesisPrevHash);
  std::size_t i = 0;
  for (std::size_t pos = 0; pos < content.size(); ++i) {
    const auto end = content.find('\n', pos);
    if (end == std::string::npos) return bad(i, "last line is not newline-terminated");
    const std::string_view line(content.data() + pos, end - pos);
    pos = end + 1;
    // Works on the parsed object directly: one dump checks the canonical
    // form, a second without "hash" gives the digest.
    LedgerBlock b;
    std::string digest;
    try {
      auto j = json::parse(line);
      if (!j.is_object() || j.dump() != line) return bad(i, "line is not in canonical form");
      b = block_from_json(j);
      j.erase("hash");
      if (j.size() != 4) return bad(i, "unexpected block fields");
      digest = sha256_hex(canonical_json(j));
    } catch (const Error& e) {
      return bad(i, e.what());
    } catch (const std::exception& e) {
      return bad(i, std::string("malformed block: ") + e.what());
    }
    if (auto problem = block_problem(b, i, prev, &digest)) return bad(i, *problem);
    prev = b.hash;
  }
  return {};
}

std::vector<LedgerRecord> query(std::span<const LedgerBlock> chain, RecordKind kind, const json& filter) {
  std::vector<LedgerRecord> out;
  for (const auto& b : chain)
    for (const auto& r : b.records) {
      if (r.kind != kind) continue;
      bool match = true;
      for (const auto& [key, value] : filter.items()) {
        const auto it = r.payload.find(key);
        if (it == r.payload.end() || *it != value) {
          match = false;
          break;
        }
      }
      if (match) out.push_back(r);
    }
  return out;
}

std::map<std::string, std::int64_t> token_balances(std::span<const LedgerBlock> chain) {
  std::map<std::string, std::int64_t> out;
  for (const auto& b : chain)
    for (const auto& r : b.records)
      if (r.kind == RecordKind::TokenReward) {
        out[r.payload.at("user_id").get<std::string>()] += r.payload.at("amount").get<std::int64_t>();
      }
  return out;
}

std::string utc_date(std::int64_t timestamp) {
  using namespace std::chrono;
  const auto days = floor<std::chrono::days>(sys_seconds{seconds{timestamp}});
  const year_month_day ymd{days};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()));
  return buf;
}

std::map<std::string, std::int64_t> requests_per_day(std::span<const LedgerBlock> chain) {
  std::map<std::string, std::int64_t> out;
  for (const auto& b : chain)
    for (const auto& r : b.records)
      if (r.kind == RecordKind::Request) ++out[utc_date(r.timestamp)];
  return out;
}

std::vector<LedgerBlock> JsonLinesStorage::load() {
  if (!std::filesystem::exists(path_)) return {};
  const auto check = verify_chain_file(path_);
  if (!check.ok) {
    throw Error(Errc::Parse, path_.string() + ": block " + std::to_string(*check.first_bad_index) + ": " + check.reason);
  }
  std::ifstream in(path_, std::ios::binary);
  std::vector<LedgerBlock> chain;
  std::string line;
  while (std::getline(in, line)) chain.push_back(parse_block(line));
  return chain;
}

void JsonLinesStorage::store(const LedgerBlock& block) {
  std::ofstream out(path_, std::ios::binary | std::ios::app);
  out << serialize_block(block) << '\n';
  out.flush();
  if (!out) throw Error(Errc::Io, "cannot append to " + path_.string());
}

std::int64_t system_clock_seconds() {
  using namespace std::chrono;
  return duration_cast<seconds>(system_clock::now().time_since_epoch()).count();
}

Ledger::Ledger(std::unique_ptr<BlockStorage> storage, Clock clock)
    : storage_(std::move(storage)), clock_(std::move(clock)) {
  chain_ = storage_->load();
  if (const auto check = verify_chain(chain_); !check.ok) {
    throw Error(Errc::Parse, "stored chain is invalid at block " + std::to_string(*check.first_bad_index));
  }
  balances_ = token_balances(chain_);
}

LedgerBlock Ledger::append(std::vector<LedgerRecord> records) {
  if (records.empty()) throw Error(Errc::InvalidRecord, "a block needs at least one record");
  for (const auto& r : records) validate_record(r);
  std::unique_lock lock(mutex_);
  LedgerBlock b;
  b.index = static_cast<std::int64_t>(chain_.size());
  b.prev_hash = chain_.empty() ? std::string(kGenesisPrevHash) : chain_.back().hash;
  b.records = std::move(records);
  b.timestamp = clock_();
  b.hash = compute_block_hash(b);
  storage_->store(b);
  for (const auto& r : b.records)
    if (r.kind == RecordKind::TokenReward) {
      balances_[r.payload["user_id"].get<std::string>()] += r.payload["amount"].get<std::int64_t>();
    }
  chain_.push_back(b);
  return b;
}

LedgerBlock Ledger::award_tokens(const std::string& user, std::int64_t amount, const std::string& reason) {
  if (amount < 1) throw Error(Errc::InvalidAmount, "token amount must be >= 1");
  LedgerRecord r;
  r.kind = RecordKind::TokenReward;
  r.payload = {{"user_id", user}, {"amount", amount}, {"reason", reason}};
  r.timestamp = clock_();
  return append({std::move(r)});
}

std::int64_t Ledger::balance(const std::string& user) const {
  std::shared_lock lock(mutex_);
  const auto it = balances_.find(user);
  return it == balances_.end() ? 0 : it->second;
}

std::size_t Ledger::size() const {
  std::shared_lock lock(mutex_);
  return chain_.size();
}

std::vector<LedgerBlock> Ledger::blocks() const {
  std::shared_lock lock(mutex_);
  return chain_;
}

VerifyResult Ledger::verify() const {
  std::shared_lock lock(mutex_);
  return verify_chain(chain_);
}

std::vector<LedgerRecord> Ledger::query(RecordKind kind, const json& filter) const {
  std::shared_lock lock(mutex_);
  return emorec::query(chain_, kind, filter);
}

std::map<std::string, std::int64_t> Ledger::requests_per_day() const {
  std::shared_lock lock(mutex_);
  return emorec::requests_per_day(chain_);
}

}  // namespace emorec
