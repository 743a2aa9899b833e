#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace emorec {

using Token = std::string;
using TokenList = std::vector<Token>;
using StopList = std::unordered_set<std::string>;

inline constexpr std::int32_t kPadId = 0;
inline constexpr std::int32_t kUnkId = 1;
inline constexpr std::size_t kDefaultSequenceLength = 64;
inline constexpr std::size_t kDefaultVocabularySize = 5000;

/// Lowercases ASCII and splits on every run of characters outside [a-z0-9].
/// Bytes >= 0x80 are delimiters.
TokenList tokenize(std::string_view text);

/// Order-preserving filter.
TokenList remove_stopwords(std::span<const Token> tokens, const StopList& stoplist);

/// The embedded 30-word list (version 1).
const StopList& default_stoplist();

/// One token per line; blank lines and surrounding whitespace ignored.
StopList load_stoplist(const std::filesystem::path& path);

class Vocabulary {
 public:
  Vocabulary() = default;

  /// Keeps the `max_size` most frequent tokens; frequency descending, then
  /// lexicographic ascending. Throws EmptyCorpus when there are no tokens.
  static Vocabulary build(std::span<const TokenList> corpus, std::size_t max_size = kDefaultVocabularySize);

  /// Id for `token`, or kUnkId.
  std::int32_t id(std::string_view token) const;
  bool contains(std::string_view token) const;

  /// Number of learned entries (excludes PAD/UNK).
  std::size_t size() const noexcept { return tokens_.size(); }
  /// Size of the id space including the reserved ids.
  std::size_t id_space() const noexcept { return tokens_.size() + 2; }

  /// Tokens in id order; tokens()[i] has id i + 2.
  const std::vector<Token>& tokens() const noexcept { return tokens_; }

  /// "token<TAB>id" lines sorted by id.
  void save(const std::filesystem::path& path) const;
  static Vocabulary load(const std::filesystem::path& path);

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) { return a.tokens_ == b.tokens_; }

 private:
  explicit Vocabulary(std::vector<Token> tokens);

  std::vector<Token> tokens_;
  std::unordered_map<std::string, std::int32_t> ids_;
};

using EncodedLyrics = std::vector<std::int32_t>;

/// First min(|tokens|, length) positions map to ids (UNK when absent), the
/// rest are PAD.
EncodedLyrics encode(std::span<const Token> tokens, const Vocabulary& vocab,
                     std::size_t length = kDefaultSequenceLength);

/// tokenize -> remove_stopwords -> encode.
EncodedLyrics encode_lyrics(std::string_view lyrics, const Vocabulary& vocab, const StopList& stoplist,
                            std::size_t length = kDefaultSequenceLength);

}  // namespace emorec
