#include "emorec/text.hpp"

#include "emorec/error.hpp"

#include <algorithm>
#include <fstream>
#include <map>

namespace emorec {

namespace {

bool is_token_char(unsigned char c) { return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9'); }

unsigned char ascii_lower(unsigned char c) { return (c >= 'A' && c <= 'Z') ? c + ('a' - 'A') : c; }

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

}  // namespace

TokenList tokenize(std::string_view text) {
  TokenList out;
  std::string current;
  for (char raw : text) {
    const unsigned char c = ascii_lower(static_cast<unsigned char>(raw));
    if (is_token_char(c)) {
      current.push_back(static_cast<char>(c));
    } else if (!current.empty()) {
      out.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) out.push_back(std::move(current));
  return out;
}

TokenList remove_stopwords(std::span<const Token> tokens, const StopList& stoplist) {
  TokenList out;
  out.reserve(tokens.size());
  std::copy_if(tokens.begin(), tokens.end(), std::back_inserter(out),
               [&](const Token& t) { return !stoplist.contains(t); });
  return out;
}

const StopList& default_stoplist() {
  static const StopList list = {
      "the", "a",   "an",  "and", "or",   "of",   "to",   "in",  "on",   "is",
      "it",  "i",   "you", "my",  "me",   "so",   "that", "this", "be",  "are",
      "was", "for", "with", "at", "we",   "your", "but",  "all", "just", "up",
  };
  return list;
}

StopList load_stoplist(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::Io, "cannot open stop-word list " + path.string());
  StopList out;
  std::string line;
  while (std::getline(in, line)) {
    auto word = trim(line);
    if (!word.empty()) out.insert(std::move(word));
  }
  return out;
}

Vocabulary::Vocabulary(std::vector<Token> tokens) : tokens_(std::move(tokens)) {
  ids_.reserve(tokens_.size());
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    ids_.emplace(tokens_[i], static_cast<std::int32_t>(i + 2));
  }
}

Vocabulary Vocabulary::build(std::span<const TokenList> corpus, std::size_t max_size) {
  if (max_size < 1) throw Error(Errc::InvalidArgument, "vocabulary max_size must be >= 1");
  std::map<std::string, std::size_t> counts;
  for (const auto& doc : corpus) {
    for (const auto& t : doc) ++counts[t];
  }
  if (counts.empty()) throw Error(Errc::EmptyCorpus, "corpus contains no tokens");

  std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(), counts.end());
  // map order is lexicographic, so a stable sort on count keeps that tiebreak
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  if (ranked.size() > max_size) ranked.resize(max_size);

  std::vector<Token> tokens;
  tokens.reserve(ranked.size());
  for (auto& [tok, _] : ranked) tokens.push_back(tok);
  return Vocabulary(std::move(tokens));
}

std::int32_t Vocabulary::id(std::string_view token) const {
  auto it = ids_.find(std::string(token));
  return it == ids_.end() ? kUnkId : it->second;
}

bool Vocabulary::contains(std::string_view token) const { return ids_.contains(std::string(token)); }

void Vocabulary::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::Io, "cannot write vocabulary " + path.string());
  for (std::size_t i = 0; i < tokens_.size(); ++i) out << tokens_[i] << '\t' << (i + 2) << '\n';
  if (!out) throw Error(Errc::Io, "write failed for " + path.string());
}

Vocabulary Vocabulary::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::Io, "cannot open vocabulary " + path.string());
  std::vector<Token> tokens;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw Error(Errc::Parse, path.string() + ":" + std::to_string(lineno) + ": missing tab");
    }
    const long id = std::stol(line.substr(tab + 1));
    if (id != static_cast<long>(tokens.size() + 2)) {
      throw Error(Errc::Parse, path.string() + ":" + std::to_string(lineno) + ": ids must be dense from 2");
    }
    tokens.push_back(line.substr(0, tab));
  }
  return Vocabulary(std::move(tokens));
}

EncodedLyrics encode(std::span<const Token> tokens, const Vocabulary& vocab, std::size_t length) {
  if (length < 1) throw Error(Errc::InvalidArgument, "sequence length must be >= 1");
  EncodedLyrics ids(length, kPadId);
  const std::size_t n = std::min(tokens.size(), length);
  for (std::size_t i = 0; i < n; ++i) ids[i] = vocab.id(tokens[i]);
  return ids;
}

EncodedLyrics encode_lyrics(std::string_view lyrics, const Vocabulary& vocab, const StopList& stoplist,
                            std::size_t length) {
  const auto tokens = tokenize(lyrics);
  const auto kept = remove_stopwords(tokens, stoplist);
  return encode(kept, vocab, length);
}

}  // namespace emorec
