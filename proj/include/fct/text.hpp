#pragma once

#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace fct {

/// Splits on every ASCII byte that is not a letter or digit and lowercases
/// ASCII letters. Bytes >= 0x80 are kept inside tokens so UTF-8 words survive.
std::vector<std::string> tokenize(std::string_view text);

/// Backslash-escapes the reserved separators `\`, `|`, `;`, tab, CR and LF.
/// The output never contains a raw tab or newline.
std::string escape(std::string_view raw);
std::string unescape(std::string_view escaped);

/// Splits at separators that are not preceded by an escaping backslash.
/// Pieces are returned still escaped.
std::vector<std::string_view> split_unescaped(std::string_view s, char sep);

/// Position of the last unescaped `sep`, or npos.
std::size_t find_last_unescaped(std::string_view s, char sep);

/// Partition hash for join-attribute values. A value ending in a run of
/// decimal digits hashes to that number (so "a1" -> 1, "a2" -> 2, "17" -> 17,
/// the getNum numbering); anything else hashes with 64-bit FNV-1a. The result
/// is always below 2^63.
std::uint64_t key_hash(std::string_view value);

/// 64-bit FNV-1a, masked to non-negative range.
std::uint64_t fnv1a(std::string_view s);

class StopWords {
 public:
  using WordSet = std::set<std::string, std::less<>>;

  StopWords() = default;
  explicit StopWords(WordSet words) : words_(std::move(words)) {}

  /// About fifty common English function words.
  static StopWords english();
  /// One word per line; blank lines and lines starting with '#' are ignored.
  static StopWords load(const std::filesystem::path& file);

  bool contains(std::string_view word) const {
    return words_.find(word) != words_.end();
  }
  const WordSet& words() const { return words_; }

 private:
  WordSet words_;
};

/// Decides which tokens count as co-occurring terms. The pipeline and the
/// oracle share one instance so their filtering cannot drift apart.
class TermFilter {
 public:
  TermFilter(StopWords stopwords, std::vector<std::string> query_keywords);

  bool accepts(std::string_view token) const;
  const StopWords& stopwords() const { return stopwords_; }

 private:
  StopWords stopwords_;
  std::set<std::string, std::less<>> keywords_;
};

}  // namespace fct
