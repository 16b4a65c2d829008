#include "fct/text.hpp"

#include <fstream>

#include "fct/error.hpp"

namespace fct {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidInput: return "InvalidInput";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::EmptyResult: return "EmptyResult";
    case ErrorCode::NotCollapsible: return "NotCollapsible";
    case ErrorCode::PartitionOutOfRange: return "PartitionOutOfRange";
    case ErrorCode::PatternMismatch: return "PatternMismatch";
    case ErrorCode::MissingJoinValue: return "MissingJoinValue";
    case ErrorCode::InvalidRate: return "InvalidRate";
    case ErrorCode::InvalidReducerCount: return "InvalidReducerCount";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::JobFailed: return "JobFailed";
  }
  return "Unknown";
}

namespace {

bool is_token_byte(unsigned char c) {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') ||
         (c >= 'A' && c <= 'Z') || c >= 0x80;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (unsigned char c : text) {
    if (is_token_byte(c)) {
      current.push_back(c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a')
                                             : static_cast<char>(c));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

std::string escape(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  for (char c : raw) {
    switch (c) {
      case '\\': out += "\\\\"; break;
      case '|': out += "\\|"; break;
      case ';': out += "\\;"; break;
      case '\t': out += "\\t"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string unescape(std::string_view escaped) {
  std::string out;
  out.reserve(escaped.size());
  for (std::size_t i = 0; i < escaped.size(); ++i) {
    char c = escaped[i];
    if (c != '\\' || i + 1 == escaped.size()) {
      out.push_back(c);
      continue;
    }
    char next = escaped[++i];
    switch (next) {
      case 't': out.push_back('\t'); break;
      case 'n': out.push_back('\n'); break;
      case 'r': out.push_back('\r'); break;
      default: out.push_back(next);
    }
  }
  return out;
}

std::vector<std::string_view> split_unescaped(std::string_view s, char sep) {
  std::vector<std::string_view> pieces;
  std::size_t start = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '\\') {
      ++i;
    } else if (s[i] == sep) {
      pieces.push_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  pieces.push_back(s.substr(start));
  return pieces;
}

std::size_t find_last_unescaped(std::string_view s, char sep) {
  std::size_t found = std::string_view::npos;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '\\') {
      ++i;
    } else if (s[i] == sep) {
      found = i;
    }
  }
  return found;
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h & 0x7fffffffffffffffULL;
}

std::uint64_t key_hash(std::string_view value) {
  std::size_t digits = 0;
  while (digits < value.size() &&
         value[value.size() - 1 - digits] >= '0' &&
         value[value.size() - 1 - digits] <= '9') {
    ++digits;
  }
  if (digits == 0 || digits > 18) return fnv1a(value);
  std::uint64_t n = 0;
  for (char c : value.substr(value.size() - digits)) {
    n = n * 10 + static_cast<std::uint64_t>(c - '0');
  }
  return n;
}

StopWords StopWords::english() {
  static const char* const kWords[] = {
      "a",     "about", "after", "all",   "also",  "an",    "and",  "any",
      "are",   "as",    "at",    "be",    "been",  "but",   "by",   "can",
      "could", "do",    "for",   "from",  "had",   "has",   "have", "he",
      "her",   "his",   "i",     "if",    "in",    "into",  "is",   "it",
      "its",   "not",   "of",    "on",    "or",    "she",   "so",   "than",
      "that",  "the",   "their", "them",  "then",  "there", "these", "they",
      "this",  "to",    "was",   "we",    "were",  "which", "while", "will",
      "with",  "would", "you"};
  WordSet words;
  for (const char* w : kWords) words.emplace(w);
  return StopWords(std::move(words));
}

StopWords StopWords::load(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw Error(ErrorCode::IoError, "cannot read stop-word file " + file.string());
  WordSet words;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    for (auto& token : tokenize(line)) words.insert(std::move(token));
  }
  return StopWords(std::move(words));
}

TermFilter::TermFilter(StopWords stopwords, std::vector<std::string> query_keywords)
    : stopwords_(std::move(stopwords)),
      keywords_(query_keywords.begin(), query_keywords.end()) {}

bool TermFilter::accepts(std::string_view token) const {
  return !token.empty() && !stopwords_.contains(token) &&
         keywords_.find(token) == keywords_.end();
}

}  // namespace fct
