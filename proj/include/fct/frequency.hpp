#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace fct {

struct TermFrequency {
  std::string term;
  std::uint64_t freq = 0;

  bool operator==(const TermFrequency&) const = default;
};

using Frequencies = std::map<std::string, std::uint64_t, std::less<>>;

void add_frequencies(Frequencies& into, const Frequencies& from);

/// Descending frequency, ties by ascending term; at most k entries.
std::vector<TermFrequency> top_k(const Frequencies& freqs, std::size_t k);

/// `term<TAB>frequency` lines.
void write_ranking(const std::vector<TermFrequency>& ranking, std::ostream& out);
std::vector<TermFrequency> read_ranking(const std::filesystem::path& file);

}  // namespace fct
