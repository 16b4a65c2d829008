#include "fct/frequency.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <ostream>

#include "fct/error.hpp"

namespace fct {

void add_frequencies(Frequencies& into, const Frequencies& from) {
  for (const auto& [term, f] : from) into[term] += f;
}

std::vector<TermFrequency> top_k(const Frequencies& freqs, std::size_t k) {
  std::vector<TermFrequency> all;
  all.reserve(freqs.size());
  for (const auto& [term, f] : freqs) all.push_back({term, f});
  auto order = [](const TermFrequency& a, const TermFrequency& b) {
    return a.freq != b.freq ? a.freq > b.freq : a.term < b.term;
  };
  if (k < all.size()) {
    std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k), all.end(), order);
    all.resize(k);
  } else {
    std::sort(all.begin(), all.end(), order);
  }
  return all;
}

void write_ranking(const std::vector<TermFrequency>& ranking, std::ostream& out) {
  for (const auto& tf : ranking) out << tf.term << '\t' << tf.freq << '\n';
}

std::vector<TermFrequency> read_ranking(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + file.string());
  std::vector<TermFrequency> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw Error(ErrorCode::InvalidInput, file.string() + ":" + std::to_string(n) +
                                               ": expected term<TAB>frequency");
    }
    TermFrequency tf{line.substr(0, tab), 0};
    const char* first = line.data() + tab + 1;
    const char* last = line.data() + line.size();
    auto [ptr, ec] = std::from_chars(first, last, tf.freq);
    if (ec != std::errc() || ptr != last) {
      throw Error(ErrorCode::InvalidInput,
                  file.string() + ":" + std::to_string(n) + ": bad frequency");
    }
    out.push_back(std::move(tf));
  }
  return out;
}

}  // namespace fct
