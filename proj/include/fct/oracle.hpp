#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "fct/candidate_network.hpp"
#include "fct/frequency.hpp"
#include "fct/text.hpp"

namespace fct {

/// One row index per CN node.
using Mtjnt = std::vector<std::size_t>;

/// How often each member row of each node takes part in a result.
struct CnEvaluation {
  std::uint64_t mtjnts = 0;
  std::vector<std::vector<std::uint64_t>> participation;  // [node][member position]
};

/// Nested-loop join over the tree, starting at node 0 and extending along
/// BFS order through hash indexes on the member rows. `visit` (optional)
/// sees every complete assignment.
CnEvaluation evaluate_cn(const CandidateNetwork& cn, const SchemaGraph& schema,
                         const std::function<void(const Mtjnt&)>& visit = {});

/// Independent count by tree dynamic programming: per row, joins inside its
/// subtree times joins outside it.
CnEvaluation count_cn(const CandidateNetwork& cn, const SchemaGraph& schema);

/// Occurrences of term across the texts of a result, duplicates included.
std::uint64_t count_term(const CandidateNetwork& cn, const SchemaGraph& schema,
                         const Mtjnt& tuples, std::string_view term);

/// sum over nodes and rows of participation times local term counts.
Frequencies frequencies_from(const CandidateNetwork& cn, const SchemaGraph& schema,
                             const CnEvaluation& eval, const TermFilter& filter);

struct OracleOptions {
  double max_mtjnts = 1e7;
  /// Use the DP counter instead of the nested loop.
  bool dynamic_programming = false;
};

/// Frequencies over all CNs by brute force. A CN whose exact result count
/// exceeds the bound raises TooLarge.
Frequencies oracle_frequencies(const SchemaGraph& schema, const KeywordQuery& query,
                               const TermFilter& filter, const OracleOptions& options = {});

/// Ranked like the pipeline. No CN at all gives an empty ranking.
std::vector<TermFrequency> oracle_fct(const SchemaGraph& schema, const KeywordQuery& query,
                                      const TermFilter& filter,
                                      const OracleOptions& options = {});

struct Comparison {
  enum class Kind { Equal, RankOnly, Value };
  Kind kind = Kind::Equal;
  std::size_t rank = 0;  // first differing position
  std::string term;
  std::uint64_t actual = 0;
  std::uint64_t expected = 0;

  std::string describe() const;
};

/// Value when some term's frequency differs (or the frequency sequence
/// does); RankOnly when only the order of equal frequencies differs,
/// including which of several equally frequent terms made the cut.
Comparison compare(const std::vector<TermFrequency>& actual,
                   const std::vector<TermFrequency>& expected);

}  // namespace fct
