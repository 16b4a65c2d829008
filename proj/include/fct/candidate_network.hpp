#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fct/schema.hpp"

namespace fct {

/// Tree edge between two CN nodes. `from_node` sits on the schema edge's
/// referenced side (R_from), `to_node` on the foreign-key side.
struct CnEdge {
  std::size_t from_node;
  std::size_t to_node;
  std::size_t schema_edge;
};

/// A tree of tuple sets joined along schema edges.
struct CandidateNetwork {
  std::vector<std::shared_ptr<const TupleSet>> nodes;
  std::vector<CnEdge> edges;
  std::string canonical;

  std::size_t size() const { return nodes.size(); }
  std::vector<std::size_t> neighbors(std::size_t node) const;
  std::size_t degree(std::size_t node) const;
  std::string describe(const SchemaGraph& schema, const KeywordQuery& query) const;
};

/// Canonical string under tree isomorphism: minimum over roots of the rooted
/// encoding with children sorted. Labels are relation index, keyword mask
/// and the schema edge (with direction) joining a child to its parent.
std::string canonical_encoding(const CandidateNetwork& cn);

/// Non-empty tuple sets for every relation, indexed by relation.
std::vector<std::vector<std::shared_ptr<const TupleSet>>> build_tuple_sets(
    const SchemaGraph& schema, const KeywordQuery& query);

/// Every tree of at most rmax non-empty tuple sets that is total, minimal and
/// has no free leaf, deduplicated by canonical encoding and ordered by
/// (size, encoding). Trees where a foreign-key tuple would have to join two
/// distinct tuples through the same key reference are never formed. Throws
/// EmptyResult when nothing qualifies.
std::vector<CandidateNetwork> enumerate_candidate_networks(const SchemaGraph& schema,
                                                           const KeywordQuery& query);

/// Same, over precomputed tuple sets.
std::vector<CandidateNetwork> enumerate_candidate_networks(
    const SchemaGraph& schema, const KeywordQuery& query,
    const std::vector<std::vector<std::shared_ptr<const TupleSet>>>& tuple_sets);

bool is_total(const CandidateNetwork& cn, std::uint32_t full_mask);
bool is_minimal(const CandidateNetwork& cn);
bool has_free_leaf(const CandidateNetwork& cn);

/// The node adjacent to every other node. A single node is its own root; of
/// two nodes the one with the larger tuple set wins (lower index on ties).
std::optional<std::size_t> is_star(const CandidateNetwork& cn);

/// A star CN over a schema that may contain merged relations.
struct StarNetwork {
  SchemaGraph schema;
  CandidateNetwork cn;
  std::size_t root = 0;
  /// For each CN node: the original CN nodes it covers, in path order from
  /// the root side, and per merged row the original rows of those nodes.
  std::vector<std::vector<std::size_t>> source_nodes;
  std::vector<std::vector<std::vector<std::size_t>>> source_rows;
  bool collapsed = false;
};

/// Turns a CN into a star. Stars come back unchanged. Otherwise a root is
/// chosen so that every branch is a path; each branch longer than one node
/// is materialized by repartition joins along the path into one merged
/// relation `n1+n2+...` with columns (rowid, joinkey, text), whose text is the
/// constituent texts joined by ", ". Root choice: fewest merged nodes, then
/// largest root tuple set, then lowest node index. Throws NotCollapsible
/// when no node has only path branches.
StarNetwork collapse_to_star(const CandidateNetwork& cn, const SchemaGraph& schema);

}  // namespace fct
