#include "fct/oracle.hpp"

#include <algorithm>
#include <optional>
#include <map>
#include <unordered_map>

#include "fct/error.hpp"

namespace fct {

namespace {

struct Link {
  std::size_t node;
  std::size_t parent;
  std::size_t node_column;    // column of `node` on the edge to its parent
  std::size_t parent_column;  // column of the parent on that edge
};

// Nodes in BFS order; entry 0 is the root with no parent.
std::vector<Link> bfs_order(const CandidateNetwork& cn, const SchemaGraph& schema) {
  std::vector<Link> order{{0, 0, 0, 0}};
  std::vector<bool> seen(cn.size(), false);
  seen[0] = true;
  for (std::size_t head = 0; head < order.size(); ++head) {
    const std::size_t v = order[head].node;
    for (const auto& e : cn.edges) {
      std::size_t other;
      std::size_t other_col;
      std::size_t v_col;
      if (e.from_node == v) {
        other = e.to_node;
        other_col = schema.fk_column(e.schema_edge);
        v_col = schema.from_column(e.schema_edge);
      } else if (e.to_node == v) {
        other = e.from_node;
        other_col = schema.from_column(e.schema_edge);
        v_col = schema.fk_column(e.schema_edge);
      } else {
        continue;
      }
      if (seen[other]) continue;
      seen[other] = true;
      order.push_back({other, v, other_col, v_col});
    }
  }
  return order;
}

using Index = std::unordered_map<std::string_view, std::vector<std::size_t>>;

// Member positions of `node` keyed by the value of `column`.
Index index_members(const CandidateNetwork& cn, const SchemaGraph& schema, std::size_t node,
                    std::size_t column) {
  Index idx;
  const auto& rel = schema.relation(cn.nodes[node]->relation);
  const auto& members = cn.nodes[node]->members;
  for (std::size_t p = 0; p < members.size(); ++p) {
    idx[rel.value(members[p], column)].push_back(p);
  }
  return idx;
}

CnEvaluation empty_evaluation(const CandidateNetwork& cn) {
  CnEvaluation eval;
  for (const auto& n : cn.nodes) eval.participation.emplace_back(n->members.size(), 0);
  return eval;
}

}  // namespace

CnEvaluation evaluate_cn(const CandidateNetwork& cn, const SchemaGraph& schema,
                         const std::function<void(const Mtjnt&)>& visit) {
  CnEvaluation eval = empty_evaluation(cn);
  if (cn.nodes.empty()) return eval;
  const auto order = bfs_order(cn, schema);
  std::vector<Index> indexes(order.size());
  for (std::size_t i = 1; i < order.size(); ++i) {
    indexes[i] = index_members(cn, schema, order[i].node, order[i].node_column);
  }
  std::vector<std::size_t> position(cn.size());  // chosen member position per node
  Mtjnt rows(cn.size());

  std::function<void(std::size_t)> extend = [&](std::size_t depth) {
    if (depth == order.size()) {
      ++eval.mtjnts;
      for (std::size_t n = 0; n < cn.size(); ++n) ++eval.participation[n][position[n]];
      if (visit) visit(rows);
      return;
    }
    const auto& link = order[depth];
    const auto& parent_rel = schema.relation(cn.nodes[link.parent]->relation);
    auto it = indexes[depth].find(parent_rel.value(rows[link.parent], link.parent_column));
    if (it == indexes[depth].end()) return;
    for (std::size_t p : it->second) {
      position[link.node] = p;
      rows[link.node] = cn.nodes[link.node]->members[p];
      extend(depth + 1);
    }
  };

  const auto& root_members = cn.nodes[0]->members;
  for (std::size_t p = 0; p < root_members.size(); ++p) {
    position[0] = p;
    rows[0] = root_members[p];
    extend(1);
  }
  return eval;
}

CnEvaluation count_cn(const CandidateNetwork& cn, const SchemaGraph& schema) {
  CnEvaluation eval = empty_evaluation(cn);
  if (cn.nodes.empty()) return eval;
  const auto order = bfs_order(cn, schema);
  const std::size_t n = cn.size();
  std::vector<std::size_t> link_of(n);
  for (std::size_t i = 0; i < order.size(); ++i) link_of[order[i].node] = i;

  auto value = [&](std::size_t node, std::size_t pos, std::size_t column) -> std::string_view {
    return schema.relation(cn.nodes[node]->relation).value(cn.nodes[node]->members[pos], column);
  };

  // inside[v][p]: joins of v's subtree with v fixed to member p.
  std::vector<std::vector<std::uint64_t>> inside(n);
  for (std::size_t v = 0; v < n; ++v) inside[v].assign(cn.nodes[v]->members.size(), 1);
  // Per child c: sum of inside[c] grouped by c's join value towards its parent.
  std::vector<std::unordered_map<std::string_view, std::uint64_t>> child_sum(n);
  for (std::size_t i = order.size(); i-- > 1;) {
    const auto& link = order[i];
    auto& sums = child_sum[link.node];
    for (std::size_t p = 0; p < inside[link.node].size(); ++p) {
      sums[value(link.node, p, link.node_column)] += inside[link.node][p];
    }
    for (std::size_t q = 0; q < inside[link.parent].size(); ++q) {
      auto it = sums.find(value(link.parent, q, link.parent_column));
      inside[link.parent][q] *= it == sums.end() ? 0 : it->second;
    }
  }

  // outside[v][p]: joins of everything outside v's subtree compatible with v = p.
  std::vector<std::vector<std::uint64_t>> outside(n);
  outside[0].assign(inside[0].size(), 1);
  for (std::size_t i = 1; i < order.size(); ++i) {
    const auto& link = order[i];
    const std::size_t c = link.node;
    const std::size_t par = link.parent;
    // Parent rows weighted by their outside count and by all other children.
    std::unordered_map<std::string_view, std::uint64_t> up;
    for (std::size_t q = 0; q < inside[par].size(); ++q) {
      std::uint64_t w = outside[par][q];
      if (w == 0) continue;
      for (std::size_t j = 1; j < order.size() && w; ++j) {
        if (order[j].parent != par || order[j].node == c) continue;
        auto it = child_sum[order[j].node].find(value(par, q, order[j].parent_column));
        w *= it == child_sum[order[j].node].end() ? 0 : it->second;
      }
      if (w) up[value(par, q, link.parent_column)] += w;
    }
    outside[c].assign(inside[c].size(), 0);
    for (std::size_t p = 0; p < inside[c].size(); ++p) {
      auto it = up.find(value(c, p, link.node_column));
      if (it != up.end()) outside[c][p] = it->second;
    }
  }

  for (std::size_t p = 0; p < inside[0].size(); ++p) eval.mtjnts += inside[0][p];
  for (std::size_t v = 0; v < n; ++v) {
    for (std::size_t p = 0; p < inside[v].size(); ++p) {
      eval.participation[v][p] = inside[v][p] * outside[v][p];
    }
  }
  return eval;
}

std::uint64_t count_term(const CandidateNetwork& cn, const SchemaGraph& schema,
                         const Mtjnt& tuples, std::string_view term) {
  std::uint64_t n = 0;
  for (std::size_t v = 0; v < tuples.size(); ++v) {
    for (const auto& token : tokenize(schema.text(cn.nodes[v]->relation, tuples[v]))) {
      n += token == term;
    }
  }
  return n;
}

Frequencies frequencies_from(const CandidateNetwork& cn, const SchemaGraph& schema,
                             const CnEvaluation& eval, const TermFilter& filter) {
  Frequencies out;
  for (std::size_t v = 0; v < cn.size(); ++v) {
    const auto& members = cn.nodes[v]->members;
    for (std::size_t p = 0; p < members.size(); ++p) {
      const std::uint64_t times = eval.participation[v][p];
      if (times == 0) continue;
      for (auto& token : tokenize(schema.text(cn.nodes[v]->relation, members[p]))) {
        if (filter.accepts(token)) out[std::move(token)] += times;
      }
    }
  }
  return out;
}

Frequencies oracle_frequencies(const SchemaGraph& schema, const KeywordQuery& query,
                               const TermFilter& filter, const OracleOptions& options) {
  std::vector<CandidateNetwork> cns;
  try {
    cns = enumerate_candidate_networks(schema, query);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::EmptyResult) throw;
    return {};
  }
  Frequencies total;
  for (const auto& cn : cns) {
    CnEvaluation counted = count_cn(cn, schema);
    if (static_cast<double>(counted.mtjnts) > options.max_mtjnts) {
      throw Error(ErrorCode::TooLarge, cn.canonical + " has " +
                                           std::to_string(counted.mtjnts) +
                                           " results, above the oracle bound");
    }
    const CnEvaluation eval = options.dynamic_programming ? std::move(counted)
                                                          : evaluate_cn(cn, schema);
    add_frequencies(total, frequencies_from(cn, schema, eval, filter));
  }
  return total;
}

std::vector<TermFrequency> oracle_fct(const SchemaGraph& schema, const KeywordQuery& query,
                                      const TermFilter& filter, const OracleOptions& options) {
  return top_k(oracle_frequencies(schema, query, filter, options), query.k());
}

std::string Comparison::describe() const {
  switch (kind) {
    case Kind::Equal:
      return "equal";
    case Kind::RankOnly:
      return "rank-only difference at rank " + std::to_string(rank + 1) + ": " + term;
    case Kind::Value:
      return "value difference at rank " + std::to_string(rank + 1) + ": " + term + " " +
             std::to_string(actual) + " vs " + std::to_string(expected);
  }
  return "";
}

Comparison compare(const std::vector<TermFrequency>& actual,
                   const std::vector<TermFrequency>& expected) {
  std::map<std::string_view, std::uint64_t> a_map, e_map;
  for (const auto& tf : actual) a_map[tf.term] = tf.freq;
  for (const auto& tf : expected) e_map[tf.term] = tf.freq;
  auto lookup = [](const auto& m, std::string_view t) -> std::uint64_t {
    auto it = m.find(t);
    return it == m.end() ? 0 : it->second;
  };

  std::optional<Comparison> rank_only;
  const std::size_t n = std::max(actual.size(), expected.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (i >= actual.size() || i >= expected.size()) {
      const auto& tf = i < actual.size() ? actual[i] : expected[i];
      return {Comparison::Kind::Value, i, tf.term, lookup(a_map, tf.term), lookup(e_map, tf.term)};
    }
    const auto& a = actual[i];
    const auto& e = expected[i];
    if (a == e) continue;
    if (a.term == e.term) return {Comparison::Kind::Value, i, a.term, a.freq, e.freq};
    if (e_map.count(a.term) && e_map[a.term] != a.freq) {
      return {Comparison::Kind::Value, i, a.term, a.freq, e_map[a.term]};
    }
    if (a_map.count(e.term) && a_map[e.term] != e.freq) {
      return {Comparison::Kind::Value, i, e.term, a_map[e.term], e.freq};
    }
    if (a.freq != e.freq) {
      return {Comparison::Kind::Value, i, e.term, lookup(a_map, e.term), e.freq};
    }
    if (!rank_only) rank_only = Comparison{Comparison::Kind::RankOnly, i, e.term, a.freq, e.freq};
  }
  return rank_only ? *rank_only : Comparison{};
}

}  // namespace fct
