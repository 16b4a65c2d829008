#include "fct/candidate_network.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <unordered_map>

#include "fct/error.hpp"

namespace fct {

std::vector<std::size_t> CandidateNetwork::neighbors(std::size_t node) const {
  std::vector<std::size_t> out;
  for (const auto& e : edges) {
    if (e.from_node == node) out.push_back(e.to_node);
    if (e.to_node == node) out.push_back(e.from_node);
  }
  return out;
}

std::size_t CandidateNetwork::degree(std::size_t node) const {
  std::size_t d = 0;
  for (const auto& e : edges) d += (e.from_node == node) + (e.to_node == node);
  return d;
}

std::string CandidateNetwork::describe(const SchemaGraph& schema,
                                       const KeywordQuery& query) const {
  std::string out;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (i) out += " ";
    out += schema.relation(nodes[i]->relation).name() + query.describe_mask(nodes[i]->mask);
  }
  if (!edges.empty()) {
    out += " :";
    for (const auto& e : edges) {
      out += " " + std::to_string(e.from_node) + "->" + std::to_string(e.to_node);
    }
  }
  return out;
}

namespace {

std::string encode_rooted(const CandidateNetwork& cn, std::size_t node,
                          std::size_t parent_edge) {
  std::vector<std::string> children;
  for (std::size_t i = 0; i < cn.edges.size(); ++i) {
    if (i == parent_edge) continue;
    const auto& e = cn.edges[i];
    if (e.from_node != node && e.to_node != node) continue;
    bool child_is_fk_side = e.from_node == node;
    std::size_t child = child_is_fk_side ? e.to_node : e.from_node;
    children.push_back(std::to_string(e.schema_edge) + (child_is_fk_side ? ">" : "<") +
                       encode_rooted(cn, child, i));
  }
  std::sort(children.begin(), children.end());
  std::string out = "R" + std::to_string(cn.nodes[node]->relation) + ":" +
                    std::to_string(cn.nodes[node]->mask);
  if (!children.empty()) {
    out += "(";
    for (std::size_t i = 0; i < children.size(); ++i) {
      if (i) out += ",";
      out += children[i];
    }
    out += ")";
  }
  return out;
}

}  // namespace

std::string canonical_encoding(const CandidateNetwork& cn) {
  std::string best;
  for (std::size_t root = 0; root < cn.nodes.size(); ++root) {
    std::string enc = encode_rooted(cn, root, cn.edges.size());
    if (root == 0 || enc < best) best = std::move(enc);
  }
  return best;
}

std::vector<std::vector<std::shared_ptr<const TupleSet>>> build_tuple_sets(
    const SchemaGraph& schema, const KeywordQuery& query) {
  std::vector<std::vector<std::shared_ptr<const TupleSet>>> out(schema.relation_count());
  for (std::size_t r = 0; r < schema.relation_count(); ++r) {
    for (auto& ts : classify_tuple_sets(schema, r, query)) {
      if (ts.members.empty()) continue;
      out[r].push_back(std::make_shared<const TupleSet>(std::move(ts)));
    }
  }
  return out;
}

bool is_total(const CandidateNetwork& cn, std::uint32_t full_mask) {
  std::uint32_t m = 0;
  for (const auto& n : cn.nodes) m |= n->mask;
  return m == full_mask;
}

bool is_minimal(const CandidateNetwork& cn) {
  if (cn.nodes.size() <= 1) return true;
  for (std::size_t i = 0; i < cn.nodes.size(); ++i) {
    if (cn.degree(i) != 1) continue;
    std::uint32_t others = 0;
    for (std::size_t j = 0; j < cn.nodes.size(); ++j) {
      if (j != i) others |= cn.nodes[j]->mask;
    }
    if ((cn.nodes[i]->mask & ~others) == 0) return false;
  }
  return true;
}

bool has_free_leaf(const CandidateNetwork& cn) {
  if (cn.nodes.size() == 1) return cn.nodes[0]->is_free();
  for (std::size_t i = 0; i < cn.nodes.size(); ++i) {
    if (cn.degree(i) == 1 && cn.nodes[i]->is_free()) return true;
  }
  return false;
}

std::vector<CandidateNetwork> enumerate_candidate_networks(const SchemaGraph& schema,
                                                           const KeywordQuery& query) {
  return enumerate_candidate_networks(schema, query, build_tuple_sets(schema, query));
}

std::vector<CandidateNetwork> enumerate_candidate_networks(
    const SchemaGraph& schema, const KeywordQuery& query,
    const std::vector<std::vector<std::shared_ptr<const TupleSet>>>& tuple_sets) {
  const std::uint32_t full = query.full_mask();
  std::map<std::string, CandidateNetwork> found;

  std::vector<CandidateNetwork> frontier;
  std::set<std::string> seen;
  for (const auto& sets : tuple_sets) {
    for (const auto& ts : sets) {
      CandidateNetwork cn;
      cn.nodes.push_back(ts);
      cn.canonical = canonical_encoding(cn);
      if (seen.insert(cn.canonical).second) frontier.push_back(std::move(cn));
    }
  }

  for (std::size_t size = 1; !frontier.empty(); ++size) {
    std::vector<CandidateNetwork> next;
    std::set<std::string> next_seen;
    for (auto& tree : frontier) {
      if (is_total(tree, full)) {
        // Any leaf added to a total tree would be removable.
        if (is_minimal(tree) && !has_free_leaf(tree)) {
          found.emplace(tree.canonical, std::move(tree));
        }
        continue;
      }
      if (size >= query.rmax()) continue;
      for (std::size_t n = 0; n < tree.nodes.size(); ++n) {
        const std::size_t rel = tree.nodes[n]->relation;
        for (std::size_t e = 0; e < schema.edges().size(); ++e) {
          const auto& edge = schema.edges()[e];
          bool node_is_from = edge.from == rel;
          bool node_is_to = edge.to == rel;
          if (!node_is_from && !node_is_to) continue;
          if (node_is_to && schema.references_key(e)) {
            // A foreign-key tuple references at most one tuple per key edge.
            bool taken = std::any_of(tree.edges.begin(), tree.edges.end(),
                                     [&](const CnEdge& ce) {
                                       return ce.to_node == n && ce.schema_edge == e;
                                     });
            if (taken) continue;
          }
          const std::size_t other = node_is_from ? edge.to : edge.from;
          for (const auto& ts : tuple_sets[other]) {
            CandidateNetwork grown = tree;
            grown.nodes.push_back(ts);
            const std::size_t added = grown.nodes.size() - 1;
            grown.edges.push_back(node_is_from ? CnEdge{n, added, e} : CnEdge{added, n, e});
            grown.canonical = canonical_encoding(grown);
            if (next_seen.insert(grown.canonical).second) next.push_back(std::move(grown));
          }
        }
      }
    }
    frontier = std::move(next);
  }

  if (found.empty()) {
    throw Error(ErrorCode::EmptyResult,
                "no candidate network covers all keywords within rmax=" +
                    std::to_string(query.rmax()));
  }
  std::vector<CandidateNetwork> out;
  out.reserve(found.size());
  for (auto& [_, cn] : found) out.push_back(std::move(cn));
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return a.size() < b.size();
  });
  return out;
}

std::optional<std::size_t> is_star(const CandidateNetwork& cn) {
  const std::size_t n = cn.nodes.size();
  if (n == 0) return std::nullopt;
  if (n == 1) return 0;
  if (n == 2) {
    return cn.nodes[1]->members.size() > cn.nodes[0]->members.size() ? 1 : 0;
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (cn.degree(i) == n - 1) return i;
  }
  return std::nullopt;
}

namespace {

struct Branch {
  std::vector<std::size_t> path;       // path[0] is adjacent to the root
  std::vector<std::size_t> edges;      // edges[i] joins path[i] with its inner neighbour
};

std::optional<std::vector<Branch>> path_branches(const CandidateNetwork& cn,
                                                 std::size_t root) {
  std::vector<Branch> branches;
  for (std::size_t ei = 0; ei < cn.edges.size(); ++ei) {
    const auto& e = cn.edges[ei];
    if (e.from_node != root && e.to_node != root) continue;
    Branch b;
    std::size_t prev_edge = ei;
    std::size_t cur = e.from_node == root ? e.to_node : e.from_node;
    while (true) {
      b.path.push_back(cur);
      b.edges.push_back(prev_edge);
      std::size_t d = cn.degree(cur);
      if (d == 1) break;
      if (d > 2) return std::nullopt;
      for (std::size_t ej = 0; ej < cn.edges.size(); ++ej) {
        if (ej == prev_edge) continue;
        const auto& f = cn.edges[ej];
        if (f.from_node == cur || f.to_node == cur) {
          prev_edge = ej;
          cur = f.from_node == cur ? f.to_node : f.from_node;
          break;
        }
      }
    }
    branches.push_back(std::move(b));
  }
  return branches;
}

// Column of `node` used by CN edge `edge`.
std::size_t node_column(const SchemaGraph& schema, const CnEdge& edge, std::size_t node) {
  return edge.from_node == node ? schema.from_column(edge.schema_edge)
                                : schema.fk_column(edge.schema_edge);
}

}  // namespace

StarNetwork collapse_to_star(const CandidateNetwork& cn, const SchemaGraph& schema) {
  StarNetwork star;
  if (auto root = is_star(cn)) {
    star.schema = schema;
    star.cn = cn;
    star.root = *root;
    for (std::size_t i = 0; i < cn.nodes.size(); ++i) star.source_nodes.push_back({i});
    star.source_rows.resize(cn.nodes.size());
    return star;
  }

  std::optional<std::size_t> best_root;
  std::vector<Branch> best_branches;
  std::size_t best_merges = 0;
  for (std::size_t r = 0; r < cn.nodes.size(); ++r) {
    auto branches = path_branches(cn, r);
    if (!branches) continue;
    std::size_t merges = 0;
    for (const auto& b : *branches) merges += b.path.size() - 1;
    bool better = !best_root || merges < best_merges ||
                  (merges == best_merges &&
                   cn.nodes[r]->members.size() > cn.nodes[*best_root]->members.size());
    if (better) {
      best_root = r;
      best_merges = merges;
      best_branches = std::move(*branches);
    }
  }
  if (!best_root) {
    throw Error(ErrorCode::NotCollapsible,
                "no node of " + cn.canonical + " has only path branches");
  }

  const std::size_t root = *best_root;
  std::vector<std::shared_ptr<const Relation>> relations;
  for (std::size_t i = 0; i < schema.relation_count(); ++i) {
    relations.push_back(schema.relation_ptr(i));
  }
  std::vector<SchemaEdge> edges = schema.edges();
  std::set<std::string> names;
  for (const auto& r : relations) names.insert(r->name());

  // New node list: root first, then one node per branch.
  std::vector<std::shared_ptr<const TupleSet>> nodes{cn.nodes[root]};
  std::vector<CnEdge> cn_edges;
  star.source_nodes.push_back({root});
  star.source_rows.emplace_back();

  for (const auto& branch : best_branches) {
    const std::size_t leaf_index = nodes.size();
    const CnEdge& root_edge = cn.edges[branch.edges[0]];
    if (branch.path.size() == 1) {
      nodes.push_back(cn.nodes[branch.path[0]]);
      cn_edges.push_back(root_edge.from_node == root
                             ? CnEdge{0, leaf_index, root_edge.schema_edge}
                             : CnEdge{leaf_index, 0, root_edge.schema_edge});
      star.source_nodes.push_back({branch.path[0]});
      star.source_rows.emplace_back();
      continue;
    }

    // Repartition joins from the far end of the path towards the root.
    const auto& path = branch.path;
    std::vector<std::vector<std::size_t>> chains;
    for (std::size_t row : cn.nodes[path.back()]->members) chains.push_back({row});
    for (std::size_t k = path.size() - 1; k-- > 0;) {
      const CnEdge& link = cn.edges[branch.edges[k + 1]];
      const std::size_t outer_rel = cn.nodes[path[k]]->relation;
      const std::size_t inner_rel = cn.nodes[path[k + 1]]->relation;
      const std::size_t outer_col = node_column(schema, link, path[k]);
      const std::size_t inner_col = node_column(schema, link, path[k + 1]);
      std::unordered_map<std::string, std::vector<std::size_t>> groups;
      for (std::size_t c = 0; c < chains.size(); ++c) {
        groups[schema.relation(inner_rel).value(chains[c].front(), inner_col)].push_back(c);
      }
      std::vector<std::vector<std::size_t>> joined;
      for (std::size_t row : cn.nodes[path[k]]->members) {
        auto it = groups.find(schema.relation(outer_rel).value(row, outer_col));
        if (it == groups.end()) continue;
        for (std::size_t c : it->second) {
          std::vector<std::size_t> chain{row};
          chain.insert(chain.end(), chains[c].begin(), chains[c].end());
          joined.push_back(std::move(chain));
        }
      }
      chains = std::move(joined);
    }

    std::string name;
    for (std::size_t node : path) {
      if (!name.empty()) name += "+";
      name += schema.relation(cn.nodes[node]->relation).name();
    }
    std::string unique = name;
    for (int n = 2; names.count(unique); ++n) unique = name + "#" + std::to_string(n);
    names.insert(unique);

    const std::size_t near_col = node_column(schema, root_edge, path[0]);
    const auto& near_rel = schema.relation(cn.nodes[path[0]]->relation);
    std::vector<Row> rows;
    rows.reserve(chains.size());
    std::uint32_t mask = 0;
    for (std::size_t node : path) mask |= cn.nodes[node]->mask;
    for (std::size_t i = 0; i < chains.size(); ++i) {
      std::string text;
      for (std::size_t k = 0; k < path.size(); ++k) {
        std::string t = schema.text(cn.nodes[path[k]]->relation, chains[i][k]);
        if (t.empty()) continue;
        if (!text.empty()) text += ", ";
        text += t;
      }
      rows.push_back({std::to_string(i), near_rel.value(chains[i][0], near_col), std::move(text)});
    }
    relations.push_back(std::make_shared<const Relation>(
        unique, std::vector<std::string>{"rowid", "joinkey", "text"}, "rowid", std::move(rows)));
    const std::size_t merged_rel = relations.size() - 1;
    const auto& orig = schema.edges()[root_edge.schema_edge];
    const std::size_t root_rel = cn.nodes[root]->relation;
    if (root_edge.from_node == root) {
      edges.push_back(SchemaEdge{root_rel, merged_rel, orig.from_column, "joinkey"});
      cn_edges.push_back(CnEdge{0, leaf_index, edges.size() - 1});
    } else {
      edges.push_back(SchemaEdge{merged_rel, root_rel, "joinkey", orig.fk_column});
      cn_edges.push_back(CnEdge{leaf_index, 0, edges.size() - 1});
    }

    TupleSet merged;
    merged.relation = merged_rel;
    merged.mask = mask;
    merged.members.resize(chains.size());
    for (std::size_t i = 0; i < chains.size(); ++i) merged.members[i] = i;
    nodes.push_back(std::make_shared<const TupleSet>(std::move(merged)));
    star.source_nodes.push_back(path);
    star.source_rows.push_back(std::move(chains));
  }

  star.schema = SchemaGraph(std::move(relations), std::move(edges));
  star.cn.nodes = std::move(nodes);
  star.cn.edges = std::move(cn_edges);
  star.cn.canonical = canonical_encoding(star.cn);
  star.root = 0;
  star.collapsed = true;
  return star;
}

}  // namespace fct
