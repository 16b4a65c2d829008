#include "fct/schema.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <unordered_set>

#include "fct/error.hpp"
#include "fct/text.hpp"

namespace fct {

Relation::Relation(std::string name, std::vector<std::string> columns, std::string key,
                   std::vector<Row> rows)
    : name_(std::move(name)),
      columns_(std::move(columns)),
      key_(std::move(key)),
      rows_(std::move(rows)) {
  if (name_.empty()) throw Error(ErrorCode::ConfigError, "relation without a name");
  std::set<std::string_view> seen;
  for (const auto& c : columns_) {
    if (!seen.insert(c).second) {
      throw Error(ErrorCode::ConfigError, "duplicate column " + c + " in " + name_);
    }
  }
  for (std::size_t r = 0; r < rows_.size(); ++r) {
    if (rows_[r].size() != columns_.size()) {
      throw Error(ErrorCode::ConfigError,
                  name_ + " row " + std::to_string(r) + " has " +
                      std::to_string(rows_[r].size()) + " values, expected " +
                      std::to_string(columns_.size()));
    }
  }
  if (!key_.empty()) {
    std::size_t k = column_index(key_);
    std::unordered_set<std::string_view> keys;
    for (const auto& row : rows_) {
      if (!keys.insert(row[k]).second) {
        throw Error(ErrorCode::ConfigError,
                    "duplicate primary key '" + row[k] + "' in " + name_);
      }
    }
  }
}

std::optional<std::size_t> Relation::find_column(std::string_view column) const {
  auto it = std::find(columns_.begin(), columns_.end(), column);
  if (it == columns_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - columns_.begin());
}

std::size_t Relation::column_index(std::string_view column) const {
  if (auto c = find_column(column)) return *c;
  throw Error(ErrorCode::ConfigError,
              "relation " + name_ + " has no column " + std::string(column));
}

SchemaGraph::SchemaGraph(std::vector<Relation> relations,
                         const std::vector<EdgeSpec>& edges) {
  relations_.reserve(relations.size());
  for (auto& r : relations) relations_.push_back(std::make_shared<const Relation>(std::move(r)));
  for (const auto& spec : edges) {
    auto from = find(spec.from);
    auto to = find(spec.to);
    if (!from || !to) {
      throw Error(ErrorCode::ConfigError,
                  "edge " + spec.from + " -> " + spec.to + " names an unknown relation");
    }
    std::string from_column =
        spec.from_column.empty() ? relation(*from).key() : spec.from_column;
    if (from_column.empty()) {
      throw Error(ErrorCode::ConfigError, "edge " + spec.from + " -> " + spec.to +
                                              " has no referenced column and " +
                                              spec.from + " has no primary key");
    }
    edges_.push_back(SchemaEdge{*from, *to, std::move(from_column), spec.fk_column});
  }
  validate_and_index();
}

SchemaGraph::SchemaGraph(std::vector<std::shared_ptr<const Relation>> relations,
                         std::vector<SchemaEdge> edges)
    : relations_(std::move(relations)), edges_(std::move(edges)) {
  validate_and_index();
}

void SchemaGraph::validate_and_index() {
  std::set<std::string_view> names;
  for (const auto& r : relations_) {
    if (!names.insert(r->name()).second) {
      throw Error(ErrorCode::ConfigError, "duplicate relation " + r->name());
    }
  }
  from_col_.clear();
  fk_col_.clear();
  std::vector<std::set<std::size_t>> join_columns(relations_.size());
  for (const auto& e : edges_) {
    if (e.from >= relations_.size() || e.to >= relations_.size()) {
      throw Error(ErrorCode::ConfigError, "edge endpoint out of range");
    }
    if (e.from == e.to) {
      throw Error(ErrorCode::ConfigError, "self edge on " + relations_[e.from]->name());
    }
    std::size_t fc = relations_[e.from]->column_index(e.from_column);
    std::size_t kc = relations_[e.to]->column_index(e.fk_column);
    from_col_.push_back(fc);
    fk_col_.push_back(kc);
    join_columns[e.from].insert(fc);
    join_columns[e.to].insert(kc);
  }
  text_columns_.assign(relations_.size(), {});
  for (std::size_t r = 0; r < relations_.size(); ++r) {
    const auto& rel = *relations_[r];
    auto key = rel.key().empty() ? std::nullopt : rel.find_column(rel.key());
    for (std::size_t c = 0; c < rel.columns().size(); ++c) {
      if (key && *key == c) continue;
      if (join_columns[r].count(c)) continue;
      text_columns_[r].push_back(c);
    }
  }
}

std::optional<std::size_t> SchemaGraph::find(std::string_view name) const {
  for (std::size_t i = 0; i < relations_.size(); ++i) {
    if (relations_[i]->name() == name) return i;
  }
  return std::nullopt;
}

std::size_t SchemaGraph::index_of(std::string_view name) const {
  if (auto i = find(name)) return *i;
  throw Error(ErrorCode::ConfigError, "unknown relation " + std::string(name));
}

std::string SchemaGraph::text(std::size_t relation, std::size_t row) const {
  const auto& rel = *relations_[relation];
  std::string out;
  for (std::size_t c : text_columns_[relation]) {
    const auto& v = rel.value(row, c);
    if (v.empty()) continue;
    if (!out.empty()) out += ", ";
    out += v;
  }
  return out;
}

bool SchemaGraph::references_key(std::size_t edge) const {
  const auto& e = edges_[edge];
  return relations_[e.from]->key() == e.from_column;
}

KeywordQuery::KeywordQuery(const std::vector<std::string>& keywords, std::size_t k,
                           std::size_t rmax)
    : k_(k), rmax_(rmax) {
  std::set<std::string> unique;
  for (const auto& kw : keywords) {
    for (auto& token : tokenize(kw)) unique.insert(std::move(token));
  }
  keywords_.assign(unique.begin(), unique.end());
  if (keywords_.empty()) throw Error(ErrorCode::InvalidInput, "query has no keywords");
  if (keywords_.size() > 31) throw Error(ErrorCode::InvalidInput, "more than 31 keywords");
  if (k_ < 1) throw Error(ErrorCode::InvalidInput, "k must be at least 1");
  if (rmax_ < 1) throw Error(ErrorCode::InvalidInput, "rmax must be at least 1");
}

KeywordQuery KeywordQuery::parse(std::string_view text, std::size_t k, std::size_t rmax) {
  return KeywordQuery(tokenize(text), k, rmax);
}

std::string KeywordQuery::describe_mask(std::uint32_t mask) const {
  std::string out = "{";
  bool first = true;
  for (std::size_t i = 0; i < keywords_.size(); ++i) {
    if (!(mask & (1u << i))) continue;
    if (!first) out += ",";
    out += keywords_[i];
    first = false;
  }
  return out + "}";
}

std::uint32_t keyword_mask(const SchemaGraph& schema, std::size_t relation,
                           std::size_t row, const KeywordQuery& query) {
  const auto& kws = query.keywords();
  std::uint32_t mask = 0;
  for (const auto& token : tokenize(schema.text(relation, row))) {
    auto it = std::lower_bound(kws.begin(), kws.end(), token);
    if (it != kws.end() && *it == token) mask |= 1u << (it - kws.begin());
  }
  return mask;
}

std::vector<TupleSet> classify_tuple_sets(const SchemaGraph& schema, std::size_t relation,
                                          const KeywordQuery& query) {
  std::map<std::uint32_t, std::vector<std::size_t>> classes;
  classes[0];
  const std::size_t n = schema.relation(relation).size();
  for (std::size_t row = 0; row < n; ++row) {
    classes[keyword_mask(schema, relation, row, query)].push_back(row);
  }
  std::vector<TupleSet> sets;
  sets.reserve(classes.size());
  for (auto& [mask, members] : classes) {
    sets.push_back(TupleSet{relation, mask, std::move(members)});
  }
  return sets;
}

}  // namespace fct
