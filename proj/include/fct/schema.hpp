#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fct {

using Row = std::vector<std::string>;

/// A named table. Column names are unique, every row has one value per
/// column and, when a primary key is named, its values are unique.
class Relation {
 public:
  Relation(std::string name, std::vector<std::string> columns, std::string key,
           std::vector<Row> rows);

  const std::string& name() const { return name_; }
  const std::vector<std::string>& columns() const { return columns_; }
  const std::string& key() const { return key_; }
  const std::vector<Row>& rows() const { return rows_; }
  std::size_t size() const { return rows_.size(); }

  std::optional<std::size_t> find_column(std::string_view column) const;
  /// Throws ConfigError when the column does not exist.
  std::size_t column_index(std::string_view column) const;

  const std::string& value(std::size_t row, std::size_t column) const {
    return rows_[row][column];
  }

 private:
  std::string name_;
  std::vector<std::string> columns_;
  std::string key_;
  std::vector<Row> rows_;
};

/// R_from -> R_to: R_to.fk_column references R_from.from_column. The
/// referenced column is normally R_from's primary key, but a dimension may be
/// joined on a non-key attribute (several dimension tuples per join value),
/// which is what the combine step's count suffix exists for.
struct SchemaEdge {
  std::size_t from;
  std::size_t to;
  std::string from_column;
  std::string fk_column;
};

struct EdgeSpec {
  std::string from;
  std::string to;
  std::string fk_column;
  std::string from_column;  // empty means R_from's primary key
};

/// Directed schema graph over shared, immutable relations. A tuple's text is
/// the ", "-joined values of every column that is neither the primary key nor
/// an endpoint column of some edge.
class SchemaGraph {
 public:
  SchemaGraph() = default;
  SchemaGraph(std::vector<Relation> relations, const std::vector<EdgeSpec>& edges);
  SchemaGraph(std::vector<std::shared_ptr<const Relation>> relations,
              std::vector<SchemaEdge> edges);

  std::size_t relation_count() const { return relations_.size(); }
  const Relation& relation(std::size_t index) const { return *relations_[index]; }
  const std::shared_ptr<const Relation>& relation_ptr(std::size_t index) const {
    return relations_[index];
  }
  std::optional<std::size_t> find(std::string_view name) const;
  std::size_t index_of(std::string_view name) const;

  const std::vector<SchemaEdge>& edges() const { return edges_; }

  std::string text(std::size_t relation, std::size_t row) const;
  const std::vector<std::size_t>& text_columns(std::size_t relation) const {
    return text_columns_[relation];
  }

  /// Column positions of an edge's endpoints.
  std::size_t from_column(std::size_t edge) const { return from_col_[edge]; }
  std::size_t fk_column(std::size_t edge) const { return fk_col_[edge]; }
  /// True when the edge references R_from's primary key, i.e. every R_to
  /// tuple joins at most one R_from tuple.
  bool references_key(std::size_t edge) const;

 private:
  void validate_and_index();

  std::vector<std::shared_ptr<const Relation>> relations_;
  std::vector<SchemaEdge> edges_;
  std::vector<std::vector<std::size_t>> text_columns_;
  std::vector<std::size_t> from_col_;
  std::vector<std::size_t> fk_col_;
};

/// Lowercased, de-duplicated, sorted keywords; at most 31 of them so a
/// keyword subset fits a mask.
class KeywordQuery {
 public:
  static constexpr std::size_t kDefaultRmax = 5;

  KeywordQuery(const std::vector<std::string>& keywords, std::size_t k,
               std::size_t rmax = kDefaultRmax);
  /// Space/punctuation separated keywords, tokenized like tuple text.
  static KeywordQuery parse(std::string_view text, std::size_t k,
                            std::size_t rmax = kDefaultRmax);

  const std::vector<std::string>& keywords() const { return keywords_; }
  std::size_t k() const { return k_; }
  std::size_t rmax() const { return rmax_; }
  std::uint32_t full_mask() const { return (1u << keywords_.size()) - 1u; }

  std::string describe_mask(std::uint32_t mask) const;

 private:
  std::vector<std::string> keywords_;
  std::size_t k_;
  std::size_t rmax_;
};

/// R^K: tuples of one relation whose query-keyword content is exactly K.
/// mask == 0 is the free tuple set.
struct TupleSet {
  std::size_t relation = 0;
  std::uint32_t mask = 0;
  std::vector<std::size_t> members;

  bool is_free() const { return mask == 0; }
};

/// Query keywords contained in a tuple, as a mask over query.keywords().
std::uint32_t keyword_mask(const SchemaGraph& schema, std::size_t relation,
                           std::size_t row, const KeywordQuery& query);

/// One tuple set per non-empty keyword class present in the relation, plus
/// the free tuple set (possibly empty), ordered by mask. The members of all
/// returned sets partition the relation.
std::vector<TupleSet> classify_tuple_sets(const SchemaGraph& schema,
                                          std::size_t relation,
                                          const KeywordQuery& query);

}  // namespace fct
