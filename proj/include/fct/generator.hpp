#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "fct/io.hpp"
#include "fct/schema.hpp"

namespace fct {

enum class Shape { Star, Chain, Mix, Fixture };

Shape parse_shape(std::string_view name);
std::string_view to_string(Shape shape);

/// Star: lineitem with part, supplier and orders. Chain: customer -> orders
/// -> lineitem <- supplier. Mix: the star plus customer -> orders.
struct GeneratorSpec {
  Shape shape = Shape::Star;
  std::size_t fact_rows = 10000;
  std::size_t dim_rows = 500;
  /// Dimension tuples per join value; above 1 the join is on a non-key column.
  std::size_t key_multiplicity = 1;
  std::size_t vocabulary = 200;
  std::size_t words_per_tuple = 4;
  /// Probability that a tuple of a keyword's relation carries the keyword,
  /// on top of the one joined tuple that always does.
  double keyword_rate = 0.02;
  /// Zipf exponent of fact (and orders) foreign keys; 0 is uniform.
  double zipf = 0;
  std::size_t queries_per_type = 3;
  std::uint64_t seed = 1;
};

struct GeneratedQuery {
  std::string type;
  std::string text;
};

struct Dataset {
  SchemaConfig config;
  std::vector<Relation> relations;
  std::vector<GeneratedQuery> queries;

  SchemaGraph graph() const;
};

/// Throws InvalidInput on an invalid spec.
Dataset generate(const GeneratorSpec& spec);

/// The four-relation star with keywords k1, k2, k3 whose Job 1 num- and
/// vol-arrays are spelled out for tasks 001 and 011.
Dataset fixture();

/// schema.json, one TSV per relation and queries.tsv (type<TAB>keywords).
void write_dataset(const Dataset& data, const std::filesystem::path& dir);

}  // namespace fct
