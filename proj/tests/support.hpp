#pragma once

#include <memory>
#include <string>
#include <vector>

#include "fct/candidate_network.hpp"
#include "fct/generator.hpp"
#include "fct/mr/engine.hpp"
#include "fct/oracle.hpp"
#include "fct/pipeline.hpp"
#include "fct/shares.hpp"
#include "fct/star_join.hpp"
#include "fct/text.hpp"

namespace fct::test {

// A dataset with one parsed query. Pinned in memory: StarInput points into
// the collapsed schema.
struct Case {
  Dataset data;
  SchemaGraph schema;
  KeywordQuery query;
  TermFilter filter;

  Case(Dataset d, const std::string& text, std::size_t k = 10)
      : data(std::move(d)),
        schema(data.graph()),
        query(KeywordQuery::parse(text, k, data.config.rmax)),
        filter(StopWords::english(), query.keywords()) {}
  Case(const Case&) = delete;
  Case& operator=(const Case&) = delete;

  std::vector<CandidateNetwork> networks() const {
    return enumerate_candidate_networks(schema, query);
  }
  FctResult run(const PipelineOptions& options = {}) const {
    return run_fct(schema, query, filter, options);
  }
  Frequencies oracle(const OracleOptions& options = {}) const {
    return oracle_frequencies(schema, query, filter, options);
  }
};

inline std::unique_ptr<Case> fixture_case() {
  return std::make_unique<Case>(fixture(), "k1 k2 k3");
}

// The fixture's only CN collapsed into a star and laid out for Job 1.
struct FixtureStar {
  std::unique_ptr<Case> c = fixture_case();
  StarNetwork star = collapse_to_star(c->networks().at(0), c->schema);
  StarInput input = make_star_input(star);

  FixtureStar() = default;
  FixtureStar(const FixtureStar&) = delete;
  FixtureStar& operator=(const FixtureStar&) = delete;
};

// Position of the dimension whose relation is named `name`.
inline std::size_t dim_of(const StarInput& input, const std::string& name) {
  for (std::size_t i = 0; i < input.dims.size(); ++i) {
    if (input.schema->relation(input.dims[i].relation).name() == name) return i;
  }
  return input.dims.size();
}

inline PipelineOptions fixed_shares(std::size_t share, std::size_t workers = 1) {
  PipelineOptions o;
  o.uniform_share = share;
  o.engine.workers = workers;
  return o;
}

inline GeneratorSpec small_spec(Shape shape, std::uint64_t seed) {
  GeneratorSpec spec;
  spec.shape = shape;
  spec.seed = seed;
  spec.fact_rows = 2000;
  spec.dim_rows = 120;
  spec.vocabulary = 60;
  spec.queries_per_type = 2;
  spec.keyword_rate = 0.05;
  spec.key_multiplicity = 1 + seed % 3;
  spec.zipf = (seed % 2) ? 0.8 : 0.0;
  return spec;
}

inline std::string ranking_text(const std::vector<TermFrequency>& r) {
  std::string out;
  for (const auto& t : r) out += t.term + "\t" + std::to_string(t.freq) + "\n";
  return out;
}

}  // namespace fct::test
