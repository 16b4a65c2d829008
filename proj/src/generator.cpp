#include "fct/generator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <set>

#include "fct/error.hpp"

namespace fct {

Shape parse_shape(std::string_view name) {
  if (name == "star") return Shape::Star;
  if (name == "chain") return Shape::Chain;
  if (name == "mix") return Shape::Mix;
  if (name == "fixture") return Shape::Fixture;
  throw Error(ErrorCode::InvalidInput, "unknown shape " + std::string(name));
}

std::string_view to_string(Shape shape) {
  switch (shape) {
    case Shape::Star: return "star";
    case Shape::Chain: return "chain";
    case Shape::Mix: return "mix";
    case Shape::Fixture: return "fixture";
  }
  return "star";
}

SchemaGraph Dataset::graph() const { return SchemaGraph(relations, config.edges); }

namespace {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed ^ 0x5851f42d4c957f2dULL) {}

  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t threshold = (0 - n) % n;
    while (true) {
      std::uint64_t x = engine_();
      if (x >= threshold) return x % n;
    }
  }
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  bool chance(double p) { return uniform() < p; }

 private:
  std::mt19937_64 engine_;
};

class Zipf {
 public:
  Zipf(std::size_t n, double s) : cdf_(n) {
    double total = 0;
    for (std::size_t r = 0; r < n; ++r) {
      total += 1.0 / std::pow(static_cast<double>(r + 1), s);
      cdf_[r] = total;
    }
    for (auto& c : cdf_) c /= total;
  }
  std::size_t draw(Rng& rng) const {
    auto it = std::upper_bound(cdf_.begin(), cdf_.end(), rng.uniform());
    return std::min<std::size_t>(static_cast<std::size_t>(it - cdf_.begin()), cdf_.size() - 1);
  }

 private:
  std::vector<double> cdf_;
};

struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::string key;
  std::vector<Row> rows;

  std::size_t col(std::string_view c) const {
    return static_cast<std::size_t>(std::find(columns.begin(), columns.end(), c) - columns.begin());
  }
};

std::string words(Rng& rng, const GeneratorSpec& spec) {
  std::string out;
  for (std::size_t i = 0; i < spec.words_per_tuple; ++i) {
    if (i) out += ' ';
    out += "w" + std::to_string(rng.below(spec.vocabulary));
  }
  return out;
}

std::string key_value(char prefix, std::size_t rank) {
  return std::string(1, prefix) + std::to_string(rank + 1);
}

// A dimension keyed by `key_col`; with multiplicity above one the key is a
// plain column next to a surrogate id.
Table dimension(const std::string& name, const std::string& key_col, char prefix,
                std::size_t rows, std::size_t multiplicity, Rng& rng, const GeneratorSpec& spec) {
  Table t;
  t.name = name;
  if (multiplicity <= 1) {
    t.columns = {key_col, "text"};
    t.key = key_col;
  } else {
    t.columns = {"id", key_col, "text"};
    t.key = "id";
  }
  for (std::size_t j = 0; j < rows; ++j) {
    Row row;
    if (multiplicity > 1) row.push_back(std::string(1, prefix) + "id" + std::to_string(j + 1));
    row.push_back(key_value(prefix, j / std::max<std::size_t>(1, multiplicity)));
    row.push_back(words(rng, spec));
    t.rows.push_back(std::move(row));
  }
  return t;
}

std::size_t distinct_keys(const GeneratorSpec& spec) {
  return (spec.dim_rows + spec.key_multiplicity - 1) / spec.key_multiplicity;
}

struct Link {
  std::string dim;
  std::string column;
};

void plant(Table& t, std::size_t row, const std::string& keyword) {
  auto& text = t.rows[row][t.col("text")];
  text += text.empty() ? keyword : " " + keyword;
}

}  // namespace

Dataset generate(const GeneratorSpec& spec) {
  if (spec.shape == Shape::Fixture) return fixture();
  if (spec.fact_rows < 1 || spec.dim_rows < 1) {
    throw Error(ErrorCode::InvalidInput, "generator needs at least one row per relation");
  }
  if (spec.key_multiplicity < 1 || spec.vocabulary < 1) {
    throw Error(ErrorCode::InvalidInput, "key multiplicity and vocabulary must be positive");
  }
  if (!(spec.zipf >= 0)) throw Error(ErrorCode::InvalidInput, "Zipf exponent must be >= 0");
  if (!(spec.keyword_rate >= 0 && spec.keyword_rate <= 1)) {
    throw Error(ErrorCode::InvalidInput, "keyword rate must lie in [0, 1]");
  }

  Rng rng(spec.seed);
  const std::size_t keys = distinct_keys(spec);
  const Zipf zipf(keys, spec.zipf);
  const std::size_t mult = spec.key_multiplicity;

  std::vector<Table> tables;
  std::vector<EdgeSpec> edges;
  std::vector<Link> fact_links;
  const bool has_part = spec.shape != Shape::Chain;
  const bool has_customer = spec.shape != Shape::Star;

  if (has_part) {
    tables.push_back(dimension("part", "partkey", 'p', spec.dim_rows, mult, rng, spec));
    fact_links.push_back({"part", "partkey"});
  }
  tables.push_back(dimension("supplier", "suppkey", 's', spec.dim_rows, mult, rng, spec));
  fact_links.push_back({"supplier", "suppkey"});
  tables.push_back(dimension("orders", "orderkey", 'o', spec.dim_rows, mult, rng, spec));
  fact_links.push_back({"orders", "orderkey"});
  if (has_customer) {
    tables.push_back(dimension("customer", "custkey", 'c', spec.dim_rows, mult, rng, spec));
    auto& orders = *std::find_if(tables.begin(), tables.end(),
                                 [](const Table& t) { return t.name == "orders"; });
    orders.columns.insert(orders.columns.end() - 1, "custkey");
    for (auto& row : orders.rows) {
      row.insert(row.end() - 1, key_value('c', zipf.draw(rng)));
    }
    edges.push_back({"customer", "orders", "custkey", mult > 1 ? "custkey" : ""});
  }

  Table fact;
  fact.name = "lineitem";
  fact.columns = {"lineid"};
  for (const auto& l : fact_links) fact.columns.push_back(l.column);
  fact.columns.push_back("text");
  fact.key = "lineid";
  for (std::size_t i = 0; i < spec.fact_rows; ++i) {
    Row row{"l" + std::to_string(i + 1)};
    for (const auto& l : fact_links) row.push_back(key_value(l.column[0], zipf.draw(rng)));
    row.push_back(words(rng, spec));
    fact.rows.push_back(std::move(row));
  }
  for (const auto& l : fact_links) {
    edges.push_back({l.dim, "lineitem", l.column, mult > 1 ? l.column : ""});
  }

  auto table = [&](const std::string& name) -> Table& {
    return *std::find_if(tables.begin(), tables.end(),
                         [&](const Table& t) { return t.name == name; });
  };
  // Row of `dim` joined to `fact_row` through `column`, chosen uniformly.
  auto joined = [&](const Table& from, std::size_t from_row, const std::string& column,
                    Table& dim) -> std::size_t {
    const auto& v = from.rows[from_row][from.col(column)];
    std::vector<std::size_t> match;
    for (std::size_t j = 0; j < dim.rows.size(); ++j) {
      if (dim.rows[j][dim.col(column)] == v) match.push_back(j);
    }
    if (match.empty()) throw Error(ErrorCode::InvalidInput, "dangling key " + v);
    return match[rng.below(match.size())];
  };

  std::vector<std::pair<std::string, std::vector<std::string>>> types;
  if (spec.shape == Shape::Star || spec.shape == Shape::Mix) {
    types.push_back({"star", {"part", "supplier", "orders"}});
  }
  if (spec.shape == Shape::Chain || spec.shape == Shape::Mix) {
    types.push_back({"chain", {"customer", "supplier"}});
  }
  if (spec.shape == Shape::Mix) types.push_back({"mix", {"customer", "part", "supplier"}});

  Dataset data;
  std::size_t serial = 0;
  for (const auto& [type, bags] : types) {
    for (std::size_t q = 0; q < spec.queries_per_type; ++q) {
      const std::size_t f = rng.below(fact.rows.size());
      std::string text;
      for (std::size_t b = 0; b < bags.size(); ++b) {
        const std::string keyword = "q" + std::to_string(serial) + "k" + std::to_string(b + 1);
        Table& dim = table(bags[b]);
        std::size_t row;
        if (bags[b] == "customer") {
          Table& orders = table("orders");
          const std::size_t o = joined(fact, f, "orderkey", orders);
          row = joined(orders, o, "custkey", dim);
        } else {
          const auto& link = *std::find_if(fact_links.begin(), fact_links.end(),
                                           [&](const Link& l) { return l.dim == bags[b]; });
          row = joined(fact, f, link.column, dim);
        }
        plant(dim, row, keyword);
        for (std::size_t j = 0; j < dim.rows.size(); ++j) {
          if (j != row && rng.chance(spec.keyword_rate)) plant(dim, j, keyword);
        }
        if (b) text += ' ';
        text += keyword;
      }
      data.queries.push_back({type, text});
      ++serial;
    }
  }

  tables.insert(tables.begin(), std::move(fact));
  for (auto& t : tables) {
    data.config.relations.push_back({t.name, t.name + ".tsv", t.columns, t.key});
    data.relations.emplace_back(t.name, t.columns, t.key, std::move(t.rows));
  }
  data.config.edges = std::move(edges);
  data.config.seed = spec.seed;
  return data;
}

Dataset fixture() {
  Dataset data;
  data.relations.emplace_back(
      "S", std::vector<std::string>{"sid", "A", "text"}, "sid",
      std::vector<Row>{{"s1", "a1", "..., k1, ..."},
                       {"s2", "a1", "k1, ..."},
                       {"s3", "a2", "..., k1, w1, w2, w3"},
                       {"s4", "a2", "..., k1, w2"},
                       {"s5", "a2", "..., k1, w3"},
                       {"s6", "a3", "..., k1"},
                       {"s7", "a4", "..., k1, w4"}});
  data.relations.emplace_back("T", std::vector<std::string>{"tid", "B", "text"}, "tid",
                              std::vector<Row>{{"t1", "b2", "..., k2"},
                                               {"t2", "b3", "..., k2, w2"},
                                               {"t3", "b3", "..., k2, w1, w3"},
                                               {"t4", "b4", "..., k2, w3"}});
  data.relations.emplace_back("P", std::vector<std::string>{"pid", "C", "text"}, "pid",
                              std::vector<Row>{{"p1", "c1", "..., k3, w1, w1, ..."},
                                               {"p2", "c1", "k3, w1, w2, ..."},
                                               {"p3", "c2", "..., k3, w2, w4"},
                                               {"p4", "c2", "..., k3, w2, w3"}});
  data.relations.emplace_back("R", std::vector<std::string>{"rid", "A", "B", "C", "text"}, "rid",
                              std::vector<Row>{{"r1", "a1", "b2", "c2", "w1, w2, ..."},
                                               {"r2", "a2", "b4", "c1", "..., w2, w3"},
                                               {"r3", "a4", "b3", "c1", "..., w3"},
                                               {"r4", "a1", "b4", "c1", "..."},
                                               {"r5", "a5", "b2", "c2", "..., w4"}});
  for (const auto& r : data.relations) {
    data.config.relations.push_back({r.name(), r.name() + ".tsv", r.columns(), r.key()});
  }
  data.config.edges = {{"S", "R", "A", "A"}, {"T", "R", "B", "B"}, {"P", "R", "C", "C"}};
  data.config.rmax = 4;
  data.queries.push_back({"star", "k1 k2 k3"});
  return data;
}

void write_dataset(const Dataset& data, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create " + dir.string() + ": " + ec.message());
  save_config(data.config, dir / "schema.json");
  for (std::size_t i = 0; i < data.relations.size(); ++i) {
    write_tsv(data.relations[i], dir / data.config.relations[i].file);
  }
  std::ofstream out(dir / "queries.tsv");
  if (!out) throw Error(ErrorCode::IoError, "cannot write queries.tsv");
  for (const auto& q : data.queries) out << q.type << '\t' << q.text << '\n';
}

}  // namespace fct
