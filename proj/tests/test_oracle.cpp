#include <doctest.h>

#include "fct/error.hpp"
#include "fct/oracle.hpp"
#include "support.hpp"

using namespace fct;

TEST_SUITE("oracle") {
  TEST_CASE("fixture results") {
    auto c = test::fixture_case();
    auto cn = c->networks().at(0);
    const auto r_node = *is_star(cn);
    const std::size_t r = c->schema.index_of("R");
    std::uint64_t through_r2 = 0, total = 0;
    auto eval = evaluate_cn(cn, c->schema, [&](const Mtjnt& m) {
      ++total;
      if (m[r_node] == 1) ++through_r2;
      CHECK(m.size() == 4);
    });
    CHECK(through_r2 == 6);
    // Sum over facts of the product of join multiplicities: 4 + 6 + 4 + 4 + 0.
    CHECK(total == 18);
    CHECK(eval.mtjnts == 18);
    const auto& rel = c->schema.relation(r);
    (void)rel;
    CHECK(eval.participation[r_node] == std::vector<std::uint64_t>{4, 6, 4, 4, 0});
    CHECK(count_cn(cn, c->schema).participation == eval.participation);
  }

  TEST_CASE("term counts include repeats") {
    auto c = test::fixture_case();
    auto cn = c->networks().at(0);
    std::uint64_t w1 = 0;
    evaluate_cn(cn, c->schema, [&](const Mtjnt& m) { w1 += count_term(cn, c->schema, m, "w1"); });
    CHECK(w1 == 29);
    auto f = c->oracle();
    CHECK(f.at("w1") == 29);
    CHECK(f.at("w2") == 27);
    CHECK(f.at("w3") == 28);
    CHECK(f.at("w4") == 6);
    CHECK(f.count("k1") == 0);
  }

  TEST_CASE("nested loop and dynamic programming agree") {
    for (auto shape : {Shape::Star, Shape::Chain, Shape::Mix}) {
      auto data = generate(test::small_spec(shape, 6));
      auto g = data.graph();
      for (const auto& q : data.queries) {
        auto query = KeywordQuery::parse(q.text, 10, data.config.rmax);
        for (const auto& cn : enumerate_candidate_networks(g, query)) {
          auto a = evaluate_cn(cn, g);
          auto b = count_cn(cn, g);
          CHECK(a.mtjnts == b.mtjnts);
          CHECK(a.participation == b.participation);
        }
        test::Case c(data, q.text);
        OracleOptions dp;
        dp.dynamic_programming = true;
        CHECK(c.oracle() == c.oracle(dp));
      }
    }
  }

  TEST_CASE("too many results") {
    auto c = test::fixture_case();
    OracleOptions o;
    o.max_mtjnts = 10;
    try {
      c->oracle(o);
      FAIL("expected TooLarge");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::TooLarge);
    }
    o.max_mtjnts = 18;
    CHECK_NOTHROW(c->oracle(o));
  }

  TEST_CASE("comparison kinds") {
    std::vector<TermFrequency> base = {{"w1", 29}, {"w3", 28}, {"w2", 27}, {"w4", 6}};
    CHECK(compare(base, base).kind == Comparison::Kind::Equal);
    auto off = base;
    off[2].freq += 1;
    auto cmp = compare(off, base);
    CHECK(cmp.kind == Comparison::Kind::Value);
    CHECK(cmp.term == "w2");
    CHECK(cmp.actual == 28);
    CHECK(cmp.expected == 27);
    CHECK(cmp.rank == 2);
    CHECK_FALSE(cmp.describe().empty());
    std::vector<TermFrequency> tie = {{"a", 5}, {"b", 5}};
    std::vector<TermFrequency> swapped = {{"b", 5}, {"a", 5}};
    CHECK(compare(swapped, tie).kind == Comparison::Kind::RankOnly);
    // A different term at the cut with the same frequency is a tie-break.
    std::vector<TermFrequency> renamed = {{"a", 5}, {"c", 5}};
    CHECK(compare(renamed, tie).kind == Comparison::Kind::RankOnly);
    std::vector<TermFrequency> lower = {{"a", 5}, {"c", 4}};
    CHECK(compare(lower, tie).kind == Comparison::Kind::Value);
    CHECK(compare({}, tie).kind == Comparison::Kind::Value);
  }
}
