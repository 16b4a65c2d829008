#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include <doctest.h>

#include "fct/error.hpp"
#include "fct/scheduler.hpp"
#include "support.hpp"

using namespace fct;

namespace {

// Task costs by direct enumeration over the whole star input.
std::vector<double> exact_costs(const StarInput& in, const Hypercube& cube) {
  const auto& g = *in.schema;
  const std::size_t m = in.dims.size();
  std::vector<std::map<std::string, double>> mult(m);
  std::vector<double> cost(cube.tasks(), 0);
  for (std::size_t i = 0; i < m; ++i) {
    const auto& d = in.dims[i];
    for (auto row : d.rows) {
      const auto& v = g.relation(d.relation).value(row, d.column);
      mult[i][v] += 1;
      for (std::size_t t = 0; t < cube.tasks(); ++t) {
        if (cube.digits(t)[i] == cube.digit(i, v)) cost[t] += 1;
      }
    }
  }
  for (auto row : in.fact_rows) {
    std::vector<std::size_t> digits;
    double join = 1;
    for (std::size_t i = 0; i < m; ++i) {
      const auto& v = g.relation(in.fact_relation).value(row, in.dims[i].fact_column);
      digits.push_back(cube.digit(i, v));
      auto it = mult[i].find(v);
      join *= it == mult[i].end() ? 0 : it->second;
    }
    cost[cube.label(digits)] += 1 + join;
  }
  return cost;
}

std::vector<double> ranks(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    for (std::size_t k = i; k <= j; ++k) r[idx[k]] = (i + j) / 2.0;
    i = j + 1;
  }
  return r;
}

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  auto ra = ranks(a), rb = ranks(b);
  double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / ra.size();
  double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / rb.size();
  double num = 0, da = 0, db = 0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    num += (ra[i] - ma) * (rb[i] - mb);
    da += (ra[i] - ma) * (ra[i] - ma);
    db += (rb[i] - mb) * (rb[i] - mb);
  }
  return num / std::sqrt(da * db);
}

std::vector<TaskCost> costs_of(const std::vector<double>& c) {
  std::vector<TaskCost> out;
  for (std::size_t i = 0; i < c.size(); ++i) {
    TaskCost t;
    t.label = i;
    t.cost = c[i];
    out.push_back(t);
  }
  return out;
}

std::unique_ptr<test::Case> skewed_case() {
  GeneratorSpec spec;
  spec.shape = Shape::Star;
  spec.fact_rows = 10000;
  spec.dim_rows = 300;
  spec.key_multiplicity = 2;
  spec.zipf = 1.2;
  spec.queries_per_type = 1;
  spec.seed = 7;
  auto data = generate(spec);
  auto text = data.queries.at(0).text;
  return std::make_unique<test::Case>(std::move(data), text);
}

}  // namespace

TEST_SUITE("sampling") {
  TEST_CASE("sample size, order and determinism") {
    auto a = sample_rows(1000, 0.1, 42);
    CHECK(a.size() == 100);
    CHECK(std::is_sorted(a.begin(), a.end()));
    CHECK(std::adjacent_find(a.begin(), a.end()) == a.end());
    CHECK(a.back() < 1000);
    CHECK(sample_rows(1000, 0.1, 42) == a);
    CHECK(sample_rows(1000, 0.1, 43) != a);
    CHECK(sample_rows(7, 0.5, 1).size() == 4);
    auto all = sample_rows(50, 1.0, 9);
    CHECK(all.size() == 50);
    CHECK(all.front() == 0);
    CHECK(sample_rows(0, 0.3, 1).empty());
  }

  TEST_CASE("invalid rates") {
    for (double r : {0.0, -0.5, 1.01}) {
      try {
        sample_rows(10, r, 1);
        FAIL("expected InvalidRate");
      } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::InvalidRate);
      }
    }
  }

  TEST_CASE("sampled rows are spread evenly") {
    std::vector<int> hits(10, 0);
    for (std::uint64_t seed = 0; seed < 400; ++seed) {
      for (auto r : sample_rows(100, 0.1, seed)) ++hits[r / 10];
    }
    for (int h : hits) CHECK(std::abs(h - 400) < 80);
  }
}

TEST_SUITE("cost estimates") {
  TEST_CASE("fixture with a full sample") {
    test::FixtureStar fx;
    Hypercube cube({2, 2, 2});
    auto costs = estimate_task_costs(fx.input, cube, sample_star(fx.input, 1.0, 1));
    REQUIRE(costs.size() == 8);
    const auto& t001 = costs[1];
    CHECK(t001.fact_count == 1);
    CHECK(t001.exact_fact_count == 1);
    CHECK(t001.join_est == 6);
    CHECK(t001.dim_counts == std::vector<double>{4, 2, 2});
    CHECK(t001.cost == t001.fact_count + 4 + 2 + 2 + t001.join_est);
    auto exact = exact_costs(fx.input, cube);
    for (std::size_t t = 0; t < 8; ++t) CHECK(costs[t].cost == doctest::Approx(exact[t]));
    CHECK(route_facts(fx.input, cube) == std::vector<std::uint64_t>{0, 1, 0, 1, 2, 1, 0, 0});
    CHECK(prune_empty_tasks(costs) == std::vector<std::size_t>{1, 3, 4, 5});
  }

  TEST_CASE("empty task has zero fact count and join estimate") {
    test::FixtureStar fx;
    auto costs = estimate_task_costs(fx.input, Hypercube({2, 2, 2}), sample_star(fx.input, 1.0, 1));
    CHECK(costs[0].fact_count == 0);
    CHECK(costs[0].join_est == 0);
  }

  TEST_CASE("no pruning when every task has facts") {
    std::vector<TaskCost> c(3);
    for (std::size_t i = 0; i < 3; ++i) {
      c[i].label = i;
      c[i].exact_fact_count = 1;
    }
    CHECK(prune_empty_tasks(c) == std::vector<std::size_t>{0, 1, 2});
  }

  TEST_CASE("sampled estimates track exact costs on skewed data") {
    auto c = skewed_case();
    auto star = collapse_to_star(c->networks().at(0), c->schema);
    auto input = make_star_input(star);
    Hypercube cube(plan_shares(27, input.dimension_sizes()).shares);
    auto exact = exact_costs(input, cube);
    for (std::uint64_t seed : {1, 2}) {
      auto est = estimate_task_costs(input, cube, sample_star(input, 0.1, seed));
      std::size_t within = 0, tasks = 0;
      for (std::size_t t = 0; t < cube.tasks(); ++t) {
        if (exact[t] == 0) continue;
        ++tasks;
        double ratio = est[t].cost / exact[t];
        if (ratio <= 3 && ratio >= 1.0 / 3) ++within;
      }
      CHECK(within == tasks);
    }
    std::vector<double> e(exact.begin(), exact.end()), s;
    for (const auto& t : estimate_task_costs(input, cube, sample_star(input, 0.2, 5))) {
      s.push_back(t.cost);
    }
    CHECK(spearman(e, s) >= 0.8);
  }
}

TEST_SUITE("assignment") {
  TEST_CASE("longest processing time first") {
    auto t = assign_tasks(costs_of({5, 4, 3, 2, 1}), 2);
    CHECK(t.reducer_tasks == std::vector<std::vector<std::size_t>>{{0, 3, 4}, {1, 2}});
    CHECK(t.loads == std::vector<double>{8, 7});
    auto one = assign_tasks(costs_of({5, 4, 3}), 1);
    CHECK(one.reducer_tasks == std::vector<std::vector<std::size_t>>{{0, 1, 2}});
    CHECK_THROWS_AS(assign_tasks(costs_of({1}), 0), Error);
  }

  TEST_CASE("skewed fixture-shaped costs") {
    std::vector<double> c(8, 0);
    c[1] = 1;  // 001
    c[3] = 1;  // 011
    c[4] = 2;  // 100
    c[5] = 1;  // 101
    auto t = assign_tasks(costs_of(c), 2, {1, 3, 4, 5});
    CHECK(t.reducer_tasks == std::vector<std::vector<std::size_t>>{{4, 5}, {1, 3}});
    CHECK(t.task_reducer.size() == 4);
    auto s = t.schedule();
    CHECK(s.reducers == t.reducer_tasks);
  }

  TEST_CASE("longest processing time stays within twice the optimum") {
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 50; ++trial) {
      std::vector<double> c(9);
      for (auto& x : c) x = 1 + double(rng() % 50);
      auto t = assign_tasks(costs_of(c), 3);
      double best = INFINITY;
      std::vector<int> a(9, 0);
      while (true) {
        double l[3] = {0, 0, 0};
        for (int i = 0; i < 9; ++i) l[a[i]] += c[i];
        best = std::min(best, *std::max_element(l, l + 3));
        int i = 0;
        while (i < 9 && ++a[i] == 3) a[i++] = 0;
        if (i == 9) break;
      }
      CHECK(*std::max_element(t.loads.begin(), t.loads.end()) <= 2 * best);
    }
  }

  TEST_CASE("round robin") {
    auto t = round_robin({1, 3, 4, 5}, 2);
    CHECK(t.reducer_tasks == std::vector<std::vector<std::size_t>>{{4}, {1, 3, 5}});
    CHECK_THROWS_AS(round_robin({1}, 0), Error);
  }
}

TEST_SUITE("pull plan") {
  TEST_CASE("second co-located task pulls only new keys") {
    test::FixtureStar fx;
    PipelineOptions o = test::fixed_shares(2);
    Hypercube cube({2, 2, 2});
    auto sh = mr::shuffle(job1_definition(fx.input, cube, o), job1_tables(fx.input));
    auto manifests = build_manifests(sh.task_input, fact_tag(3));
    AllocationTable table;
    table.reducer_tasks = {{1, 3}};
    table.task_reducer = {{1, 0}, {3, 0}};
    table.loads = {0};
    auto plan = dedup_pull_plan(table, manifests);
    REQUIRE(plan.pulls.size() == 1);
    REQUIRE(plan.pulls[0].size() == 2);
    CHECK(plan.pulls[0][0].size() == 5);
    CHECK(plan.pulls[0][1] == std::vector<mr::Key>{{2, "b3"}});
    CHECK(plan.pulled_pairs < plan.naive_pairs);
    // The pulled keys of a reducer cover its tasks' manifests.
    std::set<mr::Key> pulled, needed;
    for (auto& task : plan.pulls[0]) pulled.insert(task.begin(), task.end());
    for (auto t : {1, 3}) {
      for (auto& [k, n] : manifests[t].keys) needed.insert(k);
    }
    CHECK(pulled == needed);

    AllocationTable apart;
    apart.reducer_tasks = {{1}, {3}};
    apart.task_reducer = {{1, 0}, {3, 1}};
    apart.loads = {0, 0};
    auto disjoint = dedup_pull_plan(apart, manifests);
    CHECK(disjoint.pulled_pairs == disjoint.naive_pairs);
  }

  TEST_CASE("dedup run moves fewer pairs and keeps output") {
    test::FixtureStar fx;
    PipelineOptions o = test::fixed_shares(2);
    o.reducers = 2;
    o.pull_dedup = true;
    auto with = run_job1(fx.input, o);
    o.pull_dedup = false;
    auto without = run_job1(fx.input, o);
    CHECK(with.result.stats.deduplicated > 0);
    CHECK(without.result.stats.deduplicated == 0);
    auto freq_a = run_job2(with.lines, fx.c->filter, o).frequencies;
    auto freq_b = run_job2(without.lines, fx.c->filter, o).frequencies;
    CHECK(freq_a == freq_b);
  }
}

TEST_SUITE("allocation files") {
  TEST_CASE("save and load round trip") {
    auto c = skewed_case();
    PipelineOptions o;
    o.tasks = 27;
    o.reducers = 8;
    o.skew_schedule = true;
    std::map<std::string, CnAllocation> plans;
    for (const auto& cn : c->networks()) {
      auto star = collapse_to_star(cn, c->schema);
      plans[cn.canonical] = plan_star(make_star_input(star), o);
    }
    auto file = std::filesystem::temp_directory_path() / "fct_alloc_test.json";
    save_allocations(plans, file);
    auto back = load_allocations(file);
    REQUIRE(back.size() == plans.size());
    for (const auto& [key, a] : plans) {
      const auto& b = back.at(key);
      CHECK(b.shares == a.shares);
      CHECK(b.table.reducer_tasks == a.table.reducer_tasks);
      CHECK(b.table.task_reducer == a.table.task_reducer);
      REQUIRE(b.costs.size() == a.costs.size());
      for (std::size_t i = 0; i < a.costs.size(); ++i) {
        CHECK(b.costs[i].cost == doctest::Approx(a.costs[i].cost));
        CHECK(b.costs[i].exact_fact_count == a.costs[i].exact_fact_count);
      }
    }
    o.allocations = back;
    CHECK(c->run(o).frequencies == c->run().frequencies);
    std::filesystem::remove(file);
    CHECK_THROWS_AS(load_allocations(file), Error);
  }
}
