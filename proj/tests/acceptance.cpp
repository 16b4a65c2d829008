// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit when any
// criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "fct/frequency.hpp"
#include "fct/oracle.hpp"
#include "fct/pipeline.hpp"
#include "fct/report.hpp"
#include "fct/shares.hpp"
#include "support.hpp"

using namespace fct;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok && pass) detail = what;
    pass = pass && ok;
  }
};

using Clock = std::chrono::steady_clock;

int failures = 0;

void criterion(int id, const std::string& name, double limit_seconds,
               const std::function<Outcome()>& body) {
  const auto start = Clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o.pass = false;
    o.detail = std::string("exception: ") + e.what();
  }
  const double secs = std::chrono::duration<double>(Clock::now() - start).count();
  if (limit_seconds > 0 && secs >= limit_seconds) {
    o.require(false, "took " + std::to_string(secs) + " s, limit " + std::to_string(limit_seconds));
  }
  if (!o.pass) ++failures;
  std::printf("%s %d %s (%.2f s)%s%s\n", o.pass ? "PASS" : "FAIL", id, name.c_str(), secs,
              o.detail.empty() ? "" : ": ", o.detail.c_str());
  std::fflush(stdout);
}

std::string ranking_bytes(const std::vector<TermFrequency>& r) {
  std::ostringstream out;
  write_ranking(r, out);
  return out.str();
}

// num- and vol-arrays of one builder after the given fixture tasks.
std::map<std::string, std::uint64_t> fixture_arrays(const test::FixtureStar& fx,
                                                    const std::vector<std::size_t>& tasks,
                                                    bool want_num) {
  auto o = test::fixed_shares(2);
  o.combine_key_joins = true;
  Hypercube cube({2, 2, 2});
  auto sh = mr::shuffle(job1_definition(fx.input, cube, o), job1_tables(fx.input));
  StatisticsBuilder b(3);
  std::map<std::string, std::uint64_t> num;
  for (auto t : tasks) {
    b.begin_task();
    num.clear();
    for (const auto& g : mr::group_by_key(sh.task_input[t])) {
      b.add(g);
      if (g.key.tag <= 3) num[g.key.payload] = b.num(g.key.tag - 1, g.key.payload)->num;
    }
  }
  if (want_num) return num;
  std::map<std::string, std::uint64_t> vol;
  for (const auto& r : b.totals()) vol[(r.kind == 0 ? "fact " : "") + r.key] = r.volume;
  return vol;
}

GeneratorSpec seeded_spec(std::uint64_t seed) {
  GeneratorSpec spec;
  static const Shape shapes[] = {Shape::Star, Shape::Chain, Shape::Mix};
  spec.shape = shapes[seed % 3];
  spec.seed = seed;
  spec.fact_rows = 2000 + 400 * seed;  // up to 10^4
  spec.dim_rows = 200 + 10 * seed;
  spec.vocabulary = 150;
  spec.key_multiplicity = 1 + seed % 3;
  spec.zipf = (seed % 4) * 0.4;
  spec.keyword_rate = 0.03;
  spec.queries_per_type = 2;
  return spec;
}

}  // namespace

int main() {
  criterion(1, "worked-example num- and vol-arrays for tasks 001 and 011", 1.0, [] {
    Outcome o;
    test::FixtureStar fx;
    using M = std::map<std::string, std::uint64_t>;
    o.require(fixture_arrays(fx, {1}, true) == M{{"a2", 3}, {"a4", 1}, {"b2", 1}, {"b4", 1}, {"c1", 2}},
              "task 001 num-arrays differ");
    o.require(fixture_arrays(fx, {1}, false) == M{{"fact a2|b4|c1", 6}, {"a2", 2}, {"b4", 6}, {"c1", 3}},
              "task 001 vol-arrays differ");
    auto after = fixture_arrays(fx, {1, 3}, false);
    o.require(after == M{{"fact a2|b4|c1", 6}, {"fact a4|b3|c1", 4}, {"a2", 2}, {"a4", 4},
                         {"b3", 2}, {"b4", 6}, {"c1", 5}},
              "vol-arrays after task 011 differ");
    return o;
  });

  criterion(2, "fixture frequency of w1 is 29", 1.0, [] {
    Outcome o;
    auto c = test::fixture_case();
    auto r = c->run(test::fixed_shares(2));
    o.require(r.frequencies.count("w1") && r.frequencies.at("w1") == 29, "w1 differs");
    return o;
  });

  criterion(3, "pipeline equals oracle on 20 generated seeds", 300.0, [] {
    Outcome o;
    std::size_t queries = 0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      auto data = generate(seeded_spec(seed));
      for (const auto& q : data.queries) {
        test::Case c(data, q.text);
        auto pipeline = c.run();
        auto oracle = c.oracle();
        ++queries;
        o.require(pipeline.frequencies == oracle,
                  "seed " + std::to_string(seed) + " query '" + q.text + "': frequencies differ");
        auto cmp = compare(pipeline.ranking, top_k(oracle, c.query.k()));
        o.require(cmp.kind == Comparison::Kind::Equal,
                  "seed " + std::to_string(seed) + ": " + cmp.describe());
      }
    }
    if (o.pass) o.detail = std::to_string(queries) + " queries";
    return o;
  });

  criterion(4, "share math closed forms", 0, [] {
    Outcome o;
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(1, 1e6);
    double worst_tri = 0, worst_star = 0;
    for (int t = 0; t < 1000; ++t) {
      double k = 1 + double(rng() % 4096), r = u(rng), s = u(rng), tt = u(rng);
      auto sh = triangle_shares(k, r, s, tt);
      double want = 3 * std::cbrt(k * r * s * tt);
      worst_tri = std::max(worst_tri, std::abs(triangle_cost(sh, r, s, tt) - want) / want);
      std::vector<double> sizes(1 + rng() % 6);
      for (auto& x : sizes) x = u(rng);
      auto a = star_shares(1 + rng() % 4096, sizes);
      for (std::size_t i = 1; i < sizes.size(); ++i) {
        double r0 = sizes[0] / a[0];
        worst_star = std::max(worst_star, std::abs(sizes[i] / a[i] - r0) / r0);
      }
    }
    o.require(worst_tri < 1e-9, "triangle cost relative error " + std::to_string(worst_tri));
    o.require(worst_star < 1e-9, "star ratio spread " + std::to_string(worst_star));
    auto nine = plan_shares(9, {1e4, 1e4, 1e4}).shares;
    o.require(nine == std::vector<std::size_t>{2, 2, 2}, "k=9 does not give (2,2,2)");
    return o;
  });

  criterion(5, "integer shares within 1.10 of the exhaustive optimum", 60.0, [] {
    Outcome o;
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> logsize(0, std::log(1e5));
    double worst = 1;
    for (int v = 0; v < 50; ++v) {
      std::vector<double> sizes(3);
      for (auto& x : sizes) x = std::round(std::exp(logsize(rng))) + 1;
      for (std::size_t k = 1; k <= 64; ++k) {
        auto got = plan_shares(k, sizes).shares;
        if (got[0] * got[1] * got[2] > k) o.require(false, "product exceeds k");
        double best = INFINITY;
        for (std::size_t x = 1; x <= k; ++x) {
          for (std::size_t y = 1; x * y <= k; ++y) {
            for (std::size_t z = 1; x * y * z <= k; ++z) {
              best = std::min(best, dimension_load({x, y, z}, sizes));
            }
          }
        }
        worst = std::max(worst, dimension_load(got, sizes) / best);
      }
    }
    o.require(worst <= 1.10, "worst ratio " + std::to_string(worst));
    char buf[64];
    std::snprintf(buf, sizeof buf, "worst ratio %.4f", worst);
    if (o.pass) o.detail = buf;
    return o;
  });

  criterion(6, "byte-identical output across workers, combine and shares", 0, [] {
    Outcome o;
    GeneratorSpec spec;
    spec.fact_rows = 6000;
    spec.dim_rows = 300;
    spec.key_multiplicity = 2;
    spec.zipf = 0.8;
    spec.keyword_rate = 0.05;
    spec.queries_per_type = 1;
    spec.seed = 5;
    auto data = generate(spec);
    test::Case c(data, data.queries.at(0).text, 50);
    std::set<std::string> outputs;
    std::size_t runs = 0;
    for (std::size_t workers : {1, 2, 8}) {
      for (bool combine : {true, false}) {
        for (int shares = 0; shares < 3; ++shares) {
          PipelineOptions opt;
          opt.engine.workers = workers;
          opt.combine = combine;
          if (shares < 2) opt.uniform_share = shares + 1;  // otherwise the planner's
          outputs.insert(ranking_bytes(c.run(opt).ranking));
          ++runs;
        }
      }
    }
    o.require(outputs.size() == 1, std::to_string(outputs.size()) + " distinct outputs");
    o.require(!outputs.begin()->empty(), "empty output");
    if (o.pass) o.detail = std::to_string(runs) + " runs";
    return o;
  });

  criterion(7, "pruning removes exactly the fact-empty tasks and keeps output", 0, [] {
    Outcome o;
    test::FixtureStar fx;
    auto run = run_job1(fx.input, test::fixed_shares(2));
    std::vector<std::string> labels;
    for (auto t : run.pruned) labels.push_back(run.cube.display(t));
    o.require(labels == std::vector<std::string>{"000", "010", "110", "111"}, "fixture pruned set");
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      auto data = generate(seeded_spec(seed + 100));
      test::Case c(data, data.queries.at(seed % data.queries.size()).text);
      auto on = c.run(test::fixed_shares(3));
      auto off_opt = test::fixed_shares(3);
      off_opt.prune = false;
      auto off = c.run(off_opt);
      o.require(ranking_bytes(on.ranking) == ranking_bytes(off.ranking) &&
                    on.frequencies == off.frequencies,
                "seed " + std::to_string(seed) + " output changes with pruning");
    }
    return o;
  });

  criterion(8, "skew-aware scheduling balances reducers and dedup pulls fewer pairs", 0, [] {
    Outcome o;
    GeneratorSpec spec;
    spec.fact_rows = 10000;
    spec.dim_rows = 400;
    spec.zipf = 1.2;
    spec.key_multiplicity = 2;
    spec.keyword_rate = 0.1;
    spec.queries_per_type = 1;
    spec.seed = 3;
    auto data = generate(spec);
    test::Case c(data, data.queries.at(0).text);

    PipelineOptions baseline;
    baseline.tasks = 8;
    baseline.reducers = 8;
    PipelineOptions skew = baseline;
    skew.tasks = 27;
    skew.skew_schedule = true;

    auto base = c.run(baseline);
    auto tuned = c.run(skew);
    // Every candidate network is its own Job 1; each must improve on its baseline.
    o.require(base.networks.size() == tuned.networks.size(), "network count differs");
    double star_base = 0, star_tuned = 0, worst_base = 0, worst_tuned = 0;
    for (std::size_t i = 0; i < base.networks.size() && i < tuned.networks.size(); ++i) {
      const double b = load_ratio(base.networks[i].job1.result.stats);
      const double t = load_ratio(tuned.networks[i].job1.result.stats);
      o.require(t < b, "network " + std::to_string(i) + ": max/mean " + std::to_string(t) +
                           " is not below baseline " + std::to_string(b));
      if (i == 0) star_base = b, star_tuned = t;
      if (t > worst_tuned) worst_base = b, worst_tuned = t;
    }
    o.require(tuned.frequencies == base.frequencies &&
                  ranking_bytes(tuned.ranking) == ranking_bytes(base.ranking),
              "output differs");

    // Dedup on co-located tasks of the same run.
    auto star = collapse_to_star(c.networks().at(0), c.schema);
    auto input = make_star_input(star);
    auto plan = plan_star(input, skew);
    Hypercube cube(plan.shares);
    auto sh = mr::shuffle(job1_definition(input, cube, skew), job1_tables(input));
    auto pulls = dedup_pull_plan(plan.table, build_manifests(sh.task_input, fact_tag(input.dims.size())));
    const bool fewer = pulls.pulled_pairs < pulls.naive_pairs;
    auto dedup = skew;
    dedup.pull_dedup = true;
    auto naive = skew;
    naive.pull_dedup = false;
    auto with = c.run(dedup), without = c.run(naive);
    std::uint64_t skipped = 0;
    for (const auto& n : with.networks) skipped += n.job1.result.stats.deduplicated;
    o.require(fewer && skipped > 0, "dedup pulled as many pairs as naive");
    o.require(with.frequencies == without.frequencies, "dedup changes output");
    char buf[200];
    std::snprintf(buf, sizeof buf,
                  "star max/mean %.3f vs baseline %.3f, worst network %.3f vs %.3f; pulled %llu of %llu pairs",
                  star_tuned, star_base, worst_tuned, worst_base,
                  static_cast<unsigned long long>(pulls.pulled_pairs),
                  static_cast<unsigned long long>(pulls.naive_pairs));
    if (o.pass) o.detail = buf;
    return o;
  });

  criterion(9, "grouped reduction equals independent reduction summed", 0, [] {
    Outcome o;
    auto data = generate(seeded_spec(9));
    test::Case c(data, data.queries.at(0).text);
    auto star = collapse_to_star(c.networks().at(0), c.schema);
    auto input = make_star_input(star);
    PipelineOptions opt = test::fixed_shares(3);
    opt.prune = false;
    opt.pull_dedup = false;
    auto solo_plan = plan_star(input, opt);
    auto sum_records = [](const std::vector<std::string>& lines) {
      std::map<std::string, std::uint64_t> out;
      for (const auto& l : lines) {
        auto r = VolRecord::parse(l);
        out[std::to_string(r.kind) + "\t" + r.key] += r.volume;
      }
      return out;
    };
    auto solo = run_job1(input, opt, &solo_plan);
    auto expected = sum_records(solo.lines);
    auto solo_freq = run_job2(solo.lines, c.filter, opt).frequencies;
    std::mt19937_64 rng(2024);
    const std::size_t tasks = solo.cube.tasks();
    for (int trial = 0; trial < 10; ++trial) {
      auto grouped = solo_plan;
      std::size_t groups = 1 + rng() % tasks;
      grouped.table = AllocationTable{};
      grouped.table.reducer_tasks.assign(groups, {});
      for (std::size_t t = 0; t < tasks; ++t) {
        std::size_t g = rng() % groups;
        grouped.table.reducer_tasks[g].push_back(t);
        grouped.table.task_reducer[t] = g;
      }
      grouped.table.loads.assign(groups, 0);
      auto merged = run_job1(input, opt, &grouped);
      o.require(sum_records(merged.lines) == expected,
                "partition " + std::to_string(trial) + " changes summed vol-arrays");
      o.require(run_job2(merged.lines, c.filter, opt).frequencies == solo_freq,
                "partition " + std::to_string(trial) + " changes frequencies");
    }
    return o;
  });

  std::printf("%d of 9 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
