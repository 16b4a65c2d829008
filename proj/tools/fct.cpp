// fct: generate data, plan, run the pipeline or the oracle, compare and
// report.

#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "fct/error.hpp"
#include "fct/generator.hpp"
#include "fct/io.hpp"
#include "fct/oracle.hpp"
#include "fct/pipeline.hpp"
#include "fct/report.hpp"
#include "fct/shares.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kDataError = 2;
constexpr int kMismatch = 3;

struct QueryArgs {
  std::string schema;
  std::string data;
  std::string query;
  std::size_t k = 10;
  std::optional<std::size_t> rmax;
  std::string stopwords;
};

struct RunArgs {
  std::size_t tasks = 8;
  std::size_t reducers = 0;
  std::size_t job2_tasks = 4;
  bool skew = false;
  bool no_combine = false;
  bool no_prune = false;
  bool no_dedup = false;
  double sample_rate = 0.1;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> share;
  std::size_t workers = 0;
  std::size_t split_size = 4096;
  std::string spill;
  std::string allocation;
  std::string stats;
  std::string out;
};

void add_query_options(CLI::App* cmd, QueryArgs& q) {
  cmd->add_option("--schema", q.schema, "schema config (JSON)")->required();
  cmd->add_option("--data", q.data, "directory of relation files (default: the config's)");
  cmd->add_option("--query", q.query, "keywords, space separated")->required();
  cmd->add_option("--k", q.k, "number of terms")->check(CLI::PositiveNumber);
  cmd->add_option("--rmax", q.rmax, "maximum relations per network");
  cmd->add_option("--stopwords", q.stopwords, "stop-word file, one or more words per line");
}

void add_run_options(CLI::App* cmd, RunArgs& r) {
  cmd->add_option("--tasks", r.tasks, "reduce tasks for Job 1")->check(CLI::PositiveNumber);
  cmd->add_option("--reducers", r.reducers, "physical reducers (0: one per task)");
  cmd->add_option("--job2-tasks", r.job2_tasks, "reduce tasks for Job 2")
      ->check(CLI::PositiveNumber);
  cmd->add_flag("--skew-schedule", r.skew, "sample, estimate task costs and balance reducers");
  cmd->add_flag("--no-combine", r.no_combine, "disable combiners");
  cmd->add_flag("--no-prune", r.no_prune, "keep reduce tasks without fact tuples");
  cmd->add_flag("--no-dedup", r.no_dedup, "pull every pair even when already resident");
  cmd->add_option("--sample-rate", r.sample_rate, "sampling fraction for cost estimates");
  cmd->add_option("--seed", r.seed, "sampling seed (default: the config's)");
  cmd->add_option("--share", r.share, "same share on every dimension")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--workers", r.workers, "worker threads (0: FCT_WORKERS or all cores)");
  cmd->add_option("--split-size", r.split_size, "rows per input split")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--spill", r.spill, "directory for shuffle files");
  cmd->add_option("--allocation", r.allocation, "allocation table written by plan");
}

struct Loaded {
  fct::SchemaConfig config;
  fct::SchemaGraph schema;
  std::optional<fct::KeywordQuery> query;
  std::optional<fct::TermFilter> filter;
};

Loaded load(const QueryArgs& q) {
  Loaded l;
  l.config = fct::load_config(q.schema);
  const std::filesystem::path base = std::filesystem::path(q.schema).parent_path();
  l.schema = fct::load_schema(l.config, q.data.empty() ? base : std::filesystem::path(q.data));
  l.query.emplace(fct::KeywordQuery::parse(q.query, q.k, q.rmax.value_or(l.config.rmax)));
  auto stop = q.stopwords.empty() ? fct::load_stopwords(l.config, base)
                                  : fct::StopWords::load(q.stopwords);
  l.filter.emplace(std::move(stop), l.query->keywords());
  return l;
}

fct::PipelineOptions pipeline_options(const RunArgs& r, const fct::SchemaConfig& config) {
  fct::PipelineOptions o;
  o.tasks = r.tasks;
  o.reducers = r.reducers;
  o.job2_tasks = r.job2_tasks;
  o.skew_schedule = r.skew;
  o.combine = !r.no_combine;
  o.prune = !r.no_prune;
  o.pull_dedup = !r.no_dedup;
  o.sample_rate = r.sample_rate;
  o.seed = r.seed.value_or(config.seed);
  o.uniform_share = r.share;
  o.engine.workers = r.workers;
  o.engine.split_size = r.split_size;
  if (!r.spill.empty()) {
    std::filesystem::create_directories(r.spill);
    o.engine.spill_dir = r.spill;
  }
  if (!r.allocation.empty()) o.allocations = fct::load_allocations(r.allocation);
  return o;
}

void emit_ranking(const std::vector<fct::TermFrequency>& ranking, const std::string& out) {
  if (out.empty()) {
    fct::write_ranking(ranking, std::cout);
    return;
  }
  std::ofstream file(out);
  if (!file) throw fct::Error(fct::ErrorCode::IoError, "cannot write " + out);
  fct::write_ranking(ranking, file);
}

int cmd_plan(const QueryArgs& q, const RunArgs& r) {
  Loaded l = load(q);
  auto options = pipeline_options(r, l.config);
  options.skew_schedule = true;
  std::map<std::string, fct::CnAllocation> plans;
  std::size_t index = 0;
  std::cout << "row\tnetwork\tfield\tvalue\treducer\tcost\tfacts\n";
  for (const auto& cn : fct::enumerate_candidate_networks(l.schema, *l.query)) {
    const auto star = fct::collapse_to_star(cn, l.schema);
    const auto input = fct::make_star_input(star);
    auto plan = fct::plan_star(input, options);
    const fct::Hypercube cube(plan.shares);
    std::cout << "network\t" << index << "\tcanonical\t" << cn.canonical << "\t\t\t\n";
    std::cout << "network\t" << index << "\tdescription\t" << cn.describe(l.schema, *l.query)
              << "\t\t\t\n";
    std::string shares;
    for (std::size_t i = 0; i < plan.shares.size(); ++i) {
      if (i) shares += ',';
      shares += std::to_string(plan.shares[i]);
    }
    std::cout << "shares\t" << index << "\tshares\t" << shares << "\t\t\t\n";
    std::cout << "shares\t" << index << "\ttasks\t" << cube.tasks() << "\t\t\t\n";
    double fact_rows = static_cast<double>(input.fact_rows.size());
    auto cost = fct::communication_cost(plan.shares, fact_rows, input.dimension_sizes());
    for (std::size_t i = 0; i < cost.breakdown.size(); ++i) {
      std::cout << "cost\t" << index << '\t' << (i == 0 ? std::string("fact") : "dim:" + std::to_string(i))
                << '\t' << cost.breakdown[i] << "\t\t\t\n";
    }
    std::cout << "cost\t" << index << "\ttotal\t" << cost.value << "\t\t\t\n";
    for (const auto& c : plan.costs) {
      auto it = plan.table.task_reducer.find(c.label);
      std::cout << "task\t" << index << "\tlabel\t" << cube.display(c.label) << '\t'
                << (it == plan.table.task_reducer.end() ? std::string("pruned")
                                                        : std::to_string(it->second))
                << '\t' << c.cost << '\t' << c.exact_fact_count << '\n';
    }
    plans.emplace(cn.canonical, std::move(plan));
    ++index;
  }
  if (!r.out.empty()) fct::save_allocations(plans, r.out);
  return kOk;
}

int cmd_run(const QueryArgs& q, const RunArgs& r) {
  Loaded l = load(q);
  const auto result = fct::run_fct(l.schema, *l.query, *l.filter, pipeline_options(r, l.config));
  emit_ranking(result.ranking, r.out);
  if (!r.stats.empty()) {
    std::ofstream file(r.stats);
    if (!file) throw fct::Error(fct::ErrorCode::IoError, "cannot write " + r.stats);
    file << fct::run_stats_json(result).dump(2) << '\n';
  }
  return kOk;
}

int cmd_oracle(const QueryArgs& q, double bound, bool dp, const std::string& out) {
  Loaded l = load(q);
  fct::OracleOptions options;
  options.max_mtjnts = bound;
  options.dynamic_programming = dp;
  emit_ranking(fct::oracle_fct(l.schema, *l.query, *l.filter, options), out);
  return kOk;
}

int cmd_compare(const std::string& a, const std::string& b) {
  const auto cmp = fct::compare(fct::read_ranking(a), fct::read_ranking(b));
  std::cout << cmp.describe() << '\n';
  return cmp.kind == fct::Comparison::Kind::Equal ? kOk : kMismatch;
}

int cmd_report(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw fct::Error(fct::ErrorCode::IoError, "cannot read " + file);
  nlohmann::json stats;
  try {
    stats = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw fct::Error(fct::ErrorCode::InvalidInput, file + ": " + e.what());
  }
  fct::write_report(stats, std::cout);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Frequent co-occurring terms of keyword queries over joined relations"};
  app.require_subcommand(1);

  fct::GeneratorSpec gen;
  std::string shape = "star";
  std::string gen_out;
  auto* gen_cmd = app.add_subcommand("gen", "write a synthetic dataset");
  gen_cmd->add_option("--shape", shape, "star, chain, mix or fixture")
      ->check(CLI::IsMember({"star", "chain", "mix", "fixture"}));
  gen_cmd->add_option("--rows", gen.fact_rows, "fact rows")->check(CLI::PositiveNumber);
  gen_cmd->add_option("--dim-rows", gen.dim_rows, "rows per dimension")->check(CLI::PositiveNumber);
  gen_cmd->add_option("--multiplicity", gen.key_multiplicity, "dimension rows per join value")
      ->check(CLI::PositiveNumber);
  gen_cmd->add_option("--vocabulary", gen.vocabulary, "distinct filler words")
      ->check(CLI::PositiveNumber);
  gen_cmd->add_option("--words", gen.words_per_tuple, "filler words per tuple");
  gen_cmd->add_option("--keyword-rate", gen.keyword_rate, "extra keyword planting rate")
      ->check(CLI::Range(0.0, 1.0));
  gen_cmd->add_option("--zipf", gen.zipf, "foreign-key skew exponent")->check(CLI::NonNegativeNumber);
  gen_cmd->add_option("--queries", gen.queries_per_type, "queries per type");
  gen_cmd->add_option("--seed", gen.seed, "generator seed");
  gen_cmd->add_option("--out", gen_out, "output directory")->required();

  QueryArgs plan_q, run_q, oracle_q;
  RunArgs plan_r, run_r;
  plan_r.tasks = 27;
  auto* plan_cmd = app.add_subcommand("plan", "print shares, costs and the allocation table");
  add_query_options(plan_cmd, plan_q);
  add_run_options(plan_cmd, plan_r);
  plan_cmd->add_option("--out", plan_r.out, "write the allocation table (JSON)");

  auto* run_cmd = app.add_subcommand("run", "run both jobs and print the top-k terms");
  add_query_options(run_cmd, run_q);
  add_run_options(run_cmd, run_r);
  run_cmd->add_option("--out", run_r.out, "ranking file (default: stdout)");
  run_cmd->add_option("--stats", run_r.stats, "write run counters (JSON)");

  double bound = 1e7;
  bool dp = false;
  std::string oracle_out;
  auto* oracle_cmd = app.add_subcommand("oracle", "brute-force top-k terms");
  add_query_options(oracle_cmd, oracle_q);
  oracle_cmd->add_option("--max-results", bound, "abort above this many results per network");
  oracle_cmd->add_flag("--dp", dp, "count by tree dynamic programming");
  oracle_cmd->add_option("--out", oracle_out, "ranking file (default: stdout)");

  std::string cmp_a, cmp_b;
  auto* compare_cmd = app.add_subcommand("compare", "compare two rankings");
  compare_cmd->add_option("actual", cmp_a)->required()->check(CLI::ExistingFile);
  compare_cmd->add_option("expected", cmp_b)->required()->check(CLI::ExistingFile);

  std::string report_file;
  auto* report_cmd = app.add_subcommand("report", "per-reducer TSV from run counters");
  report_cmd->add_option("stats", report_file)->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }

  try {
    if (*gen_cmd) {
      gen.shape = fct::parse_shape(shape);
      fct::write_dataset(fct::generate(gen), gen_out);
      return kOk;
    }
    if (*plan_cmd) return cmd_plan(plan_q, plan_r);
    if (*run_cmd) return cmd_run(run_q, run_r);
    if (*oracle_cmd) return cmd_oracle(oracle_q, bound, dp, oracle_out);
    if (*compare_cmd) return cmd_compare(cmp_a, cmp_b);
    if (*report_cmd) return cmd_report(report_file);
  } catch (const fct::Error& e) {
    std::cerr << "fct: " << e.what() << '\n';
    return kDataError;
  } catch (const std::exception& e) {
    std::cerr << "fct: " << e.what() << '\n';
    return kDataError;
  }
  return kUsage;
}
