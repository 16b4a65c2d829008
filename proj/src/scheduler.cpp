#include "fct/scheduler.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "fct/error.hpp"

namespace fct {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t threshold = (0 - bound) % bound;
  while (true) {
    std::uint64_t x = rng();
    if (x >= threshold) return x % bound;
  }
}

}  // namespace

std::vector<std::size_t> sample_rows(std::size_t n, double rate, std::uint64_t seed) {
  if (!(rate > 0 && rate <= 1)) {
    throw Error(ErrorCode::InvalidRate, "sample rate must lie in (0, 1], got " +
                                            std::to_string(rate));
  }
  const auto want = static_cast<std::size_t>(
      std::min<double>(static_cast<double>(n), std::ceil(rate * static_cast<double>(n) - 1e-9)));
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  if (want == n) return idx;
  std::mt19937_64 rng(splitmix64(seed));
  for (std::size_t i = 0; i < want; ++i) {
    std::size_t j = i + static_cast<std::size_t>(bounded(rng, n - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(want);
  std::sort(idx.begin(), idx.end());
  return idx;
}

StarSample sample_star(const StarInput& input, double rate, std::uint64_t seed) {
  StarSample s;
  s.rate = rate;
  s.fact = sample_rows(input.fact_rows.size(), rate, splitmix64(seed));
  for (std::size_t i = 0; i < input.dims.size(); ++i) {
    s.dims.push_back(sample_rows(input.dims[i].rows.size(), rate, splitmix64(seed + i + 1)));
  }
  return s;
}

namespace {

std::size_t fact_label(const StarInput& input, const Hypercube& cube, std::size_t row) {
  const auto& fact = input.schema->relation(input.fact_relation);
  std::size_t label = 0;
  for (std::size_t i = 0; i < input.dims.size(); ++i) {
    label = label * cube.shares()[i] + cube.digit(i, fact.value(row, input.dims[i].fact_column));
  }
  return label;
}

}  // namespace

std::vector<std::uint64_t> route_facts(const StarInput& input, const Hypercube& cube) {
  std::vector<std::uint64_t> counts(cube.tasks(), 0);
  for (std::size_t row : input.fact_rows) ++counts[fact_label(input, cube, row)];
  return counts;
}

std::vector<TaskCost> estimate_task_costs(const StarInput& input, const Hypercube& cube,
                                          const StarSample& sample) {
  // n / |sample| per relation: the exact inverse inclusion probability,
  // which 1/rate only approximates once ceil() rounding bites.
  auto scale_of = [](std::size_t rows, std::size_t drawn) {
    return drawn ? static_cast<double>(rows) / static_cast<double>(drawn) : 0.0;
  };
  const double scale = scale_of(input.fact_rows.size(), sample.fact.size());
  const bool partial = sample.rate < 1;
  const std::size_t m = input.dims.size();
  const auto& fact = input.schema->relation(input.fact_relation);

  // Per dimension: scaled multiplicity per sampled key and scaled tuple
  // count per bucket.
  std::vector<std::unordered_map<std::string, double>> mult(m);
  std::vector<std::vector<double>> bucket_count(m);
  for (std::size_t i = 0; i < m; ++i) {
    const auto& dim = input.dims[i];
    const auto& rel = input.schema->relation(dim.relation);
    const double dim_scale = scale_of(dim.rows.size(), sample.dims[i].size());
    bucket_count[i].assign(cube.shares()[i], 0);
    for (std::size_t pos : sample.dims[i]) {
      const auto& v = rel.value(dim.rows[pos], dim.column);
      mult[i][v] += dim_scale;
      bucket_count[i][cube.digit(i, v)] += dim_scale;
    }
  }

  // A key absent from a partial sample gets its bucket's tuples spread
  // evenly over the distinct values known in that bucket, from either side.
  std::vector<std::vector<double>> fallback(m);
  if (partial) {
    for (std::size_t i = 0; i < m; ++i) {
      std::unordered_set<std::string> values;
      for (const auto& [v, _] : mult[i]) values.insert(v);
      for (std::size_t pos : sample.fact) {
        values.insert(fact.value(input.fact_rows[pos], input.dims[i].fact_column));
      }
      std::vector<double> distinct(cube.shares()[i], 0);
      for (const auto& v : values) distinct[cube.digit(i, v)] += 1;
      fallback[i].assign(cube.shares()[i], 0);
      for (std::size_t d = 0; d < distinct.size(); ++d) {
        if (distinct[d] > 0) fallback[i][d] = bucket_count[i][d] / distinct[d];
      }
    }
  }

  std::vector<TaskCost> costs(cube.tasks());
  const auto exact = route_facts(input, cube);
  for (std::size_t t = 0; t < costs.size(); ++t) {
    costs[t].label = t;
    costs[t].exact_fact_count = exact[t];
    const auto digits = cube.digits(t);
    for (std::size_t i = 0; i < m; ++i) costs[t].dim_counts.push_back(bucket_count[i][digits[i]]);
  }
  for (std::size_t pos : sample.fact) {
    const std::size_t row = input.fact_rows[pos];
    auto& c = costs[fact_label(input, cube, row)];
    c.fact_count += scale;
    double product = scale;
    for (std::size_t i = 0; i < m && product > 0; ++i) {
      const auto& v = fact.value(row, input.dims[i].fact_column);
      auto it = mult[i].find(v);
      if (it != mult[i].end()) {
        product *= it->second;
      } else {
        product *= partial ? fallback[i][cube.digit(i, v)] : 0;
      }
    }
    c.join_est += product;
  }
  for (auto& c : costs) {
    c.cost = c.fact_count + c.join_est;
    for (double d : c.dim_counts) c.cost += d;
  }
  return costs;
}

std::vector<std::size_t> prune_empty_tasks(const std::vector<TaskCost>& costs) {
  std::vector<std::size_t> out;
  for (const auto& c : costs) {
    if (c.exact_fact_count > 0) out.push_back(c.label);
  }
  std::sort(out.begin(), out.end());
  return out;
}

mr::Schedule AllocationTable::schedule() const {
  mr::Schedule s;
  s.reducers = reducer_tasks;
  return s;
}

AllocationTable assign_tasks(const std::vector<TaskCost>& costs, std::size_t reducers,
                             const std::vector<std::size_t>& tasks) {
  if (reducers < 1) throw Error(ErrorCode::InvalidReducerCount, "need at least one reducer");
  std::vector<const TaskCost*> order;
  if (tasks.empty()) {
    for (const auto& c : costs) order.push_back(&c);
  } else {
    std::map<std::size_t, const TaskCost*> by_label;
    for (const auto& c : costs) by_label[c.label] = &c;
    for (std::size_t t : tasks) {
      auto it = by_label.find(t);
      if (it == by_label.end()) {
        throw Error(ErrorCode::InvalidInput, "no cost for task " + std::to_string(t));
      }
      order.push_back(it->second);
    }
  }
  std::sort(order.begin(), order.end(), [](const TaskCost* a, const TaskCost* b) {
    return a->cost != b->cost ? a->cost > b->cost : a->label < b->label;
  });

  AllocationTable table;
  table.reducer_tasks.resize(reducers);
  table.loads.assign(reducers, 0);
  for (const TaskCost* c : order) {
    std::size_t target = 0;
    for (std::size_t r = 1; r < reducers; ++r) {
      if (table.loads[r] < table.loads[target]) target = r;
    }
    table.loads[target] += c->cost;
    table.reducer_tasks[target].push_back(c->label);
    table.task_reducer[c->label] = target;
  }
  for (auto& ts : table.reducer_tasks) std::sort(ts.begin(), ts.end());
  return table;
}

AllocationTable round_robin(const std::vector<std::size_t>& tasks, std::size_t reducers) {
  if (reducers < 1) throw Error(ErrorCode::InvalidReducerCount, "need at least one reducer");
  AllocationTable table;
  table.reducer_tasks.resize(reducers);
  table.loads.assign(reducers, 0);
  std::vector<std::size_t> sorted = tasks;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t t : sorted) {
    table.reducer_tasks[t % reducers].push_back(t);
    table.task_reducer[t] = t % reducers;
  }
  return table;
}

std::vector<TaskManifest> build_manifests(const std::vector<std::vector<mr::KeyValue>>& inputs,
                                          int fact_tag) {
  std::vector<TaskManifest> out(inputs.size());
  for (std::size_t t = 0; t < inputs.size(); ++t) {
    for (const auto& g : mr::group_by_key(inputs[t])) {
      if (g.key.tag >= fact_tag) continue;
      out[t].keys.emplace_back(g.key, g.values.size());
    }
  }
  return out;
}

PullPlan dedup_pull_plan(const AllocationTable& allocation,
                         const std::vector<TaskManifest>& manifests) {
  PullPlan plan;
  plan.pulls.resize(allocation.reducers());
  for (std::size_t r = 0; r < allocation.reducers(); ++r) {
    std::set<mr::Key> resident;
    for (std::size_t t : allocation.reducer_tasks[r]) {
      auto& pulls = plan.pulls[r].emplace_back();
      for (const auto& [key, pairs] : manifests.at(t).keys) {
        plan.naive_pairs += pairs;
        if (resident.insert(key).second) {
          pulls.push_back(key);
          plan.pulled_pairs += pairs;
        }
      }
    }
  }
  return plan;
}

void save_allocations(const std::map<std::string, CnAllocation>& allocations,
                      const std::filesystem::path& file) {
  nlohmann::json root;
  root["networks"] = nlohmann::json::object();
  for (const auto& [canonical, alloc] : allocations) {
    nlohmann::json entry;
    entry["shares"] = alloc.shares;
    entry["reducers"] = alloc.table.reducer_tasks;
    entry["loads"] = alloc.table.loads;
    nlohmann::json costs = nlohmann::json::array();
    for (const auto& c : alloc.costs) {
      costs.push_back({{"label", c.label},
                       {"cost", c.cost},
                       {"fact_count", c.fact_count},
                       {"dim_counts", c.dim_counts},
                       {"join_est", c.join_est},
                       {"exact_fact_count", c.exact_fact_count}});
    }
    entry["costs"] = std::move(costs);
    root["networks"][canonical] = std::move(entry);
  }
  std::ofstream out(file);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + file.string());
  out << root.dump(2) << '\n';
}

std::map<std::string, CnAllocation> load_allocations(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + file.string());
  std::map<std::string, CnAllocation> out;
  try {
    auto root = nlohmann::json::parse(in);
    for (const auto& [canonical, entry] : root.at("networks").items()) {
      CnAllocation alloc;
      alloc.shares = entry.at("shares").get<std::vector<std::size_t>>();
      alloc.table.reducer_tasks = entry.at("reducers").get<std::vector<std::vector<std::size_t>>>();
      alloc.table.loads = entry.value("loads", std::vector<double>(alloc.table.reducer_tasks.size(), 0));
      for (std::size_t r = 0; r < alloc.table.reducer_tasks.size(); ++r) {
        for (std::size_t t : alloc.table.reducer_tasks[r]) alloc.table.task_reducer[t] = r;
      }
      if (entry.contains("costs")) {
        for (const auto& c : entry["costs"]) {
          TaskCost tc;
          tc.label = c.at("label").get<std::size_t>();
          tc.cost = c.value("cost", 0.0);
          tc.fact_count = c.value("fact_count", 0.0);
          tc.dim_counts = c.value("dim_counts", std::vector<double>{});
          tc.join_est = c.value("join_est", 0.0);
          tc.exact_fact_count = c.value("exact_fact_count", std::uint64_t{0});
          alloc.costs.push_back(std::move(tc));
        }
      }
      out.emplace(canonical, std::move(alloc));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ConfigError, file.string() + ": " + e.what());
  }
  return out;
}

}  // namespace fct
