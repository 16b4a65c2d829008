#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "fct/mr/engine.hpp"
#include "fct/star_join.hpp"

namespace fct {

/// ceil(rate * n) distinct indices in [0, n), ascending, uniform without
/// replacement. The generator is private to this function so results do not
/// depend on the standard library's distributions. Throws InvalidRate unless
/// 0 < rate <= 1.
std::vector<std::size_t> sample_rows(std::size_t n, double rate, std::uint64_t seed);

/// Positions into the fact and dimension row lists of a StarInput.
struct StarSample {
  double rate = 1;
  std::vector<std::size_t> fact;
  std::vector<std::vector<std::size_t>> dims;
};

StarSample sample_star(const StarInput& input, double rate, std::uint64_t seed);

struct TaskCost {
  std::size_t label = 0;
  double cost = 0;
  double fact_count = 0;
  std::vector<double> dim_counts;
  double join_est = 0;
  /// Exact number of fact tuples routed here; pruning uses this.
  std::uint64_t exact_fact_count = 0;
};

/// Fact tuples routed to every task, counted exactly.
std::vector<std::uint64_t> route_facts(const StarInput& input, const Hypercube& cube);

/// One estimate per task label. Counts are scaled by n / sample size per
/// relation (1/rate up to rounding). The join term
/// sums, over sampled facts of the task, the product of the estimated
/// multiplicities of their dimension keys. A key missing from a partial
/// sample gets its bucket's estimated tuples divided by the distinct values
/// seen in that bucket on either side, i.e. values are treated as uniformly
/// spread within a task.
std::vector<TaskCost> estimate_task_costs(const StarInput& input, const Hypercube& cube,
                                          const StarSample& sample);

/// Labels with at least one fact tuple, ascending.
std::vector<std::size_t> prune_empty_tasks(const std::vector<TaskCost>& costs);

struct AllocationTable {
  std::vector<std::vector<std::size_t>> reducer_tasks;  // labels ascending
  std::map<std::size_t, std::size_t> task_reducer;
  std::vector<double> loads;

  mr::Schedule schedule() const;
  std::size_t reducers() const { return reducer_tasks.size(); }
};

/// Longest processing time first: tasks by cost descending (ties by label)
/// each go to the least loaded reducer (ties by lowest id). `tasks` selects
/// which costs take part (all when empty). Throws InvalidReducerCount.
AllocationTable assign_tasks(const std::vector<TaskCost>& costs, std::size_t reducers,
                             const std::vector<std::size_t>& tasks = {});

/// The no-adjust layout: task t runs on reducer t mod reducers.
AllocationTable round_robin(const std::vector<std::size_t>& tasks, std::size_t reducers);

/// Dimension keys a task receives and how many pairs each carries.
struct TaskManifest {
  std::vector<std::pair<mr::Key, std::size_t>> keys;
};

/// Dimension-key manifests (tags below fact_tag) from shuffled task inputs.
std::vector<TaskManifest> build_manifests(const std::vector<std::vector<mr::KeyValue>>& inputs,
                                          int fact_tag);

struct PullPlan {
  /// Per reducer, per scheduled task: the keys it has to pull.
  std::vector<std::vector<std::vector<mr::Key>>> pulls;
  std::uint64_t pulled_pairs = 0;
  std::uint64_t naive_pairs = 0;
};

/// Walks each reducer's tasks in label order and pulls a key only the first
/// time it is needed there.
PullPlan dedup_pull_plan(const AllocationTable& allocation,
                         const std::vector<TaskManifest>& manifests);

/// Shares and assignment planned for one candidate network.
struct CnAllocation {
  std::vector<std::size_t> shares;
  AllocationTable table;
  std::vector<TaskCost> costs;
};

/// JSON file keyed by candidate-network canonical encoding.
void save_allocations(const std::map<std::string, CnAllocation>& allocations,
                      const std::filesystem::path& file);
std::map<std::string, CnAllocation> load_allocations(const std::filesystem::path& file);

}  // namespace fct
