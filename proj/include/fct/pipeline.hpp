#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fct/candidate_network.hpp"
#include "fct/frequency.hpp"
#include "fct/mr/engine.hpp"
#include "fct/scheduler.hpp"
#include "fct/star_join.hpp"
#include "fct/text.hpp"

namespace fct {

/// A value body of `;`-joined escaped texts with an optional `|n` tuple
/// count (1 when absent).
struct CountedText {
  std::string_view body;
  std::uint64_t count = 1;
};

CountedText parse_counted(std::string_view payload);

/// Tag of fact pairs for m dimensions; dimension i (0-based) uses i + 1.
int fact_tag(std::size_t dims);

/// Dimension i fans out over every digit of the other dimensions; its own
/// digit stays `*` until partitioning. Patterns are dot-joined digits.
std::vector<std::string> dimension_patterns(const Hypercube& cube, std::size_t dim);

/// Map side of Job 1. Table 0 holds the fact rows, table i + 1 dimension i.
void job1_map(const StarInput& input, const Hypercube& cube, std::size_t table,
              std::size_t record, mr::Emitter& out);

/// Merges values of one key that share a pattern into `t1;t2;...|n`.
void job1_combine(const mr::Key& key, std::span<const mr::Value> values, mr::Emitter& out);

void job1_partition(const mr::KeyValue& pair, const Hypercube& cube,
                    std::vector<std::size_t>& tasks);

struct NumEntry {
  std::uint64_t num = 0;
  std::string text;  // escaped segments joined by ';'
};

/// Job 1 output record; kind 0 is the fact, i >= 1 dimension i (1-based).
struct VolRecord {
  std::size_t kind = 0;
  std::string key;
  std::uint64_t volume = 0;
  std::string text;

  /// `fact|dim:i <TAB> key <TAB> volume <TAB> text`
  std::string line() const;
  static VolRecord parse(std::string_view line);
  bool operator==(const VolRecord&) const = default;
};

/// Reduce side of Job 1 for one reducer. Num-arrays are kept across the
/// reducer's tasks, so a dimension key delivered by an earlier task is still
/// known to later ones. Vol-arrays accumulate; each task reports the
/// records it changed with the change in volume.
class StatisticsBuilder {
 public:
  explicit StatisticsBuilder(std::size_t dims);

  void begin_task();
  /// Groups must arrive in key order (dimensions before facts).
  void add(const mr::KeyGroup& group);
  std::vector<VolRecord> task_records() const;
  /// Sum of fact volumes added in the current task.
  std::uint64_t task_work() const { return task_work_; }

  const NumEntry* num(std::size_t dim, std::string_view key) const;
  std::optional<std::uint64_t> dim_volume(std::size_t dim, std::string_view key) const;
  std::optional<std::uint64_t> fact_volume(std::string_view key) const;
  /// Cumulative vol-arrays as records, facts first.
  std::vector<VolRecord> totals() const;

 private:
  struct Vol {
    std::uint64_t volume = 0;
    std::string text;
  };
  using VolMap = std::map<std::string, Vol, std::less<>>;

  std::size_t dims_;
  std::vector<std::map<std::string, NumEntry, std::less<>>> num_;
  VolMap fact_total_;
  std::vector<VolMap> dim_total_;
  VolMap fact_task_;
  std::vector<std::map<std::string, std::uint64_t, std::less<>>> dim_task_;
  std::uint64_t task_work_ = 0;
};

/// Job 2 map: text segments tokenized and filtered, each distinct term
/// emitted once with local count times volume.
void job2_map(std::string_view vol_line, const TermFilter& filter, mr::Emitter& out);

std::uint64_t job2_reduce(std::span<const mr::Value> cardinalities);

struct PipelineOptions {
  std::size_t tasks = 8;
  /// 0 means one reducer per surviving task.
  std::size_t reducers = 0;
  std::size_t job2_tasks = 4;
  bool combine = true;
  /// Keep combining dimensions joined on their primary key (each key then
  /// has a single tuple, so combining gains nothing).
  bool combine_key_joins = false;
  bool skew_schedule = false;
  bool prune = true;
  bool pull_dedup = true;
  double sample_rate = 0.1;
  std::uint64_t seed = 1;
  /// Same share on every dimension instead of the planner's vector.
  std::optional<std::size_t> uniform_share;
  /// Precomputed plans keyed by canonical encoding; used when present.
  std::map<std::string, CnAllocation> allocations;
  mr::EngineOptions engine;
};

struct Job1Run {
  Hypercube cube;
  CnAllocation allocation;
  std::vector<std::size_t> pruned;
  mr::JobResult result;
  std::vector<std::string> lines;  // all task outputs, task order
};

mr::JobDefinition job1_definition(const StarInput& input, const Hypercube& cube,
                                  const PipelineOptions& options);
std::vector<mr::InputTable> job1_tables(const StarInput& input);

/// Shares and reduce placement for one star as run_job1 would choose them.
CnAllocation plan_star(const StarInput& input, const PipelineOptions& options);

Job1Run run_job1(const StarInput& input, const PipelineOptions& options,
                 const CnAllocation* plan = nullptr);

struct Job2Run {
  mr::JobResult result;
  Frequencies frequencies;
};

Job2Run run_job2(const std::vector<std::string>& vol_lines, const TermFilter& filter,
                 const PipelineOptions& options);

struct CnRun {
  std::string canonical;
  std::string description;
  bool collapsed = false;
  Job1Run job1;
  Job2Run job2;
};

struct FctResult {
  std::vector<TermFrequency> ranking;
  Frequencies frequencies;
  std::vector<CnRun> networks;
};

/// Every candidate network is made a star, run through both jobs, and the
/// per-network frequencies are summed. Throws EmptyResult without CNs.
FctResult run_fct(const SchemaGraph& schema, const KeywordQuery& query,
                  const TermFilter& filter, const PipelineOptions& options = {});

/// Frequencies of a single star CN.
Frequencies star_frequencies(const StarNetwork& star, const TermFilter& filter,
                             const PipelineOptions& options,
                             const CnAllocation* plan = nullptr, CnRun* run = nullptr);

}  // namespace fct
