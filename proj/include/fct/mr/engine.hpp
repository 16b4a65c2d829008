#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace fct::mr {

/// Pairs are grouped by key and delivered in (tag, payload) order, so a
/// lower tag always reaches the reducer first.
struct Key {
  int tag = 0;
  std::string payload;

  auto operator<=>(const Key&) const = default;
};

struct Value {
  std::string pattern;
  std::string payload;

  bool operator==(const Value&) const = default;
};

struct KeyValue {
  Key key;
  Value value;

  bool operator==(const KeyValue&) const = default;
};

/// A source of records; the job's map function resolves record indices.
struct InputTable {
  std::string name;
  std::size_t records = 0;
};

struct InputSplit {
  std::size_t index = 0;
  std::size_t table = 0;
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - begin; }
};

/// Contiguous row ranges of at most split_size rows, table by table.
std::vector<InputSplit> split_input(const std::vector<InputTable>& tables,
                                    std::size_t split_size);

class Emitter {
 public:
  void emit(Key key, Value value) { out_.push_back({std::move(key), std::move(value)}); }
  std::vector<KeyValue>& pairs() { return out_; }

 private:
  std::vector<KeyValue> out_;
};

struct KeyGroup {
  Key key;
  std::vector<Value> values;
};

class OutputSink {
 public:
  void emit(std::string line) { lines_.push_back(std::move(line)); }
  void add_work(std::uint64_t units) { work_ += units; }

  std::vector<std::string>& lines() { return lines_; }
  std::uint64_t work() const { return work_; }

 private:
  std::vector<std::string> lines_;
  std::uint64_t work_ = 0;
};

/// One per reducer; sees that reducer's tasks in schedule order and may keep
/// state across them.
class ReduceSession {
 public:
  virtual ~ReduceSession() = default;
  virtual void reduce_task(std::size_t task, std::span<const KeyGroup> groups,
                           OutputSink& out) = 0;
  virtual void finish(OutputSink& out) { (void)out; }
};

using MapFn = std::function<void(const InputSplit& split, std::size_t record, Emitter& out)>;
using CombineFn =
    std::function<void(const Key& key, std::span<const Value> values, Emitter& out)>;
using PartitionFn = std::function<void(const KeyValue& pair, std::vector<std::size_t>& tasks)>;
using SessionFactory = std::function<std::unique_ptr<ReduceSession>(std::size_t reducer)>;

struct JobDefinition {
  std::string name;
  MapFn map;
  CombineFn combine;  // optional
  PartitionFn partition;
  SessionFactory reducer;
  std::size_t tasks = 1;
};

/// Tasks per reducer, processed in the listed order. Tasks that appear
/// nowhere are pruned: their pairs are counted but never pulled. An empty
/// schedule means one reducer per task.
struct Schedule {
  std::vector<std::vector<std::size_t>> reducers;

  static Schedule one_per_task(std::size_t tasks);
};

struct EngineOptions {
  std::size_t workers = 0;  // 0: FCT_WORKERS or hardware concurrency
  std::size_t split_size = 4096;
  /// Skip a key group at a reducer that already received that key from an
  /// earlier co-located task. Only valid when a key's group is identical in
  /// every task it reaches.
  bool pull_dedup = false;
  /// Write and read back one shuffle file per (split, task).
  std::optional<std::filesystem::path> spill_dir;
};

std::size_t resolve_workers(std::size_t requested);

struct TaskStats {
  std::uint64_t routed = 0;     // pairs partitioned to the task
  std::uint64_t delivered = 0;  // pairs actually handed to its reducer
  std::uint64_t outputs = 0;
  std::uint64_t work = 0;
  std::optional<std::size_t> reducer;
};

struct ReducerStats {
  std::vector<std::size_t> tasks;
  std::uint64_t pairs = 0;
  std::uint64_t groups = 0;
  std::uint64_t work = 0;  // delivered pairs plus job-reported units
};

struct JobStats {
  std::uint64_t input_records = 0;
  std::uint64_t map_output = 0;
  std::uint64_t combine_output = 0;  // equals map_output without a combiner
  std::uint64_t shuffled = 0;        // routed pairs over all tasks
  std::uint64_t unassigned = 0;      // routed to pruned tasks
  std::uint64_t deduplicated = 0;    // skipped by pull dedup
  std::vector<TaskStats> tasks;
  std::vector<ReducerStats> reducers;
};

struct JobResult {
  std::vector<std::vector<std::string>> task_output;
  std::vector<std::vector<std::string>> reducer_output;  // from finish()
  JobStats stats;
};

/// Per-task reduce input after map, combine and partition: pairs in split
/// order, stably sorted by key.
struct ShuffleResult {
  std::vector<std::vector<KeyValue>> task_input;
  JobStats stats;
};

ShuffleResult shuffle(const JobDefinition& job, const std::vector<InputTable>& tables,
                      const EngineOptions& options = {});

std::vector<KeyGroup> group_by_key(std::span<const KeyValue> sorted);

JobResult run_job(const JobDefinition& job, const std::vector<InputTable>& tables,
                  const Schedule& schedule = {}, const EngineOptions& options = {});

/// Spill line `tag|payloadKey<TAB>pattern|payloadValue`; fields escaped.
std::string format_spill_line(const KeyValue& kv);
KeyValue parse_spill_line(std::string_view line);

/// Runs fn(0..n-1) on up to `workers` threads; the exception of the lowest
/// failing index is rethrown.
void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn);

}  // namespace fct::mr
