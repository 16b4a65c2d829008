#include "fct/mr/engine.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <set>
#include <thread>

#include "fct/error.hpp"
#include "fct/text.hpp"

namespace fct::mr {

std::vector<InputSplit> split_input(const std::vector<InputTable>& tables,
                                    std::size_t split_size) {
  if (split_size < 1) throw Error(ErrorCode::InvalidInput, "split size must be at least 1");
  std::vector<InputSplit> splits;
  for (std::size_t t = 0; t < tables.size(); ++t) {
    for (std::size_t begin = 0; begin < tables[t].records; begin += split_size) {
      splits.push_back({splits.size(), t, begin, std::min(begin + split_size, tables[t].records)});
    }
  }
  return splits;
}

Schedule Schedule::one_per_task(std::size_t tasks) {
  Schedule s;
  for (std::size_t t = 0; t < tasks; ++t) s.reducers.push_back({t});
  return s;
}

std::size_t resolve_workers(std::size_t requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("FCT_WORKERS")) {
    std::size_t n = 0;
    std::string_view sv(env);
    auto [ptr, ec] = std::from_chars(sv.data(), sv.data() + sv.size(), n);
    if (ec == std::errc() && ptr == sv.data() + sv.size() && n > 0) return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t n, std::size_t workers,
                  const std::function<void(std::size_t)>& fn) {
  if (workers <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  {
    std::vector<std::jthread> pool;
    const std::size_t count = std::min(workers, n);
    pool.reserve(count);
    for (std::size_t w = 0; w < count; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) {
          try {
            fn(i);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

namespace {

[[noreturn]] void rethrow_with_context(const std::string& context) {
  try {
    throw;
  } catch (const Error& e) {
    throw Error(e.code(), context + ": " + e.what());
  } catch (const std::exception& e) {
    throw Error(ErrorCode::JobFailed, context + ": " + e.what());
  }
}

void sort_by_key(std::vector<KeyValue>& pairs) {
  std::stable_sort(pairs.begin(), pairs.end(),
                   [](const KeyValue& a, const KeyValue& b) { return a.key < b.key; });
}

std::vector<std::vector<KeyValue>> map_split(const JobDefinition& job,
                                             const std::vector<InputTable>& tables,
                                             const InputSplit& split,
                                             std::uint64_t& map_count,
                                             std::uint64_t& combine_count) {
  Emitter mapped;
  for (std::size_t r = split.begin; r < split.end; ++r) {
    try {
      job.map(split, r, mapped);
    } catch (...) {
      rethrow_with_context(job.name + " map, split " + std::to_string(split.index) + " (" +
                           tables[split.table].name + ") record " + std::to_string(r));
    }
  }
  std::vector<KeyValue> pairs = std::move(mapped.pairs());
  map_count = pairs.size();

  if (job.combine) {
    sort_by_key(pairs);
    Emitter combined;
    std::vector<Value> values;
    for (std::size_t i = 0; i < pairs.size();) {
      std::size_t j = i;
      values.clear();
      while (j < pairs.size() && pairs[j].key == pairs[i].key) {
        values.push_back(std::move(pairs[j].value));
        ++j;
      }
      try {
        job.combine(pairs[i].key, values, combined);
      } catch (...) {
        rethrow_with_context(job.name + " combine, split " + std::to_string(split.index) +
                             " key " + pairs[i].key.payload);
      }
      i = j;
    }
    pairs = std::move(combined.pairs());
  }
  combine_count = pairs.size();

  std::vector<std::vector<KeyValue>> by_task(job.tasks);
  std::vector<std::size_t> targets;
  for (auto& kv : pairs) {
    targets.clear();
    job.partition(kv, targets);
    for (std::size_t t : targets) {
      if (t >= job.tasks) {
        throw Error(ErrorCode::PartitionOutOfRange,
                    job.name + " partitioned key " + kv.key.payload + " to task " +
                        std::to_string(t) + " of " + std::to_string(job.tasks));
      }
    }
    for (std::size_t n = 0; n < targets.size(); ++n) {
      if (n + 1 == targets.size()) {
        by_task[targets[n]].push_back(std::move(kv));
      } else {
        by_task[targets[n]].push_back(kv);
      }
    }
  }
  return by_task;
}

void spill_round_trip(std::vector<KeyValue>& pairs, const std::filesystem::path& file) {
  sort_by_key(pairs);
  {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot write spill file " + file.string());
    for (const auto& kv : pairs) out << format_spill_line(kv) << '\n';
    if (!out) throw Error(ErrorCode::IoError, "write failed on " + file.string());
  }
  std::ifstream in(file, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read spill file " + file.string());
  std::vector<KeyValue> back;
  back.reserve(pairs.size());
  std::string line;
  while (std::getline(in, line)) back.push_back(parse_spill_line(line));
  pairs = std::move(back);
}

}  // namespace

std::string format_spill_line(const KeyValue& kv) {
  return std::to_string(kv.key.tag) + "|" + escape(kv.key.payload) + "\t" +
         escape(kv.value.pattern) + "|" + escape(kv.value.payload);
}

KeyValue parse_spill_line(std::string_view line) {
  auto tab = line.find('\t');
  auto bar = line.find('|');
  if (tab == std::string_view::npos || bar == std::string_view::npos || bar > tab) {
    throw Error(ErrorCode::IoError, "malformed spill line");
  }
  KeyValue kv;
  auto tag = line.substr(0, bar);
  auto [ptr, ec] = std::from_chars(tag.data(), tag.data() + tag.size(), kv.key.tag);
  if (ec != std::errc() || ptr != tag.data() + tag.size()) {
    throw Error(ErrorCode::IoError, "malformed spill tag");
  }
  kv.key.payload = unescape(line.substr(bar + 1, tab - bar - 1));
  auto value = line.substr(tab + 1);
  auto vbar = split_unescaped(value, '|');
  if (vbar.size() < 2) throw Error(ErrorCode::IoError, "malformed spill value");
  kv.value.pattern = unescape(vbar[0]);
  kv.value.payload = unescape(value.substr(vbar[0].size() + 1));
  return kv;
}

ShuffleResult shuffle(const JobDefinition& job, const std::vector<InputTable>& tables,
                      const EngineOptions& options) {
  if (job.tasks < 1) throw Error(ErrorCode::InvalidInput, job.name + " has no reduce tasks");
  const auto splits = split_input(tables, options.split_size);
  const std::size_t workers = resolve_workers(options.workers);
  if (options.spill_dir) {
    std::error_code ec;
    std::filesystem::create_directories(*options.spill_dir, ec);
    if (ec) {
      throw Error(ErrorCode::IoError,
                  "cannot create " + options.spill_dir->string() + ": " + ec.message());
    }
  }

  std::vector<std::vector<std::vector<KeyValue>>> per_split(splits.size());
  std::vector<std::uint64_t> map_counts(splits.size()), combine_counts(splits.size());
  parallel_for(splits.size(), workers, [&](std::size_t s) {
    per_split[s] = map_split(job, tables, splits[s], map_counts[s], combine_counts[s]);
    if (options.spill_dir) {
      for (std::size_t t = 0; t < job.tasks; ++t) {
        if (per_split[s][t].empty()) continue;
        spill_round_trip(per_split[s][t], *options.spill_dir / (job.name + "-split" +
                                                                 std::to_string(s) + "-task" +
                                                                 std::to_string(t) + ".kv"));
      }
    }
  });

  ShuffleResult result;
  auto& stats = result.stats;
  for (const auto& t : tables) stats.input_records += t.records;
  for (std::size_t s = 0; s < splits.size(); ++s) {
    stats.map_output += map_counts[s];
    stats.combine_output += combine_counts[s];
  }
  result.task_input.resize(job.tasks);
  stats.tasks.resize(job.tasks);
  parallel_for(job.tasks, workers, [&](std::size_t t) {
    auto& input = result.task_input[t];
    for (auto& split : per_split) {
      auto& part = split[t];
      input.insert(input.end(), std::make_move_iterator(part.begin()),
                   std::make_move_iterator(part.end()));
    }
    sort_by_key(input);
    stats.tasks[t].routed = input.size();
  });
  for (const auto& t : stats.tasks) stats.shuffled += t.routed;
  return result;
}

std::vector<KeyGroup> group_by_key(std::span<const KeyValue> sorted) {
  std::vector<KeyGroup> groups;
  for (std::size_t i = 0; i < sorted.size();) {
    KeyGroup g{sorted[i].key, {}};
    while (i < sorted.size() && sorted[i].key == g.key) g.values.push_back(sorted[i++].value);
    groups.push_back(std::move(g));
  }
  return groups;
}

JobResult run_job(const JobDefinition& job, const std::vector<InputTable>& tables,
                  const Schedule& schedule_in, const EngineOptions& options) {
  const Schedule schedule =
      schedule_in.reducers.empty() ? Schedule::one_per_task(job.tasks) : schedule_in;
  std::vector<bool> seen(job.tasks, false);
  for (const auto& tasks : schedule.reducers) {
    for (std::size_t t : tasks) {
      if (t >= job.tasks) {
        throw Error(ErrorCode::InvalidInput, "schedule names task " + std::to_string(t) +
                                                 " of " + std::to_string(job.tasks));
      }
      if (seen[t]) {
        throw Error(ErrorCode::InvalidInput,
                    "task " + std::to_string(t) + " scheduled on two reducers");
      }
      seen[t] = true;
    }
  }

  ShuffleResult shuffled = shuffle(job, tables, options);
  JobResult result;
  result.stats = std::move(shuffled.stats);
  auto& stats = result.stats;
  for (std::size_t t = 0; t < job.tasks; ++t) {
    if (!seen[t]) stats.unassigned += stats.tasks[t].routed;
  }
  result.task_output.resize(job.tasks);
  result.reducer_output.resize(schedule.reducers.size());
  stats.reducers.resize(schedule.reducers.size());
  std::vector<std::uint64_t> dedup(schedule.reducers.size(), 0);

  parallel_for(schedule.reducers.size(), resolve_workers(options.workers), [&](std::size_t r) {
    auto session = job.reducer(r);
    auto& rstats = stats.reducers[r];
    rstats.tasks = schedule.reducers[r];
    std::set<Key> resident;
    for (std::size_t t : schedule.reducers[r]) {
      auto groups = group_by_key(shuffled.task_input[t]);
      auto& tstats = stats.tasks[t];
      tstats.reducer = r;
      if (options.pull_dedup) {
        std::vector<KeyGroup> kept;
        for (auto& g : groups) {
          if (resident.insert(g.key).second) {
            kept.push_back(std::move(g));
          } else {
            dedup[r] += g.values.size();
          }
        }
        groups = std::move(kept);
      }
      for (const auto& g : groups) tstats.delivered += g.values.size();
      OutputSink sink;
      try {
        session->reduce_task(t, groups, sink);
      } catch (...) {
        rethrow_with_context(job.name + " reduce task " + std::to_string(t));
      }
      tstats.outputs = sink.lines().size();
      tstats.work = tstats.delivered + sink.work();
      rstats.pairs += tstats.delivered;
      rstats.groups += groups.size();
      rstats.work += tstats.work;
      result.task_output[t] = std::move(sink.lines());
    }
    OutputSink final_sink;
    try {
      session->finish(final_sink);
    } catch (...) {
      rethrow_with_context(job.name + " reducer " + std::to_string(r) + " finish");
    }
    rstats.work += final_sink.work();
    result.reducer_output[r] = std::move(final_sink.lines());
  });
  for (auto d : dedup) stats.deduplicated += d;
  return result;
}

}  // namespace fct::mr
