#include "fct/pipeline.hpp"

#include <algorithm>
#include <charconv>

#include "fct/error.hpp"
#include "fct/shares.hpp"

namespace fct {

CountedText parse_counted(std::string_view payload) {
  const auto bar = find_last_unescaped(payload, '|');
  if (bar == std::string_view::npos) return {payload, 1};
  CountedText out{payload.substr(0, bar), 0};
  auto digits = payload.substr(bar + 1);
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), out.count);
  if (ec != std::errc() || ptr != digits.data() + digits.size() || out.count == 0) {
    throw Error(ErrorCode::InvalidInput, "bad tuple count in '" + std::string(payload) + "'");
  }
  return out;
}

int fact_tag(std::size_t dims) {
  const auto m = static_cast<int>(dims);
  return std::max(m * (m + 1) / 2, m + 1);
}

std::vector<std::string> dimension_patterns(const Hypercube& cube, std::size_t dim) {
  const auto& shares = cube.shares();
  std::size_t combos = 1;
  for (std::size_t j = 0; j < shares.size(); ++j) {
    if (j != dim) combos *= shares[j];
  }
  std::vector<std::string> out;
  out.reserve(combos);
  for (std::size_t c = 0; c < combos; ++c) {
    // Mixed-radix decode of c over the other dimensions, first most significant.
    std::vector<std::string> digits(shares.size());
    std::size_t rest = c;
    for (std::size_t j = shares.size(); j-- > 0;) {
      if (j == dim) {
        digits[j] = "*";
        continue;
      }
      digits[j] = std::to_string(rest % shares[j]);
      rest /= shares[j];
    }
    std::string p;
    for (std::size_t j = 0; j < digits.size(); ++j) {
      if (j) p += '.';
      p += digits[j];
    }
    out.push_back(std::move(p));
  }
  return out;
}

namespace {

const std::string& join_value(const Relation& rel, std::size_t row, std::size_t column) {
  const auto& v = rel.value(row, column);
  if (v.empty()) {
    throw Error(ErrorCode::MissingJoinValue, rel.name() + " row " + std::to_string(row) +
                                                 " has no value in " + rel.columns()[column]);
  }
  return v;
}

void map_record(const StarInput& input, const Hypercube& cube,
                const std::vector<std::vector<std::string>>& patterns, std::size_t table,
                std::size_t record, mr::Emitter& out) {
  const auto& schema = *input.schema;
  const std::size_t m = input.dims.size();
  if (table == 0) {
    const std::size_t row = input.fact_rows[record];
    const auto& fact = schema.relation(input.fact_relation);
    std::string key;
    std::string pattern;
    for (std::size_t i = 0; i < m; ++i) {
      const auto& v = join_value(fact, row, input.dims[i].fact_column);
      if (i) {
        key += '|';
        pattern += '.';
      }
      key += escape(v);
      pattern += std::to_string(cube.digit(i, v));
    }
    if (m == 0) key = std::to_string(row);
    out.emit({fact_tag(m), std::move(key)},
             {std::move(pattern), escape(schema.text(input.fact_relation, row))});
    return;
  }
  const std::size_t i = table - 1;
  const auto& dim = input.dims.at(i);
  const std::size_t row = dim.rows[record];
  const auto& rel = schema.relation(dim.relation);
  std::string key = escape(join_value(rel, row, dim.column));
  std::string text = escape(schema.text(dim.relation, row));
  for (const auto& p : patterns[i]) out.emit({static_cast<int>(i) + 1, key}, {p, text});
}

}  // namespace

void job1_map(const StarInput& input, const Hypercube& cube, std::size_t table,
              std::size_t record, mr::Emitter& out) {
  std::vector<std::vector<std::string>> patterns;
  for (std::size_t i = 0; i < input.dims.size(); ++i) {
    patterns.push_back(dimension_patterns(cube, i));
  }
  map_record(input, cube, patterns, table, record, out);
}

void job1_combine(const mr::Key& key, std::span<const mr::Value> values, mr::Emitter& out) {
  std::vector<std::string_view> order;
  std::map<std::string_view, std::vector<const mr::Value*>> by_pattern;
  for (const auto& v : values) {
    auto& bucket = by_pattern[v.pattern];
    if (bucket.empty()) order.push_back(v.pattern);
    bucket.push_back(&v);
  }
  for (auto pattern : order) {
    const auto& bucket = by_pattern[pattern];
    if (bucket.size() == 1) {
      out.emit(key, *bucket.front());
      continue;
    }
    std::uint64_t total = 0;
    std::string body;
    for (std::size_t n = 0; n < bucket.size(); ++n) {
      auto ct = parse_counted(bucket[n]->payload);
      if (n) body += ';';
      body += ct.body;
      total += ct.count;
    }
    out.emit(key, {std::string(pattern), body + "|" + std::to_string(total)});
  }
}

void job1_partition(const mr::KeyValue& pair, const Hypercube& cube,
                    std::vector<std::size_t>& tasks) {
  const std::size_t m = cube.dimensions();
  if (m == 0) {
    if (!pair.value.pattern.empty()) {
      throw Error(ErrorCode::PatternMismatch, "pattern '" + pair.value.pattern +
                                                  "' for a network without dimensions");
    }
    tasks.push_back(0);
    return;
  }
  std::vector<std::size_t> digits;
  std::string_view pattern = pair.value.pattern;
  std::size_t start = 0;
  while (true) {
    auto dot = pattern.find('.', start);
    auto part = pattern.substr(start, dot == std::string_view::npos ? dot : dot - start);
    const std::size_t pos = digits.size();
    if (part == "*") {
      if (pair.key.tag != static_cast<int>(pos) + 1 || pos >= m) {
        throw Error(ErrorCode::PatternMismatch,
                    "wildcard at position " + std::to_string(pos) + " for tag " +
                        std::to_string(pair.key.tag));
      }
      digits.push_back(cube.digit(pos, unescape(pair.key.payload)));
    } else {
      std::size_t d = 0;
      auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), d);
      if (ec != std::errc() || ptr != part.data() + part.size()) {
        throw Error(ErrorCode::PatternMismatch, "bad pattern '" + pair.value.pattern + "'");
      }
      digits.push_back(d);
    }
    if (dot == std::string_view::npos) break;
    start = dot + 1;
  }
  if (digits.size() != m) {
    throw Error(ErrorCode::PatternMismatch, "pattern '" + pair.value.pattern + "' has " +
                                                std::to_string(digits.size()) +
                                                " digits for " + std::to_string(m) +
                                                " dimensions");
  }
  tasks.push_back(cube.label(digits));
}

std::string VolRecord::line() const {
  std::string out = kind == 0 ? "fact" : "dim:" + std::to_string(kind);
  out += '\t';
  out += key;
  out += '\t';
  out += std::to_string(volume);
  out += '\t';
  out += text;
  return out;
}

VolRecord VolRecord::parse(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (fields.size() < 3) {
    auto tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      throw Error(ErrorCode::InvalidInput, "vol record needs four fields: " + std::string(line));
    }
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
  fields.push_back(line.substr(start));
  VolRecord rec;
  if (fields[0] == "fact") {
    rec.kind = 0;
  } else if (fields[0].substr(0, 4) == "dim:") {
    auto n = fields[0].substr(4);
    auto [ptr, ec] = std::from_chars(n.data(), n.data() + n.size(), rec.kind);
    if (ec != std::errc() || ptr != n.data() + n.size() || rec.kind == 0) {
      throw Error(ErrorCode::InvalidInput, "bad record kind " + std::string(fields[0]));
    }
  } else {
    throw Error(ErrorCode::InvalidInput, "bad record kind " + std::string(fields[0]));
  }
  rec.key = fields[1];
  auto v = fields[2];
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), rec.volume);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw Error(ErrorCode::InvalidInput, "bad volume " + std::string(v));
  }
  rec.text = fields[3];
  return rec;
}

StatisticsBuilder::StatisticsBuilder(std::size_t dims)
    : dims_(dims), num_(dims), dim_total_(dims), dim_task_(dims) {}

void StatisticsBuilder::begin_task() {
  fact_task_.clear();
  for (auto& d : dim_task_) d.clear();
  task_work_ = 0;
}

void StatisticsBuilder::add(const mr::KeyGroup& group) {
  const int tag = group.key.tag;
  if (tag >= 1 && static_cast<std::size_t>(tag) <= dims_) {
    NumEntry entry;
    for (std::size_t n = 0; n < group.values.size(); ++n) {
      auto ct = parse_counted(group.values[n].payload);
      if (n) entry.text += ';';
      entry.text += ct.body;
      entry.num += ct.count;
    }
    num_[tag - 1][group.key.payload] = std::move(entry);
    return;
  }
  if (tag != fact_tag(dims_)) {
    throw Error(ErrorCode::InvalidInput, "unexpected key tag " + std::to_string(tag));
  }
  std::vector<std::string_view> parts;
  if (dims_ > 0) parts = split_unescaped(group.key.payload, '|');
  if (parts.size() != dims_) {
    throw Error(ErrorCode::PatternMismatch, "fact key " + group.key.payload + " has " +
                                                std::to_string(parts.size()) + " parts");
  }
  std::vector<const NumEntry*> entries(dims_);
  for (std::size_t i = 0; i < dims_; ++i) {
    auto it = num_[i].find(parts[i]);
    if (it == num_[i].end()) return;  // no join partner
    entries[i] = &it->second;
  }
  std::uint64_t product = 1;
  for (const auto* e : entries) product *= e->num;

  for (const auto& value : group.values) {
    auto ct = parse_counted(value.payload);
    for (VolMap* m : {&fact_total_, &fact_task_}) {
      auto& vol = (*m)[group.key.payload];
      vol.volume = product;
      if (!vol.text.empty()) vol.text += ';';
      vol.text += ct.body;
    }
    for (std::size_t i = 0; i < dims_; ++i) {
      const std::uint64_t add = ct.count * (product / entries[i]->num);
      auto& total = dim_total_[i][std::string(parts[i])];
      total.volume += add;
      total.text = entries[i]->text;
      dim_task_[i][std::string(parts[i])] += add;
    }
    task_work_ += ct.count * product;
  }
}

std::vector<VolRecord> StatisticsBuilder::task_records() const {
  std::vector<VolRecord> out;
  for (const auto& [key, vol] : fact_task_) out.push_back({0, key, vol.volume, vol.text});
  for (std::size_t i = 0; i < dims_; ++i) {
    for (const auto& [key, delta] : dim_task_[i]) {
      out.push_back({i + 1, key, delta, num_[i].find(key)->second.text});
    }
  }
  return out;
}

const NumEntry* StatisticsBuilder::num(std::size_t dim, std::string_view key) const {
  auto it = num_.at(dim).find(key);
  return it == num_[dim].end() ? nullptr : &it->second;
}

std::optional<std::uint64_t> StatisticsBuilder::dim_volume(std::size_t dim,
                                                           std::string_view key) const {
  auto it = dim_total_.at(dim).find(key);
  if (it == dim_total_[dim].end()) return std::nullopt;
  return it->second.volume;
}

std::optional<std::uint64_t> StatisticsBuilder::fact_volume(std::string_view key) const {
  auto it = fact_total_.find(key);
  if (it == fact_total_.end()) return std::nullopt;
  return it->second.volume;
}

std::vector<VolRecord> StatisticsBuilder::totals() const {
  std::vector<VolRecord> out;
  for (const auto& [key, vol] : fact_total_) out.push_back({0, key, vol.volume, vol.text});
  for (std::size_t i = 0; i < dims_; ++i) {
    for (const auto& [key, vol] : dim_total_[i]) out.push_back({i + 1, key, vol.volume, vol.text});
  }
  return out;
}

void job2_map(std::string_view vol_line, const TermFilter& filter, mr::Emitter& out) {
  const auto rec = VolRecord::parse(vol_line);
  std::map<std::string, std::uint64_t> local;
  for (auto segment : split_unescaped(rec.text, ';')) {
    for (auto& token : tokenize(unescape(segment))) {
      if (filter.accepts(token)) ++local[std::move(token)];
    }
  }
  for (auto& [term, count] : local) {
    out.emit({0, term}, {"", std::to_string(count * rec.volume)});
  }
}

std::uint64_t job2_reduce(std::span<const mr::Value> cardinalities) {
  std::uint64_t sum = 0;
  for (const auto& v : cardinalities) {
    std::uint64_t n = 0;
    auto [ptr, ec] = std::from_chars(v.payload.data(), v.payload.data() + v.payload.size(), n);
    if (ec != std::errc() || ptr != v.payload.data() + v.payload.size()) {
      throw Error(ErrorCode::InvalidInput, "bad cardinality " + v.payload);
    }
    sum += n;
  }
  return sum;
}

namespace {

class Job1Session : public mr::ReduceSession {
 public:
  explicit Job1Session(std::size_t dims) : builder_(dims) {}

  void reduce_task(std::size_t, std::span<const mr::KeyGroup> groups,
                   mr::OutputSink& out) override {
    builder_.begin_task();
    for (const auto& g : groups) builder_.add(g);
    for (const auto& rec : builder_.task_records()) out.emit(rec.line());
    out.add_work(builder_.task_work());
  }

 private:
  StatisticsBuilder builder_;
};

class Job2Session : public mr::ReduceSession {
 public:
  void reduce_task(std::size_t, std::span<const mr::KeyGroup> groups,
                   mr::OutputSink& out) override {
    for (const auto& g : groups) {
      out.emit(g.key.payload + "\t" + std::to_string(job2_reduce(g.values)));
    }
  }
};

}  // namespace

std::vector<mr::InputTable> job1_tables(const StarInput& input) {
  std::vector<mr::InputTable> tables;
  tables.push_back({input.schema->relation(input.fact_relation).name(), input.fact_rows.size()});
  for (const auto& d : input.dims) {
    tables.push_back({input.schema->relation(d.relation).name(), d.rows.size()});
  }
  return tables;
}

mr::JobDefinition job1_definition(const StarInput& input, const Hypercube& cube,
                                  const PipelineOptions& options) {
  if (cube.dimensions() != input.dims.size()) {
    throw Error(ErrorCode::PatternMismatch, std::to_string(cube.dimensions()) +
                                                " shares for " +
                                                std::to_string(input.dims.size()) +
                                                " dimensions");
  }
  auto patterns = std::make_shared<std::vector<std::vector<std::string>>>();
  for (std::size_t i = 0; i < input.dims.size(); ++i) {
    patterns->push_back(dimension_patterns(cube, i));
  }
  mr::JobDefinition job;
  job.name = "job1";
  job.tasks = cube.tasks();
  job.map = [&input, cube, patterns](const mr::InputSplit& split, std::size_t record,
                                     mr::Emitter& out) {
    map_record(input, cube, *patterns, split.table, record, out);
  };
  if (options.combine) {
    const bool key_joins = options.combine_key_joins;
    job.combine = [&input, key_joins](const mr::Key& key, std::span<const mr::Value> values,
                                      mr::Emitter& out) {
      const auto i = static_cast<std::size_t>(key.tag - 1);
      if (!key_joins && key.tag >= 1 && i < input.dims.size() && input.dims[i].key_join) {
        for (const auto& v : values) out.emit(key, v);
        return;
      }
      job1_combine(key, values, out);
    };
  }
  job.partition = [cube](const mr::KeyValue& pair, std::vector<std::size_t>& tasks) {
    job1_partition(pair, cube, tasks);
  };
  const std::size_t m = input.dims.size();
  job.reducer = [m](std::size_t) { return std::make_unique<Job1Session>(m); };
  return job;
}

CnAllocation plan_star(const StarInput& input, const PipelineOptions& options) {
  const std::size_t m = input.dims.size();
  CnAllocation alloc;
  if (options.uniform_share) {
    alloc.shares.assign(m, *options.uniform_share);
  } else if (m > 0) {
    alloc.shares = plan_shares(options.tasks, input.dimension_sizes()).shares;
  }
  Hypercube cube(alloc.shares);

  if (options.skew_schedule) {
    alloc.costs = estimate_task_costs(input, cube,
                                      sample_star(input, options.sample_rate, options.seed));
  } else {
    const auto exact = route_facts(input, cube);
    for (std::size_t t = 0; t < exact.size(); ++t) {
      TaskCost c;
      c.label = t;
      c.exact_fact_count = exact[t];
      c.fact_count = static_cast<double>(exact[t]);
      c.cost = c.fact_count;
      alloc.costs.push_back(std::move(c));
    }
  }

  std::vector<std::size_t> surviving;
  if (options.prune) {
    surviving = prune_empty_tasks(alloc.costs);
  } else {
    for (std::size_t t = 0; t < cube.tasks(); ++t) surviving.push_back(t);
  }

  if (options.skew_schedule) {
    const std::size_t r = options.reducers ? options.reducers : std::max<std::size_t>(1, surviving.size());
    alloc.table = assign_tasks(alloc.costs, r, surviving);
  } else if (options.reducers) {
    alloc.table = round_robin(surviving, options.reducers);
  } else {
    // One reducer per task, numbered in label order.
    alloc.table = AllocationTable{};
    for (std::size_t t : surviving) {
      alloc.table.task_reducer[t] = alloc.table.reducer_tasks.size();
      alloc.table.reducer_tasks.push_back({t});
    }
    if (alloc.table.reducer_tasks.empty()) alloc.table.reducer_tasks.emplace_back();
    alloc.table.loads.assign(alloc.table.reducer_tasks.size(), 0);
  }
  for (std::size_t t = 0; t < alloc.costs.size(); ++t) {
    auto it = alloc.table.task_reducer.find(t);
    if (it != alloc.table.task_reducer.end() && !options.skew_schedule) {
      alloc.table.loads[it->second] += alloc.costs[t].cost;
    }
  }
  return alloc;
}

Job1Run run_job1(const StarInput& input, const PipelineOptions& options,
                 const CnAllocation* plan) {
  Job1Run run;
  run.allocation = plan ? *plan : plan_star(input, options);
  if (run.allocation.shares.size() != input.dims.size()) {
    throw Error(ErrorCode::ConfigError,
                "allocation has " + std::to_string(run.allocation.shares.size()) +
                    " shares for " + std::to_string(input.dims.size()) + " dimensions");
  }
  run.cube = Hypercube(run.allocation.shares);
  for (std::size_t t = 0; t < run.cube.tasks(); ++t) {
    if (!run.allocation.table.task_reducer.count(t)) run.pruned.push_back(t);
  }
  auto schedule = run.allocation.table.schedule();
  if (schedule.reducers.empty()) schedule.reducers.emplace_back();
  mr::EngineOptions engine = options.engine;
  engine.pull_dedup = options.pull_dedup;
  run.result = mr::run_job(job1_definition(input, run.cube, options), job1_tables(input),
                           schedule, engine);
  for (auto& lines : run.result.task_output) {
    run.lines.insert(run.lines.end(), lines.begin(), lines.end());
  }
  return run;
}

Job2Run run_job2(const std::vector<std::string>& vol_lines, const TermFilter& filter,
                 const PipelineOptions& options) {
  const std::size_t tasks = std::max<std::size_t>(1, options.job2_tasks);
  mr::JobDefinition job;
  job.name = "job2";
  job.tasks = tasks;
  job.map = [&vol_lines, &filter](const mr::InputSplit&, std::size_t record, mr::Emitter& out) {
    job2_map(vol_lines[record], filter, out);
  };
  if (options.combine) {
    job.combine = [](const mr::Key& key, std::span<const mr::Value> values, mr::Emitter& out) {
      out.emit(key, {"", std::to_string(job2_reduce(values))});
    };
  }
  job.partition = [tasks](const mr::KeyValue& pair, std::vector<std::size_t>& out) {
    out.push_back(static_cast<std::size_t>(fnv1a(pair.key.payload) % tasks));
  };
  job.reducer = [](std::size_t) { return std::make_unique<Job2Session>(); };
  mr::EngineOptions engine = options.engine;
  engine.pull_dedup = false;

  Job2Run run;
  run.result = mr::run_job(job, {{"vol", vol_lines.size()}}, {}, engine);
  for (const auto& lines : run.result.task_output) {
    for (const auto& line : lines) {
      auto tab = line.find('\t');
      std::uint64_t f = 0;
      std::from_chars(line.data() + tab + 1, line.data() + line.size(), f);
      run.frequencies[line.substr(0, tab)] += f;
    }
  }
  return run;
}

Frequencies star_frequencies(const StarNetwork& star, const TermFilter& filter,
                             const PipelineOptions& options, const CnAllocation* plan,
                             CnRun* out) {
  const StarInput input = make_star_input(star);
  Job1Run job1 = run_job1(input, options, plan);
  Job2Run job2 = run_job2(job1.lines, filter, options);
  Frequencies freqs = job2.frequencies;
  if (out) {
    out->canonical = star.cn.canonical;
    out->collapsed = star.collapsed;
    out->job1 = std::move(job1);
    out->job2 = std::move(job2);
  }
  return freqs;
}

FctResult run_fct(const SchemaGraph& schema, const KeywordQuery& query,
                  const TermFilter& filter, const PipelineOptions& options) {
  FctResult result;
  for (const auto& cn : enumerate_candidate_networks(schema, query)) {
    const StarNetwork star = collapse_to_star(cn, schema);
    auto it = options.allocations.find(cn.canonical);
    const CnAllocation* plan = it == options.allocations.end() ? nullptr : &it->second;
    CnRun run;
    add_frequencies(result.frequencies, star_frequencies(star, filter, options, plan, &run));
    run.canonical = cn.canonical;
    run.description = cn.describe(schema, query);
    result.networks.push_back(std::move(run));
  }
  result.ranking = top_k(result.frequencies, query.k());
  return result;
}

}  // namespace fct
