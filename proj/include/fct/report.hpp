#pragma once

#include <iosfwd>

#include <json.hpp>

#include "fct/mr/engine.hpp"
#include "fct/pipeline.hpp"

namespace fct {

/// max / mean of per-reducer work; 0 for an empty or idle job.
double load_ratio(const mr::JobStats& stats);

nlohmann::json job_stats_json(const mr::JobStats& stats, const Hypercube* cube = nullptr);

/// Instrumented run: per network both jobs' counters.
nlohmann::json run_stats_json(const FctResult& result);

/// One row per reducer and a total per (network, job) with the max/mean
/// work ratio; columns: row, network, job, reducer, tasks, shuffled,
/// delivered, work, max_over_mean.
void write_report(const nlohmann::json& stats, std::ostream& out);

}  // namespace fct
