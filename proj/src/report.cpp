#include "fct/report.hpp"

#include <algorithm>
#include <ostream>
#include <sstream>

namespace fct {

using nlohmann::json;

double load_ratio(const mr::JobStats& stats) {
  if (stats.reducers.empty()) return 0;
  double max = 0;
  double sum = 0;
  for (const auto& r : stats.reducers) {
    max = std::max(max, static_cast<double>(r.work));
    sum += static_cast<double>(r.work);
  }
  return sum == 0 ? 0 : max / (sum / static_cast<double>(stats.reducers.size()));
}

json job_stats_json(const mr::JobStats& stats, const Hypercube* cube) {
  auto label = [&](std::size_t t) -> json {
    if (cube) return cube->display(t);
    return std::to_string(t);
  };
  json j{{"input_records", stats.input_records},
         {"map_output", stats.map_output},
         {"combine_output", stats.combine_output},
         {"shuffled", stats.shuffled},
         {"unassigned", stats.unassigned},
         {"deduplicated", stats.deduplicated},
         {"max_over_mean", load_ratio(stats)}};
  j["tasks"] = json::array();
  for (std::size_t t = 0; t < stats.tasks.size(); ++t) {
    const auto& ts = stats.tasks[t];
    j["tasks"].push_back({{"label", label(t)},
                          {"routed", ts.routed},
                          {"delivered", ts.delivered},
                          {"outputs", ts.outputs},
                          {"work", ts.work},
                          {"reducer", ts.reducer ? json(*ts.reducer) : json(nullptr)}});
  }
  j["reducers"] = json::array();
  for (std::size_t r = 0; r < stats.reducers.size(); ++r) {
    const auto& rs = stats.reducers[r];
    json tasks = json::array();
    std::uint64_t routed = 0;
    for (std::size_t t : rs.tasks) {
      tasks.push_back(label(t));
      routed += stats.tasks[t].routed;
    }
    j["reducers"].push_back({{"id", r},
                             {"tasks", tasks},
                             {"shuffled", routed},
                             {"delivered", rs.pairs},
                             {"groups", rs.groups},
                             {"work", rs.work}});
  }
  return j;
}

json run_stats_json(const FctResult& result) {
  json root;
  root["networks"] = json::array();
  for (const auto& run : result.networks) {
    root["networks"].push_back({{"canonical", run.canonical},
                                {"description", run.description},
                                {"collapsed", run.collapsed},
                                {"shares", run.job1.cube.shares()},
                                {"tasks", run.job1.cube.tasks()},
                                {"job1", job_stats_json(run.job1.result.stats, &run.job1.cube)},
                                {"job2", job_stats_json(run.job2.result.stats)}});
  }
  return root;
}

void write_report(const json& stats, std::ostream& out) {
  out << "row\tnetwork\tjob\treducer\ttasks\tshuffled\tdelivered\twork\tmax_over_mean\n";
  const auto& networks = stats.value("networks", json::array());
  if (networks.empty()) {
    out << "total\t-\t-\tall\t\t0\t0\t0\t0\n";
    return;
  }
  for (std::size_t n = 0; n < networks.size(); ++n) {
    for (const char* job : {"job1", "job2"}) {
      if (!networks[n].contains(job)) continue;
      const auto& js = networks[n][job];
      std::uint64_t shuffled = 0, delivered = 0, work = 0;
      for (const auto& r : js.value("reducers", json::array())) {
        std::ostringstream tasks;
        bool first = true;
        for (const auto& t : r["tasks"]) {
          if (!first) tasks << ',';
          tasks << t.get<std::string>();
          first = false;
        }
        const auto rs = r.value("shuffled", std::uint64_t{0});
        const auto rd = r.value("delivered", std::uint64_t{0});
        const auto rw = r.value("work", std::uint64_t{0});
        shuffled += rs;
        delivered += rd;
        work += rw;
        out << "reducer\t" << n << '\t' << job << '\t' << r.value("id", 0) << '\t' << tasks.str()
            << '\t' << rs << '\t' << rd << '\t' << rw << "\t\n";
      }
      out << "total\t" << n << '\t' << job << "\tall\t\t" << shuffled << '\t' << delivered
          << '\t' << work << '\t' << js.value("max_over_mean", 0.0) << '\n';
    }
  }
}

}  // namespace fct
