#pragma once

// Paired benchmark harness: sweeps over (coflow count, coflow width) cells on
// a fat tree, runs the four schemes on identical seeded instances, and
// aggregates per-cell means plus the lp-based scheme's paired improvement
// over each competitor. One cell failing (an LP blowing its iteration budget,
// say) is logged and skipped; the other cells still run.
//
// Seeds never mix within a cell: every scheme sees the same instance and the
// same scheme seed for a given repetition, so differences are attributable to
// the scheme alone. The harness is deliberately single threaded; cells are
// pure functions of (config, cell, rep) and run in a fixed order, so every
// output except the wall-clock column is stable for a given config.

#include <chrono>
#include <cstdint>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "coflow/generator.hpp"
#include "coflow/instance.hpp"
#include "coflow/schemes.hpp"
#include "coflow/simulator.hpp"

namespace coflow {

struct RunConfig {
  int fat_tree_k = 4;
  std::vector<int> widths = {4, 8, 16, 32};  // width sweep cells...
  int width_sweep_coflows = 10;              // ...at this coflow count
  std::vector<int> counts = {10, 15, 20, 25};  // count sweep cells...
  int count_sweep_width = 16;                  // ...at this width
  int reps = 10;
  std::uint64_t seed = 0;
  double mean_size = 10.0;
  double mean_release = 5.0;
  double mean_weight = 2.0;
};

inline void check_run_config(const RunConfig& c) {
  if (c.reps < 1) throw std::invalid_argument("bench: repetition count must be >= 1");
  for (int w : c.widths)
    if (w < 1) throw std::invalid_argument("bench: width must be >= 1");
  for (int n : c.counts)
    if (n < 1) throw std::invalid_argument("bench: coflow count must be >= 1");
}

inline const std::vector<std::string>& scheme_names() {
  static const std::vector<std::string> names = {"baseline", "schedule-only", "route-only",
                                                 "lp-based"};
  return names;
}

inline PriorityPlan run_scheme(const std::string& name, const Instance& ins,
                               std::uint64_t seed) {
  if (name == "baseline") return scheme_baseline(ins, seed);
  if (name == "schedule-only") return scheme_schedule_only(ins, seed);
  if (name == "route-only") return scheme_route_only(ins, seed);
  if (name == "lp-based") return scheme_lp_based(ins, seed);
  throw std::invalid_argument("unknown scheme: " + name);
}

struct BenchRecord {
  std::string instance_id;
  std::string scheme;
  double objective = 0.0;
  double makespan = 0.0;
  double stretch = 1.0;
  double wall_ms = 0.0;
};

struct CellSummary {
  std::string cell;  // "width" or "count": which sweep the row belongs to
  int coflows = 0;
  int width = 0;
  int reps = 0;
  std::map<std::string, double> mean_objective;     // per scheme
  std::map<std::string, double> lp_improvement;     // mean paired improvement_pct
  int lp_wins_vs_baseline = 0;                      // reps with lp <= baseline
  std::string failure;                              // nonempty: cell aborted
};

struct BenchResults {
  std::vector<BenchRecord> records;
  std::vector<CellSummary> summary;  // width-sweep rows first, then count-sweep
};

namespace detail {

// Per-repetition seed, decorrelated across cells by a splitmix64 step.
inline std::uint64_t cell_seed(std::uint64_t base, std::size_t cell, int rep) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ull * (cell * 1024ull + static_cast<unsigned>(rep) + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline CellSummary run_cell(const RunConfig& cfg, const Network& net, const std::string& sweep,
                            std::size_t cell_ordinal, int coflows, int width,
                            std::vector<BenchRecord>& records, std::ostream* log) {
  CellSummary sum;
  sum.cell = sweep;
  sum.coflows = coflows;
  sum.width = width;
  sum.reps = cfg.reps;
  std::map<std::string, double> totals;
  std::map<std::string, double> improvement_totals;
  std::vector<BenchRecord> cell_records;
  try {
    for (int rep = 0; rep < cfg.reps; ++rep) {
      const std::uint64_t seed = cell_seed(cfg.seed, cell_ordinal, rep);
      GenParams gp;
      gp.fat_tree_k = cfg.fat_tree_k;
      gp.coflows = coflows;
      gp.width = width;
      gp.mean_size = cfg.mean_size;
      gp.mean_release = cfg.mean_release;
      gp.mean_weight = cfg.mean_weight;
      gp.seed = seed;
      const Instance ins = gen_instance(gp, net);
      std::ostringstream id;
      id << sweep << "_n" << coflows << "_w" << width << "_rep" << rep << "_seed" << seed;
      std::map<std::string, double> objective;
      for (const std::string& scheme : scheme_names()) {
        const auto t0 = std::chrono::steady_clock::now();
        const SimResult res = simulate(ins, run_scheme(scheme, ins, seed));
        const auto t1 = std::chrono::steady_clock::now();
        if (!res.report.feasible)
          throw std::runtime_error(scheme + " produced an infeasible schedule");
        double makespan = 0.0;
        for (double c : res.report.coflow_completion) makespan = std::max(makespan, c);
        BenchRecord rec;
        rec.instance_id = id.str();
        rec.scheme = scheme;
        rec.objective = res.report.objective;
        rec.makespan = makespan;
        rec.stretch = res.report.stretch;
        rec.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
        cell_records.push_back(rec);
        objective[scheme] = rec.objective;
        totals[scheme] += rec.objective;
      }
      const double lp = objective.at("lp-based");
      for (const std::string& scheme : scheme_names())
        if (scheme != "lp-based")
          improvement_totals[scheme] += improvement_pct(lp, objective.at(scheme));
      if (lp <= objective.at("baseline") + 1e-9) ++sum.lp_wins_vs_baseline;
    }
  } catch (const std::exception& e) {
    sum.failure = e.what();
    if (log) *log << "bench: cell " << sweep << " n=" << coflows << " w=" << width
                  << " aborted: " << e.what() << "\n";
    return sum;
  }
  records.insert(records.end(), cell_records.begin(), cell_records.end());
  for (const auto& [scheme, total] : totals) sum.mean_objective[scheme] = total / cfg.reps;
  for (const auto& [scheme, total] : improvement_totals)
    sum.lp_improvement[scheme] = total / cfg.reps;
  return sum;
}

}  // namespace detail

inline BenchResults run_bench(const RunConfig& cfg, std::ostream* log = nullptr) {
  check_run_config(cfg);
  const Network net = fat_tree(cfg.fat_tree_k);
  BenchResults out;
  std::size_t ordinal = 0;
  for (int w : cfg.widths)
    out.summary.push_back(detail::run_cell(cfg, net, "width", ordinal++, cfg.width_sweep_coflows,
                                           w, out.records, log));
  for (int n : cfg.counts)
    out.summary.push_back(detail::run_cell(cfg, net, "count", ordinal++, n, cfg.count_sweep_width,
                                           out.records, log));
  return out;
}

// One row per (instance, scheme) run.
inline void write_records_csv(std::ostream& os, const std::vector<BenchRecord>& records) {
  os << "instance,scheme,objective,makespan,stretch,wall_ms\n";
  os << std::setprecision(10);
  for (const BenchRecord& r : records)
    os << r.instance_id << "," << r.scheme << "," << r.objective << "," << r.makespan << ","
       << r.stretch << "," << r.wall_ms << "\n";
}

// One row per sweep cell; failed cells carry the reason and empty stats.
inline void write_summary_csv(std::ostream& os, const std::vector<CellSummary>& summary) {
  os << "sweep,coflows,width,reps";
  for (const std::string& s : scheme_names()) os << ",mean_" << s;
  os << ",impr_vs_baseline,impr_vs_schedule-only,impr_vs_route-only,lp_wins_vs_baseline,failure\n";
  os << std::setprecision(10);
  for (const CellSummary& c : summary) {
    os << c.cell << "," << c.coflows << "," << c.width << "," << c.reps;
    for (const std::string& s : scheme_names()) {
      os << ",";
      if (auto it = c.mean_objective.find(s); it != c.mean_objective.end()) os << it->second;
    }
    for (const std::string& s : {std::string("baseline"), std::string("schedule-only"),
                                 std::string("route-only")}) {
      os << ",";
      if (auto it = c.lp_improvement.find(s); it != c.lp_improvement.end()) os << it->second;
    }
    os << "," << c.lp_wins_vs_baseline << "," << c.failure << "\n";
  }
}

}  // namespace coflow
