#pragma once

// The four plan-producing schemes the simulator compares, plus the
// improvement metric. All of them honor a flow's prescribed path when the
// instance fixes one; routing policies only apply to free flows.
//   baseline       random simple route per flow, random order
//   schedule-only  routes as the baseline, order ascending by size over path
//                  bottleneck (the flow's isolated completion time)
//   route-only     sequential load-balancing route choice among shortest
//                  paths, order as listed
//   lp-based       paths and completion values from the interval relaxation,
//                  order ascending by LP completion
// Improvement of A over B is 100 * (obj_B - obj_A) / obj_A, so beating a
// scheme by more than 2x reads as an improvement above 100%.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "coflow/circuit.hpp"
#include "coflow/instance.hpp"
#include "coflow/lp_builders.hpp"
#include "coflow/network.hpp"
#include "coflow/rng.hpp"
#include "coflow/simulator.hpp"

namespace coflow {

// Loop-erased random walk restricted to nodes that can still reach the sink,
// which makes the walk terminate with probability one on any instance where
// the pair is connected at all.
inline Path random_simple_path(const Network& net, int src, int dst, Rng& rng,
                               int step_cap = 100000) {
  std::vector<char> toward(static_cast<std::size_t>(net.node_count()), 0);
  std::vector<int> stack{dst};
  toward[static_cast<std::size_t>(dst)] = 1;
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    for (int a : net.in_arcs(v)) {
      const int u = net.arc(a).tail;
      if (!toward[static_cast<std::size_t>(u)]) {
        toward[static_cast<std::size_t>(u)] = 1;
        stack.push_back(u);
      }
    }
  }
  if (!toward[static_cast<std::size_t>(src)])
    throw std::runtime_error("random route: no path from " + net.node_name(src) + " to " +
                             net.node_name(dst));
  std::vector<int> nodes{src};
  std::vector<int> arcs;
  int steps = 0;
  while (nodes.back() != dst) {
    if (++steps > step_cap) throw std::runtime_error("random route: walk exceeded its step cap");
    std::vector<int> options;
    for (int a : net.out_arcs(nodes.back()))
      if (toward[static_cast<std::size_t>(net.arc(a).head)]) options.push_back(a);
    const int pick = options[static_cast<std::size_t>(
        rng.uniform_int(0, static_cast<std::int64_t>(options.size()) - 1))];
    const int head = net.arc(pick).head;
    const auto seen = std::find(nodes.begin(), nodes.end(), head);
    if (seen != nodes.end()) {
      // walked into a loop: erase it
      const auto keep = static_cast<std::size_t>(seen - nodes.begin());
      nodes.resize(keep + 1);
      arcs.resize(keep);
    } else {
      nodes.push_back(head);
      arcs.push_back(pick);
    }
  }
  Path p;
  p.arcs = arcs;
  return p;
}

// All source-to-sink paths of minimum hop count, in deterministic DFS order,
// truncated at `cap` candidates.
inline std::vector<Path> shortest_paths(const Network& net, int src, int dst, int cap = 128) {
  const int n = net.node_count();
  const int unreached = n + 1;
  auto bfs = [&](int start, bool forward) {
    std::vector<int> dist(static_cast<std::size_t>(n), unreached);
    std::vector<int> queue{start};
    dist[static_cast<std::size_t>(start)] = 0;
    for (std::size_t q = 0; q < queue.size(); ++q) {
      const int v = queue[q];
      for (int a : forward ? net.out_arcs(v) : net.in_arcs(v)) {
        const int w = forward ? net.arc(a).head : net.arc(a).tail;
        if (dist[static_cast<std::size_t>(w)] == unreached) {
          dist[static_cast<std::size_t>(w)] = dist[static_cast<std::size_t>(v)] + 1;
          queue.push_back(w);
        }
      }
    }
    return dist;
  };
  const std::vector<int> from_src = bfs(src, true);
  const std::vector<int> to_dst = bfs(dst, false);
  std::vector<Path> out;
  const int best = from_src[static_cast<std::size_t>(dst)];
  if (best == unreached) return out;
  std::vector<int> arcs;
  auto dfs = [&](auto&& self, int v) -> void {
    if (static_cast<int>(out.size()) >= cap) return;
    if (v == dst) {
      Path p;
      p.arcs = arcs;
      out.push_back(std::move(p));
      return;
    }
    for (int a : net.out_arcs(v)) {
      const int w = net.arc(a).head;
      if (from_src[static_cast<std::size_t>(v)] + 1 + to_dst[static_cast<std::size_t>(w)] != best)
        continue;
      arcs.push_back(a);
      self(self, w);
      arcs.pop_back();
    }
  };
  dfs(dfs, src);
  return out;
}

namespace detail {

inline std::map<FlowRef, Path> draw_routes(const Instance& ins, Rng& rng) {
  std::map<FlowRef, Path> out;
  for (FlowRef r : flow_refs(ins, false)) {
    const FlowRequest& f = flow_at(ins, r);
    if (f.dummy) continue;
    out[r] = f.path ? *f.path : random_simple_path(ins.net, f.src, f.dst, rng);
  }
  return out;
}

inline std::vector<FlowRef> sized_flows(const Instance& ins) {
  std::vector<FlowRef> out;
  for (FlowRef r : flow_refs(ins, false))
    if (!flow_at(ins, r).dummy) out.push_back(r);
  return out;
}

}  // namespace detail

// Random routes, random order.
inline PriorityPlan scheme_baseline(const Instance& ins, std::uint64_t seed) {
  Rng rng(seed);
  PriorityPlan plan;
  plan.path = detail::draw_routes(ins, rng);
  plan.order = detail::sized_flows(ins);
  rng.shuffle(plan.order);
  return plan;
}

// Random routes; order ascending by the flow's isolated completion time,
// size over path bottleneck, ties by flow id.
inline PriorityPlan scheme_schedule_only(const Instance& ins, std::uint64_t seed) {
  Rng rng(seed);
  PriorityPlan plan;
  plan.path = detail::draw_routes(ins, rng);
  std::vector<std::pair<double, FlowRef>> keyed;
  for (FlowRef r : detail::sized_flows(ins)) {
    double bottleneck = std::numeric_limits<double>::infinity();
    for (int a : plan.path.at(r).arcs)
      bottleneck = std::min(bottleneck, ins.net.arc(a).capacity);
    keyed.emplace_back(flow_at(ins, r).size / bottleneck, r);
  }
  std::sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first < b.first : a.second < b.second;
  });
  for (const auto& [key, r] : keyed) plan.order.push_back(r);
  return plan;
}

// Sequential load balancing: each flow takes the shortest-length candidate
// path that minimizes the resulting maximum relative arc load; order is the
// instance's own. The seed is accepted for interface symmetry only.
inline PriorityPlan scheme_route_only(const Instance& ins, std::uint64_t /*seed*/) {
  PriorityPlan plan;
  std::vector<double> load(static_cast<std::size_t>(ins.net.arc_count()), 0.0);
  auto relative_peak = [&](const Path& p, double sigma) {
    double peak = 0.0;
    for (int a : p.arcs)
      peak = std::max(peak, (load[static_cast<std::size_t>(a)] + sigma) /
                                ins.net.arc(a).capacity);
    return peak;
  };
  for (FlowRef r : detail::sized_flows(ins)) {
    const FlowRequest& f = flow_at(ins, r);
    Path chosen;
    if (f.path) {
      chosen = *f.path;
    } else {
      const std::vector<Path> candidates = shortest_paths(ins.net, f.src, f.dst);
      if (candidates.empty()) {
        std::ostringstream os;
        os << "route-only: no path from " << ins.net.node_name(f.src) << " to "
           << ins.net.node_name(f.dst);
        throw std::runtime_error(os.str());
      }
      double best = std::numeric_limits<double>::infinity();
      for (const Path& p : candidates) {
        const double peak = relative_peak(p, f.size);
        if (peak < best - 1e-12) {
          best = peak;
          chosen = p;
        }
      }
    }
    for (int a : chosen.arcs) load[static_cast<std::size_t>(a)] += f.size;
    plan.order.push_back(r);
    plan.path[r] = chosen;
  }
  return plan;
}

// Paths and ordering from the interval relaxation: fixed-path instances are
// ordered by the given-paths LP's completion values; otherwise the routing
// pipeline provides both the sampled paths and the LP values.
inline PriorityPlan scheme_lp_based(const Instance& ins, std::uint64_t seed) {
  bool all_given = true;
  for (const auto& c : ins.coflows)
    for (const auto& f : c.flows)
      if (!f.dummy && !f.path) all_given = false;
  PriorityPlan plan;
  std::map<FlowRef, double> completion;
  if (all_given) {
    Instance d = add_dummy_flows(ins);
    d.mode = Mode::circuit_given;
    const IntervalGrid grid =
        make_grid(GridKind::circuit, kCanonicalEps, default_horizon(d));
    const LpProblem p = build_circuit_given_paths_lp(d, grid);
    const LpSolution sol = solve(p);
    if (sol.status != LpStatus::optimal)
      throw std::runtime_error(std::string("lp-based: LP ") + lp_status_name(sol.status));
    completion = lp_completions(p, sol.x);
    for (FlowRef r : detail::sized_flows(d)) plan.path[r] = *flow_at(d, r).path;
  } else {
    const RoundingResult r = schedule_routing(ins, seed);
    completion = r.lp_completion;
    Instance d = add_dummy_flows(ins);
    for (FlowRef f : detail::sized_flows(d)) plan.path[f] = r.schedule.at(f).path;
  }
  std::vector<std::pair<double, FlowRef>> keyed;
  for (const auto& [f, p] : plan.path) keyed.emplace_back(completion.at(f), f);
  std::sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first < b.first : a.second < b.second;
  });
  for (const auto& [key, f] : keyed) plan.order.push_back(f);
  return plan;
}

// Percentage improvement of a over b under the convention that beating a
// scheme by more than 2x exceeds 100%.
inline double improvement_pct(double obj_a, double obj_b) {
  if (obj_a <= 0.0) throw std::invalid_argument("improvement: objective must be positive");
  return 100.0 * (obj_b - obj_a) / obj_a;
}

struct SchemeOutcome {
  std::string scheme;
  double objective = 0.0;
};

// Pairwise improvement table over named runs: entry {a, b} is how much a
// improves on b in percent.
inline std::map<std::pair<std::string, std::string>, double> compare(
    const std::vector<SchemeOutcome>& runs) {
  std::map<std::pair<std::string, std::string>, double> out;
  for (const SchemeOutcome& a : runs)
    for (const SchemeOutcome& b : runs)
      if (a.scheme != b.scheme)
        out[{a.scheme, b.scheme}] = improvement_pct(a.objective, b.objective);
  return out;
}

}  // namespace coflow
