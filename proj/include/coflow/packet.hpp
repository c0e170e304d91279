#pragma once

// Packet scheduling on store-and-forward networks: unit-size packets move one
// hop per discrete step and every arc admits at most one packet per step.
// Two pipelines share one greedy scheduler (fixed-priority FIFO with random
// initial delays):
//   given paths  schedule the full packet set at once, priorities from a
//                weighted-shortest-path heuristic
//   free paths   solve the time-expanded LP, filter each packet's arrival
//                mass at its half-interval, collapse each bucket back onto
//                the base graph, decompose and sample one path per packet,
//                then run the buckets back to back in increasing order
// The greedy scheduler keeps the makespan within C * D_max of the start
// (C = max arc congestion of the chosen paths, D_max = longest path) by
// capping each packet's random delay at C * (D_max - D_p); the FIFO argument
// charges every waiting step to a distinct higher-priority packet on the
// same arc, giving completion <= release + delay + C * D_p.

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
#include "coflow/grid.hpp"
#include "coflow/instance.hpp"
#include "coflow/lp_builders.hpp"
#include "coflow/network.hpp"
#include "coflow/rng.hpp"
#include "coflow/schedule.hpp"
#include "coflow/simplex.hpp"
#include "coflow/teg.hpp"

namespace coflow {

struct PacketTrace {
  Path path;              // realized route in the base network
  std::vector<int> node;  // occupied node per step, index 0..completion
  int release = 0;
  int completion = 0;     // step at which the packet reaches its sink
};

struct PacketSchedule {
  std::map<FlowRef, PacketTrace> packets;
  std::map<std::pair<int, int>, FlowRef> occupant;  // (arc, departure step)
  int makespan = 0;
};

struct PacketJob {
  Path path;
  int release = 0;
};

struct IntervalBuckets {
  std::map<FlowRef, int> half;                      // per packet: half-interval h
  std::map<int, std::vector<FlowRef>> buckets;      // P[l]: packets with h = l
  std::map<FlowRef, std::vector<double>> filtered;  // rescaled masses, zero past h
  std::map<FlowRef, double> factor;                 // per-packet rescale, < 2
  double max_blowup = 1.0;
};

// Splits packets at the half-interval h = min{l : sum_{t<=l} mass > 1/2} and
// rescales the kept prefix to total mass one. The kept prefix exceeds 1/2 by
// the strict rule, so the rescale factor stays below 2.
inline IntervalBuckets filter_half_intervals(
    const std::map<FlowRef, std::vector<double>>& masses) {
  IntervalBuckets out;
  const IntervalAssignment asg = assign_intervals(masses, 0.5, 0, true);
  out.half = asg.anchor;
  out.buckets = asg.buckets;
  for (const auto& [f, m] : masses) {
    const int h = out.half.at(f);
    double kept = 0.0;
    for (int l = 0; l <= h && l < static_cast<int>(m.size()); ++l)
      kept += m[static_cast<std::size_t>(l)];
    const double factor = 1.0 / kept;
    if (factor > 2.0 + 1e-9)
      throw std::logic_error("filter_half_intervals: rescale factor exceeds 2");
    out.factor[f] = factor;
    out.max_blowup = std::max(out.max_blowup, factor);
    std::vector<double> bar(m.size(), 0.0);
    for (int l = 0; l <= h && l < static_cast<int>(m.size()); ++l)
      bar[static_cast<std::size_t>(l)] = m[static_cast<std::size_t>(l)] * factor;
    out.filtered[f] = std::move(bar);
  }
  return out;
}

namespace detail {

// Core FIFO loop. Each step, every arc admits the waiting packet with the
// smallest rank; everything else queues. A packet becomes eligible at
// max(release, offset) + delay. Ranks must be distinct.
inline PacketSchedule run_priority_fifo(const Network& net,
                                        const std::map<FlowRef, PacketJob>& jobs,
                                        const std::map<FlowRef, int>& rank,
                                        const std::map<FlowRef, int>& delay, int offset = 0) {
  PacketSchedule out;
  struct State {
    FlowRef id;
    const PacketJob* job = nullptr;
    int start = 0;  // first step the packet may move
    int hop = 0;    // next arc index within its path
    int at = -1;    // current node
  };
  std::vector<State> live;
  int horizon_guard = offset;
  for (const auto& [f, job] : jobs) {
    if (job.path.empty()) {
      std::ostringstream os;
      os << "packet schedule: flow (" << f.coflow << "," << f.flow << ") has an empty path";
      throw std::invalid_argument(os.str());
    }
    State s;
    s.id = f;
    s.job = &job;
    s.start = std::max(job.release, offset) + delay.at(f);
    s.at = path_source(net, job.path);
    live.push_back(s);
    horizon_guard = std::max(horizon_guard, s.start + job.path.length());
    PacketTrace tr;
    tr.path = job.path;
    tr.release = job.release;
    tr.node.push_back(s.at);
    out.packets.emplace(f, std::move(tr));
  }
  horizon_guard += static_cast<int>(jobs.size()) * (net.arc_count() + net.node_count() + 1) + 1;
  out.makespan = offset;
  int unfinished = static_cast<int>(live.size());
  for (int t = 0; unfinished > 0; ++t) {
    if (t > horizon_guard) throw std::logic_error("packet schedule: FIFO loop failed to drain");
    std::map<int, int> winner;  // arc -> index into live of the best-ranked candidate
    for (int i = 0; i < static_cast<int>(live.size()); ++i) {
      const State& s = live[static_cast<std::size_t>(i)];
      if (s.hop >= s.job->path.length() || t < s.start) continue;
      const int arc = s.job->path.arcs[static_cast<std::size_t>(s.hop)];
      auto [it, fresh] = winner.emplace(arc, i);
      if (!fresh &&
          rank.at(s.id) < rank.at(live[static_cast<std::size_t>(it->second)].id))
        it->second = i;
    }
    for (auto [arc, i] : winner) {
      State& s = live[static_cast<std::size_t>(i)];
      out.occupant[{arc, t}] = s.id;
      s.at = net.arc(arc).head;
      ++s.hop;
      if (s.hop == s.job->path.length()) {
        PacketTrace& tr = out.packets.at(s.id);
        tr.completion = t + 1;
        out.makespan = std::max(out.makespan, t + 1);
        --unfinished;
      }
    }
    for (State& s : live)
      if (s.hop < s.job->path.length() ||
          static_cast<int>(out.packets.at(s.id).node.size()) == t + 1)
        out.packets.at(s.id).node.push_back(s.at);
  }
  for (auto& [f, tr] : out.packets)
    tr.node.resize(static_cast<std::size_t>(tr.completion) + 1, tr.node.back());
  return out;
}

// Max arc congestion C and path lengths of a routed packet set.
inline int path_congestion(const Network& net, const std::map<FlowRef, PacketJob>& jobs) {
  std::vector<int> uses(static_cast<std::size_t>(net.arc_count()), 0);
  int c = jobs.empty() ? 0 : 1;
  for (const auto& [f, job] : jobs)
    for (int a : job.path.arcs) c = std::max(c, ++uses[static_cast<std::size_t>(a)]);
  return c;
}

// Random delays in {0, ..., C-1}, capped at C * (D_max - D_p) so the greedy
// bound completion <= release + delay + C * D_p never leaves C * D_max.
inline std::map<FlowRef, int> draw_delays(const std::map<FlowRef, PacketJob>& jobs, int c,
                                          Rng& rng) {
  int dmax = 0;
  for (const auto& [f, job] : jobs) dmax = std::max(dmax, job.path.length());
  std::map<FlowRef, int> out;
  for (const auto& [f, job] : jobs) {
    const int drawn = c > 1 ? static_cast<int>(rng.uniform_int(0, c - 1)) : 0;
    out[f] = std::min(drawn, c * (dmax - job.path.length()));
  }
  return out;
}

}  // namespace detail

// Priority-FIFO with a seed-drawn random priority permutation and random
// initial delays. Makespan obeys max(C, max_p(release + |path_p|)) <=
// makespan <= max release + C * D_max, checked after every run.
inline PacketSchedule greedy_packet_schedule(const Network& net,
                                             const std::map<FlowRef, PacketJob>& jobs,
                                             std::uint64_t seed) {
  if (jobs.empty()) return {};
  Rng rng(seed);
  std::vector<FlowRef> order;
  for (const auto& [f, job] : jobs) order.push_back(f);
  rng.shuffle(order);
  std::map<FlowRef, int> rank;
  for (int i = 0; i < static_cast<int>(order.size()); ++i)
    rank[order[static_cast<std::size_t>(i)]] = i;
  const int c = detail::path_congestion(net, jobs);
  const std::map<FlowRef, int> delay = detail::draw_delays(jobs, c, rng);
  PacketSchedule out = detail::run_priority_fifo(net, jobs, rank, delay);
  int dmax = 0, rmax = 0, floor = c;
  for (const auto& [f, job] : jobs) {
    dmax = std::max(dmax, job.path.length());
    rmax = std::max(rmax, job.release);
    floor = std::max(floor, job.release + job.path.length());
  }
  if (out.makespan < floor || out.makespan > rmax + c * dmax)
    throw std::logic_error("greedy_packet_schedule: makespan left [max(C,D), r + C*D]");
  return out;
}

// Re-derives every move from the traces and checks the packet-model rules:
// traces follow their path arc by arc, nothing moves before release, each
// trace ends at the sink, and no (arc, step) pair is used twice.
inline ValidationReport validate_packets(const Instance& ins, const PacketSchedule& s,
                                         int max_violations = 16) {
  ValidationReport rep;
  rep.ok = true;
  auto flag = [&](const std::string& msg) {
    rep.ok = false;
    if (static_cast<int>(rep.violations.size()) < max_violations) rep.violations.push_back(msg);
  };
  std::map<std::pair<int, int>, int> uses;
  for (FlowRef r : flow_refs(ins, false)) {
    const FlowRequest& f = flow_at(ins, r);
    if (f.dummy) continue;
    std::ostringstream tag;
    tag << "packet (" << r.coflow << "," << r.flow << ")";
    const auto it = s.packets.find(r);
    if (it == s.packets.end()) {
      flag(tag.str() + ": missing from the schedule");
      continue;
    }
    const PacketTrace& tr = it->second;
    if (tr.node.empty() || tr.node.front() != f.src) {
      flag(tag.str() + ": trace does not start at the source");
      continue;
    }
    if (path_source(ins.net, tr.path) != f.src || path_target(ins.net, tr.path) != f.dst)
      flag(tag.str() + ": path endpoints disagree with the request");
    int hop = 0;
    for (int t = 0; t + 1 < static_cast<int>(tr.node.size()); ++t) {
      const int u = tr.node[static_cast<std::size_t>(t)];
      const int v = tr.node[static_cast<std::size_t>(t + 1)];
      if (u == v) continue;
      if (static_cast<double>(t) < f.release) flag(tag.str() + ": moves before release");
      if (hop >= tr.path.length()) {
        flag(tag.str() + ": more moves than path arcs");
        break;
      }
      const int arc = tr.path.arcs[static_cast<std::size_t>(hop)];
      if (ins.net.arc(arc).tail != u || ins.net.arc(arc).head != v) {
        flag(tag.str() + ": move leaves the declared path");
        break;
      }
      ++uses[{arc, t}];
      ++hop;
    }
    if (hop != tr.path.length() || tr.node.back() != f.dst)
      flag(tag.str() + ": trace ends before the sink");
    if (tr.completion != static_cast<int>(tr.node.size()) - 1)
      flag(tag.str() + ": completion stamp disagrees with the trace");
  }
  for (const auto& [key, n] : uses)
    if (n > 1) {
      std::ostringstream os;
      os << "arc " << key.first << " carries " << n << " packets at step " << key.second;
      flag(os.str());
    }
  return rep;
}

struct PacketResult {
  PacketSchedule schedule;
  ScheduleReport report;
  double lp_objective = 0.0;
  long lp_iterations = 0;
  double kappa = 0.0;        // max over buckets: bucket span / 2^(l+1)
  double kappa_prime = 0.0;  // max over buckets: cumulative finish / 2^l
  bool lp_ordered = false;   // given paths: true when LP values set priorities
};

struct PacketOptions {
  std::uint64_t seed = 0;
  int horizon_cap = kDefaultTegCap;
  SolveOptions lp;  // forwarded to the LP solver (free-paths pipeline only)
};

namespace detail {

inline ScheduleReport packet_report(const Instance& ins, const PacketSchedule& s) {
  ScheduleReport rep;
  rep.flow_completion.resize(ins.coflows.size());
  rep.coflow_completion.assign(ins.coflows.size(), 0.0);
  for (int i = 0; i < static_cast<int>(ins.coflows.size()); ++i) {
    const Coflow& c = ins.coflows[static_cast<std::size_t>(i)];
    auto& per = rep.flow_completion[static_cast<std::size_t>(i)];
    per.assign(c.flows.size(), 0.0);
    double worst = 0.0;
    for (int j = 0; j < static_cast<int>(c.flows.size()); ++j) {
      const auto it = s.packets.find({i, j});
      if (it == s.packets.end()) continue;
      per[static_cast<std::size_t>(j)] = static_cast<double>(it->second.completion);
      worst = std::max(worst, per[static_cast<std::size_t>(j)]);
    }
    for (int j = 0; j < static_cast<int>(c.flows.size()); ++j)
      if (c.flows[static_cast<std::size_t>(j)].dummy) per[static_cast<std::size_t>(j)] = worst;
    rep.coflow_completion[static_cast<std::size_t>(i)] = worst;
    rep.objective += c.weight * worst;
  }
  const ValidationReport v = validate_packets(ins, s);
  rep.feasible = v.ok;
  rep.violations = v.violations;
  return rep;
}

inline int int_release(const FlowRequest& f) {
  if (f.release != std::floor(f.release))
    throw std::invalid_argument("packet schedule: releases must be whole steps");
  return static_cast<int>(f.release);
}

}  // namespace detail

// Given-paths pipeline: one greedy run over the full packet set with
// priorities from the weighted-shortest-path rule (path length over coflow
// weight, ascending; ties by packet id). No LP is involved, which the result
// flags via lp_ordered = false.
inline PacketResult schedule_packets_given(const Instance& instance,
                                           const PacketOptions& opt = {}) {
  Instance ins = add_dummy_flows(instance);
  ins.mode = Mode::packet;
  PacketResult out;
  std::map<FlowRef, PacketJob> jobs;
  std::vector<std::pair<double, FlowRef>> keyed;
  for (FlowRef r : flow_refs(ins, false)) {
    const FlowRequest& f = flow_at(ins, r);
    if (f.dummy) continue;
    if (f.size != 1.0)
      throw std::invalid_argument("packet schedule: packet sizes must be 1");
    if (!f.path)
      throw std::invalid_argument("packet schedule: given-paths mode needs a path per packet");
    const double w = ins.coflows[static_cast<std::size_t>(r.coflow)].weight;
    jobs[r] = {*f.path, detail::int_release(f)};
    keyed.emplace_back(f.path->length() / std::max(w, 1e-12), r);
  }
  if (jobs.empty()) {
    out.report = detail::packet_report(ins, out.schedule);
    return out;
  }
  std::sort(keyed.begin(), keyed.end(),
            [](const auto& a, const auto& b) {
              return a.first != b.first ? a.first < b.first : a.second < b.second;
            });
  std::map<FlowRef, int> rank;
  for (int i = 0; i < static_cast<int>(keyed.size()); ++i)
    rank[keyed[static_cast<std::size_t>(i)].second] = i;
  Rng rng(opt.seed);
  const int c = detail::path_congestion(ins.net, jobs);
  const std::map<FlowRef, int> delay = detail::draw_delays(jobs, c, rng);
  out.schedule = detail::run_priority_fifo(ins.net, jobs, rank, delay);
  out.report = detail::packet_report(ins, out.schedule);
  return out;
}

// Free-paths pipeline: time-expanded LP, half-interval filtering, per-bucket
// collapse onto the base graph, path decomposition and sampling, then one
// greedy run per bucket, buckets back to back in increasing order. kappa and
// kappa_prime record the measured per-bucket and cumulative finish ratios
// against the doubling interval ends.
inline PacketResult schedule_packets_free(const Instance& instance, const PacketOptions& opt = {}) {
  Instance ins = add_dummy_flows(instance);
  ins.mode = Mode::packet;
  PacketResult out;
  int npackets = 0;
  for (FlowRef r : flow_refs(ins, false))
    if (!flow_at(ins, r).dummy) ++npackets;
  if (npackets == 0) {
    out.report = detail::packet_report(ins, out.schedule);
    return out;
  }
  // Horizon: arcs times packets is enough slack for release-0 instances; late
  // releases shift the whole window. The cap is a hard ceiling, so an
  // instance that needs more time surfaces as an infeasible LP instead of a
  // silently enlarged graph.
  int rmax = 0;
  for (FlowRef r : flow_refs(ins, false))
    if (!flow_at(ins, r).dummy) rmax = std::max(rmax, detail::int_release(flow_at(ins, r)));
  const int T =
      std::min(opt.horizon_cap, rmax + std::max(1, ins.net.arc_count() * npackets));
  const IntervalGrid grid = make_grid(GridKind::packet, 1.0, static_cast<double>(T));
  const LpProblem p = build_packet_lp(ins, grid, T, opt.horizon_cap);
  const LpSolution sol = solve(p, opt.lp);
  if (sol.status != LpStatus::optimal)
    throw std::runtime_error(std::string("schedule_packets: LP ") + lp_status_name(sol.status) +
                             " at horizon T = " + std::to_string(T));
  out.lp_objective = sol.objective;
  out.lp_iterations = sol.iterations;
  const IntervalBuckets fhi = filter_half_intervals(packet_masses(p, grid, sol.x));

  // Zero every expanded flow whose arrival lands past its packet's
  // half-interval and rescale the rest, mirroring the mass filtering.
  std::vector<double> xf = sol.x;
  for (int j = 0; j < p.var_count(); ++j) {
    const VarKey& k = p.var(j).key;
    if (k.kind != VarKey::Kind::ptflow) continue;
    const auto it = fhi.half.find({k.coflow, k.flow});
    if (it == fhi.half.end()) continue;
    const int l = grid.interval_of(static_cast<double>(k.step));
    xf[static_cast<std::size_t>(j)] *=
        l <= it->second ? fhi.factor.at({k.coflow, k.flow}) : 0.0;
  }

  const TimeExpandedGraph teg = TimeExpandedGraph::expand(ins.net, T, opt.horizon_cap);
  Rng rng(opt.seed);
  int offset = 0;
  for (const auto& [l, members] : fhi.buckets) {
    const int cut = std::min(T, static_cast<int>(grid.upper(l)));
    const auto collapsed = collapse(teg, p, xf, members, ins, cut, 1e-6);
    std::map<FlowRef, std::vector<WeightedPath>> options;
    for (const auto& [f, ef] : collapsed) options[f] = decompose_flow(ins.net, ef).paths;
    const PathChoice choice = choose_paths(ins.net, options, rng.next_u64());
    std::map<FlowRef, PacketJob> jobs;
    for (const auto& [f, path] : choice.path)
      jobs[f] = {path, detail::int_release(flow_at(ins, f))};
    const int c = detail::path_congestion(ins.net, jobs);
    std::vector<FlowRef> order;
    for (const auto& [f, job] : jobs) order.push_back(f);
    rng.shuffle(order);
    std::map<FlowRef, int> rank;
    for (int i = 0; i < static_cast<int>(order.size()); ++i)
      rank[order[static_cast<std::size_t>(i)]] = i;
    const std::map<FlowRef, int> delay = detail::draw_delays(jobs, c, rng);
    const PacketSchedule part = detail::run_priority_fifo(ins.net, jobs, rank, delay, offset);
    out.kappa = std::max(out.kappa, static_cast<double>(part.makespan - offset) /
                                        (2.0 * grid.upper(l)));
    out.kappa_prime =
        std::max(out.kappa_prime, static_cast<double>(part.makespan) / grid.upper(l));
    offset = part.makespan;
    for (const auto& [f, tr] : part.packets) out.schedule.packets.emplace(f, tr);
    for (const auto& [key, f] : part.occupant) out.schedule.occupant.emplace(key, f);
    out.schedule.makespan = std::max(out.schedule.makespan, part.makespan);
  }
  out.report = detail::packet_report(ins, out.schedule);
  return out;
}

// Entry point matching the instance's data: packets with prescribed paths go
// straight to the greedy scheduler, anything else runs the LP pipeline.
inline PacketResult schedule_packets(const Instance& instance, std::uint64_t seed = 0) {
  PacketOptions opt;
  opt.seed = seed;
  bool all_given = true;
  for (const auto& c : instance.coflows)
    for (const auto& f : c.flows)
      if (!f.dummy && !f.path) all_given = false;
  return all_given && !instance.coflows.empty() ? schedule_packets_given(instance, opt)
                                                : schedule_packets_free(instance, opt);
}

}  // namespace coflow
