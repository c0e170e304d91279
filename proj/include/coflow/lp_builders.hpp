#pragma once

// Interval-indexed LP relaxations for the three scheduling modes.
//
// Shared shape: per flow, nonnegative fractions x_{l} split the flow's volume
// across grid intervals (they sum to one), a completion variable c dominates
// the fraction-weighted right endpoints, and per-coflow barrier variables
// (attached to the dummy flows) dominate member completions and carry the
// coflow weights in the objective. Releases zero out every interval that ends
// before the flow is available; those columns are simply never created.
//
// Per-interval rates divide delivered volume by the interval's rate divisor
// (left endpoint, except the unit first interval). For growth factors at most
// two this understates no arc load, so mapping a feasible schedule into the
// variables lands inside the polytope and the LP optimum is a valid lower
// bound; see map_circuit_schedule.
//
// Builder-specific parts:
//   given paths   per-arc capacity rows sum sigma*x/divisor over the fixed
//                 paths crossing the arc.
//   routing       per-flow per-interval arc variables form a network flow:
//                 conservation at interior nodes, net inflow at the sink
//                 coupled to sigma*x/divisor, a redundant source/sink balance
//                 row kept for symmetry, and shared per-arc capacity rows.
//                 Arcs that cannot lie on any source-sink path are pruned per
//                 flow, which drops only useless circulation.
//   packet        per-packet commodities over the time-expanded graph, one
//                 commodity per candidate arrival step t with demand b_t;
//                 arrivals aggregate into interval masses, and cumulative
//                 congestion (per base arc) and dilation (per packet, movement
//                 arcs only) rows cap work finished by each interval's end.

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "coflow/grid.hpp"
#include "coflow/instance.hpp"
#include "coflow/lp_problem.hpp"
#include "coflow/network.hpp"
#include "coflow/schedule.hpp"
#include "coflow/teg.hpp"

namespace coflow {

// Sequential worst case: every flow in series over the tightest arc, after the
// last release. Clamped to one so degenerate instances still get a grid.
inline double default_horizon(const Instance& ins) {
  double release = 0.0, total = 0.0;
  for (FlowRef r : flow_refs(ins, false)) {
    const FlowRequest& f = flow_at(ins, r);
    release = std::max(release, f.release);
    total += f.size;
  }
  double min_cap = std::numeric_limits<double>::infinity();
  for (const Arc& a : ins.net.arcs()) min_cap = std::min(min_cap, a.capacity);
  if (ins.net.arc_count() == 0) min_cap = 1.0;
  return std::max(1.0, release + total / min_cap);
}

namespace detail {

inline std::string sym(const char* head, FlowRef r) {
  return std::string(head) + "_" + std::to_string(r.coflow) + "_" + std::to_string(r.flow);
}

// Earliest interval whose right endpoint covers the release.
inline int first_interval(const IntervalGrid& grid, double release) {
  return release <= grid.upper(0) ? 0 : grid.interval_of(release);
}

struct CompletionFrame {
  std::vector<int> dummy_col;            // per coflow
  std::map<FlowRef, int> done_col;       // per sized non-dummy flow
  std::map<FlowRef, int> start_interval; // release pruning cutoff per flow
};

// Columns and rows common to both circuit builders: fractions, completions,
// total-mass rows, completion rows, and precedence against the coflow barrier.
inline CompletionFrame add_completion_frame(LpProblem& p, const Instance& ins,
                                            const IntervalGrid& grid) {
  check_instance(ins);
  CompletionFrame frame;
  const int L = grid.intervals();
  for (int i = 0; i < static_cast<int>(ins.coflows.size()); ++i) {
    const Coflow& c = ins.coflows[static_cast<std::size_t>(i)];
    auto d = dummy_index(c);
    if (!d) throw std::invalid_argument("lp: add dummy flows before building");
    frame.dummy_col.push_back(p.add_var(sym("c", {i, *d}), 0.0, kInf, c.weight,
                                        {VarKey::Kind::done, i, *d}));
  }
  for (FlowRef r : flow_refs(ins, false)) {
    const FlowRequest& f = flow_at(ins, r);
    if (f.size <= 0.0) continue;  // completes at release, never transmits
    const int l0 = first_interval(grid, f.release);
    if (l0 >= L)
      throw std::invalid_argument("lp: release of " + sym("f", r) + " lies beyond the grid");
    frame.start_interval[r] = l0;
    const int done = p.add_var(sym("c", r), 0.0, kInf, 0.0, {VarKey::Kind::done, r.coflow, r.flow});
    frame.done_col[r] = done;
    std::vector<std::pair<int, double>> tot, cmp;
    for (int l = l0; l < L; ++l) {
      const int col = p.add_var(sym("x", r) + "_" + std::to_string(l), 0.0, 1.0, 0.0,
                                {VarKey::Kind::frac, r.coflow, r.flow, l});
      tot.emplace_back(col, 1.0);
      cmp.emplace_back(col, grid.upper(l));
    }
    cmp.emplace_back(done, -1.0);
    p.add_row(sym("tot", r), Rel::eq, 1.0, std::move(tot));
    p.add_row(sym("cmp", r), Rel::le, 0.0, std::move(cmp));
    p.add_row(sym("prec", r), Rel::le, 0.0,
              {{done, 1.0}, {frame.dummy_col[static_cast<std::size_t>(r.coflow)], -1.0}});
  }
  return frame;
}

struct Corridor {
  std::vector<char> arc_kept;
  std::vector<char> node_kept;
};

// Arcs that can lie on a source-to-sink walk: tail reachable from the source,
// head co-reachable from the sink. Everything else could only carry cycles.
inline Corridor flow_corridor(const Network& net, int src, int dst) {
  const auto reach = [&](int from, bool forward) {
    std::vector<char> seen(static_cast<std::size_t>(net.node_count()), 0);
    std::vector<int> stack{from};
    seen[static_cast<std::size_t>(from)] = 1;
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      for (int a : forward ? net.out_arcs(v) : net.in_arcs(v)) {
        const int w = forward ? net.arc(a).head : net.arc(a).tail;
        if (!seen[static_cast<std::size_t>(w)]) {
          seen[static_cast<std::size_t>(w)] = 1;
          stack.push_back(w);
        }
      }
    }
    return seen;
  };
  const std::vector<char> fwd = reach(src, true);
  const std::vector<char> bwd = reach(dst, false);
  Corridor c;
  c.arc_kept.assign(static_cast<std::size_t>(net.arc_count()), 0);
  c.node_kept.assign(static_cast<std::size_t>(net.node_count()), 0);
  for (int a = 0; a < net.arc_count(); ++a) {
    const Arc& arc = net.arc(a);
    if (fwd[static_cast<std::size_t>(arc.tail)] && bwd[static_cast<std::size_t>(arc.head)]) {
      c.arc_kept[static_cast<std::size_t>(a)] = 1;
      c.node_kept[static_cast<std::size_t>(arc.tail)] = 1;
      c.node_kept[static_cast<std::size_t>(arc.head)] = 1;
    }
  }
  return c;
}

}  // namespace detail

inline LpProblem build_circuit_given_paths_lp(const Instance& ins, const IntervalGrid& grid) {
  LpProblem p;
  const auto frame = detail::add_completion_frame(p, ins, grid);
  const int L = grid.intervals();
  // capacity terms grouped by (interval, arc); rows only where someone sends
  std::map<std::pair<int, int>, std::vector<std::pair<int, double>>> load;
  for (const auto& [r, l0] : frame.start_interval) {
    const FlowRequest& f = flow_at(ins, r);
    if (!f.path)
      throw std::invalid_argument("lp: " + detail::sym("f", r) + " has no path");
    for (int l = l0; l < L; ++l) {
      const int col = p.find_var({VarKey::Kind::frac, r.coflow, r.flow, l});
      for (int a : f.path->arcs)
        load[{l, a}].emplace_back(col, f.size / grid.rate_divisor(l));
    }
  }
  for (auto& [key, terms] : load)
    p.add_row("cap_" + std::to_string(key.first) + "_a" + std::to_string(key.second), Rel::le,
              ins.net.arc(key.second).capacity, std::move(terms));
  return p;
}

inline LpProblem build_circuit_routing_lp(const Instance& ins, const IntervalGrid& grid) {
  LpProblem p;
  const auto frame = detail::add_completion_frame(p, ins, grid);
  const Network& net = ins.net;
  const int L = grid.intervals();
  std::map<std::pair<int, int>, std::vector<std::pair<int, double>>> load;
  for (const auto& [r, l0] : frame.start_interval) {
    const FlowRequest& f = flow_at(ins, r);
    const detail::Corridor cor = detail::flow_corridor(net, f.src, f.dst);
    for (int l = l0; l < L; ++l) {
      const std::string tag =
          "_" + std::to_string(r.coflow) + "_" + std::to_string(r.flow) + "_" + std::to_string(l);
      std::vector<int> arc_col(static_cast<std::size_t>(net.arc_count()), -1);
      for (int a = 0; a < net.arc_count(); ++a) {
        if (!cor.arc_kept[static_cast<std::size_t>(a)]) continue;
        const int col = p.add_var("xe" + tag + "_a" + std::to_string(a), 0.0, net.arc(a).capacity,
                                  0.0, {VarKey::Kind::flow, r.coflow, r.flow, l, a});
        arc_col[static_cast<std::size_t>(a)] = col;
        load[{l, a}].emplace_back(col, 1.0);
      }
      const auto net_inflow = [&](int v) {
        std::vector<std::pair<int, double>> terms;
        for (int a : net.in_arcs(v))
          if (arc_col[static_cast<std::size_t>(a)] >= 0)
            terms.emplace_back(arc_col[static_cast<std::size_t>(a)], 1.0);
        for (int a : net.out_arcs(v))
          if (arc_col[static_cast<std::size_t>(a)] >= 0)
            terms.emplace_back(arc_col[static_cast<std::size_t>(a)], -1.0);
        return terms;
      };
      // sink: net inflow delivers this interval's share of the volume
      auto sink = net_inflow(f.dst);
      sink.emplace_back(p.find_var({VarKey::Kind::frac, r.coflow, r.flow, l}),
                        -f.size / grid.rate_divisor(l));
      p.add_row("dlv" + tag, Rel::eq, 0.0, std::move(sink));
      // source/sink balance; implied by conservation but kept explicit
      std::map<int, double> bal;
      for (auto [col, coef] : net_inflow(f.src)) bal[col] -= coef;
      for (auto [col, coef] : net_inflow(f.dst)) bal[col] -= coef;
      std::vector<std::pair<int, double>> bal_terms;
      for (auto [col, coef] : bal)
        if (coef != 0.0) bal_terms.emplace_back(col, coef);
      if (!bal_terms.empty()) p.add_row("bal" + tag, Rel::eq, 0.0, std::move(bal_terms));
      for (int v = 0; v < net.node_count(); ++v) {
        if (v == f.src || v == f.dst || !cor.node_kept[static_cast<std::size_t>(v)]) continue;
        auto terms = net_inflow(v);
        if (!terms.empty())
          p.add_row("cons" + tag + "_n" + std::to_string(v), Rel::eq, 0.0, std::move(terms));
      }
    }
  }
  for (auto& [key, terms] : load)
    p.add_row("cap_" + std::to_string(key.first) + "_a" + std::to_string(key.second), Rel::le,
              net.arc(key.second).capacity, std::move(terms));
  return p;
}

inline LpProblem build_packet_lp(const Instance& ins, const IntervalGrid& grid, int T,
                                 int teg_cap = kDefaultTegCap) {
  check_instance(ins);
  if (grid.kind() != GridKind::packet)
    throw std::invalid_argument("packet lp: needs a packet grid");
  const int L = grid.intervals();
  if (grid.upper(L - 1) < static_cast<double>(T))
    throw std::invalid_argument("packet lp: grid does not cover the horizon");
  const TimeExpandedGraph teg = TimeExpandedGraph::expand(ins.net, T, teg_cap);
  const Network& net = ins.net;
  LpProblem p;
  std::vector<int> dummy_col;
  for (int i = 0; i < static_cast<int>(ins.coflows.size()); ++i) {
    const Coflow& c = ins.coflows[static_cast<std::size_t>(i)];
    auto d = dummy_index(c);
    if (!d) throw std::invalid_argument("lp: add dummy flows before building");
    dummy_col.push_back(p.add_var(detail::sym("c", {i, *d}), 0.0, kInf, c.weight,
                                  {VarKey::Kind::done, i, *d}));
  }
  // movement columns per (base arc, arrival step) for the congestion rows, and
  // per (packet, arrival step) for the dilation rows
  std::map<std::pair<int, int>, std::vector<int>> arc_step_cols;
  for (FlowRef r : flow_refs(ins, false)) {
    const FlowRequest& f = flow_at(ins, r);
    if (f.dummy) continue;
    if (f.size != 1.0) throw std::invalid_argument("packet lp: packet sizes must be 1");
    if (f.release < 0.0 || f.release != std::floor(f.release))
      throw std::invalid_argument("packet lp: releases must be whole steps");
    const int rel = static_cast<int>(f.release);
    const std::string ftag = "_" + std::to_string(r.coflow) + "_" + std::to_string(r.flow);
    const int done =
        p.add_var("c" + ftag, 0.0, kInf, 0.0, {VarKey::Kind::done, r.coflow, r.flow});
    p.add_row("prec" + ftag, Rel::le, 0.0,
              {{done, 1.0}, {dummy_col[static_cast<std::size_t>(r.coflow)], -1.0}});

    // forward reachability from (src, rel) within the expansion
    std::vector<char> fwd(static_cast<std::size_t>(teg.node_count()), 0);
    {
      std::vector<int> stack{teg.node_at(f.src, rel)};
      fwd[static_cast<std::size_t>(stack.back())] = 1;
      while (!stack.empty()) {
        const int u = stack.back();
        stack.pop_back();
        for (int a : teg.out_arcs(u)) {
          const int w = teg.arc(a).head;
          if (!fwd[static_cast<std::size_t>(w)]) {
            fwd[static_cast<std::size_t>(w)] = 1;
            stack.push_back(w);
          }
        }
      }
    }
    std::vector<std::pair<int, double>> one;
    std::map<int, std::vector<std::pair<int, double>>> arrivals_by_interval;
    std::vector<std::vector<int>> step_cols;  // movement columns per arrival step
    for (int t = rel + 1; t <= T; ++t) {
      const int sink = teg.node_at(f.dst, t);
      if (!fwd[static_cast<std::size_t>(sink)]) continue;
      // co-reachability from (dst, t), never walking below the release layer
      std::vector<char> bwd(static_cast<std::size_t>(teg.node_count()), 0);
      std::vector<int> stack{sink};
      bwd[static_cast<std::size_t>(sink)] = 1;
      while (!stack.empty()) {
        const int u = stack.back();
        stack.pop_back();
        for (int a : teg.in_arcs(u)) {
          const int w = teg.arc(a).tail;
          if (teg.time_of(w) < rel || bwd[static_cast<std::size_t>(w)]) continue;
          bwd[static_cast<std::size_t>(w)] = 1;
          stack.push_back(w);
        }
      }
      const std::string tag = ftag + "_t" + std::to_string(t);
      std::vector<int> cols_here;
      std::map<int, std::vector<std::pair<int, double>>> node_terms;
      for (int a = 0; a < teg.arc_count(); ++a) {
        const TegArc& arc = teg.arc(a);
        if (!fwd[static_cast<std::size_t>(arc.tail)] || !bwd[static_cast<std::size_t>(arc.head)])
          continue;
        const int col = p.add_var("xt" + tag + "_a" + std::to_string(a), 0.0, 1.0, 0.0,
                                  {VarKey::Kind::ptflow, r.coflow, r.flow, -1, a, t});
        node_terms[arc.head].emplace_back(col, 1.0);
        node_terms[arc.tail].emplace_back(col, -1.0);
        if (!arc.queue) {
          cols_here.push_back(col);
          arc_step_cols[{arc.base, t}].push_back(col);
        }
      }
      const int arrive = p.add_var("b" + tag, 0.0, 1.0, 0.0,
                                   {VarKey::Kind::arrive, r.coflow, r.flow, -1, -1, t});
      one.emplace_back(arrive, 1.0);
      arrivals_by_interval[grid.interval_of(static_cast<double>(t))].emplace_back(arrive, 1.0);
      step_cols.resize(static_cast<std::size_t>(t + 1));
      step_cols[static_cast<std::size_t>(t)] = std::move(cols_here);
      for (auto& [node, terms] : node_terms) {
        if (node == teg.node_at(f.src, rel)) continue;  // implied by the rest
        if (node == sink) terms.emplace_back(arrive, -1.0);
        p.add_row((node == sink ? "snk" + tag : "cons" + tag + "_n" + std::to_string(node)),
                  Rel::eq, 0.0, std::move(terms));
      }
    }
    p.add_row("one" + ftag, Rel::eq, 1.0, std::move(one));
    std::vector<std::pair<int, double>> cmp;
    for (auto& [l, terms] : arrivals_by_interval) {
      const int mass = p.add_var("f" + ftag + "_" + std::to_string(l), 0.0, 1.0, 0.0,
                                 {VarKey::Kind::mass, r.coflow, r.flow, l});
      auto row = terms;
      row.emplace_back(mass, -1.0);
      p.add_row("arr" + ftag + "_" + std::to_string(l), Rel::eq, 0.0, std::move(row));
      cmp.emplace_back(mass, grid.upper(l));
    }
    cmp.emplace_back(done, -1.0);
    p.add_row("cmp" + ftag, Rel::le, 0.0, std::move(cmp));
    // dilation: movement mass of everything arrived by each interval's end
    for (int l = 0; l < L; ++l) {
      std::vector<std::pair<int, double>> terms;
      const int cut = grid.upper(l) >= static_cast<double>(T) ? T : static_cast<int>(grid.upper(l));
      for (int t = rel + 1; t <= cut; ++t)
        if (t < static_cast<int>(step_cols.size()))
          for (int col : step_cols[static_cast<std::size_t>(t)]) terms.emplace_back(col, 1.0);
      if (!terms.empty())
        p.add_row("dil" + ftag + "_" + std::to_string(l), Rel::le, grid.upper(l),
                  std::move(terms));
    }
  }
  // congestion: per base arc, movement mass of packets arrived by upper(l)
  for (int l = 0; l < L; ++l) {
    const int cut = grid.upper(l) >= static_cast<double>(T) ? T : static_cast<int>(grid.upper(l));
    std::map<int, std::vector<std::pair<int, double>>> rows;
    for (const auto& [key, cols] : arc_step_cols) {
      if (key.second > cut) continue;
      for (int col : cols) rows[key.first].emplace_back(col, 1.0);
    }
    for (auto& [a, terms] : rows)
      p.add_row("cng_" + std::to_string(l) + "_a" + std::to_string(a), Rel::le, grid.upper(l),
                std::move(terms));
  }
  return p;
}

// Per-flow interval masses (kind frac) pulled out of a solution point.
inline std::map<FlowRef, std::vector<double>> frac_masses(const LpProblem& p,
                                                          const IntervalGrid& grid,
                                                          const std::vector<double>& x) {
  std::map<FlowRef, std::vector<double>> out;
  for (int j = 0; j < p.var_count(); ++j) {
    const VarKey& k = p.var(j).key;
    if (k.kind != VarKey::Kind::frac) continue;
    auto& m = out[{k.coflow, k.flow}];
    if (m.empty()) m.assign(static_cast<std::size_t>(grid.intervals()), 0.0);
    m[static_cast<std::size_t>(k.interval)] = x[static_cast<std::size_t>(j)];
  }
  return out;
}

// Same for packet arrival masses (kind mass).
inline std::map<FlowRef, std::vector<double>> packet_masses(const LpProblem& p,
                                                            const IntervalGrid& grid,
                                                            const std::vector<double>& x) {
  std::map<FlowRef, std::vector<double>> out;
  for (int j = 0; j < p.var_count(); ++j) {
    const VarKey& k = p.var(j).key;
    if (k.kind != VarKey::Kind::mass) continue;
    auto& m = out[{k.coflow, k.flow}];
    if (m.empty()) m.assign(static_cast<std::size_t>(grid.intervals()), 0.0);
    m[static_cast<std::size_t>(k.interval)] = x[static_cast<std::size_t>(j)];
  }
  return out;
}

inline std::map<FlowRef, double> lp_completions(const LpProblem& p, const std::vector<double>& x) {
  std::map<FlowRef, double> out;
  for (int j = 0; j < p.var_count(); ++j)
    if (p.var(j).key.kind == VarKey::Kind::done)
      out[{p.var(j).key.coflow, p.var(j).key.flow}] = x[static_cast<std::size_t>(j)];
  return out;
}

// Maps a feasible schedule into a feasible point of a circuit LP built for the
// same instance and grid: fractions are the per-interval delivered volume
// shares, completions the fraction-weighted right endpoints, barriers the
// member maxima, and (for the routing LP) arc variables carry each interval's
// rate down the schedule's own path. Valid for growth factors at most two,
// where per-interval rates never overstate arc loads.
inline std::vector<double> map_circuit_schedule(const LpProblem& p, const Instance& ins,
                                                const IntervalGrid& grid,
                                                const CircuitSchedule& sched) {
  bool routing = false;
  for (int j = 0; j < p.var_count() && !routing; ++j)
    routing = p.var(j).key.kind == VarKey::Kind::flow;
  std::vector<double> x(static_cast<std::size_t>(p.var_count()), 0.0);
  std::vector<double> barrier(ins.coflows.size(), 0.0);
  for (FlowRef r : flow_refs(ins, false)) {
    const FlowRequest& f = flow_at(ins, r);
    if (f.size <= 0.0) continue;
    const FlowSchedule& fs = sched.at(r);
    double done = 0.0, mass = 0.0;
    for (int l = 0; l < grid.intervals(); ++l) {
      const double vol =
          fs.profile.volume_until(grid.upper(l)) - fs.profile.volume_until(grid.lower(l));
      if (vol <= 1e-12 * f.size) continue;
      const int col = p.find_var({VarKey::Kind::frac, r.coflow, r.flow, l});
      if (col < 0)
        throw std::invalid_argument("map: schedule sends " + detail::sym("f", r) +
                                    " before its release interval");
      x[static_cast<std::size_t>(col)] = vol / f.size;
      mass += vol / f.size;
      done += grid.upper(l) * vol / f.size;
      if (routing) {
        const double rate = vol / grid.rate_divisor(l);
        for (int a : fs.path.arcs) {
          const int fc = p.find_var({VarKey::Kind::flow, r.coflow, r.flow, l, a});
          if (fc < 0) throw std::logic_error("map: path arc missing from the flow corridor");
          x[static_cast<std::size_t>(fc)] = rate;
        }
      }
    }
    if (mass < 1.0 - 1e-7)
      throw std::invalid_argument("map: schedule does not deliver " + detail::sym("f", r) +
                                  " within the grid");
    const int done_col = p.find_var({VarKey::Kind::done, r.coflow, r.flow});
    x[static_cast<std::size_t>(done_col)] = done;
    barrier[static_cast<std::size_t>(r.coflow)] =
        std::max(barrier[static_cast<std::size_t>(r.coflow)], done);
  }
  for (int i = 0; i < static_cast<int>(ins.coflows.size()); ++i) {
    auto d = dummy_index(ins.coflows[static_cast<std::size_t>(i)]);
    if (!d) throw std::invalid_argument("map: instance has no dummy flows");
    x[static_cast<std::size_t>(p.find_var({VarKey::Kind::done, i, *d}))] =
        barrier[static_cast<std::size_t>(i)];
  }
  return x;
}

}  // namespace coflow
