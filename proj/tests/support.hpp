#pragma once

// Shared fixtures and independent oracles for the test suite. Everything here
// is deliberately written against first principles (brute force, closed
// forms) rather than by calling the library twice.

#include <algorithm>
#include <limits>
#include <optional>
#include <vector>

#include "coflow/instance.hpp"
#include "coflow/lp_problem.hpp"
#include "coflow/network.hpp"
#include "coflow/profile.hpp"
#include "coflow/rng.hpp"
#include "coflow/schedule.hpp"

namespace testing_support {

using namespace coflow;

// --- triangle fixture -------------------------------------------------------
//
// Three unit-capacity undirected links x-y, y-z, x-z. Coflows:
//   A (w=1): A1 x->y size 2, A2 x->z size 1
//   B (w=1): x->z size 1
//   C (w=1): x->z size 2 routed over the two-hop path x->y->z
// Reference schedules t1/t2/t3 are feasible with objectives 10, 8 and 7.

inline Instance triangle_instance() {
  Network net = Network::build({"x", "y", "z"}, {{"x", "y", 1.0, false},
                                                 {"y", "z", 1.0, false},
                                                 {"x", "z", 1.0, false}});
  Instance ins;
  ins.net = net;
  ins.mode = Mode::circuit_given;
  const int x = net.node_id("x"), y = net.node_id("y"), z = net.node_id("z");
  Coflow a;
  a.weight = 1.0;
  a.flows.push_back({x, y, 2.0, 0.0, path_from_names(net, {"x", "y"}), false});
  a.flows.push_back({x, z, 1.0, 0.0, path_from_names(net, {"x", "z"}), false});
  Coflow b;
  b.weight = 1.0;
  b.flows.push_back({x, z, 1.0, 0.0, path_from_names(net, {"x", "z"}), false});
  Coflow c;
  c.weight = 1.0;
  c.flows.push_back({x, z, 2.0, 0.0, path_from_names(net, {"x", "y", "z"}), false});
  ins.coflows = {a, b, c};
  return ins;
}

struct Slot {
  FlowRef flow;
  double start, end, rate;
};

inline CircuitSchedule schedule_from_slots(const Instance& ins, const std::vector<Slot>& slots) {
  CircuitSchedule s = empty_schedule(ins);
  for (const auto& sl : slots) {
    auto& fs = s.at(sl.flow);
    fs.path = *flow_at(ins, sl.flow).path;
    fs.profile.add(sl.start, sl.end, sl.rate);
  }
  return s;
}

// everything at half rate
inline CircuitSchedule triangle_schedule_fair(const Instance& ins) {
  return schedule_from_slots(ins, {{{0, 0}, 0, 4, 0.5},
                                   {{0, 1}, 0, 2, 0.5},
                                   {{1, 0}, 0, 2, 0.5},
                                   {{2, 0}, 0, 4, 0.5}});
}

// coflow A first, then B, then C
inline CircuitSchedule triangle_schedule_a_first(const Instance& ins) {
  return schedule_from_slots(ins, {{{0, 0}, 0, 2, 1.0},
                                   {{0, 1}, 0, 1, 1.0},
                                   {{1, 0}, 1, 2, 1.0},
                                   {{2, 0}, 2, 4, 1.0}});
}

// short coflows first; the best of the three
inline CircuitSchedule triangle_schedule_short_first(const Instance& ins) {
  return schedule_from_slots(ins, {{{1, 0}, 0, 1, 1.0},
                                   {{2, 0}, 0, 2, 1.0},
                                   {{0, 1}, 1, 2, 1.0},
                                   {{0, 0}, 2, 4, 1.0}});
}

// --- brute-force widest path -------------------------------------------------

inline void widest_dfs(const Network& net, int v, int dst, double width, std::vector<char>& seen,
                       double& best) {
  if (v == dst) {
    best = std::max(best, width);
    return;
  }
  for (int a : net.out_arcs(v)) {
    const Arc& arc = net.arc(a);
    if (seen[static_cast<std::size_t>(arc.head)]) continue;
    seen[static_cast<std::size_t>(arc.head)] = 1;
    widest_dfs(net, arc.head, dst, std::min(width, arc.capacity), seen, best);
    seen[static_cast<std::size_t>(arc.head)] = 0;
  }
}

// Max-min capacity over all simple src->dst paths, -inf when none exists.
inline double brute_widest_width(const Network& net, int src, int dst) {
  double best = -std::numeric_limits<double>::infinity();
  std::vector<char> seen(static_cast<std::size_t>(net.node_count()), 0);
  seen[static_cast<std::size_t>(src)] = 1;
  widest_dfs(net, src, dst, std::numeric_limits<double>::infinity(), seen, best);
  return best;
}

// --- random graphs -----------------------------------------------------------

inline Network random_digraph(Rng& rng, int n, double arc_prob, double cap_lo = 0.5,
                              double cap_hi = 4.0) {
  std::vector<std::string> nodes;
  for (int v = 0; v < n; ++v) nodes.push_back("n" + std::to_string(v));
  std::vector<EdgeSpec> edges;
  for (int u = 0; u < n; ++u)
    for (int v = 0; v < n; ++v) {
      if (u == v) continue;
      if (rng.uniform() < arc_prob)
        edges.push_back({nodes[static_cast<std::size_t>(u)], nodes[static_cast<std::size_t>(v)],
                         rng.uniform(cap_lo, cap_hi), true});
    }
  if (edges.empty())
    edges.push_back({nodes[0], nodes[1], rng.uniform(cap_lo, cap_hi), true});
  return Network::build(nodes, edges);
}

// --- brute-force LP oracle ----------------------------------------------------
//
// Enumerates candidate vertices of a bounded-feasible-region LP: every choice
// of n constraints (rows at equality plus active bounds) is solved as an n*n
// linear system and the best feasible candidate wins. All variable bounds
// must be finite so the region is a polytope; a nonempty polytope has a
// vertex, so "no feasible vertex" means "infeasible".

struct BruteLpResult {
  bool feasible = false;
  double objective = 0.0;
  std::vector<double> x;
};

inline bool solve_square(std::vector<std::vector<double>> a, std::vector<double> b,
                         std::vector<double>& out) {
  const std::size_t n = b.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    if (std::abs(a[piv][col]) < 1e-11) return false;
    std::swap(a[piv], a[col]);
    std::swap(b[piv], b[col]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = a[r][col] / a[col][col];
      if (f == 0.0) continue;
      for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
      b[r] -= f * b[col];
    }
  }
  out.resize(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = b[i] / a[i][i];
  return true;
}

inline BruteLpResult brute_force_lp(const coflow::LpProblem& p, double tol = 1e-7) {
  using coflow::Rel;
  const int n = p.var_count();
  // hyperplane list: every row at equality, plus both bounds of every var
  struct Plane {
    std::vector<double> a;
    double b;
  };
  std::vector<Plane> planes;
  for (int r = 0; r < p.row_count(); ++r) {
    Plane pl;
    pl.a.assign(static_cast<std::size_t>(n), 0.0);
    for (auto [col, v] : p.row(r).coeffs) pl.a[static_cast<std::size_t>(col)] = v;
    pl.b = p.row(r).rhs;
    planes.push_back(pl);
  }
  for (int j = 0; j < n; ++j) {
    if (!std::isfinite(p.var(j).lo) || !std::isfinite(p.var(j).hi))
      throw std::invalid_argument("brute_force_lp: needs finite bounds");
    Plane lo, hi;
    lo.a.assign(static_cast<std::size_t>(n), 0.0);
    hi.a.assign(static_cast<std::size_t>(n), 0.0);
    lo.a[static_cast<std::size_t>(j)] = 1.0;
    hi.a[static_cast<std::size_t>(j)] = 1.0;
    lo.b = p.var(j).lo;
    hi.b = p.var(j).hi;
    planes.push_back(lo);
    if (p.var(j).hi != p.var(j).lo) planes.push_back(hi);
  }

  BruteLpResult best;
  const int total = static_cast<int>(planes.size());
  auto consider = [&](const std::vector<int>& idx) {
    std::vector<std::vector<double>> a;
    std::vector<double> b;
    for (int i : idx) {
      a.push_back(planes[static_cast<std::size_t>(i)].a);
      b.push_back(planes[static_cast<std::size_t>(i)].b);
    }
    std::vector<double> x;
    if (!solve_square(a, b, x)) return;
    if (p.max_violation(x) > tol) return;
    const double obj = p.objective_value(x);
    const bool better = p.maximize ? obj > best.objective : obj < best.objective;
    if (!best.feasible || better) {
      best.feasible = true;
      best.objective = obj;
      best.x = x;
    }
  };
  // iterate over n-subsets of the planes
  std::vector<int> idx(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
  if (n > total) return best;
  for (;;) {
    consider(idx);
    int i = n - 1;
    while (i >= 0 && idx[static_cast<std::size_t>(i)] == total - n + i) --i;
    if (i < 0) break;
    ++idx[static_cast<std::size_t>(i)];
    for (int k = i + 1; k < n; ++k)
      idx[static_cast<std::size_t>(k)] = idx[static_cast<std::size_t>(k - 1)] + 1;
  }
  return best;
}

}  // namespace testing_support
