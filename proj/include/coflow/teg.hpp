#pragma once

// Time-expanded graphs for packet routing. The expansion copies every node of
// the base network once per integral time step 0..T and wires two arc kinds:
//   movement  ((u,t), (v,t+1)) for every base arc (u,v), t < T
//   queue     ((v,t), (v,t+1)) for every node v, t < T
// A packet crossing a movement arc advances one hop in one step; queue arcs
// model waiting. Packet capacity is one per movement arc per step regardless
// of the base arc's bandwidth, so base capacities are not copied here.
//
// `collapse` undoes the expansion for a set of per-packet flows: movement-arc
// values are summed over time stamps onto their base arc and queue mass is
// dropped, which is safe because every such flow is confined to layers at or
// below its arrival time. The collapsed flows are re-checked for conservation
// on the base graph before they are handed to path decomposition.

#include <cmath>
#include <map>
#include <stdexcept>
#include <vector>

#include "coflow/instance.hpp"
#include "coflow/lp_problem.hpp"
#include "coflow/network.hpp"

namespace coflow {

constexpr int kDefaultTegCap = 64;

struct TegArc {
  int tail = -1;   // expanded node id
  int head = -1;   // expanded node id
  int base = -1;   // base arc id for movement arcs, base node id for queue arcs
  int layer = -1;  // time stamp of the tail
  bool queue = false;
};

class TimeExpandedGraph {
 public:
  static TimeExpandedGraph expand(const Network& net, int horizon, int cap = kDefaultTegCap) {
    if (horizon < 1) throw std::invalid_argument("teg: horizon must be at least 1");
    if (horizon > cap) throw std::invalid_argument("teg: horizon exceeds the configured cap");
    TimeExpandedGraph g;
    g.net_ = &net;
    g.horizon_ = horizon;
    const int V = net.node_count();
    const int A = net.arc_count();
    g.arcs_.reserve(static_cast<std::size_t>(horizon) * static_cast<std::size_t>(V + A));
    for (int t = 0; t < horizon; ++t) {
      for (int a = 0; a < A; ++a) {
        const Arc& base = net.arc(a);
        g.arcs_.push_back({g.node_at(base.tail, t), g.node_at(base.head, t + 1), a, t, false});
      }
      for (int v = 0; v < V; ++v)
        g.arcs_.push_back({g.node_at(v, t), g.node_at(v, t + 1), v, t, true});
    }
    g.out_.assign(static_cast<std::size_t>(g.node_count()), {});
    g.in_.assign(static_cast<std::size_t>(g.node_count()), {});
    for (int a = 0; a < g.arc_count(); ++a) {
      g.out_[static_cast<std::size_t>(g.arcs_[static_cast<std::size_t>(a)].tail)].push_back(a);
      g.in_[static_cast<std::size_t>(g.arcs_[static_cast<std::size_t>(a)].head)].push_back(a);
    }
    return g;
  }

  const Network& base() const { return *net_; }
  int horizon() const { return horizon_; }

  int node_count() const { return (horizon_ + 1) * net_->node_count(); }
  int node_at(int v, int t) const { return t * net_->node_count() + v; }
  int node_of(int id) const { return id % net_->node_count(); }
  int time_of(int id) const { return id / net_->node_count(); }

  int arc_count() const { return static_cast<int>(arcs_.size()); }
  const TegArc& arc(int a) const { return arcs_.at(static_cast<std::size_t>(a)); }
  const std::vector<int>& out_arcs(int id) const { return out_.at(static_cast<std::size_t>(id)); }
  const std::vector<int>& in_arcs(int id) const { return in_.at(static_cast<std::size_t>(id)); }

  int movement_arc(int base_arc, int t) const {
    return t * (net_->arc_count() + net_->node_count()) + base_arc;
  }
  int queue_arc(int v, int t) const {
    return t * (net_->arc_count() + net_->node_count()) + net_->arc_count() + v;
  }

  int movement_count() const { return horizon_ * net_->arc_count(); }
  int queue_count() const { return horizon_ * net_->node_count(); }

 private:
  const Network* net_ = nullptr;
  int horizon_ = 0;
  std::vector<TegArc> arcs_;
  std::vector<std::vector<int>> out_, in_;
};

// Sums the expanded per-packet flows in `x` (variables of kind ptflow whose
// arrival stamp is at most t_cut) back onto the base network, one EdgeFlow per
// listed packet. Queue mass vanishes by construction; a conservation defect on
// the collapsed graph indicates broken filtering upstream and throws.
inline std::map<FlowRef, EdgeFlow> collapse(const TimeExpandedGraph& teg, const LpProblem& p,
                                            const std::vector<double>& x,
                                            const std::vector<FlowRef>& packets,
                                            const Instance& ins, int t_cut, double tol = 1e-7) {
  const Network& net = teg.base();
  std::map<FlowRef, EdgeFlow> out;
  for (FlowRef r : packets) {
    const FlowRequest& f = flow_at(ins, r);
    EdgeFlow ef;
    ef.src = f.src;
    ef.dst = f.dst;
    ef.amount.assign(static_cast<std::size_t>(net.arc_count()), 0.0);
    out.emplace(r, std::move(ef));
  }
  for (int j = 0; j < p.var_count(); ++j) {
    const VarKey& k = p.var(j).key;
    if (k.kind != VarKey::Kind::ptflow || k.step > t_cut) continue;
    auto it = out.find({k.coflow, k.flow});
    if (it == out.end()) continue;
    const TegArc& a = teg.arc(k.arc);
    if (a.queue) continue;
    it->second.amount[static_cast<std::size_t>(a.base)] +=
        std::max(0.0, x[static_cast<std::size_t>(j)]);
  }
  for (auto& [r, ef] : out) {
    std::vector<double> net_in(static_cast<std::size_t>(net.node_count()), 0.0);
    for (int a = 0; a < net.arc_count(); ++a) {
      net_in[static_cast<std::size_t>(net.arc(a).head)] += ef.amount[static_cast<std::size_t>(a)];
      net_in[static_cast<std::size_t>(net.arc(a).tail)] -= ef.amount[static_cast<std::size_t>(a)];
    }
    ef.value = net_in[static_cast<std::size_t>(ef.dst)];
    for (int v = 0; v < net.node_count(); ++v) {
      const double want = v == ef.dst ? ef.value : (v == ef.src ? -ef.value : 0.0);
      if (std::abs(net_in[static_cast<std::size_t>(v)] - want) > tol)
        throw std::runtime_error("collapse: conservation violated at " + net.node_name(v));
    }
  }
  return out;
}

}  // namespace coflow
