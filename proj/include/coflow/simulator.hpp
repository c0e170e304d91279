#pragma once

// Flow-based discrete-event simulator. A plan fixes one path per flow and a
// strict priority order; the simulator reallocates bandwidth at every event
// (a release or a completion): walking the plan order, each released
// unfinished flow grabs the full residual bottleneck of its path, possibly
// zero, in which case it waits. Rates are constant between events, so every
// flow's bandwidth profile comes out piecewise constant and the resulting
// schedule validates against the instance.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "coflow/instance.hpp"
#include "coflow/network.hpp"
#include "coflow/schedule.hpp"

namespace coflow {

struct PriorityPlan {
  std::vector<FlowRef> order;    // strict priority, highest first
  std::map<FlowRef, Path> path;  // chosen route per flow
};

struct SimResult {
  CircuitSchedule schedule;
  ScheduleReport report;
};

inline SimResult simulate(const Instance& instance, const PriorityPlan& plan) {
  Instance ins = add_dummy_flows(instance);
  std::set<FlowRef> sized;
  for (FlowRef r : flow_refs(ins, false))
    if (!flow_at(ins, r).dummy) sized.insert(r);
  std::set<FlowRef> planned(plan.order.begin(), plan.order.end());
  if (planned.size() != plan.order.size())
    throw std::invalid_argument("simulate: plan lists a flow twice");
  if (planned != sized)
    throw std::invalid_argument("simulate: plan does not cover the sized flows exactly");

  struct St {
    FlowRef id;
    const Path* path = nullptr;
    double release = 0.0;
    double remaining = 0.0;
    double rate = 0.0;
    bool finished = false;
  };
  std::vector<St> st;
  for (FlowRef f : plan.order) {
    const FlowRequest& fr = flow_at(ins, f);
    const auto it = plan.path.find(f);
    if (it == plan.path.end()) {
      std::ostringstream os;
      os << "simulate: plan has no path for flow (" << f.coflow << "," << f.flow << ")";
      throw std::invalid_argument(os.str());
    }
    validate_path(ins.net, it->second);
    if (path_source(ins.net, it->second) != fr.src || path_target(ins.net, it->second) != fr.dst)
      throw std::invalid_argument("simulate: plan path endpoints disagree with the flow");
    st.push_back({f, &it->second, fr.release, fr.size, 0.0, fr.size <= 0.0});
  }

  CircuitSchedule sched = empty_schedule(ins);
  for (const St& s : st) sched.at(s.id).path = *s.path;

  const double kInstant = 1e-12;
  int unfinished = 0;
  double now = std::numeric_limits<double>::infinity();
  for (const St& s : st)
    if (!s.finished) {
      ++unfinished;
      now = std::min(now, s.release);
    }
  std::vector<double> residual(static_cast<std::size_t>(ins.net.arc_count()), 0.0);
  // Every iteration ends at a release or finishes at least one flow, so the
  // loop runs at most twice per flow.
  int guard = 2 * static_cast<int>(st.size()) + 4;
  while (unfinished > 0) {
    if (--guard < 0) throw std::logic_error("simulate: event loop failed to converge");
    for (int a = 0; a < ins.net.arc_count(); ++a)
      residual[static_cast<std::size_t>(a)] = ins.net.arc(a).capacity;
    for (St& s : st) {
      s.rate = 0.0;
      if (s.finished || s.release > now + kInstant) continue;
      double bottleneck = std::numeric_limits<double>::infinity();
      for (int a : s.path->arcs)
        bottleneck = std::min(bottleneck, residual[static_cast<std::size_t>(a)]);
      if (bottleneck <= kInstant) continue;
      s.rate = bottleneck;
      for (int a : s.path->arcs) residual[static_cast<std::size_t>(a)] -= bottleneck;
    }
    double next = std::numeric_limits<double>::infinity();
    for (const St& s : st) {
      if (s.finished) continue;
      if (s.release > now + kInstant)
        next = std::min(next, s.release);
      else if (s.rate > 0.0)
        next = std::min(next, now + s.remaining / s.rate);
    }
    if (!std::isfinite(next)) throw std::logic_error("simulate: no next event but flows remain");
    for (St& s : st) {
      if (s.finished || s.rate <= 0.0) continue;
      sched.at(s.id).profile.add(now, next, s.rate);
      s.remaining -= s.rate * (next - now);
      if (s.remaining <= 1e-9 * std::max(1.0, flow_at(ins, s.id).size)) {
        s.remaining = 0.0;
        s.finished = true;
        --unfinished;
      }
    }
    now = next;
  }
  SimResult out;
  out.schedule = std::move(sched);
  out.report = evaluate(ins, out.schedule);
  return out;
}

}  // namespace coflow
