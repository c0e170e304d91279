#pragma once

// Circuit schedules and their verification: per-flow routed bandwidth
// profiles, capacity/release/volume validation, completion-time evaluation,
// and the two profile rewrites reused by the rounding analyses (averaging a
// window to constant rates, and serializing same-path flows one after
// another at the path bottleneck rate).

#include <cmath>
#include <limits>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "coflow/instance.hpp"
#include "coflow/profile.hpp"

namespace coflow {

struct FlowSchedule {
  Path path;                 // empty for dummies and zero-size flows
  BandwidthProfile profile;  // empty means nothing is ever sent
};

struct CircuitSchedule {
  // indexed [coflow][flow], aligned with the instance
  std::vector<std::vector<FlowSchedule>> flows;
  double stretch = 1.0;  // uniform dilation already applied, for reporting

  FlowSchedule& at(FlowRef r) {
    return flows.at(static_cast<std::size_t>(r.coflow)).at(static_cast<std::size_t>(r.flow));
  }
  const FlowSchedule& at(FlowRef r) const {
    return flows.at(static_cast<std::size_t>(r.coflow)).at(static_cast<std::size_t>(r.flow));
  }
};

inline CircuitSchedule empty_schedule(const Instance& ins) {
  CircuitSchedule s;
  s.flows.resize(ins.coflows.size());
  for (std::size_t i = 0; i < ins.coflows.size(); ++i)
    s.flows[i].resize(ins.coflows[i].flows.size());
  return s;
}

struct ValidationReport {
  bool ok = true;
  std::vector<std::string> violations;
};

// Checks, for every non-dummy flow: the path is well formed and matches the
// flow's endpoints, nothing is sent before release, delivered volume equals
// the flow size, and per-arc rate sums never exceed capacity. Stops after
// max_violations findings.
inline ValidationReport validate(const Instance& ins, const CircuitSchedule& sched,
                                 int max_violations = 16, double tol = 1e-9) {
  ValidationReport rep;
  auto complain = [&](const std::string& msg) {
    rep.ok = false;
    if (static_cast<int>(rep.violations.size()) < max_violations) rep.violations.push_back(msg);
  };
  if (sched.flows.size() != ins.coflows.size()) {
    complain("schedule shape does not match instance");
    return rep;
  }
  std::set<double> cuts;
  std::vector<std::vector<const BandwidthProfile*>> per_arc(
      static_cast<std::size_t>(ins.net.arc_count()));
  for (int i = 0; i < static_cast<int>(ins.coflows.size()); ++i) {
    const auto& cf = ins.coflows[static_cast<std::size_t>(i)];
    if (sched.flows[static_cast<std::size_t>(i)].size() != cf.flows.size()) {
      complain("coflow " + std::to_string(i) + ": schedule shape mismatch");
      return rep;
    }
    for (int j = 0; j < static_cast<int>(cf.flows.size()); ++j) {
      const auto& f = cf.flows[static_cast<std::size_t>(j)];
      const auto& fs = sched.at({i, j});
      const std::string tag = "flow (" + std::to_string(i) + "," + std::to_string(j) + ")";
      if (f.dummy) continue;
      if (f.size <= tol) {
        if (!fs.profile.empty()) complain(tag + ": zero-size flow sends data");
        continue;
      }
      if (fs.path.empty()) {
        complain(tag + ": no path");
        continue;
      }
      try {
        validate_path(ins.net, fs.path);
      } catch (const std::exception& e) {
        complain(tag + ": " + e.what());
        continue;
      }
      if (path_source(ins.net, fs.path) != f.src || path_target(ins.net, fs.path) != f.dst) {
        complain(tag + ": path endpoints disagree with flow");
        continue;
      }
      if (!fs.profile.empty() && fs.profile.start_time() < f.release - tol)
        complain(tag + ": sends before release");
      const double vol = fs.profile.volume();
      if (std::abs(vol - f.size) > tol * std::max(1.0, f.size))
        complain(tag + ": delivered " + std::to_string(vol) + " of " + std::to_string(f.size));
      for (double t : fs.profile.breakpoints()) cuts.insert(t);
      for (int a : fs.path.arcs) per_arc[static_cast<std::size_t>(a)].push_back(&fs.profile);
    }
  }
  std::vector<double> times(cuts.begin(), cuts.end());
  for (int a = 0; a < ins.net.arc_count(); ++a) {
    const auto& users = per_arc[static_cast<std::size_t>(a)];
    if (users.empty()) continue;
    const double cap = ins.net.arc(a).capacity;
    for (std::size_t i = 0; i + 1 < times.size(); ++i) {
      double load = 0.0;
      for (const BandwidthProfile* p : users) load += p->rate_at(times[i]);
      if (load > cap + tol * std::max(1.0, cap)) {
        std::ostringstream os;
        os << "arc " << ins.net.node_name(ins.net.arc(a).tail) << "->"
           << ins.net.node_name(ins.net.arc(a).head) << ": load " << load << " exceeds capacity "
           << cap << " at t=" << times[i];
        complain(os.str());
        break;
      }
    }
  }
  return rep;
}

struct ScheduleReport {
  std::vector<std::vector<double>> flow_completion;  // [coflow][flow]; dummies mirror the coflow
  std::vector<double> coflow_completion;
  double objective = 0.0;
  bool feasible = false;
  double stretch = 1.0;
  std::vector<std::string> violations;
};

// Completion times and the weighted objective; feasibility comes from
// validate(). A flow that never receives its full volume completes at
// +infinity and makes the schedule infeasible.
inline ScheduleReport evaluate(const Instance& ins, const CircuitSchedule& sched,
                               double tol = 1e-9) {
  ScheduleReport rep;
  auto val = validate(ins, sched, 16, tol);
  rep.feasible = val.ok;
  rep.violations = std::move(val.violations);
  rep.stretch = sched.stretch;
  rep.flow_completion.resize(ins.coflows.size());
  rep.coflow_completion.assign(ins.coflows.size(), 0.0);
  for (int i = 0; i < static_cast<int>(ins.coflows.size()); ++i) {
    const auto& cf = ins.coflows[static_cast<std::size_t>(i)];
    auto& row = rep.flow_completion[static_cast<std::size_t>(i)];
    row.assign(cf.flows.size(), 0.0);
    double done = 0.0;
    for (int j = 0; j < static_cast<int>(cf.flows.size()); ++j) {
      const auto& f = cf.flows[static_cast<std::size_t>(j)];
      if (f.dummy) continue;
      const double c = sched.at({i, j}).profile.completion_time(f.size, f.release, tol);
      row[static_cast<std::size_t>(j)] = c;
      done = std::max(done, c);
      if (std::isinf(c)) rep.feasible = false;
    }
    for (int j = 0; j < static_cast<int>(cf.flows.size()); ++j)
      if (cf.flows[static_cast<std::size_t>(j)].dummy) row[static_cast<std::size_t>(j)] = done;
    rep.coflow_completion[static_cast<std::size_t>(i)] = done;
    rep.objective += cf.weight * done;
  }
  return rep;
}

// Averages every profile over the window [t1, t2]: each flow's new profile is
// the single constant rate delivering the same volume over the full window.
// Capacity is re-checked afterwards; a violation is a precondition failure.
inline CircuitSchedule constify_bandwidths(const Instance& ins, const CircuitSchedule& sched,
                                           double t1, double t2, double tol = 1e-9) {
  if (!(t2 > t1)) throw std::invalid_argument("constify: empty window");
  CircuitSchedule out = sched;
  for (auto& per_coflow : out.flows)
    for (auto& fs : per_coflow) {
      const double vol = fs.profile.volume_until(t2) - fs.profile.volume_until(t1);
      fs.profile = BandwidthProfile();
      if (vol > 0.0) fs.profile.add(t1, t2, vol / (t2 - t1));
    }
  std::vector<double> load(static_cast<std::size_t>(ins.net.arc_count()), 0.0);
  for (std::size_t i = 0; i < out.flows.size(); ++i)
    for (const auto& fs : out.flows[i])
      for (int a : fs.path.arcs) load[static_cast<std::size_t>(a)] += fs.profile.rate_at(t1);
  for (int a = 0; a < ins.net.arc_count(); ++a)
    if (load[static_cast<std::size_t>(a)] > ins.net.arc(a).capacity + tol)
      throw std::invalid_argument("constify: averaged load exceeds capacity on arc " +
                                  std::to_string(a));
  return out;
}

// Serializes flows that share one path: within [t1, t2] each flow's window
// volume is sent alone, in input order, at the path bottleneck rate.
// Zero-volume flows occupy zero-length slots. The result of packing all
// volumes must fit in the window; overflow is a precondition failure.
inline std::vector<BandwidthProfile> serialize_on_path(const Network& net, const Path& path,
                                                       const std::vector<BandwidthProfile>& flows,
                                                       double t1, double t2, double tol = 1e-9) {
  if (!(t2 > t1)) throw std::invalid_argument("serialize: empty window");
  const double cap = bottleneck(net, path);
  std::vector<BandwidthProfile> out;
  double t = t1;
  for (const auto& p : flows) {
    const double vol = p.volume_until(t2) - p.volume_until(t1);
    BandwidthProfile np;
    if (vol > 0.0) {
      const double end = t + vol / cap;
      np.add(t, end, cap);
      t = end;
    }
    out.push_back(np);
  }
  if (t > t2 + tol) throw std::invalid_argument("serialize: volumes exceed window");
  return out;
}

}  // namespace coflow
