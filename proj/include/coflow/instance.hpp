#pragma once

// Problem data: flows grouped into coflows over a shared network. A coflow is
// done when its last member flow is done; the objective throughout is the
// weighted sum of coflow completion times.
//
// Dummy flows are virtual barriers: one zero-size flow per coflow whose
// completion stands for the coflow's completion in the relaxations (it may
// finish no earlier than any sibling). They carry the coflow weight there,
// are excluded from feasibility checking, and never consume bandwidth.

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "coflow/network.hpp"

namespace coflow {

struct FlowRequest {
  int src = -1;
  int dst = -1;
  double size = 0.0;
  double release = 0.0;
  std::optional<Path> path;  // fixed route, when the instance prescribes one
  bool dummy = false;
};

struct Coflow {
  double weight = 1.0;
  std::vector<FlowRequest> flows;
};

enum class Mode { circuit_given, circuit_routing, packet };

inline const char* mode_name(Mode m) {
  switch (m) {
    case Mode::circuit_given: return "circuit-given";
    case Mode::circuit_routing: return "circuit-routing";
    case Mode::packet: return "packet";
  }
  return "?";
}

inline Mode mode_from_name(const std::string& s) {
  if (s == "circuit-given") return Mode::circuit_given;
  if (s == "circuit-routing") return Mode::circuit_routing;
  if (s == "packet") return Mode::packet;
  throw std::invalid_argument("unknown mode: " + s);
}

struct Instance {
  Network net;
  std::vector<Coflow> coflows;
  Mode mode = Mode::circuit_given;
};

struct FlowRef {
  int coflow = -1;
  int flow = -1;
  friend bool operator==(const FlowRef&, const FlowRef&) = default;
  friend bool operator<(const FlowRef& a, const FlowRef& b) {
    return a.coflow != b.coflow ? a.coflow < b.coflow : a.flow < b.flow;
  }
};

inline const FlowRequest& flow_at(const Instance& ins, FlowRef r) {
  return ins.coflows.at(static_cast<std::size_t>(r.coflow))
      .flows.at(static_cast<std::size_t>(r.flow));
}

inline std::vector<FlowRef> flow_refs(const Instance& ins, bool include_dummies = true) {
  std::vector<FlowRef> out;
  for (int i = 0; i < static_cast<int>(ins.coflows.size()); ++i)
    for (int j = 0; j < static_cast<int>(ins.coflows[static_cast<std::size_t>(i)].flows.size()); ++j)
      if (include_dummies || !ins.coflows[static_cast<std::size_t>(i)].flows[static_cast<std::size_t>(j)].dummy)
        out.push_back({i, j});
  return out;
}

inline void check_instance(const Instance& ins) {
  if (ins.coflows.empty()) throw std::invalid_argument("instance: no coflows");
  for (const auto& c : ins.coflows) {
    if (c.weight < 0.0) throw std::invalid_argument("instance: negative coflow weight");
    if (c.flows.empty()) throw std::invalid_argument("instance: empty coflow");
    for (const auto& f : c.flows) {
      if (f.dummy) continue;
      if (f.src < 0 || f.src >= ins.net.node_count() || f.dst < 0 ||
          f.dst >= ins.net.node_count())
        throw std::invalid_argument("instance: flow endpoint outside network");
      if (f.src == f.dst) throw std::invalid_argument("instance: flow with equal endpoints");
      if (f.size < 0.0) throw std::invalid_argument("instance: negative flow size");
      if (f.release < 0.0) throw std::invalid_argument("instance: negative release time");
      if (f.path) {
        validate_path(ins.net, *f.path);
        if (path_source(ins.net, *f.path) != f.src || path_target(ins.net, *f.path) != f.dst)
          throw std::invalid_argument("instance: path endpoints disagree with flow");
      }
    }
  }
}

// Appends one dummy flow per coflow (idempotent). Dummies have zero size and
// zero release and respond true to `dummy`.
inline Instance add_dummy_flows(Instance ins) {
  for (auto& c : ins.coflows) {
    bool has = false;
    for (const auto& f : c.flows) has = has || f.dummy;
    if (!has) {
      FlowRequest d;
      d.dummy = true;
      c.flows.push_back(d);
    }
  }
  return ins;
}

inline std::optional<int> dummy_index(const Coflow& c) {
  for (int j = 0; j < static_cast<int>(c.flows.size()); ++j)
    if (c.flows[static_cast<std::size_t>(j)].dummy) return j;
  return std::nullopt;
}

}  // namespace coflow
