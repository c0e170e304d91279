#pragma once

// JSON file formats for the artifacts that cross the CLI boundary: networks,
// instances, circuit schedules and evaluation reports. Writing then reading
// restores every field exactly (doubles round-trip via shortest
// representation; infinities, which JSON numbers cannot carry, travel as the
// strings "inf"/"-inf"). Parse failures throw std::runtime_error carrying the
// origin, the line/column for syntax errors, and the field path for shape
// errors ("instance.coflows[2].flows[0].size: expected a number").

#include <cmath>
#include <cstddef>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "coflow/instance.hpp"
#include "coflow/network.hpp"
#include "coflow/schedule.hpp"

namespace coflow {

using Json = nlohmann::json;

namespace detail {

// Read-side accessor that tracks its own location so every complaint names
// the offending field.
struct JsonCursor {
  const Json* node = nullptr;
  std::string path;

  [[noreturn]] void fail(const std::string& why) const {
    throw std::runtime_error(path + ": " + why);
  }
  JsonCursor at(const char* key) const {
    if (!node->is_object()) fail("expected an object");
    const auto it = node->find(key);
    if (it == node->end()) fail(std::string("missing field '") + key + "'");
    return {&*it, path + "." + key};
  }
  std::optional<JsonCursor> opt(const char* key) const {
    if (!node->is_object()) fail("expected an object");
    const auto it = node->find(key);
    if (it == node->end()) return std::nullopt;
    return JsonCursor{&*it, path + "." + key};
  }
  std::size_t size() const {
    if (!node->is_array()) fail("expected an array");
    return node->size();
  }
  JsonCursor item(std::size_t i) const {
    return {&(*node)[i], path + "[" + std::to_string(i) + "]"};
  }
  std::string str() const {
    if (!node->is_string()) fail("expected a string");
    return node->get<std::string>();
  }
  bool boolean() const {
    if (!node->is_boolean()) fail("expected a boolean");
    return node->get<bool>();
  }
  // Accepts plain numbers plus the infinity sentinels.
  double num() const {
    if (node->is_number()) return node->get<double>();
    if (node->is_string()) {
      const std::string s = node->get<std::string>();
      if (s == "inf") return std::numeric_limits<double>::infinity();
      if (s == "-inf") return -std::numeric_limits<double>::infinity();
    }
    fail("expected a number");
  }
  int integer() const {
    if (!node->is_number_integer()) fail("expected an integer");
    return node->get<int>();
  }
};

inline Json jnum(double v) {
  if (std::isinf(v)) return v > 0 ? Json("inf") : Json("-inf");
  return Json(v);
}

}  // namespace detail

// Syntax-level parse with origin:line:column diagnostics. `origin` is
// whatever the caller wants errors prefixed with, usually a file path.
inline Json parse_json_text(const std::string& text, const std::string& origin) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    std::size_t line = 1, col = 1;
    const std::size_t stop = e.byte > 0 ? e.byte - 1 : 0;
    for (std::size_t i = 0; i < stop && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    std::ostringstream os;
    os << origin << ":" << line << ":" << col << ": " << e.what();
    throw std::runtime_error(os.str());
  }
}

inline Json load_json(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path);
  std::ostringstream buf;
  buf << is.rdbuf();
  return parse_json_text(buf.str(), path);
}

inline void save_json(const std::string& path, const Json& j) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path);
  os << j.dump(2) << "\n";
  if (!os) throw std::runtime_error("write failed on " + path);
}

// ---- network ----
// {nodes: [name, ...], edges: [{from, to, capacity, directed}, ...]}
// The writer emits one directed edge per arc; the reader also accepts
// undirected edges (directed defaults to false, capacity to 1).

inline Json network_to_json(const Network& net) {
  Json nodes = Json::array();
  for (int v = 0; v < net.node_count(); ++v) nodes.push_back(net.node_name(v));
  Json edges = Json::array();
  for (int a = 0; a < net.arc_count(); ++a) {
    const Arc& arc = net.arc(a);
    edges.push_back({{"from", net.node_name(arc.tail)},
                     {"to", net.node_name(arc.head)},
                     {"capacity", arc.capacity},
                     {"directed", true}});
  }
  return Json{{"nodes", nodes}, {"edges", edges}};
}

inline Network network_from_json(const detail::JsonCursor& c) {
  const detail::JsonCursor jnodes = c.at("nodes");
  std::vector<std::string> nodes;
  for (std::size_t i = 0; i < jnodes.size(); ++i) nodes.push_back(jnodes.item(i).str());
  const detail::JsonCursor jedges = c.at("edges");
  std::vector<EdgeSpec> edges;
  for (std::size_t i = 0; i < jedges.size(); ++i) {
    const detail::JsonCursor e = jedges.item(i);
    EdgeSpec spec;
    spec.from = e.at("from").str();
    spec.to = e.at("to").str();
    if (auto cap = e.opt("capacity")) spec.capacity = cap->num();
    if (auto dir = e.opt("directed")) spec.directed = dir->boolean();
    edges.push_back(spec);
  }
  try {
    return Network::build(nodes, edges);
  } catch (const std::invalid_argument& e) {
    c.fail(e.what());
  }
}

inline Network network_from_json(const Json& j, const std::string& origin = "network") {
  return network_from_json(detail::JsonCursor{&j, origin});
}

// ---- instance ----
// {mode, network, coflows: [{weight, flows: [...]}]} where a flow is either
// {dummy: true} or {src, dst, size, release, path?} with node names for
// endpoints and a node-name sequence for the optional fixed path.

inline Json instance_to_json(const Instance& ins) {
  Json coflows = Json::array();
  for (const Coflow& c : ins.coflows) {
    Json flows = Json::array();
    for (const FlowRequest& f : c.flows) {
      if (f.dummy) {
        flows.push_back(Json{{"dummy", true}});
        continue;
      }
      Json jf{{"src", ins.net.node_name(f.src)},
              {"dst", ins.net.node_name(f.dst)},
              {"size", f.size},
              {"release", f.release}};
      if (f.path) {
        Json names = Json::array();
        for (int v : path_nodes(ins.net, *f.path)) names.push_back(ins.net.node_name(v));
        jf["path"] = names;
      }
      flows.push_back(jf);
    }
    coflows.push_back(Json{{"weight", c.weight}, {"flows", flows}});
  }
  return Json{{"mode", mode_name(ins.mode)},
              {"network", network_to_json(ins.net)},
              {"coflows", coflows}};
}

inline Instance instance_from_json(const Json& j, const std::string& origin = "instance") {
  const detail::JsonCursor c{&j, origin};
  Instance ins;
  ins.net = network_from_json(c.at("network"));
  const std::string mode = c.at("mode").str();
  try {
    ins.mode = mode_from_name(mode);
  } catch (const std::invalid_argument& e) {
    c.at("mode").fail(e.what());
  }
  const detail::JsonCursor jcoflows = c.at("coflows");
  for (std::size_t i = 0; i < jcoflows.size(); ++i) {
    const detail::JsonCursor jc = jcoflows.item(i);
    Coflow cf;
    cf.weight = jc.at("weight").num();
    const detail::JsonCursor jflows = jc.at("flows");
    for (std::size_t k = 0; k < jflows.size(); ++k) {
      const detail::JsonCursor jf = jflows.item(k);
      FlowRequest f;
      if (auto d = jf.opt("dummy"); d && d->boolean()) {
        f.dummy = true;
        cf.flows.push_back(f);
        continue;
      }
      const auto node = [&](const char* key) {
        const detail::JsonCursor jn = jf.at(key);
        const std::string name = jn.str();
        if (!ins.net.has_node(name)) jn.fail("unknown node " + name);
        return ins.net.node_id(name);
      };
      f.src = node("src");
      f.dst = node("dst");
      f.size = jf.at("size").num();
      f.release = jf.at("release").num();
      if (auto jp = jf.opt("path")) {
        std::vector<std::string> names;
        for (std::size_t t = 0; t < jp->size(); ++t) names.push_back(jp->item(t).str());
        try {
          f.path = path_from_names(ins.net, names);
        } catch (const std::invalid_argument& e) {
          jp->fail(e.what());
        }
      }
      cf.flows.push_back(f);
    }
    ins.coflows.push_back(cf);
  }
  try {
    check_instance(ins);
  } catch (const std::invalid_argument& e) {
    c.fail(e.what());
  }
  return ins;
}

// ---- circuit schedule ----
// {stretch, flows: [[{path?: [names], t: [...], rate: [...]}]]}, aligned
// [coflow][flow] with the instance it belongs to.

inline Json schedule_to_json(const Network& net, const CircuitSchedule& sched) {
  Json rows = Json::array();
  for (const auto& per_coflow : sched.flows) {
    Json row = Json::array();
    for (const FlowSchedule& fs : per_coflow) {
      Json jf = Json::object();
      if (!fs.path.empty()) {
        Json names = Json::array();
        for (int v : path_nodes(net, fs.path)) names.push_back(net.node_name(v));
        jf["path"] = names;
      }
      Json t = Json::array(), rate = Json::array();
      for (double x : fs.profile.breakpoints()) t.push_back(x);
      for (double r : fs.profile.rates()) rate.push_back(r);
      jf["t"] = t;
      jf["rate"] = rate;
      row.push_back(jf);
    }
    rows.push_back(row);
  }
  return Json{{"stretch", sched.stretch}, {"flows", rows}};
}

inline CircuitSchedule schedule_from_json(const Json& j, const Network& net,
                                          const std::string& origin = "schedule") {
  const detail::JsonCursor c{&j, origin};
  CircuitSchedule out;
  out.stretch = c.at("stretch").num();
  const detail::JsonCursor rows = c.at("flows");
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const detail::JsonCursor row = rows.item(i);
    std::vector<FlowSchedule> per_coflow;
    for (std::size_t k = 0; k < row.size(); ++k) {
      const detail::JsonCursor jf = row.item(k);
      FlowSchedule fs;
      if (auto jp = jf.opt("path")) {
        std::vector<std::string> names;
        for (std::size_t t = 0; t < jp->size(); ++t) names.push_back(jp->item(t).str());
        try {
          fs.path = path_from_names(net, names);
        } catch (const std::invalid_argument& e) {
          jp->fail(e.what());
        }
      }
      const detail::JsonCursor jt = jf.at("t");
      const detail::JsonCursor jr = jf.at("rate");
      if (jt.size() != jr.size() + (jt.size() ? 1 : 0))
        jt.fail("breakpoint/rate lengths disagree");
      for (std::size_t s = 0; s < jr.size(); ++s) {
        const double a = jt.item(s).num(), b = jt.item(s + 1).num(), r = jr.item(s).num();
        if (r == 0.0) continue;  // add() skips zero rates; interior zeros reappear
        try {
          fs.profile.add(a, b, r);
        } catch (const std::invalid_argument& e) {
          jr.item(s).fail(e.what());
        }
      }
      per_coflow.push_back(fs);
    }
    out.flows.push_back(per_coflow);
  }
  return out;
}

// ---- evaluation report ----

inline Json report_to_json(const ScheduleReport& rep) {
  Json fc = Json::array();
  for (const auto& row : rep.flow_completion) {
    Json jrow = Json::array();
    for (double v : row) jrow.push_back(detail::jnum(v));
    fc.push_back(jrow);
  }
  Json cc = Json::array();
  for (double v : rep.coflow_completion) cc.push_back(detail::jnum(v));
  Json viol = Json::array();
  for (const std::string& v : rep.violations) viol.push_back(v);
  return Json{{"objective", detail::jnum(rep.objective)},
              {"feasible", rep.feasible},
              {"stretch", rep.stretch},
              {"flow_completion", fc},
              {"coflow_completion", cc},
              {"violations", viol}};
}

inline ScheduleReport report_from_json(const Json& j, const std::string& origin = "report") {
  const detail::JsonCursor c{&j, origin};
  ScheduleReport rep;
  rep.objective = c.at("objective").num();
  rep.feasible = c.at("feasible").boolean();
  rep.stretch = c.at("stretch").num();
  const detail::JsonCursor fc = c.at("flow_completion");
  for (std::size_t i = 0; i < fc.size(); ++i) {
    const detail::JsonCursor row = fc.item(i);
    std::vector<double> vals;
    for (std::size_t k = 0; k < row.size(); ++k) vals.push_back(row.item(k).num());
    rep.flow_completion.push_back(vals);
  }
  const detail::JsonCursor cc = c.at("coflow_completion");
  for (std::size_t i = 0; i < cc.size(); ++i) rep.coflow_completion.push_back(cc.item(i).num());
  const detail::JsonCursor viol = c.at("violations");
  for (std::size_t i = 0; i < viol.size(); ++i) rep.violations.push_back(viol.item(i).str());
  return rep;
}

// ---- file wrappers ----

inline void save_instance(const std::string& path, const Instance& ins) {
  save_json(path, instance_to_json(ins));
}
inline Instance load_instance(const std::string& path) {
  return instance_from_json(load_json(path), path);
}
inline void save_schedule(const std::string& path, const Network& net,
                          const CircuitSchedule& sched) {
  save_json(path, schedule_to_json(net, sched));
}
inline CircuitSchedule load_schedule(const std::string& path, const Network& net) {
  return schedule_from_json(load_json(path), net, path);
}
inline void save_report(const std::string& path, const ScheduleReport& rep) {
  save_json(path, report_to_json(rep));
}
inline ScheduleReport load_report(const std::string& path) {
  return report_from_json(load_json(path), path);
}

}  // namespace coflow
