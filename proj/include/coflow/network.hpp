#pragma once

// Directed capacitated networks plus the path/flow utilities the scheduling
// pipelines are built on:
//   - validated construction from edge lists (undirected edges become two
//     opposite arcs, each carrying the full capacity),
//   - k-ary fat-tree generation,
//   - widest (max-bottleneck) path search,
//   - decomposition of a single-commodity flow into weighted paths, greedily
//     extracting the thickest path first; any circulation left over is
//     discarded and reported, never silently kept.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace coflow {

struct Arc {
  int tail = -1;
  int head = -1;
  double capacity = 0.0;
};

struct EdgeSpec {
  std::string from;
  std::string to;
  double capacity = 1.0;
  bool directed = false;
};

class Network {
 public:
  static Network build(const std::vector<std::string>& nodes,
                       const std::vector<EdgeSpec>& edges) {
    if (nodes.empty()) throw std::invalid_argument("network: no nodes");
    Network net;
    for (const auto& name : nodes) {
      if (name.empty()) throw std::invalid_argument("network: empty node name");
      if (net.index_.count(name)) throw std::invalid_argument("network: duplicate node " + name);
      net.index_.emplace(name, static_cast<int>(net.names_.size()));
      net.names_.push_back(name);
    }
    for (const auto& e : edges) {
      const int u = net.node_id(e.from);
      const int v = net.node_id(e.to);
      if (u == v) throw std::invalid_argument("network: self-loop at " + e.from);
      if (e.capacity <= 0.0)
        throw std::invalid_argument("network: non-positive capacity on " + e.from + "->" + e.to);
      net.add_arc(u, v, e.capacity);
      if (!e.directed) net.add_arc(v, u, e.capacity);
    }
    net.out_.assign(net.names_.size(), {});
    net.in_.assign(net.names_.size(), {});
    for (int a = 0; a < net.arc_count(); ++a) {
      net.out_[net.arcs_[a].tail].push_back(a);
      net.in_[net.arcs_[a].head].push_back(a);
    }
    return net;
  }

  int node_count() const { return static_cast<int>(names_.size()); }
  int arc_count() const { return static_cast<int>(arcs_.size()); }

  int node_id(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw std::invalid_argument("network: unknown node " + name);
    return it->second;
  }
  bool has_node(const std::string& name) const { return index_.count(name) > 0; }
  const std::string& node_name(int v) const { return names_.at(static_cast<std::size_t>(v)); }

  const Arc& arc(int a) const { return arcs_.at(static_cast<std::size_t>(a)); }
  const std::vector<Arc>& arcs() const { return arcs_; }
  const std::vector<int>& out_arcs(int v) const { return out_.at(static_cast<std::size_t>(v)); }
  const std::vector<int>& in_arcs(int v) const { return in_.at(static_cast<std::size_t>(v)); }

  std::optional<int> find_arc(int tail, int head) const {
    for (int a : out_[static_cast<std::size_t>(tail)])
      if (arcs_[static_cast<std::size_t>(a)].head == head) return a;
    return std::nullopt;
  }

 private:
  void add_arc(int u, int v, double cap) {
    if (arc_set_.count(key(u, v)))
      throw std::invalid_argument("network: duplicate arc " + names_[static_cast<std::size_t>(u)] +
                                  "->" + names_[static_cast<std::size_t>(v)]);
    arc_set_.insert(key(u, v));
    arcs_.push_back({u, v, cap});
  }

  static std::uint64_t key(int u, int v) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(u)) << 32) |
           static_cast<std::uint32_t>(v);
  }

  std::vector<std::string> names_;
  std::unordered_map<std::string, int> index_;
  std::vector<Arc> arcs_;
  std::vector<std::vector<int>> out_, in_;
  std::unordered_set<std::uint64_t> arc_set_;
};

// A simple directed path stored as consecutive arc ids.
struct Path {
  std::vector<int> arcs;

  bool empty() const { return arcs.empty(); }
  int length() const { return static_cast<int>(arcs.size()); }
};

inline Path make_path(const Network& net, const std::vector<int>& node_seq) {
  if (node_seq.size() < 2) throw std::invalid_argument("path: need at least two nodes");
  Path p;
  std::vector<char> seen(static_cast<std::size_t>(net.node_count()), 0);
  seen[static_cast<std::size_t>(node_seq.front())] = 1;
  for (std::size_t i = 0; i + 1 < node_seq.size(); ++i) {
    auto a = net.find_arc(node_seq[i], node_seq[i + 1]);
    if (!a) throw std::invalid_argument("path: missing arc " + net.node_name(node_seq[i]) + "->" +
                                        net.node_name(node_seq[i + 1]));
    if (seen[static_cast<std::size_t>(node_seq[i + 1])])
      throw std::invalid_argument("path: repeated node " + net.node_name(node_seq[i + 1]));
    seen[static_cast<std::size_t>(node_seq[i + 1])] = 1;
    p.arcs.push_back(*a);
  }
  return p;
}

inline Path path_from_names(const Network& net, const std::vector<std::string>& names) {
  std::vector<int> seq;
  seq.reserve(names.size());
  for (const auto& n : names) seq.push_back(net.node_id(n));
  return make_path(net, seq);
}

inline int path_source(const Network& net, const Path& p) {
  if (p.empty()) throw std::invalid_argument("path: empty");
  return net.arc(p.arcs.front()).tail;
}

inline int path_target(const Network& net, const Path& p) {
  if (p.empty()) throw std::invalid_argument("path: empty");
  return net.arc(p.arcs.back()).head;
}

inline std::vector<int> path_nodes(const Network& net, const Path& p) {
  std::vector<int> seq{path_source(net, p)};
  for (int a : p.arcs) seq.push_back(net.arc(a).head);
  return seq;
}

// Checks arc chaining and simplicity; throws on the first defect.
inline void validate_path(const Network& net, const Path& p) {
  (void)path_nodes(net, p);  // throws via arc lookups
  std::vector<char> seen(static_cast<std::size_t>(net.node_count()), 0);
  int prev_head = net.arc(p.arcs.front()).tail;
  seen[static_cast<std::size_t>(prev_head)] = 1;
  for (int a : p.arcs) {
    const Arc& arc = net.arc(a);
    if (arc.tail != prev_head) throw std::invalid_argument("path: arcs do not chain");
    if (seen[static_cast<std::size_t>(arc.head)])
      throw std::invalid_argument("path: repeated node " + net.node_name(arc.head));
    seen[static_cast<std::size_t>(arc.head)] = 1;
    prev_head = arc.head;
  }
}

inline double bottleneck(const Network& net, const Path& p) {
  if (p.empty()) throw std::invalid_argument("bottleneck: empty path");
  double b = std::numeric_limits<double>::infinity();
  for (int a : p.arcs) b = std::min(b, net.arc(a).capacity);
  return b;
}

// Three-level k-ary fat tree with unit-capacity undirected links by default:
// (k/2)^2 core switches, k pods of k/2 aggregation plus k/2 edge switches,
// and k/2 servers per edge switch (k^3/4 servers, 5k^2/4 switches total).
inline Network fat_tree(int k, double capacity = 1.0) {
  if (k < 2 || k % 2 != 0) throw std::invalid_argument("fat_tree: k must be even and >= 2");
  const int half = k / 2;
  std::vector<std::string> nodes;
  std::vector<EdgeSpec> edges;
  for (int g = 0; g < half; ++g)
    for (int i = 0; i < half; ++i) nodes.push_back("core_" + std::to_string(g) + "_" + std::to_string(i));
  for (int p = 0; p < k; ++p) {
    for (int j = 0; j < half; ++j) nodes.push_back("agg_" + std::to_string(p) + "_" + std::to_string(j));
    for (int i = 0; i < half; ++i) nodes.push_back("edge_" + std::to_string(p) + "_" + std::to_string(i));
    for (int i = 0; i < half; ++i)
      for (int s = 0; s < half; ++s)
        nodes.push_back("srv_" + std::to_string(p) + "_" + std::to_string(i) + "_" + std::to_string(s));
  }
  for (int p = 0; p < k; ++p) {
    const std::string pod = std::to_string(p);
    for (int j = 0; j < half; ++j) {
      const std::string agg = "agg_" + pod + "_" + std::to_string(j);
      // aggregation switch j reaches core group j
      for (int i = 0; i < half; ++i)
        edges.push_back({agg, "core_" + std::to_string(j) + "_" + std::to_string(i), capacity, false});
      for (int i = 0; i < half; ++i)
        edges.push_back({agg, "edge_" + pod + "_" + std::to_string(i), capacity, false});
    }
    for (int i = 0; i < half; ++i)
      for (int s = 0; s < half; ++s)
        edges.push_back({"edge_" + pod + "_" + std::to_string(i),
                         "srv_" + pod + "_" + std::to_string(i) + "_" + std::to_string(s), capacity,
                         false});
  }
  return Network::build(nodes, edges);
}

inline std::vector<int> server_nodes(const Network& net) {
  std::vector<int> out;
  for (int v = 0; v < net.node_count(); ++v)
    if (net.node_name(v).rfind("srv_", 0) == 0) out.push_back(v);
  return out;
}

// Single-commodity flow given as one amount per arc.
struct EdgeFlow {
  int src = -1;
  int dst = -1;
  double value = 0.0;
  std::vector<double> amount;  // indexed by arc id
};

struct WeightedPath {
  Path path;
  double amount = 0.0;
};

struct Decomposition {
  std::vector<WeightedPath> paths;
  double cycle_residue = 0.0;  // total arc mass discarded as circulation
};

namespace detail {

// Widest-path search over arcs whose weight exceeds `floor`. Width of a path
// is the minimum arc weight; ties between equally wide frontier nodes break
// toward the lexicographically smaller node name so results are reproducible.
inline std::optional<Path> widest_path(const Network& net, const std::vector<double>& weight,
                                       int src, int dst, double floor) {
  const int n = net.node_count();
  std::vector<double> width(static_cast<std::size_t>(n), 0.0);
  std::vector<int> pred(static_cast<std::size_t>(n), -1);
  std::vector<char> done(static_cast<std::size_t>(n), 0);
  width[static_cast<std::size_t>(src)] = std::numeric_limits<double>::infinity();
  for (;;) {
    int best = -1;
    for (int v = 0; v < n; ++v) {
      if (done[static_cast<std::size_t>(v)] || width[static_cast<std::size_t>(v)] <= floor) continue;
      if (best < 0 || width[static_cast<std::size_t>(v)] > width[static_cast<std::size_t>(best)] ||
          (width[static_cast<std::size_t>(v)] == width[static_cast<std::size_t>(best)] &&
           net.node_name(v) < net.node_name(best)))
        best = v;
    }
    if (best < 0) return std::nullopt;
    if (best == dst) break;
    done[static_cast<std::size_t>(best)] = 1;
    for (int a : net.out_arcs(best)) {
      const Arc& arc = net.arc(a);
      if (weight[static_cast<std::size_t>(a)] <= floor) continue;
      const double w = std::min(width[static_cast<std::size_t>(best)], weight[static_cast<std::size_t>(a)]);
      if (w > width[static_cast<std::size_t>(arc.head)]) {
        width[static_cast<std::size_t>(arc.head)] = w;
        pred[static_cast<std::size_t>(arc.head)] = a;
      }
    }
  }
  Path p;
  for (int v = dst; v != src;) {
    const int a = pred[static_cast<std::size_t>(v)];
    p.arcs.push_back(a);
    v = net.arc(a).tail;
  }
  std::reverse(p.arcs.begin(), p.arcs.end());
  return p;
}

}  // namespace detail

// Widest src->dst path under arc capacities; nullopt when dst is unreachable.
inline std::optional<Path> widest_path(const Network& net, int src, int dst) {
  std::vector<double> caps(static_cast<std::size_t>(net.arc_count()));
  for (int a = 0; a < net.arc_count(); ++a) caps[static_cast<std::size_t>(a)] = net.arc(a).capacity;
  return detail::widest_path(net, caps, src, dst, 0.0);
}

// Peels thickest paths off `flow` until no src->dst mass is left. Path count
// never exceeds the number of initially positive arcs, the amounts add up to
// the flow value, and whatever remains (necessarily circulation) is returned
// as cycle_residue.
inline Decomposition decompose_flow(const Network& net, const EdgeFlow& flow, double tol = 1e-12) {
  if (flow.src < 0 || flow.dst < 0 || flow.src == flow.dst)
    throw std::invalid_argument("decompose_flow: bad endpoints");
  if (flow.amount.size() != static_cast<std::size_t>(net.arc_count()))
    throw std::invalid_argument("decompose_flow: amount vector size mismatch");
  std::vector<double> rem = flow.amount;
  for (double a : rem)
    if (a < -tol) throw std::invalid_argument("decompose_flow: negative arc amount");
  Decomposition out;
  for (;;) {
    auto p = detail::widest_path(net, rem, flow.src, flow.dst, tol);
    if (!p) break;
    double w = std::numeric_limits<double>::infinity();
    for (int a : p->arcs) w = std::min(w, rem[static_cast<std::size_t>(a)]);
    for (int a : p->arcs) rem[static_cast<std::size_t>(a)] -= w;
    out.paths.push_back({std::move(*p), w});
  }
  for (double a : rem) out.cycle_residue += std::max(a, 0.0);
  return out;
}

}  // namespace coflow
