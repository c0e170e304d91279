#pragma once

// Seeded workload generator: n coflows of w flows each over a fat tree (or
// any provided network), endpoints drawn uniformly over distinct server
// pairs, sizes and weights Poisson-shifted by +1 so nothing degenerates to
// zero, releases plain Poisson (0 allowed). The Poisson means are tunable;
// the defaults are artifact choices, not measurements.
//
// Packet-mode instances force unit flow sizes, since the packet pipeline
// models one packet per flow; releases stay Poisson (they are integral).

#include <cstdint>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "coflow/instance.hpp"
#include "coflow/network.hpp"
#include "coflow/rng.hpp"

namespace coflow {

struct GenParams {
  int fat_tree_k = 4;       // arity when no network is supplied
  int coflows = 10;         // n
  int width = 16;           // w, flows per coflow
  double mean_size = 10.0;  // Poisson means; size/weight are drawn +1
  double mean_release = 5.0;
  double mean_weight = 2.0;
  std::uint64_t seed = 0;
  Mode mode = Mode::circuit_routing;
};

inline void check_gen_params(const GenParams& p) {
  if (p.coflows < 1) throw std::invalid_argument("generator: coflow count must be >= 1");
  if (p.width < 1) throw std::invalid_argument("generator: width must be >= 1");
  if (!(p.mean_size > 0.0 && p.mean_release > 0.0 && p.mean_weight > 0.0))
    throw std::invalid_argument("generator: Poisson means must be positive");
}

// Endpoint pool: the network's servers when it has any (fat-tree naming),
// otherwise every node.
inline std::vector<int> endpoint_nodes(const Network& net) {
  std::vector<int> servers = server_nodes(net);
  if (!servers.empty()) return servers;
  std::vector<int> all;
  for (int v = 0; v < net.node_count(); ++v) all.push_back(v);
  return all;
}

inline Instance gen_instance(const GenParams& p, const Network& net) {
  check_gen_params(p);
  const std::vector<int> pool = endpoint_nodes(net);
  const long pairs = static_cast<long>(pool.size()) * (static_cast<long>(pool.size()) - 1);
  if (static_cast<long>(p.width) > pairs)
    throw std::invalid_argument("generator: width " + std::to_string(p.width) + " exceeds the " +
                                std::to_string(pairs) + " distinct server pairs");
  Rng rng(p.seed);
  const auto draw = [&] {
    return pool[static_cast<std::size_t>(
        rng.uniform_int(0, static_cast<std::int64_t>(pool.size()) - 1))];
  };
  Instance ins;
  ins.net = net;
  ins.mode = p.mode;
  for (int i = 0; i < p.coflows; ++i) {
    Coflow c;
    c.weight = static_cast<double>(rng.poisson(p.mean_weight) + 1);
    std::set<std::pair<int, int>> used;
    for (int j = 0; j < p.width; ++j) {
      int src = draw(), dst = draw();
      while (src == dst || used.count({src, dst})) {
        src = draw();
        dst = draw();
      }
      used.insert({src, dst});
      FlowRequest f;
      f.src = src;
      f.dst = dst;
      f.size = p.mode == Mode::packet ? 1.0 : static_cast<double>(rng.poisson(p.mean_size) + 1);
      f.release = static_cast<double>(rng.poisson(p.mean_release));
      c.flows.push_back(f);
    }
    ins.coflows.push_back(c);
  }
  check_instance(ins);
  return ins;
}

inline Instance gen_instance(const GenParams& p) {
  return gen_instance(p, fat_tree(p.fat_tree_k));
}

}  // namespace coflow
