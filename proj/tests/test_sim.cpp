// Simulator and scheme tests: the reference event traces on the triangle
// fixture, plan validation, work conservation, the adjacent-swap exchange
// property, and the four plan-producing schemes with their ordering rules.

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include "coflow/schemes.hpp"
#include "coflow/simulator.hpp"
#include "support.hpp"

using namespace coflow;
using testing_support::triangle_instance;

namespace {

PriorityPlan fixed_plan(const Instance& ins, const std::vector<FlowRef>& order) {
  PriorityPlan plan;
  plan.order = order;
  for (int i = 0; i < static_cast<int>(ins.coflows.size()); ++i) {
    const Coflow& c = ins.coflows[static_cast<std::size_t>(i)];
    for (int j = 0; j < static_cast<int>(c.flows.size()); ++j)
      if (!c.flows[static_cast<std::size_t>(j)].dummy)
        plan.path[{i, j}] = *c.flows[static_cast<std::size_t>(j)].path;
  }
  return plan;
}

}  // namespace

TEST_CASE("simulate replays the two reference orders on the triangle") {
  const Instance ins = triangle_instance();
  const FlowRef a1{0, 0}, a2{0, 1}, b{1, 0}, c{2, 0};

  const SimResult good = simulate(ins, fixed_plan(ins, {b, c, a2, a1}));
  REQUIRE(good.report.feasible);
  CHECK(good.report.objective == Catch::Approx(7.0).margin(1e-9));
  CHECK(good.report.flow_completion[1][0] == Catch::Approx(1.0).margin(1e-9));
  CHECK(good.report.flow_completion[2][0] == Catch::Approx(2.0).margin(1e-9));
  CHECK(good.report.flow_completion[0][1] == Catch::Approx(2.0).margin(1e-9));
  CHECK(good.report.flow_completion[0][0] == Catch::Approx(4.0).margin(1e-9));

  const SimResult bad = simulate(ins, fixed_plan(ins, {a1, a2, b, c}));
  REQUIRE(bad.report.feasible);
  CHECK(bad.report.objective == Catch::Approx(8.0).margin(1e-9));

  const SimResult again = simulate(ins, fixed_plan(ins, {b, c, a2, a1}));
  CHECK(again.report.objective == good.report.objective);
}

TEST_CASE("simulate shifts a lone flow by its release") {
  Network net = Network::build({"s", "t"}, {{"s", "t", 1.0, true}});
  Instance ins;
  ins.net = net;
  Coflow c;
  c.flows.push_back({0, 1, 2.0, 1.5, path_from_names(net, {"s", "t"}), false});
  ins.coflows.push_back(c);
  const SimResult res = simulate(ins, fixed_plan(ins, {{0, 0}}));
  REQUIRE(res.report.feasible);
  CHECK(res.report.objective == Catch::Approx(3.5).margin(1e-9));
}

TEST_CASE("simulate rejects plans that do not cover the instance") {
  const Instance ins = triangle_instance();
  CHECK_THROWS_AS(simulate(ins, fixed_plan(ins, {{0, 0}, {0, 1}, {1, 0}})),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      simulate(ins, fixed_plan(ins, {{0, 0}, {0, 1}, {1, 0}, {2, 0}, {2, 0}})),
      std::invalid_argument);
  PriorityPlan swapped = fixed_plan(ins, {{0, 0}, {0, 1}, {1, 0}, {2, 0}});
  std::swap(swapped.path.at({0, 0}), swapped.path.at({0, 1}));
  CHECK_THROWS_AS(simulate(ins, swapped), std::invalid_argument);
}

TEST_CASE("simulate is work-conserving between events") {
  for (int trial = 0; trial < 10; ++trial) {
    Rng rng(static_cast<std::uint64_t>(7000 + trial));
    const Network net = testing_support::random_digraph(rng, 7, 0.4, 1.0, 3.0);
    Instance ins;
    ins.net = net;
    for (int i = 0; i < 3; ++i) {
      Coflow c;
      c.weight = 1.0;
      for (int j = 0; j < 2; ++j) {
        int src = 0, dst = 0;
        for (int tries = 0; tries < 50 && src == dst; ++tries) {
          src = static_cast<int>(rng.uniform_int(0, net.node_count() - 1));
          dst = static_cast<int>(rng.uniform_int(0, net.node_count() - 1));
          if (src != dst) {
            Rng probe(1);
            try {
              random_simple_path(net, src, dst, probe);
            } catch (const std::runtime_error&) {
              src = dst;  // unreachable pair, draw again
            }
          }
        }
        if (src == dst) {
          src = net.arc(0).tail;
          dst = net.arc(0).head;
        }
        c.flows.push_back({src, dst, 0.5 + 2.0 * rng.uniform(), rng.uniform(0.0, 1.5),
                           std::nullopt, false});
      }
      ins.coflows.push_back(c);
    }
    const PriorityPlan plan = scheme_baseline(ins, static_cast<std::uint64_t>(trial));
    const SimResult res = simulate(ins, plan);
    REQUIRE(res.report.feasible);

    std::set<double> cuts;
    for (const auto& per_coflow : res.schedule.flows)
      for (const auto& fs : per_coflow)
        for (double t : fs.profile.breakpoints()) cuts.insert(t);
    std::vector<double> edges(cuts.begin(), cuts.end());
    for (std::size_t k = 0; k + 1 < edges.size(); ++k) {
      const double mid = 0.5 * (edges[k] + edges[k + 1]);
      std::vector<double> residual(static_cast<std::size_t>(net.arc_count()));
      for (int a = 0; a < net.arc_count(); ++a)
        residual[static_cast<std::size_t>(a)] = net.arc(a).capacity;
      for (FlowRef f : plan.order) {
        const double r = res.schedule.at(f).profile.rate_at(mid);
        for (int a : plan.path.at(f).arcs) residual[static_cast<std::size_t>(a)] -= r;
      }
      for (FlowRef f : plan.order) {
        const FlowRequest& fr = flow_at(ins, f);
        const double done =
            res.report.flow_completion[static_cast<std::size_t>(f.coflow)]
                                      [static_cast<std::size_t>(f.flow)];
        if (fr.release > mid || done < mid) continue;
        if (res.schedule.at(f).profile.rate_at(mid) > 1e-12) continue;
        double bottleneck = std::numeric_limits<double>::infinity();
        for (int a : plan.path.at(f).arcs)
          bottleneck = std::min(bottleneck, residual[static_cast<std::size_t>(a)]);
        CHECK(bottleneck <= 1e-9);
      }
    }
  }
}

TEST_CASE("simulate: smaller flow first never loses on a shared path") {
  Network net = Network::build({"s", "t"}, {{"s", "t", 1.0, true}});
  Rng rng(99);
  for (int trial = 0; trial < 20; ++trial) {
    const double small = 0.5 + rng.uniform();
    const double big = small + rng.uniform(0.1, 2.0);
    Instance ins;
    ins.net = net;
    for (double sigma : {small, big}) {
      Coflow c;
      c.flows.push_back({0, 1, sigma, 0.0, path_from_names(net, {"s", "t"}), false});
      ins.coflows.push_back(c);
    }
    const double ahead =
        simulate(ins, fixed_plan(ins, {{0, 0}, {1, 0}})).report.objective;
    const double behind =
        simulate(ins, fixed_plan(ins, {{1, 0}, {0, 0}})).report.objective;
    CHECK(ahead <= behind + 1e-9);
  }
}

TEST_CASE("scheme_baseline draws seeded routes and orders") {
  const Network diamond = Network::build({"s", "a", "b", "t"}, {{"s", "a", 1.0, true},
                                                                {"a", "t", 1.0, true},
                                                                {"s", "b", 1.0, true},
                                                                {"b", "t", 1.0, true}});
  Instance ins;
  ins.net = diamond;
  Coflow c;
  c.flows.push_back({diamond.node_id("s"), diamond.node_id("t"), 1.0, 0.0, std::nullopt, false});
  ins.coflows.push_back(c);

  const PriorityPlan p1 = scheme_baseline(ins, 42);
  const PriorityPlan p2 = scheme_baseline(ins, 42);
  CHECK(p1.order == p2.order);
  CHECK(p1.path.at({0, 0}).arcs == p2.path.at({0, 0}).arcs);

  std::set<std::vector<int>> seen;
  for (std::uint64_t s = 0; s < 100; ++s)
    seen.insert(scheme_baseline(ins, s).path.at({0, 0}).arcs);
  CHECK(seen.size() == 2);  // both arms of the diamond show up

  const Network line = Network::build({"u", "v", "w"},
                                      {{"u", "v", 1.0, true}, {"v", "w", 1.0, true}});
  Instance single;
  single.net = line;
  Coflow lc;
  lc.flows.push_back({0, 2, 1.0, 0.0, std::nullopt, false});
  single.coflows.push_back(lc);
  for (std::uint64_t s = 0; s < 5; ++s)
    CHECK(scheme_baseline(single, s).path.at({0, 0}).arcs ==
          path_from_names(line, {"u", "v", "w"}).arcs);
}

TEST_CASE("scheme_schedule_only sorts by isolated completion time") {
  const Network net = Network::build({"u", "v", "x", "y"},
                                     {{"u", "v", 2.0, true}, {"x", "y", 1.0, true}});
  Instance ins;
  ins.net = net;
  Coflow fat, thin;
  fat.flows.push_back({net.node_id("u"), net.node_id("v"), 2.0, 0.0,
                       path_from_names(net, {"u", "v"}), false});
  thin.flows.push_back({net.node_id("x"), net.node_id("y"), 1.5, 0.0,
                        path_from_names(net, {"x", "y"}), false});
  ins.coflows = {fat, thin};
  const PriorityPlan plan = scheme_schedule_only(ins, 0);
  // ratios: 2/2 = 1 beats 1.5/1 = 1.5
  CHECK(plan.order == std::vector<FlowRef>{{0, 0}, {1, 0}});

  Instance sizes;
  sizes.net = net;
  Coflow c4, c1;
  c4.flows.push_back({net.node_id("u"), net.node_id("v"), 4.0, 0.0,
                      path_from_names(net, {"u", "v"}), false});
  c1.flows.push_back({net.node_id("u"), net.node_id("v"), 1.0, 0.0,
                      path_from_names(net, {"u", "v"}), false});
  sizes.coflows = {c4, c1};
  CHECK(scheme_schedule_only(sizes, 0).order == std::vector<FlowRef>{{1, 0}, {0, 0}});

  Instance ties;
  ties.net = net;
  ties.coflows = {c1, c1};
  CHECK(scheme_schedule_only(ties, 0).order == std::vector<FlowRef>{{0, 0}, {1, 0}});
}

TEST_CASE("scheme_route_only balances load across equal arms") {
  const Network diamond = Network::build({"s", "a", "b", "t"}, {{"s", "a", 1.0, true},
                                                                {"a", "t", 1.0, true},
                                                                {"s", "b", 1.0, true},
                                                                {"b", "t", 1.0, true}});
  Instance ins;
  ins.net = diamond;
  for (int i = 0; i < 2; ++i) {
    Coflow c;
    c.flows.push_back({diamond.node_id("s"), diamond.node_id("t"), 1.0, 0.0, std::nullopt,
                       false});
    ins.coflows.push_back(c);
  }
  const PriorityPlan plan = scheme_route_only(ins, 0);
  CHECK(plan.order == std::vector<FlowRef>{{0, 0}, {1, 0}});
  CHECK(plan.path.at({0, 0}).arcs != plan.path.at({1, 0}).arcs);

  Instance one;
  one.net = diamond;
  Coflow c;
  c.flows.push_back({diamond.node_id("s"), diamond.node_id("t"), 1.0, 0.0, std::nullopt, false});
  one.coflows.push_back(c);
  CHECK(scheme_route_only(one, 0).path.at({0, 0}).length() == 2);
}

TEST_CASE("scheme_lp_based dominates the other schemes on the triangle") {
  const Instance ins = triangle_instance();
  const double lp_obj = simulate(ins, scheme_lp_based(ins, 0)).report.objective;
  REQUIRE(lp_obj > 0.0);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    CHECK(lp_obj <=
          simulate(ins, scheme_baseline(ins, seed)).report.objective + 1e-9);
    CHECK(lp_obj <=
          simulate(ins, scheme_schedule_only(ins, seed)).report.objective + 1e-9);
    CHECK(lp_obj <=
          simulate(ins, scheme_route_only(ins, seed)).report.objective + 1e-9);
  }
}

TEST_CASE("single free flow lands on the same objective under every scheme") {
  const Network net = Network::build({"x", "y", "z"}, {{"x", "y", 1.0, false},
                                                       {"y", "z", 1.0, false},
                                                       {"x", "z", 1.0, false}});
  Instance ins;
  ins.net = net;
  Coflow c;
  c.flows.push_back({net.node_id("x"), net.node_id("z"), 1.0, 0.0, std::nullopt, false});
  ins.coflows.push_back(c);
  const double base = simulate(ins, scheme_baseline(ins, 3)).report.objective;
  CHECK(simulate(ins, scheme_schedule_only(ins, 3)).report.objective ==
        Catch::Approx(base).margin(1e-9));
  CHECK(simulate(ins, scheme_route_only(ins, 3)).report.objective ==
        Catch::Approx(base).margin(1e-9));
  CHECK(simulate(ins, scheme_lp_based(ins, 3)).report.objective ==
        Catch::Approx(base).margin(1e-9));
}

TEST_CASE("improvement percentages follow the reverse-engineered convention") {
  CHECK(improvement_pct(1.0, 2.26) == Catch::Approx(126.0));
  CHECK(improvement_pct(2.0, 2.0) == 0.0);
  CHECK(improvement_pct(2.0, 3.0) == Catch::Approx(50.0));
  CHECK_THROWS_AS(improvement_pct(0.0, 1.0), std::invalid_argument);

  const auto table = compare({{"lp", 1.0}, {"base", 2.26}});
  CHECK(table.at({"lp", "base"}) == Catch::Approx(126.0));
  CHECK(table.at({"base", "lp"}) == Catch::Approx(100.0 * (1.0 - 2.26) / 2.26));
}
