// Command-line front end for the coflow toolkit.
//
//   gen        seeded workload generation onto a fat tree or a network file
//   solve      run the rounding pipeline matching the instance's mode
//   simulate   build a scheme's priority plan and replay it in the simulator
//   bench      paired sweep benchmark over the four schemes, CSV output
//   lp-export  write the relaxation in textual LP form for external solvers
//
// All artifacts are JSON (instances, schedules, reports) or CSV (benchmarks).
// COFLOW_LOG=1 turns on informational notes to stderr; failures are always
// reported.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "coflow/bench.hpp"
#include "coflow/circuit.hpp"
#include "coflow/generator.hpp"
#include "coflow/io.hpp"
#include "coflow/lp_export.hpp"
#include "coflow/packet.hpp"
#include "coflow/schemes.hpp"
#include "coflow/simulator.hpp"

namespace {

using namespace coflow;

int log_level() {
  const char* v = std::getenv("COFLOW_LOG");
  return v ? std::atoi(v) : 0;
}

void note(const std::string& msg) {
  if (log_level() >= 1) std::cerr << "coflow: " << msg << "\n";
}

// `--config lp.feas_tol=1e-9 --config lp.iter_cap=200000`
SolveOptions parse_config(const std::vector<std::string>& kvs) {
  SolveOptions opt;
  for (const std::string& kv : kvs) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("--config expects key=value, got '" + kv + "'");
    const std::string key = kv.substr(0, eq), val = kv.substr(eq + 1);
    try {
      if (key == "lp.feas_tol")
        opt.feas_tol = std::stod(val);
      else if (key == "lp.iter_cap")
        opt.iter_cap = std::stol(val);
      else
        throw std::invalid_argument("unknown --config key '" + key + "'");
    } catch (const std::logic_error&) {
      throw std::invalid_argument("bad --config value in '" + kv + "'");
    }
  }
  return opt;
}

Network load_topology(const std::string& spec, int k) {
  if (spec == "fat-tree") return fat_tree(k);
  return network_from_json(load_json(spec), spec);
}

void emit_json(const std::string& out, const Json& j) {
  if (out.empty())
    std::cout << j.dump(2) << "\n";
  else
    save_json(out, j);
}

// Mirrors schedule_packets_free's release-aware default horizon.
int packet_horizon(const Instance& ins, int cap) {
  int npackets = 0, rmax = 0;
  for (FlowRef r : flow_refs(ins, false)) {
    const FlowRequest& f = flow_at(ins, r);
    if (f.dummy) continue;
    ++npackets;
    rmax = std::max(rmax, static_cast<int>(std::llround(f.release)));
  }
  return std::min(cap, rmax + std::max(1, ins.net.arc_count() * npackets));
}

bool all_paths_given(const Instance& ins) {
  for (const auto& c : ins.coflows)
    for (const auto& f : c.flows)
      if (!f.dummy && !f.path) return false;
  return true;
}

Json circuit_result_json(const Instance& ins, const RoundingResult& r) {
  return Json{{"mode", mode_name(ins.mode)},
              {"objective", detail::jnum(r.report.objective)},
              {"lp_objective", r.lp_objective},
              {"lp_iterations", r.lp_iterations},
              {"stretch", r.schedule.stretch},
              {"overload", r.congestion.overload},
              {"feasible", r.report.feasible},
              {"report", report_to_json(r.report)},
              {"schedule", schedule_to_json(ins.net, r.schedule)}};
}

Json packet_result_json(const Instance& ins, const PacketResult& r) {
  Json packets = Json::array();
  for (const auto& [f, tr] : r.schedule.packets) {
    Json nodes = Json::array();
    for (int v : tr.node) nodes.push_back(ins.net.node_name(v));
    packets.push_back({{"coflow", f.coflow},
                       {"flow", f.flow},
                       {"release", tr.release},
                       {"completion", tr.completion},
                       {"nodes", nodes}});
  }
  return Json{{"mode", "packet"},
              {"objective", detail::jnum(r.report.objective)},
              {"lp_objective", r.lp_objective},
              {"lp_iterations", r.lp_iterations},
              {"kappa", r.kappa},
              {"kappa_prime", r.kappa_prime},
              {"lp_ordered", r.lp_ordered},
              {"makespan", r.schedule.makespan},
              {"feasible", r.report.feasible},
              {"report", report_to_json(r.report)},
              {"packets", packets}};
}

// Rebuilds the LP a given mode's pipeline would solve.
LpProblem build_mode_lp(const Instance& instance, Mode mode, double eps, int horizon_cap) {
  Instance ins = add_dummy_flows(instance);
  ins.mode = mode;
  switch (mode) {
    case Mode::circuit_given:
      return build_circuit_given_paths_lp(
          ins, make_grid(GridKind::circuit, eps, default_horizon(ins)));
    case Mode::circuit_routing:
      return build_circuit_routing_lp(ins,
                                      make_grid(GridKind::circuit, 1.0, default_horizon(ins)));
    case Mode::packet: {
      const int T = packet_horizon(ins, horizon_cap);
      return build_packet_lp(ins, make_grid(GridKind::packet, 1.0, static_cast<double>(T)), T,
                             horizon_cap);
    }
  }
  throw std::logic_error("unreachable mode");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"coflow scheduling toolkit: interval-LP rounding, packet scheduling, "
               "flow simulation and benchmarks"};
  app.require_subcommand(1);

  const std::vector<std::string> mode_names = {"circuit-given", "circuit-routing", "packet"};

  // gen
  std::string gen_topology = "fat-tree", gen_mode = "circuit-routing", gen_out;
  GenParams gen_params;
  auto* gen = app.add_subcommand("gen", "generate a seeded random instance");
  gen->add_option("--topology", gen_topology, "'fat-tree' or a network JSON file")
      ->capture_default_str();
  gen->add_option("--k", gen_params.fat_tree_k, "fat-tree arity (even)")->capture_default_str();
  gen->add_option("-n,--coflows", gen_params.coflows, "number of coflows")->capture_default_str();
  gen->add_option("-w,--width", gen_params.width, "flows per coflow")->capture_default_str();
  gen->add_option("--mean-size", gen_params.mean_size, "Poisson mean, sizes are drawn +1")
      ->capture_default_str();
  gen->add_option("--mean-release", gen_params.mean_release, "Poisson mean for releases")
      ->capture_default_str();
  gen->add_option("--mean-weight", gen_params.mean_weight, "Poisson mean, weights are drawn +1")
      ->capture_default_str();
  gen->add_option("--seed", gen_params.seed, "generator seed")->capture_default_str();
  gen->add_option("--mode", gen_mode, "instance mode")
      ->check(CLI::IsMember(mode_names))
      ->capture_default_str();
  gen->add_option("--out", gen_out, "output instance file (default: stdout)");
  gen->callback([&] {
    gen_params.mode = mode_from_name(gen_mode);
    const Network net = load_topology(gen_topology, gen_params.fat_tree_k);
    const Instance ins = gen_instance(gen_params, net);
    note("generated " + std::to_string(ins.coflows.size()) + " coflows x " +
         std::to_string(gen_params.width) + " flows on " + std::to_string(net.node_count()) +
         " nodes");
    emit_json(gen_out, instance_to_json(ins));
  });

  // solve
  std::string solve_in, solve_mode, solve_out, solve_lp_dump;
  std::vector<std::string> solve_config;
  RoundingParams solve_params;
  std::uint64_t solve_seed = 0;
  int solve_horizon_cap = kDefaultTegCap;
  auto* solve_cmd = app.add_subcommand("solve", "run the mode's rounding pipeline");
  solve_cmd->add_option("--in", solve_in, "instance JSON file")->required();
  solve_cmd->add_option("--mode", solve_mode, "override the instance's mode")
      ->check(CLI::IsMember(mode_names));
  solve_cmd->add_option("--alpha", solve_params.alpha, "anchor mass fraction (circuit-given)")
      ->capture_default_str();
  solve_cmd->add_option("--disp", solve_params.displacement, "displacement D (circuit-given)")
      ->capture_default_str();
  solve_cmd
      ->add_option("--epsilon", solve_params.eps,
                   "interval growth (circuit-given; routing and packet pin eps = 1)")
      ->capture_default_str();
  solve_cmd->add_option("--seed", solve_seed, "rounding/sampling seed")->capture_default_str();
  solve_cmd->add_option("--horizon-cap", solve_horizon_cap, "packet time-expansion ceiling")
      ->capture_default_str();
  solve_cmd->add_option("--config", solve_config, "solver overrides (lp.feas_tol, lp.iter_cap)");
  solve_cmd->add_option("--lp-dump", solve_lp_dump, "also export the LP to this file");
  solve_cmd->add_option("--out", solve_out, "result JSON file (default: stdout)");
  solve_cmd->callback([&] {
    Instance ins = load_instance(solve_in);
    if (!solve_mode.empty()) ins.mode = mode_from_name(solve_mode);
    const SolveOptions lp = parse_config(solve_config);
    if (!solve_lp_dump.empty()) {
      const LpProblem p = build_mode_lp(ins, ins.mode, solve_params.eps, solve_horizon_cap);
      export_lp(p, solve_lp_dump);
      note("LP dumped: " + std::to_string(p.row_count()) + " rows, " +
           std::to_string(p.var_count()) + " columns");
    }
    Json result;
    if (ins.mode == Mode::circuit_given) {
      solve_params.seed = solve_seed;
      result = circuit_result_json(ins, schedule_given_paths(ins, solve_params, lp));
    } else if (ins.mode == Mode::circuit_routing) {
      result = circuit_result_json(ins, schedule_routing(ins, solve_seed, lp));
    } else {
      PacketOptions opt;
      opt.seed = solve_seed;
      opt.horizon_cap = solve_horizon_cap;
      opt.lp = lp;
      result = packet_result_json(ins, all_paths_given(ins) ? schedule_packets_given(ins, opt)
                                                            : schedule_packets_free(ins, opt));
    }
    emit_json(solve_out, result);
    if (!solve_out.empty())
      std::cout << "objective " << result["objective"].dump() << ", lp "
                << result["lp_objective"].dump() << ", feasible "
                << result["feasible"].dump() << "\n";
  });

  // simulate
  std::string sim_in, sim_scheme = "lp-based", sim_out;
  std::uint64_t sim_seed = 0;
  auto* sim_cmd = app.add_subcommand("simulate", "replay a scheme's plan in the simulator");
  sim_cmd->add_option("--in", sim_in, "instance JSON file")->required();
  sim_cmd->add_option("--scheme", sim_scheme, "plan-producing scheme")
      ->check(CLI::IsMember(scheme_names()))
      ->capture_default_str();
  sim_cmd->add_option("--seed", sim_seed, "scheme seed")->capture_default_str();
  sim_cmd->add_option("--out", sim_out, "result JSON file (default: stdout)");
  sim_cmd->callback([&] {
    const Instance ins = load_instance(sim_in);
    const SimResult res = simulate(ins, run_scheme(sim_scheme, ins, sim_seed));
    double makespan = 0.0;
    for (double c : res.report.coflow_completion) makespan = std::max(makespan, c);
    emit_json(sim_out, Json{{"scheme", sim_scheme},
                            {"seed", sim_seed},
                            {"objective", detail::jnum(res.report.objective)},
                            {"makespan", detail::jnum(makespan)},
                            {"stretch", res.report.stretch},
                            {"feasible", res.report.feasible},
                            {"report", report_to_json(res.report)}});
  });

  // bench
  RunConfig bench_cfg;
  std::string bench_out;
  auto* bench_cmd = app.add_subcommand("bench", "paired scheme benchmark, CSV output");
  bench_cmd->add_option("--out", bench_out, "output directory")->required();
  bench_cmd->add_option("--k", bench_cfg.fat_tree_k, "fat-tree arity")->capture_default_str();
  bench_cmd->add_option("--reps", bench_cfg.reps, "repetitions per cell")->capture_default_str();
  bench_cmd->add_option("--seed", bench_cfg.seed, "base seed")->capture_default_str();
  bench_cmd->add_option("--widths", bench_cfg.widths, "width sweep cells")
      ->delimiter(',')
      ->capture_default_str();
  bench_cmd
      ->add_option("--width-coflows", bench_cfg.width_sweep_coflows,
                   "coflow count during the width sweep")
      ->capture_default_str();
  bench_cmd->add_option("--counts", bench_cfg.counts, "coflow-count sweep cells")
      ->delimiter(',')
      ->capture_default_str();
  bench_cmd
      ->add_option("--count-width", bench_cfg.count_sweep_width,
                   "coflow width during the count sweep")
      ->capture_default_str();
  bench_cmd->add_option("--mean-size", bench_cfg.mean_size, "Poisson mean, sizes drawn +1")
      ->capture_default_str();
  bench_cmd->add_option("--mean-release", bench_cfg.mean_release, "Poisson mean for releases")
      ->capture_default_str();
  bench_cmd->add_option("--mean-weight", bench_cfg.mean_weight, "Poisson mean, weights drawn +1")
      ->capture_default_str();
  bench_cmd->callback([&] {
    std::filesystem::create_directories(bench_out);
    const BenchResults res = run_bench(bench_cfg, &std::cerr);
    const auto write = [&](const std::string& name, auto&& writer) {
      const std::string path = bench_out + "/" + name;
      std::ofstream os(path);
      if (!os) throw std::runtime_error("cannot write " + path);
      writer(os);
      note("wrote " + path);
    };
    write("records.csv", [&](std::ostream& os) { write_records_csv(os, res.records); });
    write("width_sweep.csv", [&](std::ostream& os) {
      std::vector<CellSummary> rows;
      for (const CellSummary& c : res.summary)
        if (c.cell == "width") rows.push_back(c);
      write_summary_csv(os, rows);
    });
    write("count_sweep.csv", [&](std::ostream& os) {
      std::vector<CellSummary> rows;
      for (const CellSummary& c : res.summary)
        if (c.cell == "count") rows.push_back(c);
      write_summary_csv(os, rows);
    });
    std::ostringstream table;
    write_summary_csv(table, res.summary);
    std::cout << table.str();
  });

  // lp-export
  std::string lpx_in, lpx_mode, lpx_out;
  double lpx_eps = kCanonicalEps;
  int lpx_horizon_cap = kDefaultTegCap;
  auto* lpx_cmd = app.add_subcommand("lp-export", "write the relaxation in textual LP form");
  lpx_cmd->add_option("--in", lpx_in, "instance JSON file")->required();
  lpx_cmd->add_option("--mode", lpx_mode, "override the instance's mode")
      ->check(CLI::IsMember(mode_names));
  lpx_cmd->add_option("--epsilon", lpx_eps, "interval growth (circuit-given only)")
      ->capture_default_str();
  lpx_cmd->add_option("--horizon-cap", lpx_horizon_cap, "packet time-expansion ceiling")
      ->capture_default_str();
  lpx_cmd->add_option("--out", lpx_out, "LP output file")->required();
  lpx_cmd->callback([&] {
    Instance ins = load_instance(lpx_in);
    const Mode mode = lpx_mode.empty() ? ins.mode : mode_from_name(lpx_mode);
    const LpProblem p = build_mode_lp(ins, mode, lpx_eps, lpx_horizon_cap);
    export_lp(p, lpx_out);
    std::cout << "wrote " << lpx_out << ": " << p.row_count() << " rows, " << p.var_count()
              << " columns\n";
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "coflow: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
