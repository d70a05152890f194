#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "grove/baselines.hpp"
#include "grove/error.hpp"
#include "grove/grove_model.hpp"
#include "grove/lp_format.hpp"
#include "grove/oracle.hpp"
#include "grove/report.hpp"
#include "grove/scenario_io.hpp"

namespace fs = std::filesystem;
using namespace grove;

namespace {

enum Exit { kOk = 0, kInfeasible = 2, kNoIncumbent = 3, kConfig = 4, kFailure = 1 };

struct Common {
  std::string scenario;
  std::string topology = "du6";
  std::string traffic = "medium";
  std::string city = "istanbul";
  std::string method = "proposed";
  int intervals = 24;
  int month = 6;
  double time_limit = 900.0;
  double gap = 1e-4;
  long node_limit = 0;
  std::uint64_t seed = 1;
  int workers = 1;
  std::string out = ".";
  bool verbose = false;
};

void add_scenario_flags(CLI::App* cmd, Common& c) {
  cmd->add_option("--scenario", c.scenario, "Scenario JSON (generation parameters or a saved instance)");
  cmd->add_option("--topology", c.topology, "du6, du12 or du24");
  cmd->add_option("--traffic", c.traffic, "low, medium or high");
  cmd->add_option("--city", c.city, "stockholm, istanbul, cairo or jakarta");
  cmd->add_option("--intervals", c.intervals, "Intervals per day");
  cmd->add_option("--month", c.month, "Month of the solar profile (1-12)");
  cmd->add_option("--seed", c.seed, "Traffic and delay seed");
}

void add_solver_flags(CLI::App* cmd, Common& c) {
  cmd->add_option("--time-limit", c.time_limit, "Seconds per solve");
  cmd->add_option("--gap", c.gap, "Relative optimality gap");
  cmd->add_option("--workers", c.workers, "Branch-and-bound threads");
  cmd->add_option("--node-limit", c.node_limit, "Stop after this many nodes (0: no limit); unlike the time limit it keeps runs reproducible");
  cmd->add_flag("--verbose", c.verbose, "Log branch-and-bound progress to stderr");
}

ScenarioConfig config_from_flags(const Common& c) {
  ScenarioConfig cfg;
  cfg.preset = topology_preset_from_string(c.topology);
  cfg.tier = traffic_tier_from_string(c.traffic);
  cfg.city = c.city;
  cfg.intervals = c.intervals;
  cfg.month = c.month;
  cfg.seed = c.seed;
  return cfg;
}

Scenario scenario_from_flags(const Common& c) {
  if (!c.scenario.empty()) return load_scenario(c.scenario);
  return generate_scenario(config_from_flags(c));
}

SolverConfig solver_from_flags(const Common& c) {
  SolverConfig s;
  s.time_limit = c.time_limit;
  s.gap = c.gap;
  s.workers = c.workers;
  if (c.node_limit > 0) s.node_limit = c.node_limit;
  s.seed = c.seed;
  if (c.verbose) s.log = &std::cerr;
  s.validate();
  return s;
}

int exit_for(SolveStatus status) {
  switch (status) {
    case SolveStatus::Optimal:
    case SolveStatus::FeasibleGap: return kOk;
    case SolveStatus::Infeasible: return kInfeasible;
    case SolveStatus::TimeLimitNoIncumbent: return kNoIncumbent;
  }
  return kFailure;
}

nlohmann::json decisions_json(const Decisions& d) {
  nlohmann::json j;
  j["active_cu"] = nlohmann::json::array();
  j["active_du"] = nlohmann::json::array();
  j["cu_functions"] = nlohmann::json::array();
  j["paths"] = d.paths;
  for (int t = 0; t < d.intervals(); ++t) {
    j["active_cu"].push_back(d.active_cu_count(t));
    std::vector<int> du, cu_fn;
    for (int r = 0; r < static_cast<int>(d.active_du[static_cast<std::size_t>(t)].rows()); ++r)
      du.push_back(d.active_du_count(t, r));
    const int dpe_cu = static_cast<int>(d.active_cu.cols());
    for (int i = 0; i < static_cast<int>(d.placement[static_cast<std::size_t>(t)].rows()); ++i)
      cu_fn.push_back(d.cu_functions(t, i, dpe_cu));
    j["active_du"].push_back(du);
    j["cu_functions"].push_back(cu_fn);
  }
  return j;
}

void write_method_result(const MethodResult& r, const Scenario& s, const fs::path& dir) {
  fs::create_directories(dir);
  nlohmann::json j;
  j["scenario"] = s.name;
  j["method"] = std::string(to_string(r.method));
  j["status"] = std::string(to_string(r.solve.status));
  j["opex"] = r.opex;
  j["objective"] = r.model_objective;
  j["bound"] = r.solve.bound;
  j["gap"] = r.solve.gap;
  j["nodes"] = r.solve.nodes;
  j["wall_time_s"] = r.solve.wall_time;
  j["peak_memory_kb"] = r.solve.peak_memory_kb;
  j["incumbents"] = r.incumbents;
  j["invalid_incumbents"] = r.invalid_incumbents;
  if (r.decisions) {
    j["decisions"] = decisions_json(*r.decisions);
    std::ofstream lf(dir / (std::string(to_string(r.method)) + "_ledger.csv"));
    write_ledger_csv(r.decisions->ledger, lf);
  }
  std::ofstream f(dir / (std::string(to_string(r.method)) + ".json"));
  if (!f) throw IoError("cannot write into " + dir.string());
  f << j.dump(2) << '\n';
}

void print_result(const MethodResult& r) {
  std::cout << to_string(r.method) << ": " << to_string(r.solve.status) << " opex " << format_number(r.opex)
            << " bound " << format_number(r.solve.bound) << " gap " << format_number(r.solve.gap) << " nodes "
            << r.solve.nodes << " time " << r.solve.wall_time << " s\n";
}

template <class T, class F>
std::vector<T> parse_list(const std::vector<std::string>& items, F parse) {
  std::vector<T> out;
  for (const auto& s : items) out.push_back(parse(s));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Joint function splitting, fronthaul routing and renewable scheduling for C-RAN"};
  app.require_subcommand(1);
  Common c;

  auto* generate = app.add_subcommand("generate", "Write a materialized scenario file");
  add_scenario_flags(generate, c);
  generate->add_option("--out", c.out, "Output directory");

  auto* solve = app.add_subcommand("solve", "Solve one scenario with one method");
  add_scenario_flags(solve, c);
  add_solver_flags(solve, c);
  solve->add_option("--method", c.method, "proposed, static or trafficaware");
  solve->add_option("--out", c.out, "Output directory");

  auto* baseline = app.add_subcommand("baseline", "Solve one scenario with all three methods");
  add_scenario_flags(baseline, c);
  add_solver_flags(baseline, c);
  baseline->add_option("--out", c.out, "Output directory");

  std::uint64_t tiny_seed = 0;
  auto* oracle = app.add_subcommand("oracle", "Exact optimum of a tiny scenario by enumeration");
  oracle->add_option("--scenario", c.scenario, "Scenario JSON");
  oracle->add_option("--tiny-seed", tiny_seed, "Use the random tiny scenario with this seed");
  oracle->add_option("--out", c.out, "Output directory");

  auto* exportcmd = app.add_subcommand("export", "Write the model as LP text");
  add_scenario_flags(exportcmd, c);
  exportcmd->add_option("--method", c.method, "proposed or static (fixes the paths)");
  exportcmd->add_option("--out", c.out, "Output directory");

  std::vector<std::string> cities{"istanbul"}, tiers{"medium"}, topologies{"du6"},
      methods{"proposed", "static", "trafficaware"};
  std::vector<std::uint64_t> seeds{1};
  std::vector<double> solar{1.0};
  std::vector<int> months{1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12};
  int parallel = 1;
  auto* experiment = app.add_subcommand("experiment", "Run a matrix of cells and write plot data");
  add_solver_flags(experiment, c);
  experiment->add_option("--city", cities, "Cities")->delimiter(',');
  experiment->add_option("--traffic", tiers, "Traffic tiers")->delimiter(',');
  experiment->add_option("--topology", topologies, "Topology presets")->delimiter(',');
  experiment->add_option("--method", methods, "Methods")->delimiter(',');
  experiment->add_option("--seed", seeds, "Seeds")->delimiter(',');
  experiment->add_option("--solar", solar, "Solar scale multipliers")->delimiter(',');
  experiment->add_option("--months", months, "Representative months, weighted by length over the year")->delimiter(',');
  experiment->add_option("--intervals", c.intervals, "Intervals per day");
  experiment->add_option("--parallel-cells", parallel, "Cells solved concurrently");
  experiment->add_option("--out", c.out, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    const fs::path out(c.out);
    if (*generate) {
      const Scenario s = scenario_from_flags(c);
      fs::create_directories(out);
      save_scenario(s, out / "scenario.json");
      std::cout << "wrote " << (out / "scenario.json").string() << '\n';
      return kOk;
    }
    if (*solve) {
      const Scenario s = scenario_from_flags(c);
      const MethodResult r = solve_method(method_from_string(c.method), s, solver_from_flags(c));
      print_result(r);
      write_method_result(r, s, out);
      return exit_for(r.solve.status);
    }
    if (*baseline) {
      const Scenario s = scenario_from_flags(c);
      const SolverConfig cfg = solver_from_flags(c);
      int code = kOk;
      for (Method m : {Method::Proposed, Method::StaticRouting, Method::TrafficAware}) {
        const MethodResult r = solve_method(m, s, cfg);
        print_result(r);
        write_method_result(r, s, out);
        if (code == kOk) code = exit_for(r.solve.status);
      }
      return code;
    }
    if (*oracle) {
      const Scenario s = !c.scenario.empty() ? load_scenario(c.scenario) : tiny_scenario(tiny_seed);
      try {
        const OracleResult r = enumerate_optimum(s);
        std::cout << "oracle opex " << format_number(r.opex) << " candidates " << r.candidates << " combinations "
                  << r.combinations << '\n';
        fs::create_directories(out);
        std::ofstream f(out / "oracle.json");
        f << nlohmann::json{{"opex", r.opex}, {"decisions", decisions_json(r.decisions)}}.dump(2) << '\n';
      } catch (const OracleRefusal& e) {
        std::cerr << "refused: " << e.what() << '\n';
        return kConfig;
      } catch (const InfeasibleDecisions& e) {
        std::cerr << "infeasible: " << e.what() << '\n';
        return kInfeasible;
      }
      return kOk;
    }
    if (*exportcmd) {
      const Scenario s = scenario_from_flags(c);
      BuildOptions options;
      if (method_from_string(c.method) == Method::StaticRouting) options.fixed_paths = static_routing_paths(s.topology);
      const GroveModel gm = build_model(s, options);
      fs::create_directories(out);
      export_model(gm.milp, out / "model.lp", s.name);
      std::cout << "wrote " << (out / "model.lp").string() << " (" << gm.milp.variable_count() << " columns, "
                << gm.milp.row_count() << " rows)\n";
      return kOk;
    }
    if (*experiment) {
      ExperimentMatrix m;
      m.cities = cities;
      m.tiers = parse_list<TrafficTier>(tiers, [](const std::string& s) { return traffic_tier_from_string(s); });
      m.topologies =
          parse_list<TopologyPreset>(topologies, [](const std::string& s) { return topology_preset_from_string(s); });
      m.methods = parse_list<Method>(methods, [](const std::string& s) { return method_from_string(s); });
      m.seeds = seeds;
      m.solar = solar;
      m.days = monthly_days(months);
      m.solver = solver_from_flags(c);
      m.parallel_cells = parallel;
      ScenarioConfig defaults;
      defaults.intervals = c.intervals;
      const MetricsBundle bundle = run_experiment(m, defaults, out);
      for (const auto& cell : bundle.cells)
        std::cout << cell.cell.key() << ": " << cell.status() << " annual opex " << format_number(cell.annual_opex())
                  << '\n';
      std::cout << "wrote plot data to " << out.string() << '\n';
      return kOk;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const InvalidArgument& e) {
    std::cerr << "invalid argument: " << e.what() << '\n';
    return kConfig;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kOk;
}
