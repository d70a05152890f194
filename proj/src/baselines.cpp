#include "grove/baselines.hpp"

#include <cmath>
#include <string>

#include "grove/error.hpp"
#include "grove/heuristic.hpp"

namespace grove {

std::string_view to_string(Method method) {
  switch (method) {
    case Method::Proposed: return "proposed";
    case Method::StaticRouting: return "static-routing";
    case Method::TrafficAware: return "traffic-aware";
  }
  return "?";
}

Method method_from_string(std::string_view text) {
  if (text == "proposed" || text == "grove") return Method::Proposed;
  if (text == "static-routing" || text == "static") return Method::StaticRouting;
  if (text == "traffic-aware" || text == "trafficaware") return Method::TrafficAware;
  throw InvalidArgument("unknown method '" + std::string(text) + "'");
}

std::vector<std::vector<int>> static_routing_paths(const NetworkTopology& topology) {
  const auto hops = topology.hops_to_cu();
  std::vector<std::vector<int>> paths;
  for (int r = 0; r < topology.du_count(); ++r) {
    int v = topology.du_node(r);
    if (hops[static_cast<std::size_t>(v)] < 0)
      throw TopologyError("DU " + std::to_string(r) + " cannot reach the CU");
    std::vector<int> path;
    while (v != topology.cu_node()) {
      int best = -1;
      for (int e : topology.out_arcs(v)) {
        const int w = topology.arcs()[static_cast<std::size_t>(e)].to;
        if (hops[static_cast<std::size_t>(w)] != hops[static_cast<std::size_t>(v)] - 1) continue;
        if (best < 0 || w < topology.arcs()[static_cast<std::size_t>(best)].to) best = e;
      }
      path.push_back(best);
      v = topology.arcs()[static_cast<std::size_t>(best)].to;
    }
    paths.push_back(std::move(path));
  }
  return paths;
}

namespace {

MethodResult run(Method method, const Scenario& scenario, const SolverConfig& config, const BuildOptions& options) {
  MethodResult out;
  out.method = method;
  const GroveModel gm = build_model(scenario, options);
  out.variables = gm.milp.variable_count();
  out.constraints = gm.milp.row_count();
  for (int j = 0; j < out.variables; ++j) out.integer_variables += gm.milp.variable(j).kind != VarKind::Continuous;
  GroveHeuristic heuristic(gm, scenario);
  SolveHooks hooks;
  hooks.heuristic = [&](const HeuristicContext& ctx) { return heuristic(ctx); };
  hooks.on_incumbent = [&](const Eigen::VectorXd& x, double) {
    ++out.incumbents;
    std::string problem;
    try {
      const ValidationReport report = validate_solution(extract_decisions(gm, scenario, x), scenario);
      if (report.feasible()) return;
      problem = report.summary(1);
    } catch (const Error& err) {
      problem = err.what();
    }
    if (out.invalid_incumbents++ == 0) out.first_violation = problem;
  };
  out.solve = branch_and_bound(gm.milp, config, hooks);
  if (out.solve.has_incumbent()) {
    out.decisions = extract_decisions(gm, scenario, out.solve.x);
    out.model_objective = out.solve.objective;
    out.opex = opex(*out.decisions, scenario);
  }
  return out;
}

}  // namespace

MethodResult solve_proposed(const Scenario& scenario, const SolverConfig& config) {
  return run(Method::Proposed, scenario, config, {});
}

MethodResult solve_static_routing(const Scenario& scenario, const SolverConfig& config) {
  BuildOptions options;
  options.fixed_paths = static_routing_paths(scenario.topology);
  return run(Method::StaticRouting, scenario, config, options);
}

MethodResult solve_traffic_aware(const Scenario& scenario, const SolverConfig& config) {
  Scenario blind = scenario;
  EnergyParams& e = blind.energy;
  e.solar_scale_cu = 0.0;
  e.solar_scale_du = 0.0;
  e.battery_cu_kwh = 0.0;
  e.battery_du_kwh = 0.0;
  e.initial_cu_kwh = 0.0;
  e.initial_du_kwh = 0.0;
  MethodResult out = run(Method::TrafficAware, blind, config, {});
  out.method = Method::TrafficAware;
  if (!out.decisions) return out;

  Decisions& d = *out.decisions;
  const int R = scenario.du_count();
  const int T = scenario.intervals;
  const EnergyParams& real = scenario.energy;
  Eigen::MatrixXd generation(R + 1, T);
  generation.row(0) = real.solar_scale_cu * real.generation_cu.transpose();
  for (int r = 0; r < R; ++r) generation.row(r + 1) = real.solar_scale_du * real.generation_du.row(r);
  Eigen::VectorXd capacity = Eigen::VectorXd::Constant(R + 1, real.battery_du_kwh);
  Eigen::VectorXd initial = Eigen::VectorXd::Constant(R + 1, real.initial_du_kwh);
  capacity(0) = real.battery_cu_kwh;
  initial(0) = real.initial_cu_kwh;
  d.ledger = greedy_battery_dispatch(consumption_from_activity(d, scenario), generation, capacity, initial);
  // the greedy policy cannot promise a cyclic end state, so only the ledger itself is checked
  const auto violations = validate_ledger(d.ledger);
  if (!violations.empty()) throw InfeasibleDecisions("greedy dispatch: " + describe(violations.front()));
  out.opex = opex(d.ledger, real.tariff, real.sell_ratio);
  return out;
}

MethodResult solve_method(Method method, const Scenario& scenario, const SolverConfig& config) {
  switch (method) {
    case Method::Proposed: return solve_proposed(scenario, config);
    case Method::StaticRouting: return solve_static_routing(scenario, config);
    case Method::TrafficAware: return solve_traffic_aware(scenario, config);
  }
  throw InvalidArgument("unknown method");
}

}  // namespace grove
