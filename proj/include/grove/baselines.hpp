#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "grove/branch_and_bound.hpp"
#include "grove/energy.hpp"
#include "grove/grove_model.hpp"
#include "grove/scenario.hpp"

namespace grove {

enum class Method { Proposed, StaticRouting, TrafficAware };

/// "proposed", "static-routing", "traffic-aware"
std::string_view to_string(Method method);
/// Also accepts the short forms "static" and "trafficaware".
Method method_from_string(std::string_view text);

/// One hop-count shortest DU -> CU path per DU (arc ids), the next hop being the
/// lowest-id neighbour one hop closer to the CU. Throws TopologyError for an
/// unreachable DU.
std::vector<std::vector<int>> static_routing_paths(const NetworkTopology& topology);

struct MethodResult {
  Method method = Method::Proposed;
  SolveResult solve;
  /// Present whenever the solver returned an incumbent.
  std::optional<Decisions> decisions;
  /// Realized OpEx of `decisions` (currency), NaN without decisions.
  double opex = std::numeric_limits<double>::quiet_NaN();
  /// Objective the solver minimized; differs from `opex` for traffic-aware.
  double model_objective = std::numeric_limits<double>::quiet_NaN();
  /// Size of the model the solver saw.
  int variables = 0;
  int constraints = 0;
  int integer_variables = 0;
  /// Every incumbent the solver accepted is decoded and checked against the constraints.
  long incumbents = 0;
  long invalid_incumbents = 0;
  /// First violation of the first invalid incumbent.
  std::string first_violation;
};

/// Builds the full model, seeds it with the rounding heuristic and runs branch and bound.
MethodResult solve_proposed(const Scenario& scenario, const SolverConfig& config);

/// Routing fixed to `static_routing_paths`; splitting and renewable use optimized jointly.
/// Infeasibility under the fixed paths is reported through the solve status.
MethodResult solve_static_routing(const Scenario& scenario, const SolverConfig& config);

/// Stage one optimizes splitting and routing without panels or batteries; stage two
/// replays the chosen DPE activity against the real generation with the greedy
/// use-then-store-then-sell dispatch. `opex` is the realized bill.
MethodResult solve_traffic_aware(const Scenario& scenario, const SolverConfig& config);

MethodResult solve_method(Method method, const Scenario& scenario, const SolverConfig& config);

}  // namespace grove
