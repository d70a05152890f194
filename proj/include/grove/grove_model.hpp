#pragma once

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

#include "grove/energy.hpp"
#include "grove/model.hpp"
#include "grove/scenario.hpp"

namespace grove {

struct BuildOptions {
  /// Adds the aggregated capacity rows sum(rho*m) <= L*a, symmetry rows a[d+1] <= a[d]
  /// and forces on the DU DPEs that delay-bound load needs in any case.
  bool strengthen = true;
  /// Fixed DU -> CU routing (arc ids per DU, same for every interval). Drops the
  /// routing variables, flow rows and linearized bandwidth rows in favour of one
  /// linear bandwidth row per arc.
  std::optional<std::vector<std::vector<int>>> fixed_paths;
};

/// Big-M constants of the activation and linearized bandwidth rows.
struct BigMValues {
  double cu_activation = 0.0;
  /// one per DU
  Eigen::VectorXd du_activation;
  /// DUs x intervals
  Eigen::MatrixXd bandwidth;
};

BigMValues big_m_values(const Scenario& scenario);

/// Column positions of the GROVE variables; -1 marks an absent variable.
struct GroveIndex {
  int intervals = 0;
  int dus = 0;
  int users = 0;
  int arcs = 0;
  int dpe_cu = 0;
  int dpe_du = 0;

  std::vector<int> placement;
  std::vector<int> active_cu;
  std::vector<int> active_du;
  std::vector<int> route;
  std::vector<int> route_aux;
  std::vector<int> cu_traffic;
  std::vector<int> green;
  std::vector<int> sold;
  std::vector<int> stored;

  int slots() const { return dpe_cu + dpe_du; }
  int m(int t, int i, int k) const { return placement[static_cast<std::size_t>((t * users + i) * slots() + k)]; }
  int a_cu(int t, int d) const { return active_cu[static_cast<std::size_t>(t * dpe_cu + d)]; }
  int a_du(int t, int r, int d) const { return active_du[static_cast<std::size_t>((t * dus + r) * dpe_du + d)]; }
  int l(int t, int r, int e) const { return route.empty() ? -1 : route[static_cast<std::size_t>((t * dus + r) * arcs + e)]; }
  int z(int t, int r, int e) const {
    return route_aux.empty() ? -1 : route_aux[static_cast<std::size_t>((t * dus + r) * arcs + e)];
  }
  int g(int t, int r) const { return cu_traffic[static_cast<std::size_t>(t * dus + r)]; }
  /// unit 0 is the CU, unit r+1 is DU r
  int s(int t, int u) const { return green[static_cast<std::size_t>(t * (dus + 1) + u)]; }
  int p(int t, int u) const { return sold[static_cast<std::size_t>(t * (dus + 1) + u)]; }
  int b(int t, int u) const { return stored[static_cast<std::size_t>(t * (dus + 1) + u)]; }
};

struct GroveModel {
  MilpModel milp;
  GroveIndex index;
  BuildOptions options;
};

/// Builds the linearized program for `scenario`. Placement variables are integer counts
/// m[t][i][k] of user i's URFs on DPE slot k. Throws BuildError naming the entity when
/// the scenario is inconsistent.
GroveModel build_model(const Scenario& scenario, const BuildOptions& options = {});

/// Maps a solver vector onto Decisions. Integer variables must lie within `tolerance`
/// of an integer (ExtractionError otherwise). Each (t, r) path is decoded by a
/// breadth-first walk over the selected arcs; selected arcs off that path are reported
/// in `cycle_warnings`. The ledger is snapped onto the exact balance.
Decisions extract_decisions(const GroveModel& model, const Scenario& scenario, const Eigen::VectorXd& values,
                            double tolerance = 1e-6);

/// Inverse mapping; z is set to l times the DU's CU traffic.
Eigen::VectorXd decisions_to_values(const GroveModel& model, const Scenario& scenario, const Decisions& decisions);

/// CU-side traffic sum(rho * CU URF count) of every DU at interval t.
Eigen::VectorXd cu_traffic(const Decisions& decisions, const Scenario& scenario, int t);

/// Shortest DU -> CU node sequence over arcs flagged in `selected` (arc-indexed), empty if none.
std::vector<int> decode_path(const NetworkTopology& topology, int du, const std::vector<int>& selected);

struct Violation {
  std::string tag;
  std::vector<int> index;
  double slack = 0.0;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool feasible() const { return violations.empty(); }
  std::string summary(std::size_t max_items = 10) const;
};

/// Checks every constraint directly on the decisions, the bandwidth limit in its
/// original product form sum_r l * traffic_r <= capacity.
ValidationReport validate_solution(const Decisions& decisions, const Scenario& scenario, double tolerance = 1e-6);

}  // namespace grove
