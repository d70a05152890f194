#pragma once

#include <Eigen/Dense>

#include <memory>
#include <optional>
#include <vector>

#include "grove/branch_and_bound.hpp"
#include "grove/grove_model.hpp"
#include "grove/simplex.hpp"

namespace grove {

/// Integer choices of one interval before packing: a path (arc ids) per DU and the
/// number of URFs each user runs at the CU.
struct IntervalPlan {
  std::vector<std::vector<int>> paths;
  std::vector<int> cu_count;
};

/// Rounds an LP point of a GROVE model to a feasible integer point.
///
/// Per interval: paths follow the LP routing weights, CU counts are rounded and then
/// repaired against delay, bandwidth and DPE capacity, URFs are packed first-fit
/// decreasing and lightly loaded DPEs are emptied where the other side has room.
/// The continuous part (green, sold, stored energy and traffic auxiliaries) is then
/// re-optimized by an LP with every integer column fixed.
class GroveHeuristic {
 public:
  GroveHeuristic(const GroveModel& model, const Scenario& scenario);

  /// Returns std::nullopt when no repair succeeds or the fixed LP is infeasible.
  std::optional<Eigen::VectorXd> round(const Eigen::VectorXd& lp_x);
  /// Builds a point from explicit per-interval plans.
  std::optional<Eigen::VectorXd> from_plans(const std::vector<IntervalPlan>& plans);

  std::optional<Eigen::VectorXd> operator()(const HeuristicContext& context) { return round(context.lp_x); }

 private:
  /// Picks one candidate path per DU, balancing arc load and following the LP routing;
  /// `overflow` receives the summed capacity excess.
  std::vector<std::vector<int>> route(int t, const std::vector<double>& traffic, const Eigen::VectorXd& lp_x,
                                      double& overflow) const;
  std::vector<double> du_traffic(int t, const IntervalPlan& plan) const;
  bool repair(int t, IntervalPlan& plan, const Eigen::VectorXd& lp_x) const;
  void consolidate(int t, IntervalPlan& plan, const Eigen::VectorXd& lp_x) const;
  bool pack(int t, const IntervalPlan& plan, Eigen::VectorXd& x) const;

  const GroveModel& gm_;
  const Scenario& scenario_;
  std::vector<std::vector<int>> by_du_;
  std::vector<std::vector<int>> static_paths_;
  /// simple DU -> CU paths per DU, shortest first
  std::vector<std::vector<std::vector<int>>> candidates_;
  std::unique_ptr<DualSimplex> lp_;
};

}  // namespace grove
