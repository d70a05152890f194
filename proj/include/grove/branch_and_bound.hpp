#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string_view>

#include "grove/model.hpp"

namespace grove {

enum class SolveStatus { Optimal, FeasibleGap, Infeasible, TimeLimitNoIncumbent };

std::string_view to_string(SolveStatus status);

enum class BranchingRule {
  /// Most fractional binary, ties to the lowest column; general integers once all
  /// binaries are integral.
  MostFractional,
  /// Activation variables first, then routing, then placement; most fractional inside a class.
  Priority,
};

enum class NodeSelection {
  /// Best bound, diving into one child of every branched node until it is pruned.
  BestBoundPlunge,
  BestBound,
  DepthFirst,
};

std::string_view to_string(BranchingRule rule);
std::string_view to_string(NodeSelection rule);

struct SolverConfig {
  /// seconds
  double time_limit = 3600.0;
  /// Relative gap (incumbent - bound) / |incumbent| at which the search stops.
  double gap = 1e-6;
  double absolute_gap = 1e-9;
  double integrality_tolerance = 1e-6;
  BranchingRule branching = BranchingRule::Priority;
  NodeSelection selection = NodeSelection::BestBoundPlunge;
  int workers = 1;
  /// Handed to heuristics; the tree search itself is deterministic.
  std::uint64_t seed = 1;
  long node_limit = std::numeric_limits<long>::max();
  /// Receives `node,depth,lp_obj,best_bound,incumbent,gap,time` lines when set.
  std::ostream* log = nullptr;

  /// Throws InvalidArgument.
  void validate() const;
};

struct SolveResult {
  SolveStatus status = SolveStatus::TimeLimitNoIncumbent;
  /// Empty without incumbent.
  Eigen::VectorXd x;
  double objective = std::numeric_limits<double>::infinity();
  double bound = -std::numeric_limits<double>::infinity();
  double gap = std::numeric_limits<double>::infinity();
  long nodes = 0;
  long lp_iterations = 0;
  double root_bound = -std::numeric_limits<double>::infinity();
  double wall_time = 0.0;
  /// Process high-water mark, 0 where unavailable.
  long peak_memory_kb = 0;

  bool has_incumbent() const { return x.size() > 0; }
};

/// Called with a node's LP solution; may return a candidate incumbent. Candidates are
/// checked against the model before they are accepted. Calls are serialized.
struct HeuristicContext {
  const Eigen::VectorXd& lp_x;
  long node;
  int depth;
  double incumbent;
  std::uint64_t seed;
};
using Heuristic = std::function<std::optional<Eigen::VectorXd>(const HeuristicContext&)>;

struct SolveHooks {
  Heuristic heuristic;
  /// Run the heuristic at the root and then every this many nodes.
  long heuristic_interval = 200;
  std::optional<Eigen::VectorXd> start;
  /// Sees every accepted incumbent with its objective, serialized.
  std::function<void(const Eigen::VectorXd&, double)> on_incumbent;
};

/// (incumbent - bound) / |incumbent|; 0 when both agree, infinity without incumbent.
double relative_gap(double incumbent, double bound);

/// LP-based branch and bound. Single-worker runs are deterministic.
/// Throws SolverError when a node LP fails numerically.
SolveResult branch_and_bound(const MilpModel& model, const SolverConfig& config, const SolveHooks& hooks = {});

/// VmHWM of this process in kB, 0 where unavailable.
long peak_memory_kb();

}  // namespace grove
