#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

#include "grove/energy.hpp"
#include "grove/error.hpp"
#include "grove/scenario.hpp"

namespace grove {

/// Size limits under which exhaustive enumeration is attempted.
struct TinyScenarioBound {
  int max_dus = 3;
  int max_switches = 2;
  int max_users_per_du = 3;
  int max_urfs = 2;
  int max_intervals = 4;
  int max_dpes = 2;
  double max_candidates = 1e7;
};

/// Thrown when a scenario lies outside the bound; `estimate()` is the candidate count
/// the enumeration would have needed (0 when a structural limit was hit first).
class OracleRefusal : public Error {
 public:
  OracleRefusal(const std::string& what, double estimate) : Error(what), estimate_(estimate) {}
  double estimate() const { return estimate_; }

 private:
  double estimate_;
};

struct OracleResult {
  double opex = 0.0;
  Decisions decisions;
  /// (split, path set) pairs evaluated over all intervals
  long candidates = 0;
  /// product formula for the same count
  long expected_candidates = 0;
  /// cross-interval combinations of non-dominated DPE counts
  long combinations = 0;
};

/// Every simple DU -> CU path of DU r as arc ids, in depth-first order over arc ids.
std::vector<std::vector<int>> simple_paths(const NetworkTopology& topology, int du);

/// Random scenario inside `bound`: 2-3 DUs hanging off 1-2 switches (some with a second
/// uplink), 4 intervals of 6 h, two URFs, two DPEs per side and small DPE and link
/// capacities so that packing and routing both bind. Deterministic in `seed`.
Scenario tiny_scenario(std::uint64_t seed);

/// Candidate count sum_t prod_i (CU-count options of i) * prod_r (paths of r).
double enumeration_size(const Scenario& scenario);

/// Exact optimum by enumeration. Per interval every CU-function count per user and every
/// combination of simple paths is checked for bandwidth, delay and exact bin packing; the
/// resulting DPE counts are reduced to the non-dominated ones, whose cross-interval
/// combinations are priced by an exact per-unit battery LP. Throws OracleRefusal, and
/// InfeasibleDecisions when no candidate is feasible.
OracleResult enumerate_optimum(const Scenario& scenario, const TinyScenarioBound& bound = {});

/// Optimal green/sold/stored schedule of one unit for a fixed consumption row, from a
/// dense two-phase tableau with Bland's rule. Returns the unit's bill and fills the
/// optional schedule vectors. Throws InfeasibleDecisions when no schedule exists.
double battery_lp(const Eigen::Ref<const Eigen::VectorXd>& consumption,
                  const Eigen::Ref<const Eigen::VectorXd>& generation, const Eigen::Ref<const Eigen::VectorXd>& tariff,
                  double capacity, double initial, double sell_ratio, bool cyclic, Eigen::VectorXd* green = nullptr,
                  Eigen::VectorXd* sold = nullptr, Eigen::VectorXd* stored = nullptr);

}  // namespace grove
