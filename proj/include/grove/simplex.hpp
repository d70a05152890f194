#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <cstdint>
#include <limits>
#include <string_view>
#include <vector>

#include "grove/model.hpp"

namespace grove {

enum class LpStatus { Optimal, Infeasible, Unbounded, Cutoff, IterationLimit, TimeLimit, NumericalError };

std::string_view to_string(LpStatus status);

struct LpOptions {
  double primal_tolerance = 1e-7;
  double dual_tolerance = 1e-7;
  double pivot_tolerance = 1e-7;
  int refactor_interval = 100;
  long iteration_limit = 50'000'000;
  /// seconds
  double time_limit = std::numeric_limits<double>::infinity();
  /// Stop early with Cutoff once the dual bound (objective incl. offset) exceeds this.
  double cutoff = std::numeric_limits<double>::infinity();
  /// Small cost perturbation against dual degeneracy; removed before returning.
  bool perturb = true;
};

struct LpResult {
  LpStatus status = LpStatus::NumericalError;
  /// Includes the model's objective offset.
  double objective = std::numeric_limits<double>::quiet_NaN();
  Eigen::VectorXd x;
  Eigen::VectorXd row_duals;
  Eigen::VectorXd reduced_costs;
  long iterations = 0;
};

/// Basis snapshot used to warm-start a later solve with different bounds.
struct BasisState {
  std::vector<int> head;
  std::vector<std::int8_t> status;
  Eigen::VectorXd weights;

  bool empty() const { return head.empty(); }
};

/// Bounded dual simplex on [A -I][x; r] = 0 with one logical r_i per row.
///
/// Every column is boxed: logical bounds come from the row sense and the activity
/// range implied by the structural bounds, and infinite structural bounds are replaced
/// by large stand-ins (a solution resting on one is reported as unbounded). Any basis
/// is therefore dual feasible after bound flips, so no phase one is needed. Pricing is
/// dual steepest edge; the ratio test is Harris' two-pass test with bound flipping.
/// The basis inverse is a sparse LU with product-form updates.
class DualSimplex {
 public:
  explicit DualSimplex(const MilpModel& model, LpOptions options = {});

  void set_options(const LpOptions& options) { opt_ = options; }
  const LpOptions& options() const { return opt_; }

  /// Structural bounds for the next solve.
  void set_bounds(const Eigen::VectorXd& lower, const Eigen::VectorXd& upper);
  const Eigen::VectorXd& lower() const { return lo_; }
  const Eigen::VectorXd& upper() const { return up_; }

  LpResult solve();

  BasisState basis() const;
  void load_basis(const BasisState& basis);
  void reset_basis();

 private:
  static constexpr std::int8_t kBasic = 0;
  static constexpr std::int8_t kLower = 1;
  static constexpr std::int8_t kUpper = 2;

  struct Eta {
    int row;
    double pivot;
    std::vector<int> index;
    std::vector<double> value;
  };

  bool fixed(int j) const { return up_(j) - lo_(j) <= 0.0; }
  void place_nonbasic(int j);
  bool refactor();
  void ftran(Eigen::VectorXd& v) const;
  void btran(Eigen::VectorXd& v) const;
  void add_column(int j, double scale, Eigen::VectorXd& v) const;
  void compute_primal();
  void compute_dual();
  bool correct_dual_signs();
  int choose_leaving() const;
  double objective_value() const;
  void perturb_costs();
  bool refactor_or_reset();
  LpResult finish(LpStatus status, long iterations);

  const MilpModel& model_;
  LpOptions opt_;
  int n_;
  int m_;
  Eigen::SparseMatrix<double> a_;
  Eigen::VectorXd lo_;
  Eigen::VectorXd up_;
  std::vector<std::uint8_t> stand_in_;
  Eigen::VectorXd cost_;
  Eigen::VectorXd pcost_;
  double perturbation_slack_ = 0.0;

  Eigen::VectorXd x_;
  Eigen::VectorXd d_;
  std::vector<int> head_;
  std::vector<int> pos_;
  std::vector<std::int8_t> status_;
  Eigen::VectorXd weights_;

  mutable Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu_;
  std::vector<Eta> etas_;

  Eigen::VectorXd alpha_row_;
  std::vector<int> touched_;
};

LpResult solve_lp(const MilpModel& model, const LpOptions& options = {});

}  // namespace grove
