#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <array>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace grove {

enum class VarKind { Continuous, Binary, Integer };
enum class Sense { LE, EQ, GE };

std::string_view to_string(VarKind kind);
std::string_view to_string(Sense sense);

/// What a variable stands for in the GROVE program. `Other` is used for generic models.
enum class VarRole { Other, Placement, ActiveCu, ActiveDu, Route, RouteAux, CuTraffic, Green, Sold, Stored };

struct Variable {
  std::string name;
  VarKind kind = VarKind::Continuous;
  double lower = 0.0;
  double upper = 0.0;
  VarRole role = VarRole::Other;
  /// Semantic index tuple; unused slots are -1.
  std::array<int, 3> index{-1, -1, -1};
  /// Interval the variable belongs to, -1 if none.
  int interval = -1;
};

struct Row {
  std::string name;
  /// Constraint family, e.g. "eq8" or "ineq19".
  std::string tag;
  Sense sense = Sense::LE;
  double rhs = 0.0;
  /// Big-M coefficient used by this row, 0 when the row has none.
  double big_m = 0.0;
};

using Term = std::pair<int, double>;

/// A minimization MILP held row-wise. Once built it is read-only and may be
/// shared between threads.
class MilpModel {
 public:
  int add_variable(Variable var, double objective = 0.0);
  /// Terms with duplicate columns are merged; zero coefficients are dropped.
  int add_row(Row row, const std::vector<Term>& terms);

  int variable_count() const { return static_cast<int>(vars_.size()); }
  int row_count() const { return static_cast<int>(rows_.size()); }
  std::size_t nonzero_count() const { return values_.size(); }

  const Variable& variable(int j) const { return vars_[static_cast<std::size_t>(j)]; }
  Variable& variable(int j) { return vars_[static_cast<std::size_t>(j)]; }
  const std::vector<Variable>& variables() const { return vars_; }
  const Row& row(int i) const { return rows_[static_cast<std::size_t>(i)]; }
  const std::vector<Row>& rows() const { return rows_; }

  /// Column indices and coefficients of row i.
  std::pair<const int*, const double*> row_terms(int i) const {
    return {cols_.data() + row_start_[static_cast<std::size_t>(i)], values_.data() + row_start_[static_cast<std::size_t>(i)]};
  }
  int row_length(int i) const {
    return row_start_[static_cast<std::size_t>(i) + 1] - row_start_[static_cast<std::size_t>(i)];
  }

  const Eigen::VectorXd& objective() const { return objective_; }
  void set_objective(int j, double c) { objective_(j) = c; }
  double objective_offset() const { return offset_; }
  void set_objective_offset(double offset) { offset_ = offset; }

  Eigen::VectorXd lower_bounds() const;
  Eigen::VectorXd upper_bounds() const;
  bool is_integer(int j) const { return vars_[static_cast<std::size_t>(j)].kind != VarKind::Continuous; }

  /// Column-compressed constraint matrix (rows x variables).
  Eigen::SparseMatrix<double> matrix() const;

  double evaluate_objective(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  Eigen::VectorXd row_activity(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  /// Largest violation over rows, bounds and integrality.
  double max_violation(const Eigen::Ref<const Eigen::VectorXd>& x, bool check_integrality = true) const;

  /// -1 when absent.
  int find_variable(std::string_view name) const;
  int find_row(std::string_view name) const;
  std::vector<int> rows_with_tag(std::string_view tag) const;
  int count_rows_with_tag(std::string_view tag) const;
  int count_variables(VarRole role) const;

 private:
  std::vector<Variable> vars_;
  std::vector<Row> rows_;
  Eigen::VectorXd objective_;
  double offset_ = 0.0;
  std::vector<int> row_start_{0};
  std::vector<int> cols_;
  std::vector<double> values_;
  std::unordered_map<std::string, int> var_index_;
  std::unordered_map<std::string, int> row_index_;
};

}  // namespace grove
