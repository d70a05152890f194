#include "grove/model.hpp"

#include <algorithm>
#include <cmath>

#include "grove/error.hpp"

namespace grove {

std::string_view to_string(VarKind kind) {
  switch (kind) {
    case VarKind::Continuous: return "continuous";
    case VarKind::Binary: return "binary";
    case VarKind::Integer: return "integer";
  }
  return "?";
}

std::string_view to_string(Sense sense) {
  switch (sense) {
    case Sense::LE: return "<=";
    case Sense::EQ: return "=";
    case Sense::GE: return ">=";
  }
  return "?";
}

int MilpModel::add_variable(Variable var, double objective) {
  if (var.kind == VarKind::Binary) {
    var.lower = std::max(var.lower, 0.0);
    var.upper = std::min(var.upper, 1.0);
  }
  if (var.lower > var.upper) throw BuildError("variable " + var.name + " has empty bounds");
  const int j = variable_count();
  if (!var.name.empty() && !var_index_.emplace(var.name, j).second)
    throw BuildError("duplicate variable name " + var.name);
  vars_.push_back(std::move(var));
  objective_.conservativeResize(j + 1);
  objective_(j) = objective;
  return j;
}

int MilpModel::add_row(Row row, const std::vector<Term>& terms) {
  std::vector<Term> merged = terms;
  std::sort(merged.begin(), merged.end(), [](const Term& a, const Term& b) { return a.first < b.first; });
  const int i = row_count();
  if (!row.name.empty() && !row_index_.emplace(row.name, i).second) throw BuildError("duplicate row name " + row.name);
  for (std::size_t k = 0; k < merged.size();) {
    const int col = merged[k].first;
    if (col < 0 || col >= variable_count()) throw BuildError("row " + row.name + " references a missing variable");
    double sum = 0.0;
    for (; k < merged.size() && merged[k].first == col; ++k) sum += merged[k].second;
    if (sum != 0.0) {
      cols_.push_back(col);
      values_.push_back(sum);
    }
  }
  row_start_.push_back(static_cast<int>(cols_.size()));
  rows_.push_back(std::move(row));
  return i;
}

Eigen::VectorXd MilpModel::lower_bounds() const {
  Eigen::VectorXd lb(variable_count());
  for (int j = 0; j < variable_count(); ++j) lb(j) = vars_[static_cast<std::size_t>(j)].lower;
  return lb;
}

Eigen::VectorXd MilpModel::upper_bounds() const {
  Eigen::VectorXd ub(variable_count());
  for (int j = 0; j < variable_count(); ++j) ub(j) = vars_[static_cast<std::size_t>(j)].upper;
  return ub;
}

Eigen::SparseMatrix<double> MilpModel::matrix() const {
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(values_.size());
  for (int i = 0; i < row_count(); ++i)
    for (int k = row_start_[static_cast<std::size_t>(i)]; k < row_start_[static_cast<std::size_t>(i) + 1]; ++k)
      triplets.emplace_back(i, cols_[static_cast<std::size_t>(k)], values_[static_cast<std::size_t>(k)]);
  Eigen::SparseMatrix<double> a(row_count(), variable_count());
  a.setFromTriplets(triplets.begin(), triplets.end());
  a.makeCompressed();
  return a;
}

double MilpModel::evaluate_objective(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  return objective_.dot(x) + offset_;
}

Eigen::VectorXd MilpModel::row_activity(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  Eigen::VectorXd act = Eigen::VectorXd::Zero(row_count());
  for (int i = 0; i < row_count(); ++i) {
    auto [cols, vals] = row_terms(i);
    double s = 0.0;
    for (int k = 0; k < row_length(i); ++k) s += vals[k] * x(cols[k]);
    act(i) = s;
  }
  return act;
}

double MilpModel::max_violation(const Eigen::Ref<const Eigen::VectorXd>& x, bool check_integrality) const {
  double worst = 0.0;
  const Eigen::VectorXd act = row_activity(x);
  for (int i = 0; i < row_count(); ++i) {
    const Row& r = rows_[static_cast<std::size_t>(i)];
    const double d = act(i) - r.rhs;
    if (r.sense != Sense::GE) worst = std::max(worst, d);
    if (r.sense != Sense::LE) worst = std::max(worst, -d);
  }
  for (int j = 0; j < variable_count(); ++j) {
    const Variable& v = vars_[static_cast<std::size_t>(j)];
    worst = std::max({worst, v.lower - x(j), x(j) - v.upper});
    if (check_integrality && v.kind != VarKind::Continuous) worst = std::max(worst, std::abs(x(j) - std::round(x(j))));
  }
  return worst;
}

int MilpModel::find_variable(std::string_view name) const {
  auto it = var_index_.find(std::string(name));
  return it == var_index_.end() ? -1 : it->second;
}

int MilpModel::find_row(std::string_view name) const {
  auto it = row_index_.find(std::string(name));
  return it == row_index_.end() ? -1 : it->second;
}

std::vector<int> MilpModel::rows_with_tag(std::string_view tag) const {
  std::vector<int> out;
  for (int i = 0; i < row_count(); ++i)
    if (rows_[static_cast<std::size_t>(i)].tag == tag) out.push_back(i);
  return out;
}

int MilpModel::count_rows_with_tag(std::string_view tag) const {
  return static_cast<int>(std::count_if(rows_.begin(), rows_.end(), [&](const Row& r) { return r.tag == tag; }));
}

int MilpModel::count_variables(VarRole role) const {
  return static_cast<int>(std::count_if(vars_.begin(), vars_.end(), [&](const Variable& v) { return v.role == role; }));
}

}  // namespace grove
