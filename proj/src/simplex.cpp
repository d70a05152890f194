#include "grove/simplex.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "grove/error.hpp"

namespace grove {

namespace {

constexpr double kStandIn = 1e7;
constexpr double kZero = 1e-13;

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// deterministic value in [0.5, 1) per column
double jitter(int j) {
  std::uint64_t h = static_cast<std::uint64_t>(j) * 0x9E3779B97F4A7C15ULL + 0x632BE59BD9B4E019ULL;
  h ^= h >> 31;
  h *= 0xBF58476D1CE4E5B9ULL;
  h ^= h >> 29;
  return 0.5 + 0.5 * static_cast<double>(h >> 11) / static_cast<double>(1ULL << 53);
}

}  // namespace

std::string_view to_string(LpStatus status) {
  switch (status) {
    case LpStatus::Optimal: return "optimal";
    case LpStatus::Infeasible: return "infeasible";
    case LpStatus::Unbounded: return "unbounded";
    case LpStatus::Cutoff: return "cutoff";
    case LpStatus::IterationLimit: return "iteration-limit";
    case LpStatus::TimeLimit: return "time-limit";
    case LpStatus::NumericalError: return "numerical-error";
  }
  return "?";
}

DualSimplex::DualSimplex(const MilpModel& model, LpOptions options)
    : model_(model), opt_(options), n_(model.variable_count()), m_(model.row_count()), a_(model.matrix()) {
  const int total = n_ + m_;
  lo_.resize(total);
  up_.resize(total);
  stand_in_.assign(static_cast<std::size_t>(total), 0);
  cost_ = Eigen::VectorXd::Zero(total);
  cost_.head(n_) = model.objective();
  pcost_ = cost_;
  x_ = Eigen::VectorXd::Zero(total);
  d_ = Eigen::VectorXd::Zero(total);
  alpha_row_ = Eigen::VectorXd::Zero(total);
  status_.assign(static_cast<std::size_t>(total), kLower);
  pos_.assign(static_cast<std::size_t>(total), -1);
  set_bounds(model.lower_bounds(), model.upper_bounds());
  reset_basis();
}

void DualSimplex::set_bounds(const Eigen::VectorXd& lower, const Eigen::VectorXd& upper) {
  if (lower.size() != n_ || upper.size() != n_) throw InvalidArgument("bound vectors do not match the model");
  for (int j = 0; j < n_; ++j) {
    double l = lower(j), u = upper(j);
    std::uint8_t flag = 0;
    if (!std::isfinite(l)) {
      l = (std::isfinite(u) ? std::min(u, 0.0) : 0.0) - kStandIn;
      flag |= 1;
    }
    if (!std::isfinite(u)) {
      u = std::max(l, 0.0) + kStandIn;
      flag |= 2;
    }
    lo_(j) = l;
    up_(j) = u;
    stand_in_[static_cast<std::size_t>(j)] = flag;
  }
  // implied activity range of every row
  Eigen::VectorXd amin = Eigen::VectorXd::Zero(m_), amax = Eigen::VectorXd::Zero(m_);
  for (int j = 0; j < n_; ++j)
    for (Eigen::SparseMatrix<double>::InnerIterator it(a_, j); it; ++it) {
      const double v = it.value();
      amin(it.row()) += v > 0 ? v * lo_(j) : v * up_(j);
      amax(it.row()) += v > 0 ? v * up_(j) : v * lo_(j);
    }
  for (int i = 0; i < m_; ++i) {
    const Row& row = model_.row(i);
    const int j = n_ + i;
    switch (row.sense) {
      case Sense::LE:
        lo_(j) = std::min(amin(i), row.rhs);
        up_(j) = row.rhs;
        break;
      case Sense::GE:
        lo_(j) = row.rhs;
        up_(j) = std::max(amax(i), row.rhs);
        break;
      case Sense::EQ:
        lo_(j) = up_(j) = row.rhs;
        break;
    }
  }
  for (int j = 0; j < n_ + m_; ++j)
    if (status_[static_cast<std::size_t>(j)] != kBasic) place_nonbasic(j);
}

void DualSimplex::place_nonbasic(int j) {
  x_(j) = status_[static_cast<std::size_t>(j)] == kUpper ? up_(j) : lo_(j);
}

void DualSimplex::reset_basis() {
  head_.resize(static_cast<std::size_t>(m_));
  for (int j = 0; j < n_; ++j) {
    status_[static_cast<std::size_t>(j)] = cost_(j) >= 0 ? kLower : kUpper;
    pos_[static_cast<std::size_t>(j)] = -1;
    place_nonbasic(j);
  }
  for (int i = 0; i < m_; ++i) {
    head_[static_cast<std::size_t>(i)] = n_ + i;
    status_[static_cast<std::size_t>(n_ + i)] = kBasic;
    pos_[static_cast<std::size_t>(n_ + i)] = i;
  }
  weights_ = Eigen::VectorXd::Ones(m_);
}

BasisState DualSimplex::basis() const { return {head_, status_, weights_}; }

void DualSimplex::load_basis(const BasisState& basis) {
  if (basis.head.size() != static_cast<std::size_t>(m_) || basis.status.size() != status_.size())
    throw InvalidArgument("basis does not match the model");
  head_ = basis.head;
  status_ = basis.status;
  weights_ = basis.weights.size() == m_ ? basis.weights : Eigen::VectorXd::Ones(m_);
  std::fill(pos_.begin(), pos_.end(), -1);
  for (int k = 0; k < m_; ++k) pos_[static_cast<std::size_t>(head_[static_cast<std::size_t>(k)])] = k;
  for (int j = 0; j < n_ + m_; ++j)
    if (status_[static_cast<std::size_t>(j)] != kBasic) place_nonbasic(j);
}

bool DualSimplex::refactor() {
  etas_.clear();
  if (m_ == 0) return true;
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(m_) * 4);
  for (int k = 0; k < m_; ++k) {
    const int j = head_[static_cast<std::size_t>(k)];
    if (j < n_) {
      for (Eigen::SparseMatrix<double>::InnerIterator it(a_, j); it; ++it) trip.emplace_back(it.row(), k, it.value());
    } else {
      trip.emplace_back(j - n_, k, -1.0);
    }
  }
  Eigen::SparseMatrix<double> b(m_, m_);
  b.setFromTriplets(trip.begin(), trip.end());
  b.makeCompressed();
  lu_.compute(b);
  return lu_.info() == Eigen::Success;
}

bool DualSimplex::refactor_or_reset() {
  if (refactor()) return true;
  reset_basis();
  return refactor();
}

void DualSimplex::ftran(Eigen::VectorXd& v) const {
  if (m_ == 0) return;
  v = lu_.solve(v);
  for (const Eta& e : etas_) {
    const double xr = v(e.row) / e.pivot;
    v(e.row) = xr;
    if (xr == 0.0) continue;
    for (std::size_t k = 0; k < e.index.size(); ++k) v(e.index[k]) -= e.value[k] * xr;
  }
}

void DualSimplex::btran(Eigen::VectorXd& v) const {
  if (m_ == 0) return;
  for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
    double s = v(it->row);
    for (std::size_t k = 0; k < it->index.size(); ++k) s -= it->value[k] * v(it->index[k]);
    v(it->row) = s / it->pivot;
  }
  v = lu_.transpose().solve(v);
}

void DualSimplex::add_column(int j, double scale, Eigen::VectorXd& v) const {
  if (j < n_) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(a_, j); it; ++it) v(it.row()) += scale * it.value();
  } else {
    v(j - n_) -= scale;
  }
}

void DualSimplex::compute_primal() {
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m_);
  for (int j = 0; j < n_ + m_; ++j)
    if (status_[static_cast<std::size_t>(j)] != kBasic && x_(j) != 0.0) add_column(j, -x_(j), rhs);
  ftran(rhs);
  for (int k = 0; k < m_; ++k) x_(head_[static_cast<std::size_t>(k)]) = rhs(k);
}

void DualSimplex::compute_dual() {
  Eigen::VectorXd y(m_);
  for (int k = 0; k < m_; ++k) y(k) = pcost_(head_[static_cast<std::size_t>(k)]);
  btran(y);
  for (int j = 0; j < n_; ++j) {
    if (status_[static_cast<std::size_t>(j)] == kBasic) {
      d_(j) = 0.0;
      continue;
    }
    double s = pcost_(j);
    for (Eigen::SparseMatrix<double>::InnerIterator it(a_, j); it; ++it) s -= it.value() * y(it.row());
    d_(j) = s;
  }
  for (int i = 0; i < m_; ++i) d_(n_ + i) = status_[static_cast<std::size_t>(n_ + i)] == kBasic ? 0.0 : pcost_(n_ + i) + y(i);
}

bool DualSimplex::correct_dual_signs() {
  bool flipped = false;
  for (int j = 0; j < n_ + m_; ++j) {
    auto& st = status_[static_cast<std::size_t>(j)];
    if (st == kBasic || fixed(j)) continue;
    if (st == kLower && d_(j) < -opt_.dual_tolerance) {
      st = kUpper;
      flipped = true;
    } else if (st == kUpper && d_(j) > opt_.dual_tolerance) {
      st = kLower;
      flipped = true;
    } else {
      continue;
    }
    place_nonbasic(j);
  }
  if (flipped) compute_primal();
  return flipped;
}

int DualSimplex::choose_leaving() const {
  int best = -1;
  double best_score = 0.0;
  for (int k = 0; k < m_; ++k) {
    const int j = head_[static_cast<std::size_t>(k)];
    double infeas = 0.0;
    if (x_(j) < lo_(j) - opt_.primal_tolerance)
      infeas = lo_(j) - x_(j);
    else if (x_(j) > up_(j) + opt_.primal_tolerance)
      infeas = x_(j) - up_(j);
    if (infeas <= 0.0) continue;
    const double score = infeas * infeas / weights_(k);
    if (score > best_score) {
      best_score = score;
      best = k;
    }
  }
  return best;
}

double DualSimplex::objective_value() const { return pcost_.dot(x_); }

void DualSimplex::perturb_costs() {
  pcost_ = cost_;
  perturbation_slack_ = 0.0;
  if (!opt_.perturb) return;
  for (int j = 0; j < n_; ++j) {
    if (fixed(j)) continue;
    const double eps = 1e-6 * (1.0 + std::abs(cost_(j))) * jitter(j);
    pcost_(j) += status_[static_cast<std::size_t>(j)] == kUpper ? -eps : eps;
    perturbation_slack_ += eps * std::max(std::abs(lo_(j)), std::abs(up_(j)));
  }
}

LpResult DualSimplex::finish(LpStatus status, long iterations) {
  LpResult res;
  res.status = status;
  res.iterations = iterations;
  res.x = x_.head(n_);
  for (int j = 0; j < n_; ++j) res.x(j) = std::clamp(res.x(j), lo_(j), up_(j));
  res.objective = model_.evaluate_objective(res.x);
  if (status == LpStatus::Optimal) {
    pcost_ = cost_;
    compute_dual();
    Eigen::VectorXd y(m_);
    for (int k = 0; k < m_; ++k) y(k) = cost_(head_[static_cast<std::size_t>(k)]);
    btran(y);
    res.row_duals = y;
    res.reduced_costs = d_.head(n_);
    for (int j = 0; j < n_; ++j) {
      const auto flag = stand_in_[static_cast<std::size_t>(j)];
      if (((flag & 1) && res.x(j) <= lo_(j) + 1.0) || ((flag & 2) && res.x(j) >= up_(j) - 1.0)) {
        res.status = LpStatus::Unbounded;
        break;
      }
    }
  }
  return res;
}

LpResult DualSimplex::solve() {
  const auto start = std::chrono::steady_clock::now();
  long iter = 0;
  perturb_costs();
  bool perturbed = opt_.perturb;
  if (!refactor_or_reset()) return finish(LpStatus::NumericalError, iter);
  compute_primal();
  compute_dual();
  correct_dual_signs();

  double last_progress_obj = -std::numeric_limits<double>::infinity();
  long last_progress_iter = 0;
  bool bland = false;
  int retries = 0;

  Eigen::VectorXd rho(m_), col(m_), tau(m_), flip(m_);
  struct Candidate {
    int j;
    double t;
    double abs_alpha;
    double dtilde;
  };
  std::vector<Candidate> cands;
  std::vector<double> suffix_min;
  std::vector<int> flips;
  std::vector<std::pair<int, double>> row_alpha;

  for (;;) {
    if (iter >= opt_.iteration_limit) return finish(LpStatus::IterationLimit, iter);
    if ((iter & 15) == 0 && seconds_since(start) > opt_.time_limit) return finish(LpStatus::TimeLimit, iter);
    if (static_cast<int>(etas_.size()) >= opt_.refactor_interval) {
      if (!refactor_or_reset()) return finish(LpStatus::NumericalError, iter);
      compute_primal();
      compute_dual();
      correct_dual_signs();
    }

    const int r = bland ? [&] {
      int best = -1;
      for (int k = 0; k < m_; ++k) {
        const int j = head_[static_cast<std::size_t>(k)];
        if ((x_(j) < lo_(j) - opt_.primal_tolerance || x_(j) > up_(j) + opt_.primal_tolerance) &&
            (best < 0 || j < head_[static_cast<std::size_t>(best)]))
          best = k;
      }
      return best;
    }()
                        : choose_leaving();

    if (r < 0) {
      if (perturbed) {
        pcost_ = cost_;
        perturbed = false;
        compute_dual();
        correct_dual_signs();
        continue;
      }
      if (!etas_.empty()) {
        if (!refactor_or_reset()) return finish(LpStatus::NumericalError, iter);
        compute_primal();
        compute_dual();
        correct_dual_signs();
        continue;
      }
      return finish(LpStatus::Optimal, iter);
    }

    const int leave = head_[static_cast<std::size_t>(r)];
    const bool to_lower = x_(leave) < lo_(leave);
    const double delta = to_lower ? x_(leave) - lo_(leave) : x_(leave) - up_(leave);

    rho.setZero();
    rho(r) = 1.0;
    btran(rho);

    // pivot row over the nonbasic columns
    touched_.clear();
    for (int i = 0; i < m_; ++i) {
      const double ri = rho(i);
      if (std::abs(ri) <= kZero) continue;
      auto [cols, vals] = model_.row_terms(i);
      const int len = model_.row_length(i);
      for (int k = 0; k < len; ++k) {
        const int j = cols[k];
        if (alpha_row_(j) == 0.0) touched_.push_back(j);
        alpha_row_(j) += ri * vals[k];
        if (alpha_row_(j) == 0.0) alpha_row_(j) = 1e-300;
      }
      const int lj = n_ + i;
      if (status_[static_cast<std::size_t>(lj)] != kBasic) {
        alpha_row_(lj) = -ri;
        touched_.push_back(lj);
      }
    }

    cands.clear();
    for (int j : touched_) {
      const auto st = status_[static_cast<std::size_t>(j)];
      if (st == kBasic || fixed(j)) continue;
      const double a = alpha_row_(j);
      const double at = to_lower ? -a : a;
      if (st == kLower && at > opt_.pivot_tolerance)
        cands.push_back({j, std::max(d_(j), 0.0) / at, at, d_(j)});
      else if (st == kUpper && at < -opt_.pivot_tolerance)
        cands.push_back({j, std::max(-d_(j), 0.0) / -at, -at, -d_(j)});
    }

    // Harris passes with bound flipping, candidates in breakpoint order
    double slope = std::abs(delta);
    flips.clear();
    int q = -1;
    std::sort(cands.begin(), cands.end(),
              [](const Candidate& x, const Candidate& y) { return x.t < y.t || (x.t == y.t && x.j < y.j); });
    const std::size_t K = cands.size();
    suffix_min.assign(K + 1, std::numeric_limits<double>::infinity());
    for (std::size_t k = K; k-- > 0;) {
      const double hk = bland ? cands[k].t : (cands[k].dtilde + opt_.dual_tolerance) / cands[k].abs_alpha;
      suffix_min[k] = std::min(hk, suffix_min[k + 1]);
    }
    for (std::size_t pos = 0; pos < K;) {
      const double theta_max = suffix_min[pos];
      std::size_t end = pos;
      double flip_cost = 0.0;
      while (end < K && (cands[end].t <= theta_max || end == pos)) {
        flip_cost += cands[end].abs_alpha * (up_(cands[end].j) - lo_(cands[end].j));
        ++end;
      }
      if (!bland && slope - flip_cost > opt_.primal_tolerance) {
        // passing this group keeps the slope positive; past the last group it is a dual ray
        slope -= flip_cost;
        for (std::size_t k = pos; k < end; ++k) flips.push_back(cands[k].j);
        pos = end;
        continue;
      }
      const Candidate* best = nullptr;
      for (std::size_t k = pos; k < end; ++k) {
        const Candidate& c = cands[k];
        if (!best || (bland ? c.j < best->j
                            : (c.abs_alpha > best->abs_alpha || (c.abs_alpha == best->abs_alpha && c.j < best->j))))
          best = &c;
      }
      q = best->j;
      break;
    }

    row_alpha.clear();
    for (int j : touched_) {
      if (status_[static_cast<std::size_t>(j)] != kBasic) row_alpha.emplace_back(j, alpha_row_(j));
      alpha_row_(j) = 0.0;
    }

    if (q < 0) {
      if (!etas_.empty() && retries < 3) {
        ++retries;
        if (!refactor_or_reset()) return finish(LpStatus::NumericalError, iter);
        compute_primal();
        compute_dual();
        correct_dual_signs();
        continue;
      }
      return finish(LpStatus::Infeasible, iter);
    }

    // re-evaluate the pivot row entry of q for the dual step
    double alpha_rq = 0.0;
    if (q < n_) {
      for (Eigen::SparseMatrix<double>::InnerIterator it(a_, q); it; ++it) alpha_rq += rho(it.row()) * it.value();
    } else {
      alpha_rq = -rho(q - n_);
    }

    col.setZero();
    add_column(q, 1.0, col);
    ftran(col);
    const double alpha_q_r = col(r);
    if (std::abs(alpha_q_r - alpha_rq) > 1e-6 * (1.0 + std::abs(alpha_q_r)) || std::abs(alpha_q_r) < 1e-11) {
      if (!etas_.empty() && retries < 3) {
        ++retries;
        if (!refactor_or_reset()) return finish(LpStatus::NumericalError, iter);
        compute_primal();
        compute_dual();
        correct_dual_signs();
        continue;
      }
      if (std::abs(alpha_q_r) < 1e-11) return finish(LpStatus::NumericalError, iter);
    }
    retries = 0;

    const double theta_d = d_(q) / alpha_q_r;

    tau = rho;
    ftran(tau);

    // bound flips
    if (!flips.empty()) {
      flip.setZero();
      for (int j : flips) {
        auto& st = status_[static_cast<std::size_t>(j)];
        const double old = x_(j);
        st = st == kLower ? kUpper : kLower;
        place_nonbasic(j);
        add_column(j, x_(j) - old, flip);
      }
      ftran(flip);
      for (int k = 0; k < m_; ++k) x_(head_[static_cast<std::size_t>(k)]) -= flip(k);
    }

    // primal step
    const double target = to_lower ? lo_(leave) : up_(leave);
    const double theta_p = (x_(leave) - target) / alpha_q_r;
    for (int k = 0; k < m_; ++k)
      if (col(k) != 0.0) x_(head_[static_cast<std::size_t>(k)]) -= theta_p * col(k);
    x_(q) += theta_p;
    x_(leave) = target;

    // dual step over the nonbasic columns of the pivot row
    for (const auto& [j, a] : row_alpha) d_(j) -= theta_d * a;
    d_(q) = 0.0;
    d_(leave) = -theta_d;

    // dual steepest-edge weights
    const double wr = weights_(r);
    for (int k = 0; k < m_; ++k) {
      if (k == r || col(k) == 0.0) continue;
      const double ratio = col(k) / alpha_q_r;
      weights_(k) = std::max(weights_(k) - 2.0 * ratio * tau(k) + ratio * ratio * wr, std::max(ratio * ratio, 1e-8));
    }
    weights_(r) = std::max(wr / (alpha_q_r * alpha_q_r), 1e-8);

    // basis change
    Eta eta;
    eta.row = r;
    eta.pivot = alpha_q_r;
    for (int k = 0; k < m_; ++k) {
      if (k == r || std::abs(col(k)) <= kZero) continue;
      eta.index.push_back(k);
      eta.value.push_back(col(k));
    }
    etas_.push_back(std::move(eta));
    head_[static_cast<std::size_t>(r)] = q;
    pos_[static_cast<std::size_t>(q)] = r;
    pos_[static_cast<std::size_t>(leave)] = -1;
    status_[static_cast<std::size_t>(q)] = kBasic;
    status_[static_cast<std::size_t>(leave)] = to_lower ? kLower : kUpper;
    ++iter;

    if ((iter & 7) == 0) {
      const double obj = objective_value() + model_.objective_offset();
      const double bound = obj - (perturbed ? perturbation_slack_ : 0.0);
      if (std::isfinite(opt_.cutoff) && bound > opt_.cutoff + 1e-9 * (1.0 + std::abs(opt_.cutoff)))
        return finish(LpStatus::Cutoff, iter);
      if (obj > last_progress_obj + 1e-9 * (1.0 + std::abs(obj))) {
        last_progress_obj = obj;
        last_progress_iter = iter;
        bland = false;
      } else if (iter - last_progress_iter > 5000) {
        bland = true;
      }
    }
  }
}

LpResult solve_lp(const MilpModel& model, const LpOptions& options) {
  DualSimplex lp(model, options);
  return lp.solve();
}

}  // namespace grove
