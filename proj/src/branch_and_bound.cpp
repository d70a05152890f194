#include "grove/branch_and_bound.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <exception>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include "grove/error.hpp"
#include "grove/simplex.hpp"

namespace grove {

std::string_view to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::FeasibleGap: return "feasible-gap";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::TimeLimitNoIncumbent: return "time-limit-no-incumbent";
  }
  return "?";
}

std::string_view to_string(BranchingRule rule) {
  return rule == BranchingRule::MostFractional ? "most-fractional" : "priority";
}

std::string_view to_string(NodeSelection rule) {
  switch (rule) {
    case NodeSelection::BestBoundPlunge: return "best-bound-plunge";
    case NodeSelection::BestBound: return "best-bound";
    case NodeSelection::DepthFirst: return "depth-first";
  }
  return "?";
}

void SolverConfig::validate() const {
  if (!(time_limit > 0)) throw InvalidArgument("time limit must be positive");
  if (!(gap >= 0 && gap < 1)) throw InvalidArgument("gap tolerance must lie in [0, 1)");
  if (!(absolute_gap >= 0)) throw InvalidArgument("absolute gap must be non-negative");
  if (!(integrality_tolerance >= 0 && integrality_tolerance < 0.5))
    throw InvalidArgument("integrality tolerance must lie in [0, 0.5)");
  if (workers < 1) throw InvalidArgument("worker count must be positive");
  if (node_limit < 1) throw InvalidArgument("node limit must be positive");
}

double relative_gap(double incumbent, double bound) {
  if (!std::isfinite(incumbent)) return std::numeric_limits<double>::infinity();
  if (bound >= incumbent) return 0.0;
  if (!std::isfinite(bound)) return std::numeric_limits<double>::infinity();
  const double denom = std::abs(incumbent);
  return denom > 0 ? (incumbent - bound) / denom : std::numeric_limits<double>::infinity();
}

long peak_memory_kb() {
  std::ifstream in("/proc/self/status");
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("VmHWM:", 0) == 0) {
      std::istringstream fields(line.substr(6));
      long kb = 0;
      fields >> kb;
      return kb;
    }
  }
  return 0;
}

namespace {

using Clock = std::chrono::steady_clock;
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kFeasibility = 1e-6;
/// Children stop carrying their parent's basis once this many nodes are open.
constexpr std::size_t kBasisStoreLimit = 2000;

struct BoundChange {
  int var;
  double lo;
  double hi;
};

struct Node {
  long id = 0;
  int depth = 0;
  double bound = -kInf;
  std::vector<BoundChange> changes;
  std::shared_ptr<const BasisState> basis;
};

int branch_class(VarRole role) {
  switch (role) {
    case VarRole::ActiveCu:
    case VarRole::ActiveDu: return 0;
    case VarRole::Route: return 1;
    case VarRole::Placement: return 2;
    default: return 3;
  }
}

class Search {
 public:
  Search(const MilpModel& model, const SolverConfig& config, const SolveHooks& hooks)
      : model_(model), config_(config), hooks_(hooks), start_(Clock::now()) {
    root_lo_ = model.lower_bounds();
    root_hi_ = model.upper_bounds();
    for (int j = 0; j < model.variable_count(); ++j)
      if (model.is_integer(j)) integers_.push_back(j);
  }

  SolveResult run() {
    if (hooks_.start) offer(*hooks_.start);
    Node root;
    root.id = next_id_++;
    {
      std::lock_guard lock(mutex_);
      active_.insert(root.bound);
    }
    DualSimplex lp(model_);
    busy_ = 1;
    try {
      process(lp, std::move(root), true);
    } catch (...) {
      error_ = std::current_exception();
    }
    {
      std::lock_guard lock(mutex_);
      --busy_;
    }
    if (!error_ && config_.workers > 1) {
      std::vector<std::thread> threads;
      for (int w = 0; w < config_.workers; ++w) threads.emplace_back([this] { worker(); });
      for (auto& t : threads) t.join();
    } else if (!error_) {
      worker(&lp);
    }
    if (error_) std::rethrow_exception(error_);
    return result();
  }

 private:
  double elapsed() const { return std::chrono::duration<double>(Clock::now() - start_).count(); }

  double tolerance(double incumbent) const {
    if (!std::isfinite(incumbent)) return 0.0;
    // shaved so that a bound pruned exactly at the tolerance still reports a gap <= config_.gap
    return std::max(config_.absolute_gap, config_.gap * std::abs(incumbent) * (1.0 - 1e-9));
  }

  // caller holds mutex_
  double global_bound_locked() {
    double b = std::min(incumbent_obj_, pruned_min_);
    if (!active_.empty()) b = std::min(b, *active_.begin());
    reported_bound_ = std::max(reported_bound_, b);
    return reported_bound_;
  }

  // caller holds mutex_
  bool converged_locked() {
    if (!std::isfinite(incumbent_obj_)) return false;
    const double b = global_bound_locked();
    return incumbent_obj_ - b <= config_.absolute_gap || relative_gap(incumbent_obj_, b) <= config_.gap;
  }

  bool out_of_budget_locked() const { return elapsed() > config_.time_limit || nodes_ >= config_.node_limit; }

  void worker(DualSimplex* shared = nullptr) {
    std::unique_ptr<DualSimplex> own;
    DualSimplex* lp = shared;
    try {
      for (;;) {
        Node node;
        {
          std::unique_lock lock(mutex_);
          cv_.wait(lock, [&] { return stop_ || !queue_.empty() || busy_ == 0; });
          if (stop_ || queue_.empty()) break;
          if (converged_locked() || out_of_budget_locked()) {
            stop_ = true;
            break;
          }
          auto it = queue_.begin();
          node = std::move(it->second);
          queue_.erase(it);
          ++busy_;
        }
        if (!lp) {
          own = std::make_unique<DualSimplex>(model_);
          lp = own.get();
        }
        process(*lp, std::move(node), false);
        {
          std::lock_guard lock(mutex_);
          --busy_;
        }
        cv_.notify_all();
      }
    } catch (...) {
      std::lock_guard lock(mutex_);
      if (!error_) error_ = std::current_exception();
      stop_ = true;
      --busy_;
    }
    cv_.notify_all();
  }

  std::pair<double, long> key(const Node& n) const {
    if (config_.selection == NodeSelection::DepthFirst) return {-static_cast<double>(n.depth), -n.id};
    return {n.bound, n.id};
  }

  // caller holds mutex_; the node's bound is already in active_
  void enqueue_locked(Node node) {
    auto k = key(node);
    queue_.emplace(k, std::move(node));
  }

  // caller holds mutex_
  void retire_locked(double node_bound, double final_bound) {
    auto it = active_.find(node_bound);
    if (it != active_.end()) active_.erase(it);
    if (final_bound < incumbent_obj_) pruned_min_ = std::min(pruned_min_, final_bound);
  }

  void apply(DualSimplex& lp, const Node& node, Eigen::VectorXd& lo, Eigen::VectorXd& hi) const {
    lo = root_lo_;
    hi = root_hi_;
    for (const auto& c : node.changes) {
      lo(c.var) = std::max(lo(c.var), c.lo);
      hi(c.var) = std::min(hi(c.var), c.hi);
    }
    lp.set_bounds(lo, hi);
  }

  LpResult solve_node(DualSimplex& lp, double cutoff) {
    LpOptions opt = lp.options();
    opt.cutoff = cutoff;
    opt.time_limit = std::max(1e-3, config_.time_limit - elapsed());
    lp.set_options(opt);
    LpResult res = lp.solve();
    if (res.status == LpStatus::NumericalError) {
      lp.reset_basis();
      res = lp.solve();
    }
    if (res.status == LpStatus::NumericalError)
      throw SolverError("node LP failed numerically after a basis reset (" + std::to_string(res.iterations) +
                        " iterations); the model may be badly scaled");
    if (res.status == LpStatus::Unbounded) throw SolverError("LP relaxation is unbounded");
    return res;
  }

  void process(DualSimplex& lp, Node node, bool root) {
    Eigen::VectorXd lo, hi;
    bool warm = false;
    for (;;) {
      apply(lp, node, lo, hi);
      if (!warm && node.basis) lp.load_basis(*node.basis);
      double cutoff;
      {
        std::lock_guard lock(mutex_);
        cutoff = std::isfinite(incumbent_obj_) ? incumbent_obj_ - tolerance(incumbent_obj_) : kInf;
      }
      LpResult res = solve_node(lp, cutoff);
      long node_number;
      {
        std::lock_guard lock(mutex_);
        node_number = nodes_++;
        lp_iterations_ += res.iterations;
      }
      if (res.status == LpStatus::TimeLimit || res.status == LpStatus::IterationLimit) {
        std::lock_guard lock(mutex_);
        enqueue_locked(std::move(node));
        stop_ = true;
        return;
      }
      if (root && res.status == LpStatus::Optimal) root_bound_ = res.objective;

      double node_bound = kInf;
      int branch_var = -1;
      if (res.status == LpStatus::Cutoff) {
        node_bound = cutoff;
      } else if (res.status == LpStatus::Optimal) {
        node_bound = std::max(node.bound, res.objective);
        double inc;
        {
          std::lock_guard lock(mutex_);
          inc = incumbent_obj_;
        }
        if (node_bound < inc - tolerance(inc)) {
          branch_var = choose_branch(res.x);
          if (branch_var < 0) {
            polish(lp, res.x, lo, hi);
            branch_var = -1;
          } else if (hooks_.heuristic && (root || node_number % hooks_.heuristic_interval == 0)) {
            run_heuristic(res.x, node_number, node.depth);
          }
        }
      }

      if (branch_var < 0) {
        {
          std::lock_guard lock(mutex_);
          retire_locked(node.bound, node_bound);
          log_locked(node_number, node.depth, res);
          if (converged_locked()) stop_ = true;
        }
        cv_.notify_all();
        return;
      }

      const double v = res.x(branch_var);
      Node down, up;
      for (Node* child : {&down, &up}) {
        child->depth = node.depth + 1;
        child->bound = node_bound;
        child->changes = node.changes;
      }
      down.changes.push_back({branch_var, -kInf, std::floor(v)});
      up.changes.push_back({branch_var, std::ceil(v), kInf});
      const bool plunge = config_.selection == NodeSelection::BestBoundPlunge;
      const bool up_first = v - std::floor(v) >= 0.5;
      bool stop_now;
      {
        std::lock_guard lock(mutex_);
        down.id = next_id_++;
        up.id = next_id_++;
        if (queue_.size() < kBasisStoreLimit) {
          auto basis = std::make_shared<const BasisState>(lp.basis());
          down.basis = basis;
          up.basis = basis;
        }
        retire_locked(node.bound, kInf);
        active_.insert(node_bound);
        active_.insert(node_bound);
        log_locked(node_number, node.depth, res);
        Node& first = up_first ? up : down;
        Node& second = up_first ? down : up;
        if (config_.selection == NodeSelection::DepthFirst) {
          enqueue_locked(std::move(second));
          enqueue_locked(std::move(first));
        } else {
          enqueue_locked(std::move(second));
          if (!plunge) enqueue_locked(std::move(first));
        }
        stop_now = stop_ || converged_locked() || out_of_budget_locked();
        if (stop_now && plunge) enqueue_locked(std::move(first));
        if (stop_now) stop_ = true;
      }
      cv_.notify_all();
      if (!plunge || stop_now) return;
      node = std::move(up_first ? up : down);
      warm = true;
      root = false;
    }
  }

  int choose_branch(const Eigen::VectorXd& x) const {
    int best = -1;
    int best_class = 4;
    double best_frac = 0.0;
    for (int j : integers_) {
      const double f = x(j) - std::floor(x(j));
      const double frac = std::min(f, 1.0 - f);
      if (frac <= config_.integrality_tolerance) continue;
      const Variable& var = model_.variable(j);
      const int cls = config_.branching == BranchingRule::Priority ? branch_class(var.role)
                      : var.kind == VarKind::Binary                 ? 0
                                                                    : 1;
      if (cls < best_class || (cls == best_class && frac > best_frac)) {
        best = j;
        best_class = cls;
        best_frac = frac;
      }
    }
    return best;
  }

  // re-solves with the integer columns fixed at their rounded values so that the
  // candidate satisfies every row exactly, not only up to the integrality tolerance
  void polish(DualSimplex& lp, const Eigen::VectorXd& x, Eigen::VectorXd lo, Eigen::VectorXd hi) {
    for (int j : integers_) lo(j) = hi(j) = std::round(x(j));
    lp.set_bounds(lo, hi);
    LpOptions opt = lp.options();
    opt.cutoff = kInf;
    lp.set_options(opt);
    const LpResult res = lp.solve();
    if (res.status == LpStatus::Optimal) offer(res.x);
  }

  void run_heuristic(const Eigen::VectorXd& x, long node, int depth) {
    std::optional<Eigen::VectorXd> candidate;
    {
      std::lock_guard guard(heuristic_mutex_);
      double inc;
      {
        std::lock_guard lock(mutex_);
        inc = incumbent_obj_;
      }
      candidate = hooks_.heuristic(HeuristicContext{x, node, depth, inc, config_.seed});
    }
    if (candidate) offer(*candidate);
  }

  bool offer(Eigen::VectorXd x) {
    if (x.size() != model_.variable_count()) return false;
    for (int j : integers_) x(j) = std::round(x(j));
    for (int j = 0; j < model_.variable_count(); ++j) x(j) = std::clamp(x(j), root_lo_(j), root_hi_(j));
    if (model_.max_violation(x, true) > kFeasibility) return false;
    const double obj = model_.evaluate_objective(x);
    std::lock_guard lock(mutex_);
    if (!(obj < incumbent_obj_ - 1e-12 * (1.0 + std::abs(obj)))) return false;
    incumbent_obj_ = obj;
    incumbent_ = std::move(x);
    if (hooks_.on_incumbent) hooks_.on_incumbent(incumbent_, obj);
    return true;
  }

  // caller holds mutex_
  void log_locked(long node, int depth, const LpResult& res) {
    if (!config_.log) return;
    const double bound = global_bound_locked();
    const double lp_obj = res.status == LpStatus::Optimal ? res.objective : kInf;
    *config_.log << node << ',' << depth << ',' << lp_obj << ',' << bound << ',' << incumbent_obj_ << ','
                 << relative_gap(incumbent_obj_, bound) << ',' << elapsed() << '\n';
  }

  SolveResult result() {
    std::lock_guard lock(mutex_);
    SolveResult r;
    const bool exhausted = queue_.empty();
    r.nodes = nodes_;
    r.lp_iterations = lp_iterations_;
    r.root_bound = root_bound_;
    r.bound = global_bound_locked();
    if (std::isfinite(incumbent_obj_)) {
      r.x = incumbent_;
      r.objective = incumbent_obj_;
      r.gap = relative_gap(incumbent_obj_, r.bound);
      r.status = exhausted || converged_locked() ? SolveStatus::Optimal : SolveStatus::FeasibleGap;
    } else {
      r.status = exhausted ? SolveStatus::Infeasible : SolveStatus::TimeLimitNoIncumbent;
      if (exhausted) r.bound = kInf;
    }
    r.wall_time = elapsed();
    r.peak_memory_kb = peak_memory_kb();
    return r;
  }

  const MilpModel& model_;
  const SolverConfig& config_;
  const SolveHooks& hooks_;
  Clock::time_point start_;
  Eigen::VectorXd root_lo_;
  Eigen::VectorXd root_hi_;
  std::vector<int> integers_;

  std::mutex mutex_;
  std::mutex heuristic_mutex_;
  std::condition_variable cv_;
  std::map<std::pair<double, long>, Node> queue_;
  std::multiset<double> active_;
  int busy_ = 0;
  bool stop_ = false;
  long next_id_ = 0;
  long nodes_ = 0;
  long lp_iterations_ = 0;
  double root_bound_ = -kInf;
  double incumbent_obj_ = kInf;
  Eigen::VectorXd incumbent_;
  double pruned_min_ = kInf;
  double reported_bound_ = -kInf;
  std::exception_ptr error_;
};

}  // namespace

SolveResult branch_and_bound(const MilpModel& model, const SolverConfig& config, const SolveHooks& hooks) {
  config.validate();
  Search search(model, config, hooks);
  return search.run();
}

}  // namespace grove
