#include "grove/heuristic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>

namespace grove {

namespace {

constexpr double kPackSlack = 1e-9;
constexpr int kExtraHops = 2;
constexpr int kMaxCandidates = 32;

struct Item {
  double size;
  int user;
};

/// First-fit decreasing; returns per-bin user lists or nothing when `bins` do not suffice.
std::optional<std::vector<std::vector<int>>> ffd(std::vector<Item> items, int bins, double capacity) {
  std::stable_sort(items.begin(), items.end(), [](const Item& a, const Item& b) { return a.size > b.size; });
  std::vector<std::vector<int>> content(static_cast<std::size_t>(bins));
  std::vector<double> load(static_cast<std::size_t>(bins), 0.0);
  for (const Item& it : items) {
    bool placed = false;
    for (int b = 0; b < bins && !placed; ++b) {
      if (load[static_cast<std::size_t>(b)] + it.size <= capacity + kPackSlack) {
        load[static_cast<std::size_t>(b)] += it.size;
        content[static_cast<std::size_t>(b)].push_back(it.user);
        placed = true;
      }
    }
    if (!placed) return std::nullopt;
  }
  return content;
}

int used_bins(const std::vector<std::vector<int>>& content) {
  int used = 0;
  for (std::size_t b = 0; b < content.size(); ++b)
    if (!content[b].empty()) used = static_cast<int>(b) + 1;
  return used;
}

}  // namespace

GroveHeuristic::GroveHeuristic(const GroveModel& model, const Scenario& scenario)
    : gm_(model), scenario_(scenario), by_du_(scenario.users.users_by_du(scenario.du_count())) {
  if (model.options.fixed_paths) static_paths_ = *model.options.fixed_paths;
  const NetworkTopology& topo = scenario.topology;
  const auto hops = topo.hops_to_cu();
  candidates_.resize(static_cast<std::size_t>(scenario.du_count()));
  for (int r = 0; r < scenario.du_count(); ++r) {
    auto& out = candidates_[static_cast<std::size_t>(r)];
    const int src = topo.du_node(r);
    const int max_hops = hops[static_cast<std::size_t>(src)] + kExtraHops;
    std::vector<int> path;
    std::vector<char> seen(static_cast<std::size_t>(topo.node_count()), 0);
    // depth-first enumeration of simple paths, arcs in id order
    auto dfs = [&](auto&& self, int v) -> void {
      if (static_cast<int>(out.size()) >= kMaxCandidates) return;
      if (v == topo.cu_node()) {
        out.push_back(path);
        return;
      }
      for (int e : topo.out_arcs(v)) {
        const int w = topo.arcs()[static_cast<std::size_t>(e)].to;
        if (seen[static_cast<std::size_t>(w)] || hops[static_cast<std::size_t>(w)] < 0) continue;
        if (static_cast<int>(path.size()) + 1 + hops[static_cast<std::size_t>(w)] > max_hops) continue;
        seen[static_cast<std::size_t>(w)] = 1;
        path.push_back(e);
        self(self, w);
        path.pop_back();
        seen[static_cast<std::size_t>(w)] = 0;
      }
    };
    seen[static_cast<std::size_t>(src)] = 1;
    dfs(dfs, src);
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.size() < b.size(); });
  }
  LpOptions opt;
  opt.perturb = false;
  lp_ = std::make_unique<DualSimplex>(model.milp, opt);
}

std::vector<std::vector<int>> GroveHeuristic::route(int t, const std::vector<double>& traffic,
                                                    const Eigen::VectorXd& lp_x, double& overflow) const {
  const NetworkTopology& topo = scenario_.topology;
  const int R = scenario_.du_count();
  const auto& arcs = topo.arcs();
  std::vector<double> load(arcs.size(), 0.0);
  auto excess = [&](int e, double l) {
    return std::max(0.0, l - arcs[static_cast<std::size_t>(e)].capacity);
  };
  overflow = 0.0;
  if (!static_paths_.empty()) {
    for (int r = 0; r < R; ++r)
      for (int e : static_paths_[static_cast<std::size_t>(r)]) load[static_cast<std::size_t>(e)] += traffic[static_cast<std::size_t>(r)];
    for (int e = 0; e < topo.arc_count(); ++e) overflow += excess(e, load[static_cast<std::size_t>(e)]);
    return static_paths_;
  }
  auto weight = [&](int r, const std::vector<int>& path) {
    double w = 0.0;
    for (int e : path) {
      const int col = gm_.index.l(t, r, e);
      if (col >= 0 && lp_x.size() > 0) w += lp_x(col);
    }
    return w - static_cast<double>(path.size());
  };
  std::vector<int> order(static_cast<std::size_t>(R));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return traffic[static_cast<std::size_t>(a)] > traffic[static_cast<std::size_t>(b)];
  });
  std::vector<int> choice(static_cast<std::size_t>(R), 0);
  for (int r : order) {
    const double g = traffic[static_cast<std::size_t>(r)];
    const auto& cands = candidates_[static_cast<std::size_t>(r)];
    int best = 0;
    double best_peak = std::numeric_limits<double>::infinity(), best_w = 0.0;
    for (std::size_t c = 0; c < cands.size(); ++c) {
      double peak = 0.0;
      for (int e : cands[c]) {
        const double cap = arcs[static_cast<std::size_t>(e)].capacity;
        const double l = load[static_cast<std::size_t>(e)] + g;
        peak = std::max(peak, std::isinf(cap) || l <= 0.0 ? 0.0 : cap > 0 ? l / cap : std::numeric_limits<double>::max());
      }
      const double w = weight(r, cands[c]);
      if (peak < best_peak - 1e-12 || (peak <= best_peak + 1e-12 && w > best_w + 1e-12)) {
        best = static_cast<int>(c);
        best_peak = peak;
        best_w = w;
      }
    }
    choice[static_cast<std::size_t>(r)] = best;
    for (int e : cands[static_cast<std::size_t>(best)]) load[static_cast<std::size_t>(e)] += g;
  }
  auto total = [&] {
    double o = 0.0;
    for (int e = 0; e < topo.arc_count(); ++e) o += excess(e, load[static_cast<std::size_t>(e)]);
    return o;
  };
  overflow = total();
  for (int pass = 0; pass < 20 && overflow > kPackSlack; ++pass) {
    bool moved = false;
    for (int r : order) {
      const double g = traffic[static_cast<std::size_t>(r)];
      const auto& cands = candidates_[static_cast<std::size_t>(r)];
      auto& cur = choice[static_cast<std::size_t>(r)];
      for (std::size_t c = 0; c < cands.size(); ++c) {
        if (static_cast<int>(c) == cur) continue;
        for (int e : cands[static_cast<std::size_t>(cur)]) load[static_cast<std::size_t>(e)] -= g;
        for (int e : cands[c]) load[static_cast<std::size_t>(e)] += g;
        const double o = total();
        if (o < overflow - 1e-12) {
          overflow = o;
          cur = static_cast<int>(c);
          moved = true;
        } else {
          for (int e : cands[c]) load[static_cast<std::size_t>(e)] -= g;
          for (int e : cands[static_cast<std::size_t>(cur)]) load[static_cast<std::size_t>(e)] += g;
        }
      }
    }
    if (!moved) break;
  }
  std::vector<std::vector<int>> paths(static_cast<std::size_t>(R));
  for (int r = 0; r < R; ++r)
    paths[static_cast<std::size_t>(r)] = candidates_[static_cast<std::size_t>(r)][static_cast<std::size_t>(choice[static_cast<std::size_t>(r)])];
  return paths;
}

bool GroveHeuristic::repair(int t, IntervalPlan& plan, const Eigen::VectorXd& lp_x) const {
  const Scenario& s = scenario_;
  const int R = s.du_count();
  const int F = s.urf_count;
  const auto& rho = s.users.traffic;
  const NetworkTopology& topo = s.topology;
  auto limit = [&](int i) { return std::min(F, s.cu_function_limit(i, t)); };
  for (int i = 0; i < s.user_count(); ++i) plan.cu_count[static_cast<std::size_t>(i)] =
      std::clamp(plan.cu_count[static_cast<std::size_t>(i)], 0, limit(i));

  auto du_items = [&](int r) {
    std::vector<Item> items;
    for (int i : by_du_[static_cast<std::size_t>(r)])
      for (int c = plan.cu_count[static_cast<std::size_t>(i)]; c < F; ++c) items.push_back({rho(i, t), i});
    return items;
  };
  auto cu_items = [&] {
    std::vector<Item> items;
    for (int i = 0; i < s.user_count(); ++i)
      for (int c = 0; c < plan.cu_count[static_cast<std::size_t>(i)]; ++c) items.push_back({rho(i, t), i});
    return items;
  };
  // largest-load user of `users` whose count can move by `step`
  auto pick = [&](const std::vector<int>& users, int step) {
    int best = -1;
    for (int i : users) {
      const int c = plan.cu_count[static_cast<std::size_t>(i)] + step;
      if (c < 0 || c > limit(i) || rho(i, t) <= 0.0) continue;
      if (best < 0 || rho(i, t) > rho(best, t)) best = i;
    }
    return best;
  };

  const int budget = 4 * F * s.user_count() + 16;
  for (int round = 0; round < budget; ++round) {
    double overflow = 0.0;
    const auto traffic = du_traffic(t, plan);
    plan.paths = route(t, traffic, lp_x, overflow);
    if (overflow > kPackSlack) {
      // shed CU traffic from the DUs crossing the most overloaded arc
      std::vector<double> load(static_cast<std::size_t>(topo.arc_count()), 0.0);
      for (int r = 0; r < R; ++r)
        for (int e : plan.paths[static_cast<std::size_t>(r)]) load[static_cast<std::size_t>(e)] += traffic[static_cast<std::size_t>(r)];
      int worst = -1;
      double worst_excess = 0.0;
      for (int e = 0; e < topo.arc_count(); ++e) {
        const double ex = load[static_cast<std::size_t>(e)] - topo.arcs()[static_cast<std::size_t>(e)].capacity;
        if (ex > worst_excess) {
          worst_excess = ex;
          worst = e;
        }
      }
      std::vector<int> users;
      for (int r = 0; r < R; ++r) {
        const auto& p = plan.paths[static_cast<std::size_t>(r)];
        if (std::find(p.begin(), p.end(), worst) != p.end())
          users.insert(users.end(), by_du_[static_cast<std::size_t>(r)].begin(), by_du_[static_cast<std::size_t>(r)].end());
      }
      const int i = pick(users, -1);
      if (i < 0) return false;
      --plan.cu_count[static_cast<std::size_t>(i)];
      continue;
    }
    bool changed = false;
    for (int r = 0; r < R && !changed; ++r) {
      if (ffd(du_items(r), s.dpe_du, s.capacity_du)) continue;
      const int i = pick(by_du_[static_cast<std::size_t>(r)], +1);
      if (i < 0) return false;
      ++plan.cu_count[static_cast<std::size_t>(i)];
      changed = true;
    }
    if (changed) continue;
    if (!ffd(cu_items(), s.dpe_cu, s.capacity_cu)) {
      // move back to the DU with the most free DPE capacity
      int best = -1;
      double room = -std::numeric_limits<double>::infinity();
      for (int r = 0; r < R; ++r) {
        double load_r = 0.0;
        for (const Item& it : du_items(r)) load_r += it.size;
        const double free = s.dpe_du * s.capacity_du - load_r;
        if (free > room && pick(by_du_[static_cast<std::size_t>(r)], -1) >= 0) {
          room = free;
          best = r;
        }
      }
      if (best < 0) return false;
      --plan.cu_count[static_cast<std::size_t>(pick(by_du_[static_cast<std::size_t>(best)], -1))];
      continue;
    }
    return true;
  }
  return false;
}

std::vector<double> GroveHeuristic::du_traffic(int t, const IntervalPlan& plan) const {
  std::vector<double> g(by_du_.size(), 0.0);
  for (std::size_t r = 0; r < by_du_.size(); ++r)
    for (int i : by_du_[r]) g[r] += scenario_.users.traffic(i, t) * plan.cu_count[static_cast<std::size_t>(i)];
  return g;
}

void GroveHeuristic::consolidate(int t, IntervalPlan& plan, const Eigen::VectorXd& lp_x) const {
  const Scenario& s = scenario_;
  const GroveIndex& ix = gm_.index;
  const int R = s.du_count();
  const int F = s.urf_count;
  const auto& rho = s.users.traffic;
  auto limit = [&](int i) { return std::min(F, s.cu_function_limit(i, t)); };
  auto count = [&](int i) -> int& { return plan.cu_count[static_cast<std::size_t>(i)]; };

  auto du_load = [&](int r) {
    double l = 0.0;
    for (int i : by_du_[static_cast<std::size_t>(r)]) l += rho(i, t) * (F - count(i));
    return l;
  };
  auto du_bins = [&](int r, int bins) -> int {
    std::vector<Item> items;
    for (int i : by_du_[static_cast<std::size_t>(r)])
      for (int c = count(i); c < F; ++c) items.push_back({rho(i, t), i});
    auto packed = ffd(items, bins, s.capacity_du);
    return packed ? used_bins(*packed) : -1;
  };
  auto cu_bins = [&](int bins) -> int {
    std::vector<Item> items;
    for (int i = 0; i < s.user_count(); ++i)
      for (int c = 0; c < count(i); ++c) items.push_back({rho(i, t), i});
    auto packed = ffd(items, bins, s.capacity_cu);
    return packed ? used_bins(*packed) : -1;
  };
  auto bandwidth_ok = [&] {
    double overflow = 0.0;
    route(t, du_traffic(t, plan), lp_x, overflow);
    return overflow <= kPackSlack;
  };
  auto min_du_bins = [&](int r) {
    int forced = 0;
    for (int d = 0; d < s.dpe_du; ++d)
      if (gm_.milp.variable(ix.a_du(t, r, d)).lower > 0.5) ++forced;
    return forced;
  };
  // moves single URFs of `users` one way until `done` holds; picks the largest item not
  // above `need`, else the smallest one
  auto shift = [&](const std::vector<int>& users, int step, double need) {
    int best = -1;
    for (int i : users) {
      const int c = count(i) + step;
      if (c < 0 || c > limit(i) || rho(i, t) <= 0.0) continue;
      if (best < 0) {
        best = i;
        continue;
      }
      const bool fits = rho(i, t) <= need + kPackSlack, best_fits = rho(best, t) <= need + kPackSlack;
      if (fits != best_fits ? fits : fits ? rho(i, t) > rho(best, t) : rho(i, t) < rho(best, t)) best = i;
    }
    if (best >= 0) count(best) += step;
    return best >= 0;
  };

  const int max_moves = F * s.user_count();
  int rounds = 0;
  for (bool improved = true; improved && rounds++ < max_moves * (R + 1);) {
    improved = false;
    const int nc = cu_bins(s.dpe_cu);
    std::vector<int> nd(static_cast<std::size_t>(R));
    for (int r = 0; r < R; ++r) nd[static_cast<std::size_t>(r)] = du_bins(r, s.dpe_du);
    if (nc < 0) return;

    // empty one DPE of DU r into the CU while the CU stays within `cu_limit` DPEs
    auto close_du = [&](int r, int cu_limit) {
      const int target = du_bins(r, s.dpe_du) - 1;
      if (target < min_du_bins(r)) return false;
      const auto saved = plan.cu_count;
      bool ok = false;
      for (int moves = 0; moves < max_moves; ++moves) {
        if (du_bins(r, target) >= 0) {
          ok = true;
          break;
        }
        if (!shift(by_du_[static_cast<std::size_t>(r)], +1, du_load(r) - target * s.capacity_du)) break;
      }
      if (ok && plan.cu_count != saved && bandwidth_ok() && cu_bins(cu_limit) >= 0) return true;
      plan.cu_count = saved;
      return false;
    };
    for (int r = 0; r < R && !improved; ++r) improved = close_du(r, nc);
    if (!improved && nc < s.dpe_cu) {
      // one more CU DPE pays off when it empties at least two DU DPEs
      const auto saved = plan.cu_count;
      int closed = 0;
      for (int r = 0; r < R; ++r)
        if (close_du(r, nc + 1)) ++closed;
      if (closed >= 2) {
        improved = true;
      } else {
        plan.cu_count = saved;
      }
    }
    if (improved || nc == 0) continue;

    // empty one CU DPE into DU DPEs that are already running
    const auto saved = plan.cu_count;
    bool ok = false;
    for (int moves = 0; moves < max_moves; ++moves) {
      if (cu_bins(nc - 1) >= 0) {
        ok = true;
        break;
      }
      double cu_load = 0.0;
      for (int i = 0; i < s.user_count(); ++i) cu_load += rho(i, t) * count(i);
      const double need = cu_load - (nc - 1) * s.capacity_cu;
      // the DU with most room inside its running DPEs
      int best = -1;
      double room = 0.0;
      for (int r = 0; r < R; ++r) {
        const double free = nd[static_cast<std::size_t>(r)] * s.capacity_du - du_load(r);
        if (free > room) {
          room = free;
          best = r;
        }
      }
      if (best < 0) break;
      std::vector<int> movable;
      for (int i : by_du_[static_cast<std::size_t>(best)])
        if (rho(i, t) <= room + kPackSlack) movable.push_back(i);
      if (!shift(movable, -1, need)) break;
      if (du_bins(best, nd[static_cast<std::size_t>(best)]) < 0) break;
    }
    if (ok) {
      improved = true;
      continue;
    }
    plan.cu_count = saved;
  }
  double overflow = 0.0;
  plan.paths = route(t, du_traffic(t, plan), lp_x, overflow);
}

bool GroveHeuristic::pack(int t, const IntervalPlan& plan, Eigen::VectorXd& x) const {
  const Scenario& s = scenario_;
  const GroveIndex& ix = gm_.index;
  const int F = s.urf_count;
  const auto& rho = s.users.traffic;
  const MilpModel& milp = gm_.milp;

  auto set_active = [&](int col, bool on) { x(col) = std::max(on ? 1.0 : 0.0, milp.variable(col).lower); };

  std::vector<Item> cu;
  for (int i = 0; i < s.user_count(); ++i)
    for (int c = 0; c < plan.cu_count[static_cast<std::size_t>(i)]; ++c) cu.push_back({rho(i, t), i});
  auto cu_bins = ffd(cu, s.dpe_cu, s.capacity_cu);
  if (!cu_bins) return false;
  for (int d = 0; d < s.dpe_cu; ++d) {
    set_active(ix.a_cu(t, d), !(*cu_bins)[static_cast<std::size_t>(d)].empty());
    for (int i : (*cu_bins)[static_cast<std::size_t>(d)]) x(ix.m(t, i, d)) += 1.0;
  }
  for (int r = 0; r < s.du_count(); ++r) {
    std::vector<Item> items;
    for (int i : by_du_[static_cast<std::size_t>(r)])
      for (int c = plan.cu_count[static_cast<std::size_t>(i)]; c < F; ++c) items.push_back({rho(i, t), i});
    auto bins = ffd(items, s.dpe_du, s.capacity_du);
    if (!bins) return false;
    for (int d = 0; d < s.dpe_du; ++d) {
      set_active(ix.a_du(t, r, d), !(*bins)[static_cast<std::size_t>(d)].empty());
      for (int i : (*bins)[static_cast<std::size_t>(d)]) x(ix.m(t, i, s.dpe_cu + d)) += 1.0;
    }
    for (int e : plan.paths[static_cast<std::size_t>(r)]) {
      const int col = ix.l(t, r, e);
      if (col >= 0) x(col) = 1.0;
    }
  }
  return true;
}

std::optional<Eigen::VectorXd> GroveHeuristic::from_plans(const std::vector<IntervalPlan>& plans) {
  const MilpModel& milp = gm_.milp;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(milp.variable_count());
  for (int t = 0; t < scenario_.intervals; ++t)
    if (!pack(t, plans[static_cast<std::size_t>(t)], x)) return std::nullopt;
  Eigen::VectorXd lo = milp.lower_bounds(), hi = milp.upper_bounds();
  for (int j = 0; j < milp.variable_count(); ++j)
    if (milp.is_integer(j)) {
      if (x(j) < lo(j) || x(j) > hi(j)) return std::nullopt;
      lo(j) = hi(j) = x(j);
    }
  lp_->set_bounds(lo, hi);
  const LpResult res = lp_->solve();
  if (res.status != LpStatus::Optimal) return std::nullopt;
  return res.x;
}

std::optional<Eigen::VectorXd> GroveHeuristic::round(const Eigen::VectorXd& lp_x) {
  const Scenario& s = scenario_;
  const GroveIndex& ix = gm_.index;
  std::vector<IntervalPlan> plans(static_cast<std::size_t>(s.intervals));
  for (int t = 0; t < s.intervals; ++t) {
    IntervalPlan& plan = plans[static_cast<std::size_t>(t)];
    plan.cu_count.assign(static_cast<std::size_t>(s.user_count()), 0);
    for (int i = 0; i < s.user_count(); ++i) {
      double c = 0.0;
      for (int k = 0; k < s.dpe_cu; ++k) c += lp_x(ix.m(t, i, k));
      plan.cu_count[static_cast<std::size_t>(i)] = static_cast<int>(std::lround(c));
    }
    if (!repair(t, plan, lp_x)) return std::nullopt;
    consolidate(t, plan, lp_x);
  }
  return from_plans(plans);
}

}  // namespace grove
