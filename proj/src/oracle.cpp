#include "grove/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <random>

namespace grove {

namespace {

constexpr double kEps = 1e-9;
constexpr double kPivot = 1e-11;

/// min c'x subject to Ax = b, x >= 0 with b >= 0. Two phases, Bland's rule throughout.
std::optional<Eigen::VectorXd> tableau_simplex(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                                               const Eigen::VectorXd& c) {
  const int m = static_cast<int>(A.rows());
  const int n = static_cast<int>(A.cols());
  // columns: n structurals, m artificials, rhs
  Eigen::MatrixXd tab = Eigen::MatrixXd::Zero(m, n + m + 1);
  tab.leftCols(n) = A;
  tab.block(0, n, m, m).setIdentity();
  tab.col(n + m) = b;
  std::vector<int> basis(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) basis[static_cast<std::size_t>(i)] = n + i;

  auto pivot = [&](int r, int q) {
    tab.row(r) /= tab(r, q);
    for (int i = 0; i < m; ++i)
      if (i != r && tab(i, q) != 0.0) tab.row(i) -= tab(i, q) * tab.row(r);
    basis[static_cast<std::size_t>(r)] = q;
  };
  auto run = [&](const Eigen::VectorXd& cost, int columns) {
    for (;;) {
      int q = -1;
      for (int j = 0; j < columns && q < 0; ++j) {
        double d = cost(j);
        for (int i = 0; i < m; ++i) d -= cost(basis[static_cast<std::size_t>(i)]) * tab(i, j);
        if (d < -kEps) q = j;
      }
      if (q < 0) return true;
      int r = -1;
      double best = std::numeric_limits<double>::infinity();
      for (int i = 0; i < m; ++i) {
        if (tab(i, q) <= kPivot) continue;
        const double ratio = tab(i, n + m) / tab(i, q);
        if (ratio < best - 1e-14 ||
            (std::abs(ratio - best) <= 1e-14 && basis[static_cast<std::size_t>(i)] < basis[static_cast<std::size_t>(r)])) {
          best = ratio;
          r = i;
        }
      }
      if (r < 0) return false;
      pivot(r, q);
    }
  };

  Eigen::VectorXd phase1 = Eigen::VectorXd::Zero(n + m);
  phase1.tail(m).setOnes();
  run(phase1, n + m);
  double infeas = 0.0;
  for (int i = 0; i < m; ++i)
    if (basis[static_cast<std::size_t>(i)] >= n) infeas += tab(i, n + m);
  if (infeas > 1e-7) return std::nullopt;
  // drive remaining artificials out of the basis where a structural can replace them
  for (int i = 0; i < m; ++i) {
    if (basis[static_cast<std::size_t>(i)] < n) continue;
    for (int j = 0; j < n; ++j)
      if (std::abs(tab(i, j)) > 1e-9) {
        pivot(i, j);
        break;
      }
  }
  Eigen::VectorXd phase2 = Eigen::VectorXd::Zero(n + m);
  phase2.head(n) = c;
  if (!run(phase2, n)) return std::nullopt;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < m; ++i)
    if (basis[static_cast<std::size_t>(i)] < n) x(basis[static_cast<std::size_t>(i)]) = std::max(0.0, tab(i, n + m));
  return x;
}

struct Group {
  double size;
  int count;
};

bool distribute(const std::vector<Group>& groups, std::size_t g, std::vector<double>& load, double capacity,
                std::vector<std::vector<int>>& take) {
  if (g == groups.size()) return true;
  const int k = static_cast<int>(load.size());
  const Group& grp = groups[g];
  // split grp.count over the k bins, largest share first into the lowest bin
  std::vector<int> share(static_cast<std::size_t>(k), 0);
  auto rec = [&](auto&& self, int b, int left) -> bool {
    if (b == k - 1) {
      if (load[static_cast<std::size_t>(b)] + left * grp.size > capacity + kEps) return false;
      share[static_cast<std::size_t>(b)] = left;
      for (int q = 0; q < k; ++q) load[static_cast<std::size_t>(q)] += share[static_cast<std::size_t>(q)] * grp.size;
      take[g] = share;
      const bool ok = distribute(groups, g + 1, load, capacity, take);
      for (int q = 0; q < k; ++q) load[static_cast<std::size_t>(q)] -= share[static_cast<std::size_t>(q)] * grp.size;
      return ok;
    }
    for (int q = left; q >= 0; --q) {
      if (load[static_cast<std::size_t>(b)] + q * grp.size > capacity + kEps) continue;
      share[static_cast<std::size_t>(b)] = q;
      if (self(self, b + 1, left - q)) return true;
    }
    return false;
  };
  return rec(rec, 0, grp.count);
}

/// Fewest bins holding all groups; -1 if `bins` do not suffice. `take[g][b]` receives
/// the number of items of group g in bin b.
int min_bins(const std::vector<Group>& groups, int bins, double capacity, std::vector<std::vector<int>>* take) {
  int items = 0;
  double total = 0.0;
  for (const Group& g : groups) {
    items += g.count;
    total += g.count * g.size;
  }
  if (items == 0) {
    if (take) take->assign(groups.size(), std::vector<int>(static_cast<std::size_t>(std::max(bins, 1)), 0));
    return 0;
  }
  const int lower = std::max(1, static_cast<int>(std::ceil(total / capacity - 1e-12)));
  for (int k = lower; k <= bins; ++k) {
    std::vector<double> load(static_cast<std::size_t>(k), 0.0);
    std::vector<std::vector<int>> local(groups.size());
    if (distribute(groups, 0, load, capacity, local)) {
      if (take) *take = std::move(local);
      return k;
    }
  }
  return -1;
}

struct Witness {
  std::vector<int> split;
  std::vector<int> path_choice;
};

double unit_generation(const Scenario& s, int u, int t) {
  const EnergyParams& e = s.energy;
  return u == 0 ? e.solar_scale_cu * e.generation_cu(t) : e.solar_scale_du * e.generation_du(u - 1, t);
}

}  // namespace

std::vector<std::vector<int>> simple_paths(const NetworkTopology& topology, int du) {
  std::vector<std::vector<int>> out;
  std::vector<int> path;
  std::vector<char> seen(static_cast<std::size_t>(topology.node_count()), 0);
  auto dfs = [&](auto&& self, int v) -> void {
    if (v == topology.cu_node()) {
      out.push_back(path);
      return;
    }
    for (int e : topology.out_arcs(v)) {
      const int w = topology.arcs()[static_cast<std::size_t>(e)].to;
      if (seen[static_cast<std::size_t>(w)]) continue;
      seen[static_cast<std::size_t>(w)] = 1;
      path.push_back(e);
      self(self, w);
      path.pop_back();
      seen[static_cast<std::size_t>(w)] = 0;
    }
  };
  const int src = topology.du_node(du);
  seen[static_cast<std::size_t>(src)] = 1;
  dfs(dfs, src);
  return out;
}

Scenario tiny_scenario(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto uniform = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  auto coin = [&](double p) { return uniform(0.0, 1.0) < p; };

  const int switches = pick(1, 2);
  const int dus = pick(2, 3);
  ScenarioConfig c;
  c.preset.reset();
  c.nodes.push_back({0, NodeKind::CU, "cu"});
  for (int k = 0; k < switches; ++k) {
    const int id = 1 + k;
    c.nodes.push_back({id, NodeKind::Switch, "sw" + std::to_string(k)});
    c.edges.push_back({0, id});
  }
  if (switches == 2 && coin(0.5)) c.edges.push_back({1, 2});
  for (int r = 0; r < dus; ++r) {
    const int id = 1 + switches + r;
    c.nodes.push_back({id, NodeKind::DU, "du" + std::to_string(r)});
    const int sw = 1 + pick(0, switches - 1);
    c.edges.push_back({id, sw});
    if (coin(0.4)) {
      const int other = switches == 2 ? 3 - sw : 0;
      c.edges.push_back({id, coin(0.5) ? 0 : other});
    }
  }
  c.rrhs_per_du = 1;
  c.users_per_rrh = dus == 2 ? pick(1, 3) : pick(1, 2);
  c.urf_count = 2;
  c.dpe_cu = 2;
  c.dpe_du = 2;
  c.capacity_cu = uniform(1.5, 3.0);
  c.capacity_du = uniform(1.2, 2.2);
  c.intervals = 4;
  c.interval_hours = 6.0;
  c.tier = static_cast<TrafficTier>(pick(0, 2));
  c.redraw_delay_per_interval = coin(0.5);
  c.bandwidth_fraction = uniform(0.3, 1.0);
  c.city = synthetic_cities()[static_cast<std::size_t>(pick(0, 3))];
  c.energy.solar_scale_cu = uniform(0.0, 0.3) * c.energy.solar_scale_cu;
  c.energy.solar_scale_du = uniform(0.0, 0.3) * c.energy.solar_scale_du;
  c.energy.battery_cu_kwh = uniform(0.0, 8.0);
  c.energy.battery_du_kwh = uniform(0.0, 4.0);
  c.energy.initial_cu_kwh = uniform(0.0, c.energy.battery_cu_kwh);
  c.energy.initial_du_kwh = uniform(0.0, c.energy.battery_du_kwh);
  c.energy.cyclic_battery = coin(0.3);
  c.seed = seed;
  c.name = "tiny-" + std::to_string(seed);
  return generate_scenario(c);
}

double enumeration_size(const Scenario& s) {
  double routes = 1.0;
  for (int r = 0; r < s.du_count(); ++r) routes *= static_cast<double>(simple_paths(s.topology, r).size());
  double total = 0.0;
  for (int t = 0; t < s.intervals; ++t) {
    double splits = 1.0;
    for (int i = 0; i < s.user_count(); ++i) splits *= std::min(s.urf_count, s.cu_function_limit(i, t)) + 1;
    total += splits * routes;
  }
  return total;
}

double battery_lp(const Eigen::Ref<const Eigen::VectorXd>& consumption,
                  const Eigen::Ref<const Eigen::VectorXd>& generation, const Eigen::Ref<const Eigen::VectorXd>& tariff,
                  double capacity, double initial, double sell_ratio, bool cyclic, Eigen::VectorXd* green,
                  Eigen::VectorXd* sold, Eigen::VectorXd* stored) {
  const int T = static_cast<int>(consumption.size());
  // columns per interval: s, p, b, slack(s <= psi), slack(b <= B)
  const int n = 5 * T;
  const int m = 3 * T + (cyclic ? 1 : 0);
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(m, n);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd c = Eigen::VectorXd::Zero(n);
  auto col = [](int t, int k) { return 5 * t + k; };
  for (int t = 0; t < T; ++t) {
    A(t, col(t, 0)) = 1.0;
    A(t, col(t, 1)) = 1.0;
    A(t, col(t, 2)) = 1.0;
    if (t > 0) A(t, col(t - 1, 2)) = -1.0;
    b(t) = generation(t) + (t == 0 ? initial : 0.0);
    A(T + t, col(t, 0)) = 1.0;
    A(T + t, col(t, 3)) = 1.0;
    b(T + t) = consumption(t);
    A(2 * T + t, col(t, 2)) = 1.0;
    A(2 * T + t, col(t, 4)) = 1.0;
    b(2 * T + t) = capacity;
    c(col(t, 0)) = -tariff(t);
    c(col(t, 1)) = -sell_ratio * tariff(t);
  }
  if (cyclic) {
    A(3 * T, col(T - 1, 2)) = 1.0;
    b(3 * T) = initial;
  }
  const auto x = tableau_simplex(A, b, c);
  if (!x) throw InfeasibleDecisions("battery schedule infeasible");
  if (green) green->resize(T);
  if (sold) sold->resize(T);
  if (stored) stored->resize(T);
  double bill = 0.0;
  for (int t = 0; t < T; ++t) {
    const double s = std::min((*x)(col(t, 0)), consumption(t));
    bill += tariff(t) * (consumption(t) - s - sell_ratio * (*x)(col(t, 1)));
    if (green) (*green)(t) = s;
    if (sold) (*sold)(t) = (*x)(col(t, 1));
    if (stored) (*stored)(t) = std::min((*x)(col(t, 2)), capacity);
  }
  return bill;
}

OracleResult enumerate_optimum(const Scenario& s, const TinyScenarioBound& bound) {
  const NetworkTopology& topo = s.topology;
  const int R = s.du_count();
  const int I = s.user_count();
  const int T = s.intervals;
  const int F = s.urf_count;
  const auto by_du = s.users.users_by_du(R);
  auto refuse = [](const std::string& what, double estimate) { throw OracleRefusal(what, estimate); };
  if (R > bound.max_dus) refuse(std::to_string(R) + " DUs exceed the oracle bound", 0);
  if (topo.switch_count() > bound.max_switches) refuse("too many switches for the oracle", 0);
  for (const auto& users : by_du)
    if (static_cast<int>(users.size()) > bound.max_users_per_du) refuse("too many users per DU for the oracle", 0);
  if (F > bound.max_urfs) refuse("too many URFs for the oracle", 0);
  if (T > bound.max_intervals) refuse("too many intervals for the oracle", 0);
  if (s.dpe_cu > bound.max_dpes || s.dpe_du > bound.max_dpes) refuse("too many DPEs for the oracle", 0);
  const double estimate = enumeration_size(s);
  if (estimate > bound.max_candidates)
    refuse("enumeration needs " + std::to_string(static_cast<long long>(estimate)) + " candidates", estimate);

  std::vector<std::vector<std::vector<int>>> paths(static_cast<std::size_t>(R));
  for (int r = 0; r < R; ++r) paths[static_cast<std::size_t>(r)] = simple_paths(topo, r);

  OracleResult out;
  out.expected_candidates = static_cast<long>(estimate);
  const auto& rho = s.users.traffic;

  // per interval: non-dominated DPE count vectors (CU first) with their first witness
  std::vector<std::vector<std::pair<std::vector<int>, Witness>>> options(static_cast<std::size_t>(T));
  for (int t = 0; t < T; ++t) {
    std::vector<int> limit(static_cast<std::size_t>(I));
    for (int i = 0; i < I; ++i) limit[static_cast<std::size_t>(i)] = std::min(F, s.cu_function_limit(i, t));
    std::map<std::vector<int>, Witness> found;
    std::vector<int> split(static_cast<std::size_t>(I), 0);
    for (bool more = true; more;) {
      std::vector<Group> cu;
      for (int i = 0; i < I; ++i) cu.push_back({rho(i, t), split[static_cast<std::size_t>(i)]});
      std::vector<int> counts(static_cast<std::size_t>(R + 1));
      counts[0] = min_bins(cu, s.dpe_cu, s.capacity_cu, nullptr);
      bool packable = counts[0] >= 0;
      std::vector<double> g(static_cast<std::size_t>(R), 0.0);
      for (int r = 0; r < R && packable; ++r) {
        std::vector<Group> du;
        for (int i : by_du[static_cast<std::size_t>(r)]) {
          du.push_back({rho(i, t), F - split[static_cast<std::size_t>(i)]});
          g[static_cast<std::size_t>(r)] += rho(i, t) * split[static_cast<std::size_t>(i)];
        }
        counts[static_cast<std::size_t>(r + 1)] = min_bins(du, s.dpe_du, s.capacity_du, nullptr);
        packable = counts[static_cast<std::size_t>(r + 1)] >= 0;
      }
      std::vector<int> choice(static_cast<std::size_t>(R), 0);
      bool routed = false;
      for (bool more_paths = true; more_paths;) {
        ++out.candidates;
        if (packable && !routed) {
          std::vector<double> load(static_cast<std::size_t>(topo.arc_count()), 0.0);
          for (int r = 0; r < R; ++r)
            for (int e : paths[static_cast<std::size_t>(r)][static_cast<std::size_t>(choice[static_cast<std::size_t>(r)])])
              load[static_cast<std::size_t>(e)] += g[static_cast<std::size_t>(r)];
          bool ok = true;
          for (int e = 0; e < topo.arc_count() && ok; ++e)
            ok = load[static_cast<std::size_t>(e)] <= topo.arcs()[static_cast<std::size_t>(e)].capacity + kEps;
          if (ok) {
            routed = true;
            found.try_emplace(counts, Witness{split, choice});
          }
        }
        more_paths = false;
        for (int r = 0; r < R; ++r) {
          if (++choice[static_cast<std::size_t>(r)] < static_cast<int>(paths[static_cast<std::size_t>(r)].size())) {
            more_paths = true;
            break;
          }
          choice[static_cast<std::size_t>(r)] = 0;
        }
      }
      more = false;
      for (int i = 0; i < I; ++i) {
        if (++split[static_cast<std::size_t>(i)] <= limit[static_cast<std::size_t>(i)]) {
          more = true;
          break;
        }
        split[static_cast<std::size_t>(i)] = 0;
      }
    }
    // drop count vectors dominated by another feasible one (cost is monotone in consumption)
    auto& keep = options[static_cast<std::size_t>(t)];
    for (const auto& [counts, witness] : found) {
      bool dominated = false;
      for (const auto& [other, unused] : found) {
        if (other == counts) continue;
        bool le = true;
        for (std::size_t k = 0; k < counts.size() && le; ++k) le = other[k] <= counts[k];
        if (le) {
          dominated = true;
          break;
        }
      }
      if (!dominated) keep.emplace_back(counts, witness);
    }
    if (keep.empty()) throw InfeasibleDecisions("no feasible split, packing and routing at t=" + std::to_string(t));
  }
  if (out.candidates != out.expected_candidates)
    throw SolverError("oracle evaluated " + std::to_string(out.candidates) + " candidates, expected " +
                      std::to_string(out.expected_candidates));

  double combos = 1.0;
  for (const auto& o : options) combos *= static_cast<double>(o.size());
  if (combos > bound.max_candidates)
    refuse("cross-interval combinations " + std::to_string(static_cast<long long>(combos)) + " exceed the bound", combos);

  const EnergyParams& en = s.energy;
  const double h = s.interval_hours;
  auto consumption_of = [&](int u, int active) {
    return unit_consumption(u == 0 ? Side::CU : Side::DU, active, en, h);
  };
  std::map<std::pair<int, std::vector<int>>, double> cache;
  auto unit_cost = [&](int u, const std::vector<int>& row) {
    auto key = std::make_pair(u, row);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    Eigen::VectorXd psi(T), gen(T);
    for (int t = 0; t < T; ++t) {
      psi(t) = consumption_of(u, row[static_cast<std::size_t>(t)]);
      gen(t) = unit_generation(s, u, t);
    }
    const double cost = battery_lp(psi, gen, en.tariff, u == 0 ? en.battery_cu_kwh : en.battery_du_kwh,
                                   u == 0 ? en.initial_cu_kwh : en.initial_du_kwh, en.sell_ratio, en.cyclic_battery);
    cache.emplace(std::move(key), cost);
    return cost;
  };

  std::vector<int> pick(static_cast<std::size_t>(T), 0), best_pick;
  double best = std::numeric_limits<double>::infinity();
  for (bool more = true; more;) {
    ++out.combinations;
    double total = 0.0;
    for (int u = 0; u <= R; ++u) {
      std::vector<int> row(static_cast<std::size_t>(T));
      for (int t = 0; t < T; ++t)
        row[static_cast<std::size_t>(t)] =
            options[static_cast<std::size_t>(t)][static_cast<std::size_t>(pick[static_cast<std::size_t>(t)])].first[static_cast<std::size_t>(u)];
      total += unit_cost(u, row);
    }
    if (total < best - 1e-12) {
      best = total;
      best_pick = pick;
    }
    more = false;
    for (int t = 0; t < T; ++t) {
      if (++pick[static_cast<std::size_t>(t)] < static_cast<int>(options[static_cast<std::size_t>(t)].size())) {
        more = true;
        break;
      }
      pick[static_cast<std::size_t>(t)] = 0;
    }
  }

  // materialize the winning candidate
  Decisions& d = out.decisions;
  const int E = topo.arc_count();
  d.placement.resize(static_cast<std::size_t>(T));
  d.active_cu = Eigen::MatrixXi::Zero(T, s.dpe_cu);
  d.active_du.assign(static_cast<std::size_t>(T), Eigen::MatrixXi::Zero(R, s.dpe_du));
  d.route.assign(static_cast<std::size_t>(T), Eigen::MatrixXi::Zero(R, E));
  d.route_aux.assign(static_cast<std::size_t>(T), Eigen::MatrixXd::Zero(R, E));
  d.paths.resize(static_cast<std::size_t>(T));
  for (int t = 0; t < T; ++t) {
    const auto& [counts, w] = options[static_cast<std::size_t>(t)][static_cast<std::size_t>(best_pick[static_cast<std::size_t>(t)])];
    auto& pl = d.placement[static_cast<std::size_t>(t)];
    pl = Eigen::MatrixXi::Zero(I, s.dpe_cu + s.dpe_du);
    std::vector<Group> cu;
    for (int i = 0; i < I; ++i) cu.push_back({rho(i, t), w.split[static_cast<std::size_t>(i)]});
    std::vector<std::vector<int>> take;
    min_bins(cu, s.dpe_cu, s.capacity_cu, &take);
    for (int i = 0; i < I; ++i)
      for (std::size_t b = 0; b < take[static_cast<std::size_t>(i)].size(); ++b) pl(i, static_cast<int>(b)) = take[static_cast<std::size_t>(i)][b];
    for (int k = 0; k < counts[0]; ++k) d.active_cu(t, k) = 1;
    d.paths[static_cast<std::size_t>(t)].resize(static_cast<std::size_t>(R));
    for (int r = 0; r < R; ++r) {
      const auto& users = by_du[static_cast<std::size_t>(r)];
      std::vector<Group> du;
      double g = 0.0;
      for (int i : users) {
        du.push_back({rho(i, t), F - w.split[static_cast<std::size_t>(i)]});
        g += rho(i, t) * w.split[static_cast<std::size_t>(i)];
      }
      min_bins(du, s.dpe_du, s.capacity_du, &take);
      for (std::size_t q = 0; q < users.size(); ++q)
        for (std::size_t b = 0; b < take[q].size(); ++b) pl(users[q], s.dpe_cu + static_cast<int>(b)) = take[q][b];
      for (int k = 0; k < counts[static_cast<std::size_t>(r + 1)]; ++k) d.active_du[static_cast<std::size_t>(t)](r, k) = 1;
      auto& nodes = d.paths[static_cast<std::size_t>(t)][static_cast<std::size_t>(r)];
      nodes.push_back(topo.du_node(r));
      for (int e : paths[static_cast<std::size_t>(r)][static_cast<std::size_t>(w.path_choice[static_cast<std::size_t>(r)])]) {
        d.route[static_cast<std::size_t>(t)](r, e) = 1;
        d.route_aux[static_cast<std::size_t>(t)](r, e) = g;
        nodes.push_back(topo.arcs()[static_cast<std::size_t>(e)].to);
      }
    }
  }
  d.ledger = EnergyLedger(R + 1, T);
  d.ledger.consumption = consumption_from_activity(d, s);
  for (int u = 0; u <= R; ++u) {
    Eigen::VectorXd green, sold, stored;
    d.ledger.capacity(u) = u == 0 ? en.battery_cu_kwh : en.battery_du_kwh;
    d.ledger.initial(u) = u == 0 ? en.initial_cu_kwh : en.initial_du_kwh;
    for (int t = 0; t < T; ++t) d.ledger.generated(u, t) = unit_generation(s, u, t);
    battery_lp(d.ledger.consumption.row(u).transpose(), d.ledger.generated.row(u).transpose(), en.tariff,
               d.ledger.capacity(u), d.ledger.initial(u), en.sell_ratio, en.cyclic_battery, &green, &sold, &stored);
    d.ledger.green.row(u) = green.transpose();
    d.ledger.sold.row(u) = sold.transpose();
    d.ledger.stored.row(u) = stored.transpose();
  }
  repair_ledger(d.ledger, en.cyclic_battery);
  out.opex = best;
  return out;
}

}  // namespace grove
