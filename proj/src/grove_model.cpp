#include "grove/grove_model.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <sstream>

#include "grove/error.hpp"

namespace grove {

namespace {

std::string suffix_t(int t) { return "_t" + std::to_string(t); }

std::string arc_label(const NetworkTopology& topo, int e) {
  const Arc& arc = topo.arcs()[static_cast<std::size_t>(e)];
  return "_" + std::to_string(arc.from) + "_" + std::to_string(arc.to);
}

double generation(const Scenario& s, int u, int t) {
  const EnergyParams& e = s.energy;
  return u == 0 ? e.solar_scale_cu * e.generation_cu(t) : e.solar_scale_du * e.generation_du(u - 1, t);
}

}  // namespace

BigMValues big_m_values(const Scenario& scenario) {
  const int R = scenario.du_count();
  const int F = scenario.urf_count;
  BigMValues m;
  m.cu_activation = static_cast<double>(F) * scenario.user_count();
  m.du_activation = Eigen::VectorXd::Zero(R);
  m.bandwidth = Eigen::MatrixXd::Zero(R, scenario.intervals);
  for (int i = 0; i < scenario.user_count(); ++i) {
    const int r = scenario.users.du_of_user(i);
    m.du_activation(r) += F;
    for (int t = 0; t < scenario.intervals; ++t) m.bandwidth(r, t) += scenario.users.traffic(i, t) * F;
  }
  return m;
}

GroveModel build_model(const Scenario& scenario, const BuildOptions& options) {
  try {
    scenario.validate();
  } catch (const ConfigError& err) {
    throw BuildError(std::string("scenario ") + err.what());
  }
  const NetworkTopology& topo = scenario.topology;
  const int T = scenario.intervals;
  const int R = scenario.du_count();
  const int I = scenario.user_count();
  const int E = topo.arc_count();
  const int V = topo.node_count();
  const int F = scenario.urf_count;
  const int DC = scenario.dpe_cu;
  const int DD = scenario.dpe_du;
  const double h = scenario.interval_hours;
  const EnergyParams& en = scenario.energy;
  const auto by_du = scenario.users.users_by_du(R);
  const BigMValues bigm = big_m_values(scenario);

  if (options.fixed_paths) {
    if (static_cast<int>(options.fixed_paths->size()) != R) throw BuildError("fixed paths: expected one path per DU");
    for (const auto& path : *options.fixed_paths)
      for (int e : path)
        if (e < 0 || e >= E) throw BuildError("fixed paths: arc " + std::to_string(e) + " does not exist");
  }
  for (int e = 0; e < E; ++e)
    if (!(topo.arcs()[static_cast<std::size_t>(e)].capacity >= 0.0))
      throw BuildError("arc" + arc_label(topo, e) + " has negative capacity");

  GroveModel gm;
  gm.options = options;
  GroveIndex& ix = gm.index;
  ix.intervals = T;
  ix.dus = R;
  ix.users = I;
  ix.arcs = E;
  ix.dpe_cu = DC;
  ix.dpe_du = DD;
  ix.placement.assign(static_cast<std::size_t>(T * I * (DC + DD)), -1);
  ix.active_cu.assign(static_cast<std::size_t>(T * DC), -1);
  ix.active_du.assign(static_cast<std::size_t>(T * R * DD), -1);
  if (!options.fixed_paths) {
    ix.route.assign(static_cast<std::size_t>(T * R * E), -1);
    ix.route_aux.assign(static_cast<std::size_t>(T * R * E), -1);
  }
  ix.cu_traffic.assign(static_cast<std::size_t>(T * R), -1);
  ix.green.assign(static_cast<std::size_t>(T * (R + 1)), -1);
  ix.sold.assign(static_cast<std::size_t>(T * (R + 1)), -1);
  ix.stored.assign(static_cast<std::size_t>(T * (R + 1)), -1);

  MilpModel& mm = gm.milp;
  double offset = 0.0;

  // variables
  for (int t = 0; t < T; ++t) {
    const double tariff = en.tariff(t);
    offset += tariff * (en.static_cu_wh + R * en.static_du_wh) * h / 1000.0;
    for (int i = 0; i < I; ++i) {
      const int cu_cap = std::max(0, scenario.cu_function_limit(i, t));
      for (int k = 0; k < DC + DD; ++k) {
        Variable v;
        v.name = "m" + suffix_t(t) + "_u" + std::to_string(i) + "_k" + std::to_string(k);
        v.kind = VarKind::Integer;
        v.lower = 0;
        v.upper = k < DC ? cu_cap : F;
        v.role = VarRole::Placement;
        v.index = {i, k, -1};
        v.interval = t;
        ix.placement[static_cast<std::size_t>((t * I + i) * (DC + DD) + k)] = mm.add_variable(std::move(v));
      }
    }
    for (int d = 0; d < DC; ++d) {
      Variable v;
      v.name = "a_cu" + suffix_t(t) + "_d" + std::to_string(d);
      v.kind = VarKind::Binary;
      v.upper = 1;
      v.role = VarRole::ActiveCu;
      v.index = {d, -1, -1};
      v.interval = t;
      ix.active_cu[static_cast<std::size_t>(t * DC + d)] = mm.add_variable(std::move(v), tariff * en.dpe_cu_wh * h / 1000.0);
    }
    for (int r = 0; r < R; ++r) {
      double forced = 0.0;
      for (int i : by_du[static_cast<std::size_t>(r)])
        forced += scenario.users.traffic(i, t) * (F - std::max(0, scenario.cu_function_limit(i, t)));
      const int must = options.strengthen
                           ? std::min(DD, static_cast<int>(std::ceil(forced / scenario.capacity_du - 1e-9)))
                           : 0;
      for (int d = 0; d < DD; ++d) {
        Variable v;
        v.name = "a_du" + suffix_t(t) + "_r" + std::to_string(r) + "_d" + std::to_string(d);
        v.kind = VarKind::Binary;
        v.lower = d < must ? 1 : 0;
        v.upper = 1;
        v.role = VarRole::ActiveDu;
        v.index = {r, d, -1};
        v.interval = t;
        ix.active_du[static_cast<std::size_t>((t * R + r) * DD + d)] =
            mm.add_variable(std::move(v), tariff * en.dpe_du_wh * h / 1000.0);
      }
    }
    for (int r = 0; r < R; ++r) {
      const double mrt = bigm.bandwidth(r, t);
      Variable g;
      g.name = "g" + suffix_t(t) + "_r" + std::to_string(r);
      g.upper = mrt;
      g.role = VarRole::CuTraffic;
      g.index = {r, -1, -1};
      g.interval = t;
      ix.cu_traffic[static_cast<std::size_t>(t * R + r)] = mm.add_variable(std::move(g));
      if (options.fixed_paths) continue;
      for (int e = 0; e < E; ++e) {
        Variable l;
        l.name = "l" + suffix_t(t) + "_r" + std::to_string(r) + arc_label(topo, e);
        l.kind = VarKind::Binary;
        l.upper = 1;
        l.role = VarRole::Route;
        l.index = {r, e, -1};
        l.interval = t;
        ix.route[static_cast<std::size_t>((t * R + r) * E + e)] = mm.add_variable(std::move(l));
        Variable z;
        z.name = "z" + suffix_t(t) + "_r" + std::to_string(r) + arc_label(topo, e);
        z.upper = std::min(topo.arcs()[static_cast<std::size_t>(e)].capacity, mrt);
        z.role = VarRole::RouteAux;
        z.index = {r, e, -1};
        z.interval = t;
        ix.route_aux[static_cast<std::size_t>((t * R + r) * E + e)] = mm.add_variable(std::move(z));
      }
    }
    for (int u = 0; u <= R; ++u) {
      const std::string unit = u == 0 ? "_cu" + suffix_t(t) : "_du" + suffix_t(t) + "_r" + std::to_string(u - 1);
      const double cap = u == 0 ? en.battery_cu_kwh : en.battery_du_kwh;
      const double psi_max = u == 0 ? unit_consumption(Side::CU, DC, en, h) : unit_consumption(Side::DU, DD, en, h);
      Variable s;
      s.name = "s" + unit;
      s.upper = psi_max;
      s.role = VarRole::Green;
      s.index = {u, -1, -1};
      s.interval = t;
      ix.green[static_cast<std::size_t>(t * (R + 1) + u)] = mm.add_variable(std::move(s), -tariff);
      Variable p;
      p.name = "p" + unit;
      p.upper = cap + generation(scenario, u, t);
      p.role = VarRole::Sold;
      p.index = {u, -1, -1};
      p.interval = t;
      ix.sold[static_cast<std::size_t>(t * (R + 1) + u)] = mm.add_variable(std::move(p), -en.sell_ratio * tariff);
      Variable b;
      b.name = "b" + unit;
      b.upper = cap;
      if (en.cyclic_battery && t == T - 1) b.lower = b.upper = u == 0 ? en.initial_cu_kwh : en.initial_du_kwh;
      b.role = VarRole::Stored;
      b.index = {u, -1, -1};
      b.interval = t;
      ix.stored[static_cast<std::size_t>(t * (R + 1) + u)] = mm.add_variable(std::move(b));
    }
  }
  mm.set_objective_offset(offset);

  // rows
  std::vector<Term> terms;
  auto row = [&](std::string name, std::string tag, Sense sense, double rhs, double big_m = 0.0) {
    Row r;
    r.name = std::move(name);
    r.tag = std::move(tag);
    r.sense = sense;
    r.rhs = rhs;
    r.big_m = big_m;
    mm.add_row(std::move(r), terms);
    terms.clear();
  };

  for (int t = 0; t < T; ++t) {
    const std::string st = suffix_t(t);
    // DPE capacity and activation, CU side
    for (int d = 0; d < DC; ++d) {
      const std::string sd = st + "_d" + std::to_string(d);
      for (int i = 0; i < I; ++i)
        if (scenario.users.traffic(i, t) != 0.0) terms.push_back({ix.m(t, i, d), scenario.users.traffic(i, t)});
      if (options.strengthen) {
        terms.push_back({ix.a_cu(t, d), -scenario.capacity_cu});
        row("eq4" + sd, "eq4", Sense::LE, 0.0);
      } else {
        row("eq4" + sd, "eq4", Sense::LE, scenario.capacity_cu);
      }
      terms.push_back({ix.a_cu(t, d), bigm.cu_activation});
      for (int i = 0; i < I; ++i) terms.push_back({ix.m(t, i, d), -1.0});
      row("eq6" + sd, "eq6", Sense::GE, 0.0, bigm.cu_activation);
      if (options.strengthen && d + 1 < DC) {
        terms = {{ix.a_cu(t, d + 1), 1.0}, {ix.a_cu(t, d), -1.0}};
        row("sym_cu" + sd, "sym", Sense::LE, 0.0);
      }
    }
    // DU side
    for (int r = 0; r < R; ++r) {
      const auto& members = by_du[static_cast<std::size_t>(r)];
      for (int d = 0; d < DD; ++d) {
        const std::string sd = st + "_r" + std::to_string(r) + "_d" + std::to_string(d);
        for (int i : members)
          if (scenario.users.traffic(i, t) != 0.0) terms.push_back({ix.m(t, i, DC + d), scenario.users.traffic(i, t)});
        if (options.strengthen) {
          terms.push_back({ix.a_du(t, r, d), -scenario.capacity_du});
          row("eq5" + sd, "eq5", Sense::LE, 0.0);
        } else {
          row("eq5" + sd, "eq5", Sense::LE, scenario.capacity_du);
        }
        terms.push_back({ix.a_du(t, r, d), bigm.du_activation(r)});
        for (int i : members) terms.push_back({ix.m(t, i, DC + d), -1.0});
        row("eq7" + sd, "eq7", Sense::GE, 0.0, bigm.du_activation(r));
        if (options.strengthen && d + 1 < DD) {
          terms = {{ix.a_du(t, r, d + 1), 1.0}, {ix.a_du(t, r, d), -1.0}};
          row("sym_du" + sd, "sym", Sense::LE, 0.0);
        }
      }
    }
    // full assignment and delay
    for (int i = 0; i < I; ++i) {
      for (int k = 0; k < DC + DD; ++k) terms.push_back({ix.m(t, i, k), 1.0});
      row("eq8" + st + "_u" + std::to_string(i), "eq8", Sense::EQ, F);
      for (int k = 0; k < DC; ++k) terms.push_back({ix.m(t, i, k), 1.0});
      row("eq9" + st + "_u" + std::to_string(i), "eq9", Sense::LE, scenario.cu_function_limit(i, t));
    }
    // battery balance and green usage cap
    for (int u = 0; u <= R; ++u) {
      const std::string su = u == 0 ? st : st + "_r" + std::to_string(u - 1);
      const double initial = u == 0 ? en.initial_cu_kwh : en.initial_du_kwh;
      terms.push_back({ix.b(t, u), 1.0});
      if (t > 0) terms.push_back({ix.b(t - 1, u), -1.0});
      terms.push_back({ix.s(t, u), 1.0});
      terms.push_back({ix.p(t, u), 1.0});
      row((u == 0 ? "eq10" : "eq11") + su, u == 0 ? "eq10" : "eq11", Sense::EQ,
          generation(scenario, u, t) + (t == 0 ? initial : 0.0));
      terms.push_back({ix.s(t, u), 1.0});
      if (u == 0) {
        for (int d = 0; d < DC; ++d) terms.push_back({ix.a_cu(t, d), -en.dpe_cu_wh * h / 1000.0});
        row("eq14" + su, "eq14", Sense::LE, en.static_cu_wh * h / 1000.0);
      } else {
        for (int d = 0; d < DD; ++d) terms.push_back({ix.a_du(t, u - 1, d), -en.dpe_du_wh * h / 1000.0});
        row("eq15" + su, "eq15", Sense::LE, en.static_du_wh * h / 1000.0);
      }
    }
    // CU traffic of each DU
    for (int r = 0; r < R; ++r) {
      terms.push_back({ix.g(t, r), 1.0});
      for (int i : by_du[static_cast<std::size_t>(r)])
        for (int d = 0; d < DC; ++d)
          if (scenario.users.traffic(i, t) != 0.0) terms.push_back({ix.m(t, i, d), -scenario.users.traffic(i, t)});
      row("cu_traffic" + st + "_r" + std::to_string(r), "cu_traffic", Sense::EQ, 0.0);
    }
    if (options.fixed_paths) {
      for (int e = 0; e < E; ++e) {
        const double cap = topo.arcs()[static_cast<std::size_t>(e)].capacity;
        for (int r = 0; r < R; ++r) {
          const auto& path = (*options.fixed_paths)[static_cast<std::size_t>(r)];
          if (std::find(path.begin(), path.end(), e) != path.end()) terms.push_back({ix.g(t, r), 1.0});
        }
        if (terms.empty() || !std::isfinite(cap)) {
          terms.clear();
          continue;
        }
        row("eq17" + st + arc_label(topo, e), "eq17", Sense::LE, cap);
      }
      continue;
    }
    // flow conservation
    for (int r = 0; r < R; ++r) {
      const int source = topo.du_node(r);
      for (int x = 0; x < V; ++x) {
        for (int e : topo.out_arcs(x)) terms.push_back({ix.l(t, r, e), 1.0});
        for (int e : topo.in_arcs(x)) terms.push_back({ix.l(t, r, e), -1.0});
        const double rhs = x == source ? 1.0 : x == topo.cu_node() ? -1.0 : 0.0;
        row("eq16" + st + "_r" + std::to_string(r) + "_n" + std::to_string(x), "eq16", Sense::EQ, rhs);
      }
    }
    // linearized bandwidth
    for (int r = 0; r < R; ++r) {
      const double mrt = bigm.bandwidth(r, t);
      for (int e = 0; e < E; ++e) {
        terms = {{ix.g(t, r), 1.0}, {ix.l(t, r, e), mrt}, {ix.z(t, r, e), -1.0}};
        row("eq19" + st + "_r" + std::to_string(r) + arc_label(topo, e), "eq19", Sense::LE, mrt, mrt);
      }
    }
    for (int e = 0; e < E; ++e) {
      const double cap = topo.arcs()[static_cast<std::size_t>(e)].capacity;
      if (!std::isfinite(cap)) continue;
      for (int r = 0; r < R; ++r) terms.push_back({ix.z(t, r, e), 1.0});
      row("eq20" + st + arc_label(topo, e), "eq20", Sense::LE, cap);
    }
  }
  return gm;
}

std::vector<int> decode_path(const NetworkTopology& topo, int du, const std::vector<int>& selected) {
  const int start = topo.du_node(du);
  const int goal = topo.cu_node();
  std::vector<int> parent(static_cast<std::size_t>(topo.node_count()), -2);
  std::deque<int> queue{start};
  parent[static_cast<std::size_t>(start)] = -1;
  while (!queue.empty()) {
    const int x = queue.front();
    queue.pop_front();
    if (x == goal) break;
    for (int e : topo.out_arcs(x)) {
      if (!selected[static_cast<std::size_t>(e)]) continue;
      const int y = topo.arcs()[static_cast<std::size_t>(e)].to;
      if (parent[static_cast<std::size_t>(y)] != -2) continue;
      parent[static_cast<std::size_t>(y)] = x;
      queue.push_back(y);
    }
  }
  if (parent[static_cast<std::size_t>(goal)] == -2) return {};
  std::vector<int> path;
  for (int x = goal; x != -1; x = parent[static_cast<std::size_t>(x)]) path.push_back(x);
  std::reverse(path.begin(), path.end());
  return path;
}

Eigen::VectorXd cu_traffic(const Decisions& d, const Scenario& s, int t) {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(s.du_count());
  for (int i = 0; i < s.user_count(); ++i)
    g(s.users.du_of_user(i)) += s.users.traffic(i, t) * d.cu_functions(t, i, s.dpe_cu);
  return g;
}

Decisions extract_decisions(const GroveModel& gm, const Scenario& s, const Eigen::VectorXd& x, double tol) {
  const GroveIndex& ix = gm.index;
  if (x.size() != gm.milp.variable_count()) throw ExtractionError("value vector length does not match the model");
  if (ix.intervals != s.intervals || ix.users != s.user_count() || ix.dus != s.du_count())
    throw ExtractionError("model and scenario dimensions differ");
  auto integral = [&](int j) {
    const double v = x(j);
    const double rv = std::round(v);
    if (std::abs(v - rv) > tol)
      throw ExtractionError("variable " + gm.milp.variable(j).name + " = " + std::to_string(v) + " is fractional");
    return static_cast<int>(rv);
  };
  const int T = ix.intervals, R = ix.dus, I = ix.users, E = ix.arcs;
  Decisions d;
  d.placement.resize(static_cast<std::size_t>(T));
  d.active_cu.resize(T, ix.dpe_cu);
  d.active_du.resize(static_cast<std::size_t>(T));
  d.route.resize(static_cast<std::size_t>(T));
  d.paths.resize(static_cast<std::size_t>(T));
  d.ledger = EnergyLedger(R + 1, T);
  const bool has_aux = !ix.route_aux.empty();
  if (has_aux) d.route_aux.resize(static_cast<std::size_t>(T));
  for (int t = 0; t < T; ++t) {
    auto& pl = d.placement[static_cast<std::size_t>(t)];
    pl.resize(I, ix.slots());
    for (int i = 0; i < I; ++i)
      for (int k = 0; k < ix.slots(); ++k) pl(i, k) = integral(ix.m(t, i, k));
    for (int c = 0; c < ix.dpe_cu; ++c) d.active_cu(t, c) = integral(ix.a_cu(t, c));
    auto& adu = d.active_du[static_cast<std::size_t>(t)];
    adu.resize(R, ix.dpe_du);
    for (int r = 0; r < R; ++r)
      for (int c = 0; c < ix.dpe_du; ++c) adu(r, c) = integral(ix.a_du(t, r, c));
    auto& route = d.route[static_cast<std::size_t>(t)];
    route = Eigen::MatrixXi::Zero(R, E);
    if (gm.options.fixed_paths) {
      for (int r = 0; r < R; ++r)
        for (int e : (*gm.options.fixed_paths)[static_cast<std::size_t>(r)]) route(r, e) = 1;
    } else {
      for (int r = 0; r < R; ++r)
        for (int e = 0; e < E; ++e) route(r, e) = integral(ix.l(t, r, e));
    }
    if (has_aux) {
      auto& aux = d.route_aux[static_cast<std::size_t>(t)];
      aux.resize(R, E);
      for (int r = 0; r < R; ++r)
        for (int e = 0; e < E; ++e) aux(r, e) = std::max(0.0, x(ix.z(t, r, e)));
    }
    auto& paths = d.paths[static_cast<std::size_t>(t)];
    paths.resize(static_cast<std::size_t>(R));
    for (int r = 0; r < R; ++r) {
      std::vector<int> sel(static_cast<std::size_t>(E));
      int count = 0;
      for (int e = 0; e < E; ++e) count += sel[static_cast<std::size_t>(e)] = route(r, e) != 0;
      paths[static_cast<std::size_t>(r)] = decode_path(s.topology, r, sel);
      const auto& path = paths[static_cast<std::size_t>(r)];
      if (path.empty()) throw ExtractionError("no DU -> CU path for DU " + std::to_string(r) + " at t=" + std::to_string(t));
      if (count > static_cast<int>(path.size()) - 1) d.cycle_warnings.emplace_back(t, r);
    }
    for (int u = 0; u <= R; ++u) {
      d.ledger.green(u, t) = x(ix.s(t, u));
      d.ledger.sold(u, t) = x(ix.p(t, u));
      d.ledger.stored(u, t) = x(ix.b(t, u));
      d.ledger.generated(u, t) = generation(s, u, t);
    }
  }
  d.ledger.consumption = consumption_from_activity(d, s);
  d.ledger.capacity(0) = s.energy.battery_cu_kwh;
  d.ledger.initial(0) = s.energy.initial_cu_kwh;
  for (int u = 1; u <= R; ++u) {
    d.ledger.capacity(u) = s.energy.battery_du_kwh;
    d.ledger.initial(u) = s.energy.initial_du_kwh;
  }
  repair_ledger(d.ledger, s.energy.cyclic_battery);
  return d;
}

Eigen::VectorXd decisions_to_values(const GroveModel& gm, const Scenario& s, const Decisions& d) {
  const GroveIndex& ix = gm.index;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(gm.milp.variable_count());
  for (int t = 0; t < ix.intervals; ++t) {
    const auto& pl = d.placement[static_cast<std::size_t>(t)];
    for (int i = 0; i < ix.users; ++i)
      for (int k = 0; k < ix.slots(); ++k) x(ix.m(t, i, k)) = pl(i, k);
    for (int c = 0; c < ix.dpe_cu; ++c) x(ix.a_cu(t, c)) = d.active_cu(t, c);
    for (int r = 0; r < ix.dus; ++r)
      for (int c = 0; c < ix.dpe_du; ++c) x(ix.a_du(t, r, c)) = d.active_du[static_cast<std::size_t>(t)](r, c);
    const Eigen::VectorXd g = cu_traffic(d, s, t);
    for (int r = 0; r < ix.dus; ++r) {
      x(ix.g(t, r)) = g(r);
      if (ix.route.empty()) continue;
      for (int e = 0; e < ix.arcs; ++e) {
        const int l = d.route[static_cast<std::size_t>(t)](r, e);
        x(ix.l(t, r, e)) = l;
        x(ix.z(t, r, e)) = l * g(r);
      }
    }
    for (int u = 0; u <= ix.dus; ++u) {
      x(ix.s(t, u)) = d.ledger.green(u, t);
      x(ix.p(t, u)) = d.ledger.sold(u, t);
      x(ix.b(t, u)) = d.ledger.stored(u, t);
    }
  }
  return x;
}

std::string ValidationReport::summary(std::size_t max_items) const {
  if (violations.empty()) return "feasible";
  std::ostringstream os;
  os << violations.size() << " violation(s):";
  for (std::size_t k = 0; k < violations.size() && k < max_items; ++k) {
    os << " [" << violations[k].tag;
    for (int v : violations[k].index) os << ' ' << v;
    os << " by " << violations[k].slack << ']';
  }
  return os.str();
}

ValidationReport validate_solution(const Decisions& d, const Scenario& s, double tol) {
  ValidationReport rep;
  auto& out = rep.violations;
  const int T = s.intervals, R = s.du_count(), I = s.user_count(), E = s.topology.arc_count();
  const int DC = s.dpe_cu, DD = s.dpe_du, F = s.urf_count;
  bool dims = d.intervals() == T && d.active_cu.rows() == T && d.active_cu.cols() == DC &&
              static_cast<int>(d.active_du.size()) == T && static_cast<int>(d.route.size()) == T;
  for (int t = 0; dims && t < T; ++t) {
    const auto& pl = d.placement[static_cast<std::size_t>(t)];
    dims = pl.rows() == I && pl.cols() == DC + DD && d.active_du[static_cast<std::size_t>(t)].rows() == R &&
           d.active_du[static_cast<std::size_t>(t)].cols() == DD && d.route[static_cast<std::size_t>(t)].rows() == R &&
           d.route[static_cast<std::size_t>(t)].cols() == E;
  }
  if (!dims) {
    out.push_back({"dimensions", {}, 0.0});
    return rep;
  }
  const auto by_du = s.users.users_by_du(R);
  const NetworkTopology& topo = s.topology;
  for (int t = 0; t < T; ++t) {
    const auto& pl = d.placement[static_cast<std::size_t>(t)];
    const auto& adu = d.active_du[static_cast<std::size_t>(t)];
    const auto& route = d.route[static_cast<std::size_t>(t)];
    if ((pl.array() < 0).any()) out.push_back({"domain_m", {t}, static_cast<double>(pl.minCoeff())});
    for (int c = 0; c < DC; ++c)
      if (d.active_cu(t, c) != 0 && d.active_cu(t, c) != 1) out.push_back({"binary_a", {t, -1, c}, 0.0});
    for (int r = 0; r < R; ++r) {
      for (int c = 0; c < DD; ++c)
        if (adu(r, c) != 0 && adu(r, c) != 1) out.push_back({"binary_a", {t, r, c}, 0.0});
      for (int e = 0; e < E; ++e)
        if (route(r, e) != 0 && route(r, e) != 1) out.push_back({"binary_l", {t, r, e}, 0.0});
    }
    // capacity and activation
    for (int c = 0; c < DC; ++c) {
      double load = 0.0;
      int count = 0;
      for (int i = 0; i < I; ++i) {
        load += s.users.traffic(i, t) * pl(i, c);
        count += pl(i, c);
      }
      if (load > s.capacity_cu + tol) out.push_back({"eq4", {t, c}, load - s.capacity_cu});
      if (count > 0 && d.active_cu(t, c) == 0) out.push_back({"eq6", {t, c}, static_cast<double>(count)});
    }
    for (int r = 0; r < R; ++r)
      for (int c = 0; c < DD; ++c) {
        double load = 0.0;
        int count = 0;
        for (int i : by_du[static_cast<std::size_t>(r)]) {
          load += s.users.traffic(i, t) * pl(i, DC + c);
          count += pl(i, DC + c);
        }
        if (load > s.capacity_du + tol) out.push_back({"eq5", {t, r, c}, load - s.capacity_du});
        if (count > 0 && adu(r, c) == 0) out.push_back({"eq7", {t, r, c}, static_cast<double>(count)});
      }
    for (int i = 0; i < I; ++i) {
      const int total = pl.row(i).sum();
      if (total != F) out.push_back({"eq8", {t, i}, static_cast<double>(total - F)});
      const int cu = pl.row(i).head(DC).sum();
      if (cu > s.cu_function_limit(i, t)) out.push_back({"eq9", {t, i}, static_cast<double>(cu - s.cu_function_limit(i, t))});
    }
    // flow conservation
    for (int r = 0; r < R; ++r)
      for (int x = 0; x < topo.node_count(); ++x) {
        int net = 0;
        for (int e : topo.out_arcs(x)) net += route(r, e);
        for (int e : topo.in_arcs(x)) net -= route(r, e);
        const int rhs = x == topo.du_node(r) ? 1 : x == topo.cu_node() ? -1 : 0;
        if (net != rhs) out.push_back({"eq16", {t, r, x}, static_cast<double>(net - rhs)});
      }
    // bandwidth in product form
    const Eigen::VectorXd g = cu_traffic(d, s, t);
    for (int e = 0; e < E; ++e) {
      double used = 0.0;
      for (int r = 0; r < R; ++r) used += route(r, e) * g(r);
      const double cap = topo.arcs()[static_cast<std::size_t>(e)].capacity;
      if (used > cap + tol * std::max(1.0, cap)) out.push_back({"eq17", {t, e}, used - cap});
    }
  }
  // energy bookkeeping
  for (const LedgerViolation& v : validate_ledger(d.ledger, s)) out.push_back({v.tag, {v.interval, v.unit}, v.amount});
  if (d.ledger.units() == R + 1 && d.ledger.intervals() == T) {
    const Eigen::MatrixXd psi = consumption_from_activity(d, s);
    for (int u = 0; u <= R; ++u)
      for (int t = 0; t < T; ++t) {
        const double diff = d.ledger.consumption(u, t) - psi(u, t);
        if (std::abs(diff) > kLedgerTolerance) out.push_back({u == 0 ? "eq2" : "eq1", {t, u}, diff});
      }
  }
  return rep;
}

}  // namespace grove
