#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "grove/energy.hpp"
#include "grove/grove_model.hpp"
#include "grove/scenario.hpp"

namespace grove::test {

/// CU and one DU joined by a single link; one user whose URFs may all run at the CU.
inline Scenario direct_link(double rho, double link, int urfs = 2) {
  ScenarioConfig c;
  c.preset.reset();
  c.nodes = {{0, NodeKind::CU, "cu"}, {1, NodeKind::DU, "du"}};
  c.edges = {{0, 1, link}};
  c.rrhs_per_du = 1;
  c.users_per_rrh = 1;
  c.urf_count = urfs;
  c.dpe_cu = 1;
  c.dpe_du = 1;
  c.capacity_cu = 10.0;
  c.capacity_du = 10.0;
  c.intervals = 2;
  c.interval_hours = 1.0;
  c.energy.solar_scale_cu = 0.0;
  c.energy.solar_scale_du = 0.0;
  c.energy.dpe_cu_wh = 300.0;
  c.energy.dpe_du_wh = 400.0;
  Scenario s = generate_scenario(c);
  s.users.traffic.setConstant(rho);
  s.users.delay.setConstant(urfs);
  s.validate();
  return s;
}

/// Small du6 instance: 6 DUs, 1 RRH per DU, `users` users each, 4 intervals of 6 h.
inline Scenario small_du6(std::uint64_t seed = 1, int users = 2, TrafficTier tier = TrafficTier::Medium) {
  ScenarioConfig c;
  c.rrhs_per_du = 1;
  c.users_per_rrh = users;
  c.intervals = 4;
  c.dpe_cu = 2;
  c.dpe_du = 2;
  c.capacity_cu = 3.0;
  c.capacity_du = 2.0;
  c.tier = tier;
  c.seed = seed;
  return generate_scenario(c);
}

/// Decisions built by hand: user i runs cu_count[i] URFs on CU DPE 0 and the rest on
/// DPE 0 of its DU in every interval, DU r routes over `paths[r]` (arc ids), and the
/// batteries follow the greedy dispatch.
inline Decisions hand_decisions(const Scenario& s, const std::vector<int>& cu_count,
                                const std::vector<std::vector<int>>& paths) {
  const int T = s.intervals, I = s.user_count(), R = s.du_count(), E = s.topology.arc_count();
  const int F = s.urf_count;
  Decisions d;
  d.active_cu = Eigen::MatrixXi::Zero(T, s.dpe_cu);
  for (int t = 0; t < T; ++t) {
    Eigen::MatrixXi pl = Eigen::MatrixXi::Zero(I, s.dpe_cu + s.dpe_du);
    Eigen::MatrixXi adu = Eigen::MatrixXi::Zero(R, s.dpe_du);
    Eigen::MatrixXi route = Eigen::MatrixXi::Zero(R, E);
    Eigen::MatrixXd aux = Eigen::MatrixXd::Zero(R, E);
    Eigen::VectorXd g = Eigen::VectorXd::Zero(R);
    for (int i = 0; i < I; ++i) {
      const int c = cu_count[static_cast<std::size_t>(i)];
      pl(i, 0) = c;
      pl(i, s.dpe_cu) = F - c;
      if (c > 0) d.active_cu(t, 0) = 1;
      if (F - c > 0) adu(s.users.du_of_user(i), 0) = 1;
      g(s.users.du_of_user(i)) += s.users.traffic(i, t) * c;
    }
    std::vector<std::vector<int>> nodes(static_cast<std::size_t>(R));
    for (int r = 0; r < R; ++r) {
      nodes[static_cast<std::size_t>(r)].push_back(s.topology.du_node(r));
      for (int e : paths[static_cast<std::size_t>(r)]) {
        route(r, e) = 1;
        aux(r, e) = g(r);
        nodes[static_cast<std::size_t>(r)].push_back(s.topology.arcs()[static_cast<std::size_t>(e)].to);
      }
    }
    d.placement.push_back(pl);
    d.active_du.push_back(adu);
    d.route.push_back(route);
    d.route_aux.push_back(aux);
    d.paths.push_back(nodes);
  }
  const EnergyParams& e = s.energy;
  Eigen::MatrixXd gen(R + 1, T);
  gen.row(0) = e.solar_scale_cu * e.generation_cu.transpose();
  for (int r = 0; r < R; ++r) gen.row(r + 1) = e.solar_scale_du * e.generation_du.row(r);
  Eigen::VectorXd cap = Eigen::VectorXd::Constant(R + 1, e.battery_du_kwh);
  Eigen::VectorXd init = Eigen::VectorXd::Constant(R + 1, e.initial_du_kwh);
  cap(0) = e.battery_cu_kwh;
  init(0) = e.initial_cu_kwh;
  d.ledger = greedy_battery_dispatch(consumption_from_activity(d, s), gen, cap, init);
  return d;
}

inline bool has_violation(const ValidationReport& report, const std::string& tag) {
  for (const auto& v : report.violations)
    if (v.tag == tag) return true;
  return false;
}

inline constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace grove::test
