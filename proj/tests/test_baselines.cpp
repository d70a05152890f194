#include <doctest.h>

#include <queue>

#include "fixtures.hpp"
#include "grove/baselines.hpp"
#include "grove/error.hpp"
#include "grove/oracle.hpp"

using namespace grove;
using namespace grove::test;

namespace {

// hop count of every node to the CU, by plain BFS over reversed arcs
std::vector<int> hops_to(const NetworkTopology& topo) {
  std::vector<int> d(static_cast<std::size_t>(topo.node_count()), -1);
  std::queue<int> q;
  d[static_cast<std::size_t>(topo.cu_node())] = 0;
  q.push(topo.cu_node());
  while (!q.empty()) {
    const int v = q.front();
    q.pop();
    for (const Arc& a : topo.arcs())
      if (a.to == v && d[static_cast<std::size_t>(a.from)] < 0) {
        d[static_cast<std::size_t>(a.from)] = d[static_cast<std::size_t>(v)] + 1;
        q.push(a.from);
      }
  }
  return d;
}

SolverConfig exact(double limit = 120.0) {
  SolverConfig c;
  c.time_limit = limit;
  c.gap = 1e-7;
  return c;
}

// tiny scenarios with a feasible optimum; infeasible ones are skipped
std::vector<Scenario> feasible_tiny(int count) {
  std::vector<Scenario> out;
  for (std::uint64_t seed = 1; static_cast<int>(out.size()) < count && seed < 200; ++seed) {
    Scenario s = tiny_scenario(seed);
    try {
      enumerate_optimum(s);
    } catch (const InfeasibleDecisions&) {
      continue;
    }
    out.push_back(std::move(s));
  }
  return out;
}

double tolerance(const MethodResult& a, const MethodResult& b) {
  return std::abs(a.opex) * std::max(a.solve.gap, 0.0) + std::abs(b.opex) * std::max(b.solve.gap, 0.0) + 1e-6;
}

}  // namespace

TEST_SUITE("baselines") {
  TEST_CASE("static path on a direct link") {
    const Scenario s = direct_link(0.5, 10.0);
    const auto paths = static_routing_paths(s.topology);
    REQUIRE(paths.size() == 1);
    REQUIRE(paths[0].size() == 1);
    CHECK(s.topology.arcs()[static_cast<std::size_t>(paths[0][0])].from == s.topology.du_node(0));
    CHECK(s.topology.arcs()[static_cast<std::size_t>(paths[0][0])].to == s.topology.cu_node());
  }

  TEST_CASE("static paths of the presets are shortest") {
    for (TopologyPreset p : {TopologyPreset::Du6, TopologyPreset::Du12, TopologyPreset::Du24}) {
      const NetworkTopology topo = build_topology(p);
      const auto hops = hops_to(topo);
      const auto paths = static_routing_paths(topo);
      REQUIRE(static_cast<int>(paths.size()) == topo.du_count());
      for (int r = 0; r < topo.du_count(); ++r) {
        const auto& path = paths[static_cast<std::size_t>(r)];
        CHECK(static_cast<int>(path.size()) == hops[static_cast<std::size_t>(topo.du_node(r))]);
        int v = topo.du_node(r);
        for (int e : path) {
          CHECK(topo.arcs()[static_cast<std::size_t>(e)].from == v);
          v = topo.arcs()[static_cast<std::size_t>(e)].to;
        }
        CHECK(v == topo.cu_node());
      }
    }
  }

  TEST_CASE("equal-depth switches resolve to the lower id") {
    const NetworkTopology topo = build_topology(
        {{0, NodeKind::CU, "cu"}, {1, NodeKind::Switch, "s1"}, {2, NodeKind::Switch, "s2"}, {3, NodeKind::DU, "du"}},
        {{0, 2}, {0, 1}, {2, 3}, {1, 3}});
    const auto paths = static_routing_paths(topo);
    CHECK(topo.arcs()[static_cast<std::size_t>(paths[0][0])].to == 1);
  }

  TEST_CASE("method names") {
    CHECK(method_from_string("static") == Method::StaticRouting);
    CHECK(to_string(Method::TrafficAware) == "traffic-aware");
    CHECK_THROWS_AS(method_from_string("dynamic"), InvalidArgument);
  }

  TEST_CASE("without traffic routing does not matter") {
    Scenario s = small_du6(4);
    s.users.traffic.setZero();
    const MethodResult p = solve_proposed(s, exact());
    const MethodResult st = solve_static_routing(s, exact());
    REQUIRE(p.decisions);
    REQUIRE(st.decisions);
    CHECK(std::abs(p.opex - st.opex) <= tolerance(p, st));
  }

  TEST_CASE("uncapacitated links make static routing optimal") {
    for (Scenario& s : feasible_tiny(5)) {
      s.topology.set_all_capacities(kInf);
      const MethodResult p = solve_proposed(s, exact());
      const MethodResult st = solve_static_routing(s, exact());
      REQUIRE(p.decisions);
      REQUIRE(st.decisions);
      CHECK(std::abs(p.opex - st.opex) <= tolerance(p, st));
    }
  }

  TEST_CASE("without solar or storage traffic-aware matches the proposed method") {
    for (Scenario& s : feasible_tiny(5)) {
      s.energy.solar_scale_cu = s.energy.solar_scale_du = 0.0;
      s.energy.battery_cu_kwh = s.energy.battery_du_kwh = 0.0;
      s.energy.initial_cu_kwh = s.energy.initial_du_kwh = 0.0;
      const MethodResult p = solve_proposed(s, exact());
      const MethodResult ta = solve_traffic_aware(s, exact());
      REQUIRE(p.decisions);
      REQUIRE(ta.decisions);
      CHECK(std::abs(p.opex - ta.opex) <= tolerance(p, ta));
    }
  }

  TEST_CASE("baseline decisions are valid and never beat the proposed method") {
    for (const Scenario& s : feasible_tiny(6)) {
      const MethodResult p = solve_proposed(s, exact());
      REQUIRE(p.decisions);
      CHECK(validate_solution(*p.decisions, s).feasible());
      CHECK(p.invalid_incumbents == 0);

      const MethodResult st = solve_static_routing(s, exact());
      if (st.decisions) {
        CHECK(validate_solution(*st.decisions, s).feasible());
        CHECK(p.opex <= st.opex + tolerance(p, st));
        for (int t = 0; t < s.intervals; ++t)
          for (int r = 0; r < s.du_count(); ++r) {
            const auto fixed = static_routing_paths(s.topology)[static_cast<std::size_t>(r)];
            int v = s.topology.du_node(r);
            std::vector<int> nodes{v};
            for (int e : fixed) nodes.push_back(s.topology.arcs()[static_cast<std::size_t>(e)].to);
            CHECK(st.decisions->paths[static_cast<std::size_t>(t)][static_cast<std::size_t>(r)] == nodes);
          }
      } else {
        CHECK(st.solve.status == SolveStatus::Infeasible);
      }

      const MethodResult ta = solve_traffic_aware(s, exact());
      REQUIRE(ta.decisions);
      CHECK(validate_ledger(ta.decisions->ledger).empty());
      // greedy realization may end the day below a cyclic start charge, which the proposed method may not
      if (!s.energy.cyclic_battery) CHECK(p.opex <= ta.opex + tolerance(p, ta));
    }
  }
}
