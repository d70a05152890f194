#include <doctest.h>

#include "fixtures.hpp"
#include "grove/baselines.hpp"
#include "grove/error.hpp"
#include "grove/grove_model.hpp"
#include "grove/oracle.hpp"
#include "linearization.hpp"

using namespace grove;
using namespace grove::test;

namespace {

// CU(0) - S1(1) - DU(2), plus S2(3) and S3(4) hanging off the CU and linked to each other
Scenario switch_chain() {
  ScenarioConfig c;
  c.preset.reset();
  c.nodes = {{0, NodeKind::CU, "cu"}, {1, NodeKind::Switch, "s1"}, {2, NodeKind::DU, "du"},
             {3, NodeKind::Switch, "s2"}, {4, NodeKind::Switch, "s3"}};
  c.edges = {{0, 1}, {1, 2}, {0, 3}, {3, 4}, {4, 0}};
  c.rrhs_per_du = 1;
  c.users_per_rrh = 1;
  c.urf_count = 2;
  c.dpe_cu = 1;
  c.dpe_du = 1;
  c.capacity_cu = 5.0;
  c.capacity_du = 5.0;
  c.intervals = 2;
  c.link_capacity = 10.0;
  return generate_scenario(c);
}

// two DUs behind one switch whose uplink carries `uplink`
Scenario shared_uplink(double uplink) {
  ScenarioConfig c;
  c.preset.reset();
  c.nodes = {{0, NodeKind::CU, "cu"}, {1, NodeKind::Switch, "s"}, {2, NodeKind::DU, "a"}, {3, NodeKind::DU, "b"}};
  c.edges = {{0, 1, uplink}, {1, 2, 100.0}, {1, 3, 100.0}};
  c.rrhs_per_du = 1;
  c.users_per_rrh = 1;
  c.urf_count = 2;
  c.dpe_cu = 1;
  c.dpe_du = 1;
  c.capacity_cu = 10.0;
  c.capacity_du = 10.0;
  c.intervals = 1;
  Scenario s = generate_scenario(c);
  s.users.traffic.setConstant(0.8);
  s.users.delay.setConstant(2);
  return s;
}

std::vector<int> arcs_of(const NetworkTopology& topo, const std::vector<int>& nodes) {
  std::vector<int> out;
  for (std::size_t k = 0; k + 1 < nodes.size(); ++k) out.push_back(topo.find_arc(nodes[k], nodes[k + 1]));
  return out;
}

}  // namespace

TEST_SUITE("milp") {
  TEST_CASE("row and column counts of the default instance") {
    const Scenario s = generate_scenario(ScenarioConfig{});
    const GroveModel gm = build_model(s);
    CHECK(gm.milp.count_rows_with_tag("eq16") == 12 * 6 * 24);
    CHECK(gm.milp.count_variables(VarRole::RouteAux) == 6 * 24 * 28);
    CHECK(gm.milp.count_variables(VarRole::Route) == 6 * 24 * 28);
    for (int k : gm.milp.rows_with_tag("eq8")) CHECK(gm.milp.row(k).rhs == 3.0);
    CHECK(gm.milp.find_row("eq8_t0_u17") >= 0);
    for (const Variable& v : gm.milp.variables())
      if (v.kind == VarKind::Binary) {
        // DPEs the delay bounds make unavoidable are fixed on through their lower bound
        CHECK((v.lower == 0.0 || v.lower == 1.0));
        CHECK(v.upper == 1.0);
      }
  }

  TEST_CASE("big-M values") {
    const Scenario s = generate_scenario(ScenarioConfig{});
    const BigMValues m = big_m_values(s);
    CHECK(m.cu_activation == 900.0);
    for (int r = 0; r < 6; ++r) CHECK(m.du_activation(r) == 150.0);
    const auto by_du = s.users.users_by_du(6);
    for (int t = 0; t < s.intervals; ++t) {
      double expected = 0.0;
      for (int i : by_du[0]) expected += 3.0 * s.users.traffic(i, t);
      CHECK(m.bandwidth(0, t) == doctest::Approx(expected));
    }

    Scenario idle = small_du6();
    idle.users.traffic.col(2).setZero();
    const BigMValues z = big_m_values(idle);
    for (int r = 0; r < idle.du_count(); ++r) CHECK(z.bandwidth(r, 2) == 0.0);
  }

  TEST_CASE("path decoding") {
    const NetworkTopology topo = build_topology(
        {{0, NodeKind::CU, "cu"}, {1, NodeKind::Switch, "s1"}, {2, NodeKind::DU, "du1"}}, {{0, 1}, {1, 2}});
    std::vector<int> selected(static_cast<std::size_t>(topo.arc_count()), 0);
    selected[static_cast<std::size_t>(topo.find_arc(2, 1))] = 1;
    selected[static_cast<std::size_t>(topo.find_arc(1, 0))] = 1;
    CHECK(decode_path(topo, 0, selected) == std::vector<int>{2, 1, 0});
  }

  TEST_CASE("a detached cycle is flagged, not rejected") {
    const Scenario s = switch_chain();
    const GroveModel gm = build_model(s);
    Decisions d = hand_decisions(s, {1}, {arcs_of(s.topology, {2, 1, 0})});
    Eigen::VectorXd x = decisions_to_values(gm, s, d);
    for (int t = 0; t < s.intervals; ++t) {
      x(gm.index.l(t, 0, s.topology.find_arc(3, 4))) = 1.0;
      x(gm.index.l(t, 0, s.topology.find_arc(4, 3))) = 1.0;
    }
    const Decisions back = extract_decisions(gm, s, x);
    CHECK(back.paths[0][0] == std::vector<int>{2, 1, 0});
    CHECK(back.cycle_warnings.size() == static_cast<std::size_t>(s.intervals));
    CHECK(validate_solution(back, s).feasible());
  }

  TEST_CASE("fractional binaries are refused on extraction") {
    const Scenario s = switch_chain();
    const GroveModel gm = build_model(s);
    Eigen::VectorXd x = decisions_to_values(gm, s, hand_decisions(s, {0}, {arcs_of(s.topology, {2, 1, 0})}));
    x(gm.index.a_du(0, 0, 0)) = 0.5;
    CHECK_THROWS_AS(extract_decisions(gm, s, x), ExtractionError);
  }

  TEST_CASE("delay bound at its limit") {
    Scenario s = switch_chain();
    s.users.delay.setConstant(1);
    const Decisions d = hand_decisions(s, {1}, {arcs_of(s.topology, {2, 1, 0})});
    CHECK(validate_solution(d, s).feasible());
    const Decisions over = hand_decisions(s, {2}, {arcs_of(s.topology, {2, 1, 0})});
    CHECK(has_violation(validate_solution(over, s), "eq9"));
  }

  TEST_CASE("bandwidth checked in product form") {
    const Scenario s = shared_uplink(1.0);
    const auto via_switch = [&](int du) { return arcs_of(s.topology, {s.topology.du_node(du), 1, 0}); };
    const Decisions full = hand_decisions(s, {2, 2}, {via_switch(0), via_switch(1)});
    CHECK(has_violation(validate_solution(full, s), "eq17"));

    const Decisions local = hand_decisions(s, {0, 0}, {via_switch(0), via_switch(1)});
    CHECK_FALSE(has_violation(validate_solution(local, s), "eq17"));
  }

  TEST_CASE("placements stay with the user's own DU") {
    const Scenario s = shared_uplink(10.0);
    const auto via_switch = [&](int du) { return arcs_of(s.topology, {s.topology.du_node(du), 1, 0}); };
    Decisions d = hand_decisions(s, {1, 1}, {via_switch(0), via_switch(1)});
    REQUIRE(validate_solution(d, s).feasible());
    // the model has no slot for a foreign DU, so a lost URF shows up as an incomplete assignment
    d.placement[0](0, s.dpe_cu) = 0;
    CHECK(has_violation(validate_solution(d, s), "eq8"));
  }

  TEST_CASE("linearized bandwidth rows match the product form") {
    const LinearizationStats st = sample_linearization(small_du6(3), 200, 17);
    CHECK(st.sound_samples == 200);
    CHECK(st.complete_samples == 200);
    CHECK(st.sound_counterexamples == 0);
    CHECK(st.complete_counterexamples == 0);
  }

  TEST_CASE("model objective equals the bill of the same decisions") {
    for (std::uint64_t seed = 1; seed <= 6; ++seed) {
      const Scenario s = tiny_scenario(seed);
      if (s.energy.cyclic_battery) continue;
      const GroveModel gm = build_model(s);
      std::vector<int> counts(static_cast<std::size_t>(s.user_count()), 0);
      const Decisions d = hand_decisions(s, counts, static_routing_paths(s.topology));
      const Eigen::VectorXd x = decisions_to_values(gm, s, d);
      CHECK(gm.milp.evaluate_objective(x) == doctest::Approx(opex(d, s)).epsilon(1e-9));
      if (validate_solution(d, s).feasible()) {
        const Decisions back = extract_decisions(gm, s, x);
        CHECK(std::abs(gm.milp.evaluate_objective(x) - opex(back, s)) <= 1e-6);
      }
    }
  }
}
