#include <doctest.h>

#include <map>
#include <sstream>

#include "fixtures.hpp"
#include "grove/baselines.hpp"
#include "grove/branch_and_bound.hpp"
#include "grove/lp_format.hpp"
#include "grove/oracle.hpp"
#include "grove/simplex.hpp"

using namespace grove;
using namespace grove::test;

namespace {

int var(MilpModel& m, const std::string& name, VarKind kind, double lo, double up, double cost) {
  Variable v;
  v.name = name;
  v.kind = kind;
  v.lower = lo;
  v.upper = up;
  return m.add_variable(v, cost);
}

void row(MilpModel& m, const std::string& name, Sense sense, double rhs, const std::vector<Term>& terms) {
  Row r;
  r.name = name;
  r.tag = name;
  r.sense = sense;
  r.rhs = rhs;
  m.add_row(r, terms);
}

// a small knapsack whose relaxation is fractional
MilpModel knapsack() {
  MilpModel m;
  const double w[] = {5, 7, 4, 3, 6, 2};
  const double v[] = {8, 11, 6, 4, 9, 3};
  std::vector<Term> cap;
  for (int j = 0; j < 6; ++j) cap.emplace_back(var(m, "x" + std::to_string(j), VarKind::Binary, 0, 1, -v[j]), w[j]);
  row(m, "cap", Sense::LE, 14.5, cap);
  return m;
}

std::vector<std::vector<double>> parse_log(const std::string& text) {
  std::vector<std::vector<double>> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || !std::isdigit(static_cast<unsigned char>(line[0]))) continue;
    std::vector<double> f;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) f.push_back(std::stod(cell));
    out.push_back(f);
  }
  return out;
}

}  // namespace

TEST_SUITE("solver") {
  TEST_CASE("single variable lp") {
    MilpModel m;
    var(m, "x", VarKind::Continuous, 2.0, 10.0, 1.0);
    const LpResult r = solve_lp(m);
    CHECK(r.status == LpStatus::Optimal);
    CHECK(r.objective == doctest::Approx(2.0));

    MilpModel g;
    const int x = var(g, "x", VarKind::Continuous, 0.0, 10.0, 1.0);
    row(g, "floor", Sense::GE, 2.0, {{x, 1.0}});
    CHECK(solve_lp(g).objective == doctest::Approx(2.0));
  }

  TEST_CASE("demand above the DPE capacity is infeasible") {
    Scenario s = direct_link(1.0, 100.0, 3);
    s.capacity_cu = 0.5;
    s.capacity_du = 0.5;
    const GroveModel gm = build_model(s);
    CHECK(solve_lp(gm.milp).status == LpStatus::Infeasible);
    SolverConfig c;
    c.time_limit = 30;
    CHECK(branch_and_bound(gm.milp, c).status == SolveStatus::Infeasible);
  }

  TEST_CASE("zero traffic relaxation sits between the static cost and one active DPE") {
    Scenario s = small_du6(1);
    s.users.traffic.setZero();
    s.users.delay.setConstant(s.urf_count);
    s.energy.solar_scale_cu = 0.0;
    s.energy.solar_scale_du = 0.0;
    const GroveModel gm = build_model(s);
    const LpResult r = solve_lp(gm.milp);
    REQUIRE(r.status == LpStatus::Optimal);
    const double h = s.interval_hours;
    double fixed = 0.0, one_dpe = 0.0;
    for (int t = 0; t < s.intervals; ++t) {
      fixed += (s.energy.static_cu_wh + s.du_count() * s.energy.static_du_wh) * h / 1000.0 * s.energy.tariff(t);
      one_dpe += s.energy.dpe_cu_wh * h / 1000.0 * s.energy.tariff(t);
    }
    CHECK(r.objective >= fixed - 1e-6);
    CHECK(r.objective <= fixed + one_dpe + 1e-6);
  }

  TEST_CASE("integral relaxation needs no branching") {
    MilpModel m;
    const int x = var(m, "x", VarKind::Binary, 0, 1, 1.0);
    const int y = var(m, "y", VarKind::Binary, 0, 1, 2.0);
    row(m, "cover", Sense::GE, 1.0, {{x, 1.0}, {y, 1.0}});
    const SolveResult r = branch_and_bound(m, SolverConfig{});
    CHECK(r.status == SolveStatus::Optimal);
    CHECK(r.nodes == 1);  // the root only
    CHECK(r.objective == doctest::Approx(1.0));
  }

  TEST_CASE("knapsack optimum") {
    const MilpModel m = knapsack();
    // brute force over 2^6 subsets
    const double w[] = {5, 7, 4, 3, 6, 2};
    const double v[] = {8, 11, 6, 4, 9, 3};
    double best = 0.0;
    for (int mask = 0; mask < 64; ++mask) {
      double ww = 0, vv = 0;
      for (int j = 0; j < 6; ++j)
        if (mask >> j & 1) {
          ww += w[j];
          vv += v[j];
        }
      if (ww <= 14.5) best = std::max(best, vv);
    }
    for (BranchingRule rule : {BranchingRule::MostFractional, BranchingRule::Priority}) {
      SolverConfig c;
      c.branching = rule;
      const SolveResult r = branch_and_bound(m, c);
      CHECK(r.status == SolveStatus::Optimal);
      CHECK(r.objective == doctest::Approx(-best));
      CHECK(m.max_violation(r.x) <= 1e-6);
    }
  }

  TEST_CASE("lp text round trip") {
    const GroveModel gm = build_model(small_du6(2));
    std::stringstream buf;
    write_lp(gm.milp, buf);
    const std::string text = buf.str();
    CHECK(text.find("Minimize") != std::string::npos);
    CHECK(text.find("Subject To") != std::string::npos);
    CHECK(text.find("eq8_t0_u7") != std::string::npos);
    const MilpModel back = read_lp(buf);
    REQUIRE(back.variable_count() == gm.milp.variable_count());
    REQUIRE(back.row_count() == gm.milp.row_count());
    CHECK(back.nonzero_count() == gm.milp.nonzero_count());
    CHECK(back.count_rows_with_tag("eq19") == gm.milp.count_rows_with_tag("eq19"));
    for (int j = 0; j < back.variable_count(); ++j) {
      const int k = gm.milp.find_variable(back.variable(j).name);
      REQUIRE(k >= 0);
      CHECK(back.objective()(j) == doctest::Approx(gm.milp.objective()(k)));
      CHECK(back.variable(j).kind == gm.milp.variable(k).kind);
    }
    // columns come back in order of first appearance, so rows are compared by name
    double worst = 0.0;
    for (int i = 0; i < back.row_count(); ++i) {
      const int k = gm.milp.find_row(back.row(i).name);
      REQUIRE(k >= 0);
      CHECK(back.row(i).rhs == gm.milp.row(k).rhs);
      CHECK(back.row(i).sense == gm.milp.row(k).sense);
      REQUIRE(back.row_length(i) == gm.milp.row_length(k));
      std::map<std::string, double> mine;
      auto [cols, vals] = gm.milp.row_terms(k);
      for (int q = 0; q < gm.milp.row_length(k); ++q) mine[gm.milp.variable(cols[q]).name] = vals[q];
      auto [bcols, bvals] = back.row_terms(i);
      for (int q = 0; q < back.row_length(i); ++q)
        worst = std::max(worst, std::abs(mine.at(back.variable(bcols[q]).name) - bvals[q]));
    }
    CHECK(worst <= 1e-12);
  }

  TEST_CASE("single worker runs are deterministic and the log is monotone") {
    const MilpModel m = build_model(tiny_scenario(4)).milp;
    std::ostringstream log1, log2;
    SolverConfig c;
    c.time_limit = 120;
    c.log = &log1;
    const SolveResult a = branch_and_bound(m, c);
    c.log = &log2;
    const SolveResult b = branch_and_bound(m, c);
    CHECK(a.nodes == b.nodes);
    CHECK(a.objective == b.objective);
    CHECK(a.status == b.status);
    if (a.has_incumbent()) CHECK((a.x.array() == b.x.array()).all());

    const auto rows = parse_log(log1.str());
    REQUIRE(!rows.empty());
    for (std::size_t k = 1; k < rows.size(); ++k) {
      CHECK(rows[k][3] >= rows[k - 1][3] - 1e-9);
      CHECK(rows[k][4] <= rows[k - 1][4] + 1e-9);
    }
  }

  TEST_CASE("several workers reach the single-worker optimum") {
    for (std::uint64_t seed : {2, 5, 9}) {
      const Scenario s = tiny_scenario(seed);
      const MilpModel m = build_model(s).milp;
      SolverConfig c;
      c.time_limit = 120;
      c.gap = 1e-9;
      const SolveResult one = branch_and_bound(m, c);
      c.workers = 3;
      const SolveResult three = branch_and_bound(m, c);
      CHECK(one.status == three.status);
      if (one.status == SolveStatus::Optimal && three.status == SolveStatus::Optimal)
        CHECK(three.objective == doctest::Approx(one.objective).epsilon(1e-6));
      if (three.has_incumbent()) CHECK(m.max_violation(three.x) <= 1e-6);
    }
  }

  TEST_CASE("solver config is validated") {
    SolverConfig c;
    c.workers = 0;
    CHECK_THROWS_AS(c.validate(), InvalidArgument);
    c = SolverConfig{};
    c.gap = -1.0;
    CHECK_THROWS_AS(c.validate(), InvalidArgument);
  }
}
