#include <doctest.h>

#include <random>
#include <sstream>

#include "grove/energy.hpp"
#include "grove/error.hpp"

using namespace grove;

namespace {

EnergyLedger one_unit(double psi, double s, double p) {
  EnergyLedger l(1, 1);
  l.consumption(0, 0) = psi;
  l.green(0, 0) = s;
  l.sold(0, 0) = p;
  l.generated(0, 0) = s + p;
  l.capacity(0) = 0.0;
  l.initial(0) = 0.0;
  return l;
}

bool has_tag(const std::vector<LedgerViolation>& v, const std::string& tag) {
  for (const auto& x : v)
    if (x.tag == tag) return true;
  return false;
}

}  // namespace

TEST_SUITE("energy") {
  TEST_CASE("unit consumption") {
    const EnergyParams e;
    CHECK(unit_consumption(Side::DU, 0, e) == doctest::Approx(0.5));
    CHECK(unit_consumption(Side::CU, 0, e) == doctest::Approx(1.0));
    CHECK(unit_consumption(Side::DU, 2, e) == doctest::Approx(1.3));
    CHECK(unit_consumption(Side::CU, 3, e, 2.0) == doctest::Approx(2.0 * (1.0 + 1.2)));
    CHECK_THROWS_AS(unit_consumption(Side::DU, -1, e), InvalidArgument);
  }

  TEST_CASE("bill of hand-built ledgers") {
    const Eigen::VectorXd day = Eigen::VectorXd::Constant(1, 0.46);
    CHECK(opex(one_unit(1.3, 0.3, 0.2), day, 0.5) == doctest::Approx(0.414));
    CHECK(opex(one_unit(1.3, 1.3, 0.0), day, 0.5) == doctest::Approx(0.0));
    CHECK(opex(one_unit(0.0, 0.0, 2.0), Eigen::VectorXd::Constant(1, 0.70), 0.5) == doctest::Approx(-0.70));
  }

  TEST_CASE("bill is linear in the ledger") {
    EnergyLedger a = one_unit(1.3, 0.3, 0.2);
    EnergyLedger b = a;
    b.consumption *= 2.0;
    b.green *= 2.0;
    b.sold *= 2.0;
    const Eigen::VectorXd tariff = Eigen::VectorXd::Constant(1, 0.46);
    CHECK(opex(b, tariff, 0.5) == doctest::Approx(2.0 * opex(a, tariff, 0.5)));
  }

  TEST_CASE("greedy dispatch examples") {
    auto one = [](double before, double gen, double psi, double cap) {
      Eigen::VectorXd c = Eigen::VectorXd::Constant(1, psi), g = Eigen::VectorXd::Constant(1, gen);
      return greedy_battery_dispatch(c, g, cap, before);
    };
    EnergyLedger l = one(10, 3, 5, 20);
    CHECK(l.green(0, 0) == doctest::Approx(5));
    CHECK(l.stored(0, 0) == doctest::Approx(8));
    CHECK(l.sold(0, 0) == doctest::Approx(0));

    l = one(19, 5, 2, 20);
    CHECK(l.green(0, 0) == doctest::Approx(2));
    CHECK(l.stored(0, 0) == doctest::Approx(20));
    CHECK(l.sold(0, 0) == doctest::Approx(2));

    l = greedy_battery_dispatch(Eigen::VectorXd::Zero(24), Eigen::VectorXd::Zero(24), 10.0, 7.0);
    for (int t = 0; t < 24; ++t) {
      CHECK(l.stored(0, t) == 7.0);
      CHECK(l.green(0, t) == 0.0);
      CHECK(l.sold(0, t) == 0.0);
    }
  }

  TEST_CASE("greedy dispatch properties") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 4.0);
    for (int trial = 0; trial < 200; ++trial) {
      const int T = 24;
      Eigen::VectorXd psi(T), gen(T);
      for (int t = 0; t < T; ++t) {
        psi(t) = u(rng);
        gen(t) = u(rng) * (trial % 3);
      }
      const double cap = u(rng) * 3.0;
      const double b0 = cap * 0.5;
      const EnergyLedger l = greedy_battery_dispatch(psi, gen, cap, b0);
      CHECK(validate_ledger(l).empty());
      const double lhs = l.green.sum() + l.sold.sum() + l.stored(0, T - 1) - b0;
      CHECK(std::abs(lhs - gen.sum()) <= 1e-9);
      for (int t = 0; t < T; ++t)
        if (l.sold(0, t) > 0.0) CHECK(l.stored(0, t) == doctest::Approx(cap));
    }
  }

  TEST_CASE("ledger violations") {
    EnergyLedger l = greedy_battery_dispatch(Eigen::VectorXd::Constant(3, 1.0), Eigen::VectorXd::Constant(3, 2.0), 5.0, 0.0);
    REQUIRE(validate_ledger(l).empty());

    EnergyLedger over = l;
    over.green(0, 1) = over.consumption(0, 1) + 1.0;
    over.sold(0, 1) -= 1.0;
    CHECK(has_tag(validate_ledger(over), "eq14"));

    EnergyLedger full = l;
    full.stored(0, 2) = full.capacity(0) + 0.1;
    CHECK(has_tag(validate_ledger(full), "eq12"));

    EnergyLedger unbalanced = l;
    unbalanced.sold(0, 0) += 1e-6;
    CHECK(has_tag(validate_ledger(unbalanced), "eq10"));
  }

  TEST_CASE("ledger csv columns") {
    const EnergyLedger l = greedy_battery_dispatch(Eigen::VectorXd::Constant(2, 1.0), Eigen::VectorXd::Constant(2, 0.5), 1.0, 0.0);
    std::ostringstream out;
    write_ledger_csv(l, out);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "unit,interval,psi_kwh,s_kwh,p_kwh,b_kwh,gen_kwh");
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == 2);
  }

  TEST_CASE("repair snaps a slightly unbalanced ledger") {
    EnergyLedger l = greedy_battery_dispatch(Eigen::VectorXd::Constant(4, 1.0), Eigen::VectorXd::Constant(4, 1.5), 1.0, 0.0);
    l.stored(0, 1) += 3e-8;
    l.green(0, 2) -= 2e-8;
    repair_ledger(l);
    CHECK(validate_ledger(l).empty());
  }
}
