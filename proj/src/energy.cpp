#include "grove/energy.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include "grove/error.hpp"

namespace grove {

double unit_consumption(Side side, int active, const EnergyParams& params, double hours) {
  if (active < 0) throw InvalidArgument("active DPE count must be non-negative");
  const double sta = side == Side::CU ? params.static_cu_wh : params.static_du_wh;
  const double dpe = side == Side::CU ? params.dpe_cu_wh : params.dpe_du_wh;
  return (sta + active * dpe) * hours / 1000.0;
}

EnergyLedger::EnergyLedger(int units, int intervals)
    : consumption(Eigen::MatrixXd::Zero(units, intervals)),
      green(Eigen::MatrixXd::Zero(units, intervals)),
      sold(Eigen::MatrixXd::Zero(units, intervals)),
      stored(Eigen::MatrixXd::Zero(units, intervals)),
      generated(Eigen::MatrixXd::Zero(units, intervals)),
      initial(Eigen::VectorXd::Zero(units)),
      capacity(Eigen::VectorXd::Zero(units)) {}

EnergyLedger greedy_battery_dispatch(const Eigen::MatrixXd& consumption, const Eigen::MatrixXd& generation,
                                     const Eigen::VectorXd& capacity, const Eigen::VectorXd& initial) {
  if (consumption.rows() != generation.rows() || consumption.cols() != generation.cols() ||
      capacity.size() != consumption.rows() || initial.size() != consumption.rows())
    throw InvalidArgument("dispatch series have mismatched dimensions");
  const auto units = static_cast<int>(consumption.rows());
  const auto T = static_cast<int>(consumption.cols());
  EnergyLedger ledger(units, T);
  ledger.consumption = consumption;
  ledger.generated = generation;
  ledger.capacity = capacity;
  ledger.initial = initial;
  for (int u = 0; u < units; ++u) {
    double battery = initial(u);
    for (int t = 0; t < T; ++t) {
      const double available = battery + generation(u, t);
      const double used = std::min(consumption(u, t), available);
      const double leftover = available - used;
      const double kept = std::min(capacity(u), leftover);
      ledger.green(u, t) = used;
      ledger.stored(u, t) = kept;
      ledger.sold(u, t) = leftover - kept;
      battery = kept;
    }
  }
  return ledger;
}

EnergyLedger greedy_battery_dispatch(const Eigen::Ref<const Eigen::VectorXd>& consumption,
                                     const Eigen::Ref<const Eigen::VectorXd>& generation, double capacity,
                                     double initial) {
  return greedy_battery_dispatch(Eigen::MatrixXd(consumption.transpose()), Eigen::MatrixXd(generation.transpose()),
                                 Eigen::VectorXd::Constant(1, capacity), Eigen::VectorXd::Constant(1, initial));
}

std::string describe(const LedgerViolation& v) {
  std::ostringstream os;
  os << v.tag << " unit=" << v.unit << " t=" << v.interval << " by " << v.amount;
  return os.str();
}

namespace {

// unit 0 is the CU; the equation tags differ per side
const char* side_tag(int unit, const char* cu, const char* du) { return unit == 0 ? cu : du; }

}  // namespace

std::vector<LedgerViolation> validate_ledger(const EnergyLedger& ledger, double tol) {
  std::vector<LedgerViolation> out;
  const int units = ledger.units();
  const int T = ledger.intervals();
  for (int u = 0; u < units; ++u) {
    for (int t = 0; t < T; ++t) {
      const double before = ledger.stored_before(u, t);
      const double balance =
          ledger.stored(u, t) - (before - ledger.green(u, t) - ledger.sold(u, t) + ledger.generated(u, t));
      if (std::abs(balance) > tol) out.push_back({side_tag(u, "eq10", "eq11"), u, t, balance});
      if (ledger.stored(u, t) < -tol) out.push_back({side_tag(u, "eq12", "eq13"), u, t, ledger.stored(u, t)});
      if (ledger.stored(u, t) > ledger.capacity(u) + tol)
        out.push_back({side_tag(u, "eq12", "eq13"), u, t, ledger.stored(u, t) - ledger.capacity(u)});
      if (ledger.green(u, t) > ledger.consumption(u, t) + tol)
        out.push_back({side_tag(u, "eq14", "eq15"), u, t, ledger.green(u, t) - ledger.consumption(u, t)});
      if (ledger.green(u, t) < -tol) out.push_back({"green_nonnegative", u, t, ledger.green(u, t)});
      if (ledger.sold(u, t) < -tol) out.push_back({"sold_nonnegative", u, t, ledger.sold(u, t)});
    }
  }
  return out;
}

std::vector<LedgerViolation> validate_ledger(const EnergyLedger& ledger, const Scenario& scenario, double tol) {
  const int R = scenario.du_count();
  const int T = scenario.intervals;
  if (ledger.units() != R + 1 || ledger.intervals() != T)
    return {{"dimensions", ledger.units(), ledger.intervals(), 0.0}};
  std::vector<LedgerViolation> out = validate_ledger(ledger, tol);
  const EnergyParams& e = scenario.energy;
  for (int u = 0; u <= R; ++u) {
    const double cap = u == 0 ? e.battery_cu_kwh : e.battery_du_kwh;
    const double init = u == 0 ? e.initial_cu_kwh : e.initial_du_kwh;
    if (std::abs(ledger.capacity(u) - cap) > tol) out.push_back({"battery_capacity", u, 0, ledger.capacity(u) - cap});
    if (std::abs(ledger.initial(u) - init) > tol) out.push_back({"initial_charge", u, 0, ledger.initial(u) - init});
    for (int t = 0; t < T; ++t) {
      const double gen = u == 0 ? e.solar_scale_cu * e.generation_cu(t) : e.solar_scale_du * e.generation_du(u - 1, t);
      if (std::abs(ledger.generated(u, t) - gen) > tol) out.push_back({"generation", u, t, ledger.generated(u, t) - gen});
    }
    if (e.cyclic_battery && std::abs(ledger.stored(u, T - 1) - init) > tol)
      out.push_back({"cyclic", u, T - 1, ledger.stored(u, T - 1) - init});
  }
  return out;
}

void repair_ledger(EnergyLedger& ledger, bool cyclic) {
  for (int u = 0; u < ledger.units(); ++u) {
    double battery = ledger.initial(u);
    const int T = ledger.intervals();
    for (int t = 0; t < T; ++t) {
      double s = std::clamp(ledger.green(u, t), 0.0, ledger.consumption(u, t));
      double p = std::max(0.0, ledger.sold(u, t));
      double b = battery - s - p + ledger.generated(u, t);
      if (b > ledger.capacity(u)) {
        p += b - ledger.capacity(u);
        b = ledger.capacity(u);
      }
      if (b < 0.0) {
        const double from_sold = std::min(p, -b);
        p -= from_sold;
        b += from_sold;
        const double from_green = std::min(s, -b);
        s -= from_green;
        b += from_green;
        b = std::max(b, 0.0);
      }
      if (cyclic && t == T - 1) {
        const double target = ledger.initial(u);
        if (b > target) {
          p += b - target;
        } else {
          const double deficit = target - b;
          const double from_sold = std::min(p, deficit);
          p -= from_sold;
          s = std::max(0.0, s - (deficit - from_sold));
        }
        b = target;
      }
      ledger.green(u, t) = s;
      ledger.sold(u, t) = p;
      ledger.stored(u, t) = b;
      battery = b;
    }
  }
}

Eigen::VectorXd opex_per_interval(const EnergyLedger& ledger, const Eigen::Ref<const Eigen::VectorXd>& tariff,
                                  double sell_ratio) {
  if (tariff.size() != ledger.intervals()) throw InvalidArgument("tariff length does not match the ledger");
  const Eigen::RowVectorXd net =
      (ledger.consumption - ledger.green - sell_ratio * ledger.sold).colwise().sum();
  return net.transpose().cwiseProduct(tariff);
}

double opex(const EnergyLedger& ledger, const Eigen::Ref<const Eigen::VectorXd>& tariff, double sell_ratio) {
  return opex_per_interval(ledger, tariff, sell_ratio).sum();
}

int Decisions::function_host(int t, int user, int f) const {
  const auto& row = placement[static_cast<std::size_t>(t)];
  int seen = 0;
  for (Eigen::Index k = 0; k < row.cols(); ++k) {
    seen += row(user, k);
    if (f < seen) return static_cast<int>(k);
  }
  return -1;
}

Eigen::MatrixXd consumption_from_activity(const Decisions& d, const Scenario& s) {
  const int R = s.du_count();
  const int T = s.intervals;
  Eigen::MatrixXd psi(R + 1, T);
  for (int t = 0; t < T; ++t) {
    psi(0, t) = unit_consumption(Side::CU, d.active_cu_count(t), s.energy, s.interval_hours);
    for (int r = 0; r < R; ++r)
      psi(r + 1, t) = unit_consumption(Side::DU, d.active_du_count(t, r), s.energy, s.interval_hours);
  }
  return psi;
}

double opex(const Decisions& decisions, const Scenario& scenario) {
  std::vector<LedgerViolation> violations = validate_ledger(decisions.ledger, scenario);
  if (decisions.intervals() != scenario.intervals || decisions.active_cu.rows() != scenario.intervals)
    throw InfeasibleDecisions("decisions do not match the scenario's interval count");
  const Eigen::MatrixXd psi = consumption_from_activity(decisions, scenario);
  if (decisions.ledger.units() == psi.rows() && decisions.ledger.intervals() == psi.cols()) {
    for (int u = 0; u < psi.rows(); ++u)
      for (int t = 0; t < psi.cols(); ++t) {
        const double diff = decisions.ledger.consumption(u, t) - psi(u, t);
        if (std::abs(diff) > kLedgerTolerance) violations.push_back({u == 0 ? "eq2" : "eq1", u, t, diff});
      }
  }
  if (!violations.empty()) {
    std::string msg = "decisions violate " + std::to_string(violations.size()) + " constraint(s):";
    for (std::size_t k = 0; k < violations.size() && k < 10; ++k) msg += " [" + describe(violations[k]) + "]";
    throw InfeasibleDecisions(msg);
  }
  return opex(decisions.ledger, scenario.energy.tariff, scenario.energy.sell_ratio);
}

void write_ledger_csv(const EnergyLedger& ledger, std::ostream& out) {
  out << "unit,interval,psi_kwh,s_kwh,p_kwh,b_kwh,gen_kwh\n";
  const auto old_precision = out.precision(17);
  for (int u = 0; u < ledger.units(); ++u)
    for (int t = 0; t < ledger.intervals(); ++t)
      out << (u == 0 ? std::string("CU") : "DU" + std::to_string(u)) << ',' << t << ',' << ledger.consumption(u, t)
          << ',' << ledger.green(u, t) << ',' << ledger.sold(u, t) << ',' << ledger.stored(u, t) << ','
          << ledger.generated(u, t) << '\n';
  out.precision(old_precision);
}

}  // namespace grove
