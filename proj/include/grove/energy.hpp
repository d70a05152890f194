#pragma once

#include <Eigen/Dense>

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "grove/scenario.hpp"

namespace grove {

enum class Side { CU, DU };

/// Energy (kWh) drawn by one CU or DU running `active` DPEs for `hours`:
/// (E_STA + active * E_DPE) * hours / 1000.
double unit_consumption(Side side, int active, const EnergyParams& params, double hours = 1.0);

/// Per-unit renewable bookkeeping. Row 0 is the CU, row r+1 is DU r; one column per interval.
/// All quantities in kWh.
struct EnergyLedger {
  Eigen::MatrixXd consumption;
  Eigen::MatrixXd green;
  Eigen::MatrixXd sold;
  Eigen::MatrixXd stored;
  Eigen::MatrixXd generated;
  Eigen::VectorXd initial;
  Eigen::VectorXd capacity;

  EnergyLedger() = default;
  EnergyLedger(int units, int intervals);

  int units() const { return static_cast<int>(consumption.rows()); }
  int intervals() const { return static_cast<int>(consumption.cols()); }
  double stored_before(int unit, int t) const { return t == 0 ? initial(unit) : stored(unit, t - 1); }
};

/// Use-then-store-then-sell policy for one unit.
EnergyLedger greedy_battery_dispatch(const Eigen::Ref<const Eigen::VectorXd>& consumption,
                                     const Eigen::Ref<const Eigen::VectorXd>& generation, double capacity,
                                     double initial);
/// Same policy applied row by row (units x intervals).
EnergyLedger greedy_battery_dispatch(const Eigen::MatrixXd& consumption, const Eigen::MatrixXd& generation,
                                     const Eigen::VectorXd& capacity, const Eigen::VectorXd& initial);

struct LedgerViolation {
  std::string tag;
  int unit = 0;
  int interval = 0;
  double amount = 0.0;
};

std::string describe(const LedgerViolation& v);

inline constexpr double kLedgerTolerance = 1e-9;

/// Balance, capacity and green-usage checks on the ledger alone.
std::vector<LedgerViolation> validate_ledger(const EnergyLedger& ledger, double tolerance = kLedgerTolerance);
/// Additionally checks generation, capacities and initial charge against the scenario.
std::vector<LedgerViolation> validate_ledger(const EnergyLedger& ledger, const Scenario& scenario,
                                             double tolerance = kLedgerTolerance);

/// Snaps a nearly-feasible ledger (e.g. solver output within LP tolerances) onto the
/// exact balance: clamps green use to [0, consumption], recomputes the stored energy
/// interval by interval and books any overflow as sold energy.
void repair_ledger(EnergyLedger& ledger, bool cyclic = false);

/// Grid bill net of sold energy, per interval.
Eigen::VectorXd opex_per_interval(const EnergyLedger& ledger, const Eigen::Ref<const Eigen::VectorXd>& tariff,
                                  double sell_ratio);
double opex(const EnergyLedger& ledger, const Eigen::Ref<const Eigen::VectorXd>& tariff, double sell_ratio);

/// A complete set of decisions for one scenario.
///
/// placement[t](i, k) counts the URFs of user i hosted on DPE k at interval t, where
/// k < dpe_cu are CU DPEs and k >= dpe_cu are the DPEs of the user's own DU.
struct Decisions {
  std::vector<Eigen::MatrixXi> placement;
  /// T x dpe_cu
  Eigen::MatrixXi active_cu;
  /// per interval: DUs x dpe_du
  std::vector<Eigen::MatrixXi> active_du;
  /// per interval: DUs x arcs, the l decisions
  std::vector<Eigen::MatrixXi> route;
  /// per interval: DUs x arcs, auxiliary bandwidth variables when available
  std::vector<Eigen::MatrixXd> route_aux;
  EnergyLedger ledger;
  /// decoded node sequence DU -> CU per interval and DU
  std::vector<std::vector<std::vector<int>>> paths;
  /// (interval, DU) pairs whose selected arcs contain a cycle off the decoded path
  std::vector<std::pair<int, int>> cycle_warnings;

  int intervals() const { return static_cast<int>(placement.size()); }
  int cu_functions(int t, int user, int dpe_cu) const { return placement[static_cast<std::size_t>(t)].row(user).head(dpe_cu).sum(); }
  int active_cu_count(int t) const { return active_cu.row(t).sum(); }
  int active_du_count(int t, int du) const { return active_du[static_cast<std::size_t>(t)].row(du).sum(); }
  /// DPE slot hosting URF f of the user (CU DPEs first, in slot order), -1 when unplaced.
  int function_host(int t, int user, int f) const;
};

/// Consumption matrix (units x T) implied by the DPE activity in `decisions`.
Eigen::MatrixXd consumption_from_activity(const Decisions& decisions, const Scenario& scenario);

/// OpEx of full decisions. Throws InfeasibleDecisions listing every violated ledger
/// constraint, including consumption that disagrees with the DPE activity.
double opex(const Decisions& decisions, const Scenario& scenario);

/// `unit,interval,psi_kwh,s_kwh,p_kwh,b_kwh,gen_kwh`
void write_ledger_csv(const EnergyLedger& ledger, std::ostream& out);

}  // namespace grove
