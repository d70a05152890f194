#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "grove/topology.hpp"

namespace grove {

enum class TrafficTier { Low, Medium, High };

std::string_view to_string(TrafficTier tier);
TrafficTier traffic_tier_from_string(std::string_view text);
/// 0.5, 1.0 and 1.5 for Low, Medium and High.
double tier_multiplier(TrafficTier tier);

/// Parameters of the daily sinusoidal traffic generator.
struct TrafficGenConfig {
  double slope_exponent = 3.0;
  double phase_min = 3.0 * std::numbers::pi / 4.0;
  double phase_max = 7.0 * std::numbers::pi / 4.0;
  double noise_amplitude = 0.05;
  double multiplier = 1.0;
  std::uint64_t seed = 1;

  void validate() const;
};

/// Users attached to RRHs attached to DUs, with their per-interval load and delay budget.
///
/// `traffic(i, t)` is the dimensionless load rho of user i in interval t;
/// `delay(i, t)` is the number of URFs user i may run at the CU.
struct UserPopulation {
  std::vector<int> rrh_du;
  std::vector<int> user_rrh;
  Eigen::MatrixXi delay;
  Eigen::MatrixXd traffic;

  int user_count() const { return static_cast<int>(user_rrh.size()); }
  int rrh_count() const { return static_cast<int>(rrh_du.size()); }
  int du_of_user(int user) const {
    return rrh_du[static_cast<std::size_t>(user_rrh[static_cast<std::size_t>(user)])];
  }
  /// Users of each DU in ascending user order.
  std::vector<std::vector<int>> users_by_du(int du_count) const;
};

/// Population skeleton: DU-major numbering of RRHs and users, no traffic yet.
UserPopulation make_population(int du_count, int rrhs_per_du, int users_per_rrh);

/// Noiseless daily profile: (1 + sin(pi*hour/12 + phase))^nu / 2^nu.
double traffic_profile(double hour, double phase, double slope_exponent);

/// One phase per DU, uniform in [phase_min, phase_max].
std::vector<double> draw_du_phases(const TrafficGenConfig& config, int du_count);

/// rho(i,t) = multiplier * max(0, profile(t*interval_hours, phase of i's DU) + n_i(t)),
/// n_i(t) ~ U[0, noise_amplitude]. Deterministic in `config.seed`.
Eigen::MatrixXd generate_traffic(const TrafficGenConfig& config, const UserPopulation& users, int intervals,
                                 double interval_hours = 1.0);

/// Uniform integers in {0, ..., urf_count}; all zero when urf_count <= 0.
std::vector<int> generate_delay_thresholds(int user_count, int urf_count, std::uint64_t seed);

/// Time-of-use tariff (currency per kWh) averaged over the hours each interval covers:
/// night 22-06 at 0.29, day 06-17 at 0.46, peak 17-22 at 0.70.
Eigen::VectorXd tou_tariff(int intervals, double interval_hours);

/// Normalized solar generation, kWh per unit of panel scale, one row per day and one
/// column per hour of the day.
struct SolarProfile {
  std::string city;
  Eigen::MatrixXd hourly;

  int days() const { return static_cast<int>(hourly.rows()); }
  Eigen::VectorXd day(int d) const { return hourly.row(d).transpose(); }
};

/// Reads `hour,generation_kwh_per_unit` (24 rows) or `day,hour,generation_kwh_per_unit`
/// (24 rows per day). Throws ParseError carrying the offending line number.
SolarProfile load_solar_profile(const std::filesystem::path& path, std::string city);

/// Known synthetic cities: stockholm, istanbul, cairo, jakarta.
const std::vector<std::string>& synthetic_cities();
/// Clear-sky bell: zero from 19:00 through 05:00, peaking at 12:00, scaled by a
/// city/month clearness factor. Months are 1..12.
Eigen::VectorXd synthetic_clear_sky(std::string_view city, int month);
/// Sums hourly values into `intervals` consecutive intervals of `interval_hours` each.
Eigen::VectorXd hourly_to_intervals(const Eigen::Ref<const Eigen::VectorXd>& hourly, int intervals,
                                    double interval_hours);

/// Hardware and energy-market parameters. Energies are per hour of operation in Wh
/// (scaled by the interval length); batteries and generation are in kWh.
struct EnergyParams {
  double static_cu_wh = 1000.0;
  double static_du_wh = 500.0;
  double dpe_cu_wh = 400.0;
  double dpe_du_wh = 400.0;
  double solar_scale_cu = 80.0;
  double solar_scale_du = 20.0;
  double battery_cu_kwh = 50.0;
  double battery_du_kwh = 20.0;
  double initial_cu_kwh = 0.0;
  double initial_du_kwh = 0.0;
  /// Adds b_T = b_0 so the day is a steady-state cycle.
  bool cyclic_battery = false;
  double sell_ratio = 0.5;
  Eigen::VectorXd tariff;
  Eigen::VectorXd generation_cu;
  /// One row per DU.
  Eigen::MatrixXd generation_du;
};

struct Scenario {
  NetworkTopology topology;
  UserPopulation users;
  EnergyParams energy;
  int urf_count = 3;
  int dpe_cu = 8;
  int dpe_du = 4;
  double capacity_cu = 80.0;
  double capacity_du = 45.0;
  int intervals = 24;
  double interval_hours = 1.0;
  /// Delay rows as sum < mu (i.e. <= mu - 1 for mu >= 1) instead of sum <= mu.
  bool strict_delay = false;

  std::string name = "scenario";
  std::string city = "istanbul";
  int month = 6;
  TrafficTier tier = TrafficTier::Medium;
  std::uint64_t seed = 1;

  int du_count() const { return topology.du_count(); }
  int user_count() const { return users.user_count(); }
  /// Delay budget actually enforced for (user, t), accounting for strict mode.
  int cu_function_limit(int user, int t) const;
  /// Throws ConfigError naming the first inconsistent field.
  void validate() const;
};

/// Everything needed to materialize a Scenario; unset optionals fall back to defaults.
struct ScenarioConfig {
  std::optional<TopologyPreset> preset = TopologyPreset::Du6;
  std::vector<Node> nodes;
  std::vector<Edge> edges;
  int rrhs_per_du = 5;
  int users_per_rrh = 10;
  int urf_count = 3;
  int dpe_cu = 8;
  int dpe_du = 4;
  double capacity_cu = 80.0;
  double capacity_du = 45.0;
  int intervals = 24;
  /// Non-positive means 24 / intervals.
  double interval_hours = 0.0;
  TrafficTier tier = TrafficTier::Medium;
  TrafficGenConfig traffic;
  bool redraw_delay_per_interval = false;
  bool strict_delay = false;
  EnergyParams energy;
  std::string city = "istanbul";
  int month = 6;
  std::string solar_csv;
  int solar_day = 0;
  /// Link capacity as a fraction of the peak network-wide load, unless `link_capacity` is set.
  double bandwidth_fraction = 0.6;
  std::optional<double> link_capacity;
  std::uint64_t seed = 1;
  std::string name = "scenario";
};

Scenario generate_scenario(const ScenarioConfig& config);

/// max over t of the summed user load.
double peak_aggregate_load(const Scenario& scenario);

}  // namespace grove
