#include "grove/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "grove/error.hpp"

namespace grove {

std::string_view to_string(TrafficTier tier) {
  switch (tier) {
    case TrafficTier::Low: return "low";
    case TrafficTier::Medium: return "medium";
    case TrafficTier::High: return "high";
  }
  return "?";
}

TrafficTier traffic_tier_from_string(std::string_view text) {
  if (text == "low") return TrafficTier::Low;
  if (text == "medium") return TrafficTier::Medium;
  if (text == "high") return TrafficTier::High;
  throw InvalidArgument("unknown traffic tier '" + std::string(text) + "'");
}

double tier_multiplier(TrafficTier tier) {
  switch (tier) {
    case TrafficTier::Low: return 0.5;
    case TrafficTier::Medium: return 1.0;
    case TrafficTier::High: return 1.5;
  }
  return 1.0;
}

void TrafficGenConfig::validate() const {
  if (!(slope_exponent >= 1.0)) throw InvalidArgument("traffic slope exponent must be >= 1");
  if (!(multiplier > 0.0)) throw InvalidArgument("traffic multiplier must be > 0");
  if (!(noise_amplitude >= 0.0)) throw InvalidArgument("traffic noise amplitude must be >= 0");
  if (!(phase_max >= phase_min)) throw InvalidArgument("traffic phase range is empty");
}

std::vector<std::vector<int>> UserPopulation::users_by_du(int du_count) const {
  std::vector<std::vector<int>> groups(static_cast<std::size_t>(du_count));
  for (int i = 0; i < user_count(); ++i) groups.at(static_cast<std::size_t>(du_of_user(i))).push_back(i);
  return groups;
}

UserPopulation make_population(int du_count, int rrhs_per_du, int users_per_rrh) {
  if (du_count < 1 || rrhs_per_du < 1 || users_per_rrh < 1)
    throw InvalidArgument("population counts must be >= 1");
  UserPopulation users;
  for (int r = 0; r < du_count; ++r)
    for (int c = 0; c < rrhs_per_du; ++c) {
      const int rrh = static_cast<int>(users.rrh_du.size());
      users.rrh_du.push_back(r);
      for (int u = 0; u < users_per_rrh; ++u) users.user_rrh.push_back(rrh);
    }
  return users;
}

double traffic_profile(double hour, double phase, double slope_exponent) {
  const double base = 1.0 + std::sin(std::numbers::pi * hour / 12.0 + phase);
  return std::pow(base, slope_exponent) / std::pow(2.0, slope_exponent);
}

std::vector<double> draw_du_phases(const TrafficGenConfig& config, int du_count) {
  config.validate();
  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> phase(config.phase_min, config.phase_max);
  std::vector<double> phases(static_cast<std::size_t>(du_count));
  for (double& p : phases) p = phase(rng);
  return phases;
}

Eigen::MatrixXd generate_traffic(const TrafficGenConfig& config, const UserPopulation& users, int intervals,
                                 double interval_hours) {
  config.validate();
  if (intervals <= 0) throw InvalidArgument("interval count must be positive");
  if (!(interval_hours > 0.0)) throw InvalidArgument("interval length must be positive");

  int du_count = 0;
  for (int r : users.rrh_du) du_count = std::max(du_count, r + 1);

  // phases are drawn first from the same stream so they match draw_du_phases
  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> phase_dist(config.phase_min, config.phase_max);
  std::vector<double> phases(static_cast<std::size_t>(du_count));
  for (double& p : phases) p = phase_dist(rng);
  std::uniform_real_distribution<double> noise(0.0, 1.0);

  Eigen::MatrixXd rho(users.user_count(), intervals);
  for (int i = 0; i < users.user_count(); ++i) {
    const double phase = phases[static_cast<std::size_t>(users.du_of_user(i))];
    for (int t = 0; t < intervals; ++t) {
      const double lambda = traffic_profile(t * interval_hours, phase, config.slope_exponent) +
                            config.noise_amplitude * noise(rng);
      rho(i, t) = config.multiplier * std::max(0.0, lambda);
    }
  }
  return rho;
}

std::vector<int> generate_delay_thresholds(int user_count, int urf_count, std::uint64_t seed) {
  std::vector<int> mu(static_cast<std::size_t>(std::max(user_count, 0)), 0);
  if (urf_count <= 0) return mu;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> draw(0, urf_count);
  for (int& v : mu) v = draw(rng);
  return mu;
}

namespace {

double hourly_rate(int hour) {
  hour = ((hour % 24) + 24) % 24;
  if (hour < 6 || hour >= 22) return 0.29;
  if (hour < 17) return 0.46;
  return 0.70;
}

// Integral of a piecewise-constant hourly series over [begin, end) hours, wrapping at 24.
template <typename HourFn>
double integrate_hours(double begin, double end, HourFn&& value) {
  double total = 0.0;
  double x = begin;
  while (x < end - 1e-12) {
    const double next = std::min(end, std::floor(x + 1e-12) + 1.0);
    total += (next - x) * value(static_cast<int>(std::floor(x + 1e-12)));
    x = next;
  }
  return total;
}

struct CityClimate {
  std::string_view name;
  double peak;       // kWh per unit scale at solar noon, annual mean
  double seasonal;   // relative amplitude of the yearly cycle
};

constexpr CityClimate kCities[] = {
    {"stockholm", 0.035, 0.80},
    {"istanbul", 0.050, 0.45},
    {"cairo", 0.065, 0.25},
    {"jakarta", 0.055, 0.05},
};

}  // namespace

Eigen::VectorXd tou_tariff(int intervals, double interval_hours) {
  if (intervals <= 0 || !(interval_hours > 0.0)) throw InvalidArgument("invalid interval layout");
  Eigen::VectorXd tariff(intervals);
  for (int t = 0; t < intervals; ++t) {
    const double begin = t * interval_hours;
    tariff(t) = integrate_hours(begin, begin + interval_hours, hourly_rate) / interval_hours;
  }
  return tariff;
}

const std::vector<std::string>& synthetic_cities() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& c : kCities) out.emplace_back(c.name);
    return out;
  }();
  return names;
}

Eigen::VectorXd synthetic_clear_sky(std::string_view city, int month) {
  if (month < 1 || month > 12) throw InvalidArgument("month must be in 1..12");
  const auto it = std::find_if(std::begin(kCities), std::end(kCities),
                               [&](const CityClimate& c) { return c.name == city; });
  if (it == std::end(kCities)) throw InvalidArgument("no synthetic solar profile for city '" + std::string(city) + "'");
  const double season = 1.0 + it->seasonal * std::cos(2.0 * std::numbers::pi * (month - 6.5) / 12.0);
  Eigen::VectorXd hourly = Eigen::VectorXd::Zero(24);
  for (int h = 6; h <= 18; ++h)
    hourly(h) = it->peak * season * std::pow(std::sin(std::numbers::pi * (h - 5) / 14.0), 1.5);
  return hourly;
}

Eigen::VectorXd hourly_to_intervals(const Eigen::Ref<const Eigen::VectorXd>& hourly, int intervals,
                                    double interval_hours) {
  if (hourly.size() != 24) throw InvalidArgument("hourly series must have 24 values");
  if (intervals <= 0 || !(interval_hours > 0.0)) throw InvalidArgument("invalid interval layout");
  Eigen::VectorXd out(intervals);
  for (int t = 0; t < intervals; ++t) {
    const double begin = t * interval_hours;
    out(t) = integrate_hours(begin, begin + interval_hours, [&](int h) { return hourly(((h % 24) + 24) % 24); });
  }
  return out;
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    const auto first = cell.find_first_not_of(" \t\r");
    const auto last = cell.find_last_not_of(" \t\r");
    cells.push_back(first == std::string::npos ? std::string() : cell.substr(first, last - first + 1));
  }
  return cells;
}

double parse_number(const std::string& text, int line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw ParseError("trailing characters in number '" + text + "'", line);
    return v;
  } catch (const std::logic_error&) {
    throw ParseError("not a number: '" + text + "'", line);
  }
}

}  // namespace

SolarProfile load_solar_profile(const std::filesystem::path& path, std::string city) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open solar profile " + path.string());

  std::string line;
  int line_no = 0;
  if (!std::getline(in, line)) throw ParseError("empty solar profile", 1);
  ++line_no;
  const auto header = split_csv(line);
  int day_col = -1, hour_col = -1, gen_col = -1;
  for (std::size_t k = 0; k < header.size(); ++k) {
    if (header[k] == "day") day_col = static_cast<int>(k);
    if (header[k] == "hour") hour_col = static_cast<int>(k);
    if (header[k] == "generation_kwh_per_unit") gen_col = static_cast<int>(k);
  }
  if (hour_col < 0 || gen_col < 0)
    throw ParseError("header must contain 'hour' and 'generation_kwh_per_unit'", line_no);

  std::vector<std::vector<double>> days;
  std::vector<std::vector<bool>> seen;
  int data_rows = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split_csv(line);
    if (cells.size() != header.size())
      throw ParseError("expected " + std::to_string(header.size()) + " fields, found " + std::to_string(cells.size()),
                       line_no);
    int day = 0;
    if (day_col >= 0) {
      const double d = parse_number(cells[static_cast<std::size_t>(day_col)], line_no);
      if (d < 0 || d != std::floor(d)) throw ParseError("day must be a non-negative integer", line_no);
      day = static_cast<int>(d);
    } else {
      // without a day column, every block of 24 rows is one day
      day = data_rows / 24;
    }
    ++data_rows;
    const double h = parse_number(cells[static_cast<std::size_t>(hour_col)], line_no);
    if (h < 0 || h > 23 || h != std::floor(h)) throw ParseError("hour must be an integer in 0..23", line_no);
    const double gen = parse_number(cells[static_cast<std::size_t>(gen_col)], line_no);
    if (!(gen >= 0.0)) throw ParseError("negative generation", line_no);
    while (static_cast<int>(days.size()) <= day) {
      days.emplace_back(24, 0.0);
      seen.emplace_back(24, false);
    }
    auto slot = seen[static_cast<std::size_t>(day)][static_cast<std::size_t>(h)];
    if (slot) throw ParseError("duplicate hour " + std::to_string(static_cast<int>(h)), line_no);
    slot = true;
    days[static_cast<std::size_t>(day)][static_cast<std::size_t>(h)] = gen;
  }
  if (days.empty()) throw ParseError("solar profile has no data rows", line_no);
  for (std::size_t d = 0; d < seen.size(); ++d)
    if (!std::all_of(seen[d].begin(), seen[d].end(), [](bool b) { return b; }))
      throw ParseError("day " + std::to_string(d) + " does not have 24 hourly rows", line_no);

  SolarProfile profile;
  profile.city = std::move(city);
  profile.hourly.resize(static_cast<Eigen::Index>(days.size()), 24);
  for (std::size_t d = 0; d < days.size(); ++d)
    for (int h = 0; h < 24; ++h) profile.hourly(static_cast<Eigen::Index>(d), h) = days[d][static_cast<std::size_t>(h)];
  return profile;
}

int Scenario::cu_function_limit(int user, int t) const {
  const int mu = users.delay(user, t);
  const int limit = strict_delay && mu >= 1 ? mu - 1 : mu;
  return std::min(limit, urf_count);
}

void Scenario::validate() const {
  const int R = du_count();
  const int I = user_count();
  if (urf_count < 1) throw ConfigError("urf_count", "must be >= 1");
  if (dpe_cu < 1) throw ConfigError("dpe_cu", "must be >= 1");
  if (dpe_du < 1) throw ConfigError("dpe_du", "must be >= 1");
  if (!(capacity_cu > 0.0)) throw ConfigError("capacity_cu", "must be > 0");
  if (!(capacity_du > 0.0)) throw ConfigError("capacity_du", "must be > 0");
  if (intervals < 1) throw ConfigError("intervals", "must be >= 1");
  if (!(interval_hours > 0.0)) throw ConfigError("interval_hours", "must be > 0");
  if (I < 1) throw ConfigError("users", "population is empty");
  for (int r : users.rrh_du)
    if (r < 0 || r >= R) throw ConfigError("users.rrh_du", "RRH references unknown DU " + std::to_string(r));
  for (int c : users.user_rrh)
    if (c < 0 || c >= users.rrh_count()) throw ConfigError("users.user_rrh", "user references unknown RRH");
  if (users.traffic.rows() != I || users.traffic.cols() != intervals)
    throw ConfigError("users.traffic", "matrix must be users x intervals");
  if (users.delay.rows() != I || users.delay.cols() != intervals)
    throw ConfigError("users.delay", "matrix must be users x intervals");
  if ((users.traffic.array() < 0.0).any() || !users.traffic.allFinite())
    throw ConfigError("users.traffic", "loads must be finite and >= 0");
  if ((users.delay.array() < 0).any() || (users.delay.array() > urf_count).any())
    throw ConfigError("users.delay", "thresholds must lie in [0, urf_count]");

  const EnergyParams& e = energy;
  const auto nonneg = [](double v) { return v >= 0.0 && std::isfinite(v); };
  if (!nonneg(e.static_cu_wh) || !nonneg(e.static_du_wh) || !nonneg(e.dpe_cu_wh) || !nonneg(e.dpe_du_wh))
    throw ConfigError("energy", "consumption parameters must be >= 0");
  if (!nonneg(e.solar_scale_cu) || !nonneg(e.solar_scale_du)) throw ConfigError("energy.solar_scale", "must be >= 0");
  if (!nonneg(e.battery_cu_kwh) || !nonneg(e.battery_du_kwh)) throw ConfigError("energy.battery", "must be >= 0");
  if (!(e.sell_ratio >= 0.0 && e.sell_ratio <= 1.0)) throw ConfigError("energy.sell_ratio", "must lie in [0, 1]");
  if (!(e.initial_cu_kwh >= 0.0 && e.initial_cu_kwh <= e.battery_cu_kwh))
    throw ConfigError("energy.initial_cu_kwh", "initial charge must lie in [0, battery_cu_kwh]");
  if (!(e.initial_du_kwh >= 0.0 && e.initial_du_kwh <= e.battery_du_kwh))
    throw ConfigError("energy.initial_du_kwh", "initial charge must lie in [0, battery_du_kwh]");
  if (e.tariff.size() != intervals) throw ConfigError("energy.tariff", "needs one value per interval");
  if ((e.tariff.array() < 0.0).any()) throw ConfigError("energy.tariff", "prices must be >= 0");
  if (e.generation_cu.size() != intervals) throw ConfigError("energy.generation_cu", "needs one value per interval");
  if (e.generation_du.rows() != R || e.generation_du.cols() != intervals)
    throw ConfigError("energy.generation_du", "matrix must be DUs x intervals");
  if ((e.generation_cu.array() < 0.0).any() || (e.generation_du.array() < 0.0).any())
    throw ConfigError("energy.generation", "generation must be >= 0");
}

double peak_aggregate_load(const Scenario& scenario) {
  if (scenario.users.traffic.size() == 0) return 0.0;
  return scenario.users.traffic.colwise().sum().maxCoeff();
}

Scenario generate_scenario(const ScenarioConfig& config) {
  Scenario s;
  s.name = config.name;
  s.seed = config.seed;
  s.city = config.city;
  s.month = config.month;
  s.tier = config.tier;
  s.urf_count = config.urf_count;
  s.dpe_cu = config.dpe_cu;
  s.dpe_du = config.dpe_du;
  s.capacity_cu = config.capacity_cu;
  s.capacity_du = config.capacity_du;
  s.intervals = config.intervals;
  if (config.intervals < 1) throw ConfigError("intervals", "must be >= 1");
  s.interval_hours = config.interval_hours > 0.0 ? config.interval_hours : 24.0 / config.intervals;
  s.strict_delay = config.strict_delay;

  try {
    s.topology = config.preset ? build_topology(*config.preset) : build_topology(config.nodes, config.edges);
  } catch (const TopologyError& err) {
    throw ConfigError("topology", err.what());
  }
  const int R = s.topology.du_count();
  s.users = make_population(R, config.rrhs_per_du, config.users_per_rrh);
  const int I = s.users.user_count();

  TrafficGenConfig traffic = config.traffic;
  traffic.multiplier = tier_multiplier(config.tier) * config.traffic.multiplier;
  traffic.seed = config.seed;
  s.users.traffic = generate_traffic(traffic, s.users, s.intervals, s.interval_hours);

  s.users.delay.resize(I, s.intervals);
  const std::uint64_t delay_seed = config.seed * 0x9E3779B97F4A7C15ULL + 0x5DEECE66DULL;
  if (config.redraw_delay_per_interval) {
    for (int t = 0; t < s.intervals; ++t) {
      const auto mu = generate_delay_thresholds(I, s.urf_count, delay_seed + static_cast<std::uint64_t>(t));
      for (int i = 0; i < I; ++i) s.users.delay(i, t) = mu[static_cast<std::size_t>(i)];
    }
  } else {
    const auto mu = generate_delay_thresholds(I, s.urf_count, delay_seed);
    for (int i = 0; i < I; ++i) s.users.delay.row(i).setConstant(mu[static_cast<std::size_t>(i)]);
  }

  s.energy = config.energy;
  if (s.energy.tariff.size() == 0) s.energy.tariff = tou_tariff(s.intervals, s.interval_hours);
  if (s.energy.generation_cu.size() == 0 || s.energy.generation_du.size() == 0) {
    Eigen::VectorXd hourly;
    if (!config.solar_csv.empty()) {
      const SolarProfile profile = load_solar_profile(config.solar_csv, config.city);
      if (config.solar_day < 0 || config.solar_day >= profile.days())
        throw ConfigError("solar_day", "day index outside the solar profile");
      hourly = profile.day(config.solar_day);
    } else {
      try {
        hourly = synthetic_clear_sky(config.city, config.month);
      } catch (const InvalidArgument& err) {
        throw ConfigError("city", err.what());
      }
    }
    const Eigen::VectorXd per_interval = hourly_to_intervals(hourly, s.intervals, s.interval_hours);
    if (s.energy.generation_cu.size() == 0) s.energy.generation_cu = per_interval;
    if (s.energy.generation_du.size() == 0) s.energy.generation_du = per_interval.transpose().replicate(R, 1);
  }

  const double capacity = config.link_capacity ? *config.link_capacity
                                               : config.bandwidth_fraction * peak_aggregate_load(s);
  if (!(capacity >= 0.0)) throw ConfigError("link_capacity", "must be >= 0");
  if (config.preset || config.edges.empty()) {
    s.topology.set_all_capacities(capacity);
  } else {
    // explicit edge lists keep their own finite capacities; unspecified (infinite) ones get the default
    for (int e = 0; e < s.topology.arc_count(); ++e)
      if (!std::isfinite(s.topology.arcs()[static_cast<std::size_t>(e)].capacity)) s.topology.set_capacity(e, capacity);
  }

  s.validate();
  return s;
}

}  // namespace grove
