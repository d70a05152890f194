// Acceptance run: one PASS/FAIL line per criterion on stdout, details on stderr.
// Plot data of the matrix runs is left in ./acceptance_out.
#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <numbers>
#include <sstream>
#include <string>

#include "fixtures.hpp"
#include "grove/baselines.hpp"
#include "grove/lp_format.hpp"
#include "grove/oracle.hpp"
#include "grove/report.hpp"
#include "linearization.hpp"

using namespace grove;
using namespace grove::test;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

std::map<int, std::string> verdicts;

void verdict(int id, bool pass, const std::string& what) {
  const std::string line = std::string(pass ? "PASS" : "FAIL") + " criterion " + std::to_string(id) + ": " + what;
  std::cerr << line << std::endl;
  verdicts[id] = line;
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(double x) { return format_number(x); }

ScenarioConfig desk_defaults() {
  ScenarioConfig c;
  c.intervals = 8;
  return c;
}

SolverConfig desk_solver() {
  SolverConfig c;
  c.gap = 0.05;
  c.time_limit = 900;
  return c;
}

const std::vector<RepresentativeDay> kOneDay{{6, 365.0}};

// gap slack of a day result: the true optimum lies within gap * |opex| below it
double slack(const DayResult& d) { return std::isfinite(d.gap) ? std::abs(d.opex) * d.gap : kInf; }

const DayResult& only_day(const CellResult& c) { return c.days.front(); }

// ---------------------------------------------------------------------------

void oracle_equivalence() {
  const auto t0 = Clock::now();
  int feasible = 0, infeasible = 0, mismatches = 0;
  double worst = 0.0;
  for (std::uint64_t seed = 1; feasible < 20 && seed < 500; ++seed) {
    const Scenario s = tiny_scenario(seed);
    OracleResult o;
    try {
      o = enumerate_optimum(s);
    } catch (const InfeasibleDecisions&) {
      ++infeasible;
      continue;
    }
    ++feasible;
    SolverConfig c;
    c.gap = 1e-9;
    c.time_limit = 120;
    const SolveResult r = branch_and_bound(build_model(s).milp, c);
    const double diff = r.has_incumbent() ? std::abs(r.objective - o.opex) : kInf;
    worst = std::max(worst, diff);
    if (!(diff <= 1e-6) || r.status != SolveStatus::Optimal) {
      ++mismatches;
      std::cerr << "  seed " << seed << ": oracle " << fmt(o.opex) << " solver " << fmt(r.objective) << " status "
                << to_string(r.status) << '\n';
    }
  }
  const double elapsed = seconds_since(t0);
  verdict(1, feasible >= 20 && mismatches == 0 && elapsed < 300,
          std::to_string(feasible) + " feasible tiny scenarios (" + std::to_string(infeasible) +
              " infeasible skipped), max |B&B - oracle| " + fmt(worst) + ", " + fmt(std::round(elapsed)) + " s");
}

void linearization() {
  const LinearizationStats st = sample_linearization(small_du6(5, 2), 1000, 2024);
  verdict(2,
          st.sound_samples == 1000 && st.complete_samples == 1000 && st.sound_counterexamples == 0 &&
              st.complete_counterexamples == 0,
          std::to_string(st.sound_samples) + " sound samples with " + std::to_string(st.sound_counterexamples) +
              " counterexamples, " + std::to_string(st.complete_samples) + " complete samples with " +
              std::to_string(st.complete_counterexamples) + " counterexamples");
}

struct LedgerAudit {
  long ledgers = 0;
  double worst_balance = 0.0;
  double worst_bound = 0.0;
};

void audit(LedgerAudit& a, const Decisions& d) {
  const EnergyLedger& l = d.ledger;
  ++a.ledgers;
  for (int u = 0; u < l.units(); ++u) {
    const int T = l.intervals();
    const double lhs = l.green.row(u).sum() + l.sold.row(u).sum() + l.stored(u, T - 1) - l.initial(u);
    a.worst_balance = std::max(a.worst_balance, std::abs(lhs - l.generated.row(u).sum()));
    for (int t = 0; t < T; ++t) {
      a.worst_bound = std::max({a.worst_bound, -l.stored(u, t), l.stored(u, t) - l.capacity(u),
                                l.green(u, t) - l.consumption(u, t), -l.green(u, t), -l.sold(u, t)});
    }
  }
}

void audit(LedgerAudit& a, const MetricsBundle& b) {
  for (const auto& c : b.cells)
    for (const auto& d : c.days)
      if (d.decisions) audit(a, *d.decisions);
}

const CellResult* find(const MetricsBundle& b, const std::string& city, TrafficTier tier, Method m) {
  for (const auto& c : b.cells)
    if (c.cell.city == city && c.cell.tier == tier && c.cell.method == m) return &c;
  return nullptr;
}

void matrix_criteria() {
  const fs::path out = fs::current_path() / "acceptance_out";
  ExperimentMatrix m;
  m.cities = synthetic_cities();
  m.tiers = {TrafficTier::Low, TrafficTier::Medium, TrafficTier::High};
  m.days = kOneDay;
  m.solver = desk_solver();
  const auto t0 = Clock::now();
  const MetricsBundle base = run_experiment(m, desk_defaults(), out / "matrix");
  std::cerr << "  matrix: " << base.cells.size() << " cells in " << fmt(std::round(seconds_since(t0))) << " s\n";
  for (const auto& c : base.cells) {
    const DayResult& d = only_day(c);
    std::cerr << "  " << c.cell.key() << ' ' << d.status << " opex " << fmt(d.opex) << " gap " << fmt(d.gap)
              << " time " << fmt(std::round(d.wall_time)) << " s\n";
  }

  ExperimentMatrix doubled = m;
  doubled.methods = {Method::Proposed};
  doubled.solar = {2.0};
  const MetricsBundle sunny = run_experiment(doubled, desk_defaults(), out / "solar_x2");

  // 3: dominance in every cell
  int cells = 0, violations = 0, missing = 0;
  for (const auto& city : m.cities)
    for (TrafficTier tier : m.tiers) {
      ++cells;
      const CellResult* p = find(base, city, tier, Method::Proposed);
      if (!p || !only_day(*p).decisions) {
        ++missing;
        continue;
      }
      const DayResult& dp = only_day(*p);
      for (Method other : {Method::StaticRouting, Method::TrafficAware}) {
        const DayResult& d = only_day(*find(base, city, tier, other));
        if (!d.decisions) {
          // a baseline without a solution cannot undercut the proposed method; only a proven
          // infeasibility counts as such
          if (d.status != std::string(to_string(SolveStatus::Infeasible))) ++missing;
          continue;
        }
        if (dp.opex > d.opex + slack(dp) + slack(d)) {
          ++violations;
          std::cerr << "  dominance violated: " << city << '/' << to_string(tier) << " vs " << to_string(other)
                    << ": " << fmt(dp.opex) << " > " << fmt(d.opex) << '\n';
        }
      }
    }
  verdict(3, violations == 0 && missing == 0,
          std::to_string(cells) + " cells, " + std::to_string(violations) + " dominance violations, " +
              std::to_string(missing) + " cells without a comparable result");

  // 4: monotone in tier and in solar
  int checks = 0, breaks = 0;
  for (const auto& city : m.cities) {
    for (std::size_t k = 0; k + 1 < m.tiers.size(); ++k) {
      const DayResult& lo = only_day(*find(base, city, m.tiers[k], Method::Proposed));
      const DayResult& hi = only_day(*find(base, city, m.tiers[k + 1], Method::Proposed));
      ++checks;
      if (!lo.decisions || !hi.decisions || lo.opex > hi.opex + slack(lo) + slack(hi)) {
        ++breaks;
        std::cerr << "  tier order broken in " << city << ": " << fmt(lo.opex) << " > " << fmt(hi.opex) << '\n';
      }
    }
    for (TrafficTier tier : m.tiers) {
      const DayResult& one = only_day(*find(base, city, tier, Method::Proposed));
      const DayResult& two = only_day(*find(sunny, city, tier, Method::Proposed));
      ++checks;
      if (!one.decisions || !two.decisions || two.opex > one.opex + slack(one) + slack(two)) {
        ++breaks;
        std::cerr << "  doubled solar raised OpEx in " << city << '/' << to_string(tier) << ": " << fmt(two.opex)
                  << " > " << fmt(one.opex) << '\n';
      }
    }
  }
  verdict(4, breaks == 0, std::to_string(checks) + " ordered pairs, " + std::to_string(breaks) + " out of order");

  // 5: ledgers of every solution returned here, plus oracle and tiny-scenario solutions
  LedgerAudit a;
  audit(a, base);
  audit(a, sunny);
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const Scenario s = tiny_scenario(seed);
    try {
      audit(a, enumerate_optimum(s).decisions);
    } catch (const InfeasibleDecisions&) {
    }
  }
  verdict(5, a.worst_balance <= 1e-9 && a.worst_bound <= 1e-9,
          std::to_string(a.ledgers) + " ledgers, worst balance residual " + fmt(a.worst_balance) +
              " kWh, worst bound excess " + fmt(a.worst_bound) + " kWh");

  // 6: every incumbent and every final solution passes the constraint check
  long incumbents = 0, invalid = 0, bad_final = 0;
  for (const MetricsBundle* b : {&base, &sunny})
    for (const auto& c : b->cells)
      for (const auto& d : c.days) {
        incumbents += d.incumbents;
        invalid += d.invalid_incumbents;
        if (!d.final_violation.empty()) {
          ++bad_final;
          std::cerr << "  " << c.cell.key() << ": " << d.final_violation << '\n';
        }
        if (d.invalid_incumbents) std::cerr << "  " << c.cell.key() << ": " << d.message << '\n';
      }
  verdict(6, invalid == 0 && bad_final == 0,
          std::to_string(incumbents) + " incumbents checked, " + std::to_string(invalid) + " invalid, " +
              std::to_string(bad_final) + " invalid final solutions");

  // 10: du6 at 8 intervals within 5% in 15 minutes; the larger presets build and export
  int slow = 0;
  double worst_gap = 0.0, worst_time = 0.0;
  for (const auto& city : m.cities)
    for (TrafficTier tier : m.tiers) {
      const DayResult& d = only_day(*find(base, city, tier, Method::Proposed));
      worst_gap = std::max(worst_gap, std::isnan(d.gap) ? kInf : d.gap);
      worst_time = std::max(worst_time, d.wall_time);
      if (!d.decisions || !(d.gap <= 0.05) || d.wall_time > 900.0) ++slow;
    }
  std::string exported;
  bool built = true;
  for (TopologyPreset p : {TopologyPreset::Du12, TopologyPreset::Du24}) {
    try {
      ScenarioConfig c = desk_defaults();
      c.preset = p;
      const Scenario s = generate_scenario(c);
      const GroveModel gm = build_model(s);
      const fs::path file = out / (std::string(to_string(p)) + ".lp");
      export_model(gm.milp, file, s.name);
      const MilpModel back = import_model(file);
      built = built && back.row_count() == gm.milp.row_count() && back.variable_count() == gm.milp.variable_count();
      exported += " " + std::string(to_string(p)) + " " + std::to_string(gm.milp.variable_count()) + " columns/" +
                  std::to_string(gm.milp.row_count()) + " rows;";
    } catch (const std::exception& err) {
      built = false;
      std::cerr << "  " << to_string(p) << ": " << err.what() << '\n';
    }
  }
  verdict(10, slow == 0 && built,
          std::to_string(slow) + " of 12 du6 solves missed 5% in 900 s (worst gap " + fmt(worst_gap) + ", slowest " +
              fmt(std::round(worst_time)) + " s);" + exported);
}

void traffic_generator() {
  bool exact = true;
  for (TrafficTier tier : {TrafficTier::Low, TrafficTier::Medium, TrafficTier::High}) {
    TrafficGenConfig c;
    c.noise_amplitude = 0.0;
    c.phase_min = c.phase_max = 3.0 * std::numbers::pi / 4.0;
    c.multiplier = tier_multiplier(tier);
    const Eigen::MatrixXd rho = generate_traffic(c, make_population(3, 1, 2), 24);
    exact = exact && rho.maxCoeff() == c.multiplier;
  }
  TrafficGenConfig c;
  c.multiplier = tier_multiplier(TrafficTier::High);
  c.seed = 99;
  const UserPopulation users = make_population(6, 10, 70);
  const Eigen::MatrixXd rho = generate_traffic(c, users, 24);
  const auto phases = draw_du_phases(c, 6);
  long samples = 0, outside = 0;
  for (int i = 0; i < users.user_count(); ++i)
    for (int t = 0; t < 24; ++t) {
      ++samples;
      const double base = c.multiplier * traffic_profile(t, phases[static_cast<std::size_t>(users.du_of_user(i))],
                                                         c.slope_exponent);
      if (rho(i, t) < base - 1e-12 || rho(i, t) > base + c.multiplier * c.noise_amplitude + 1e-12 ||
          rho(i, t) > c.multiplier * (1.0 + c.noise_amplitude))
        ++outside;
    }
  verdict(7, exact && samples >= 100000 && outside == 0,
          std::string("noiseless peak ") + (exact ? "equals" : "differs from") + " the multiplier; " +
              std::to_string(outside) + " of " + std::to_string(samples) + " samples outside the envelope");
}

void degeneracy() {
  int pairs = 0, off = 0;
  auto compare = [&](const Scenario& s, Method other, const SolverConfig& cfg, const std::string& label) {
    const MethodResult p = solve_proposed(s, cfg);
    const MethodResult o = solve_method(other, s, cfg);
    ++pairs;
    const double tol = (p.decisions ? std::abs(p.opex) * p.solve.gap : 0.0) +
                       (o.decisions ? std::abs(o.opex) * o.solve.gap : 0.0) + 1e-6;
    const bool both = p.decisions.has_value() == o.decisions.has_value();
    if (!both || (p.decisions && std::abs(p.opex - o.opex) > tol)) {
      ++off;
      std::cerr << "  " << label << ": proposed " << fmt(p.opex) << " vs " << to_string(other) << ' ' << fmt(o.opex)
                << " (tolerance " << fmt(tol) << ")\n";
    }
  };
  for (TrafficTier tier : {TrafficTier::Low, TrafficTier::High}) {
    ScenarioConfig dark = desk_defaults();
    dark.tier = tier;
    dark.energy.solar_scale_cu = dark.energy.solar_scale_du = 0.0;
    compare(generate_scenario(dark), Method::TrafficAware, desk_solver(), "du6 without solar");
    ScenarioConfig open = desk_defaults();
    open.tier = tier;
    open.link_capacity = kInf;
    compare(generate_scenario(open), Method::StaticRouting, desk_solver(), "du6 uncapacitated");
  }
  SolverConfig tight;
  tight.gap = 1e-9;
  tight.time_limit = 120;
  int used = 0;
  for (std::uint64_t seed = 1; used < 5 && seed < 100; ++seed) {
    Scenario s = tiny_scenario(seed);
    try {
      enumerate_optimum(s);
    } catch (const InfeasibleDecisions&) {
      continue;
    }
    ++used;
    // a charged battery at dawn is a renewable source too, so it starts empty here
    Scenario dark = s;
    dark.energy.solar_scale_cu = dark.energy.solar_scale_du = 0.0;
    dark.energy.initial_cu_kwh = dark.energy.initial_du_kwh = 0.0;
    compare(dark, Method::TrafficAware, tight, "tiny " + std::to_string(seed) + " without solar");
    Scenario open = s;
    open.topology.set_all_capacities(kInf);
    compare(open, Method::StaticRouting, tight, "tiny " + std::to_string(seed) + " uncapacitated");
  }
  verdict(8, off == 0, std::to_string(pairs) + " pairs compared, " + std::to_string(off) + " outside combined gaps");
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void determinism() {
  const fs::path root = fs::current_path() / "acceptance_out" / "determinism";
  fs::remove_all(root);
  int status_sum = 0;
  for (const char* run : {"a", "b"}) {
    const std::string cmd = std::string(GROVE_CLI) +
                            " experiment --intervals 4 --months 6 --traffic low --gap 0.05 --time-limit 3600"
                            " --node-limit 2000 --workers 1 --out " +
                            (root / run).string() + " >/dev/null 2>&1";
    const int st = std::system(cmd.c_str());
    status_sum += WIFEXITED(st) ? WEXITSTATUS(st) : 1;
  }
  int files = 0, differ = 0;
  if (fs::exists(root / "a"))
    for (const auto& e : fs::recursive_directory_iterator(root / "a")) {
      if (!e.is_regular_file() || e.path().filename() == "timing.csv") continue;
      ++files;
      const fs::path other = root / "b" / fs::relative(e.path(), root / "a");
      if (!fs::exists(other) || slurp(e.path()) != slurp(other)) {
        ++differ;
        std::cerr << "  differs: " << fs::relative(e.path(), root / "a").string() << '\n';
      }
    }
  verdict(9, status_sum == 0 && files > 0 && differ == 0,
          std::to_string(files) + " files compared, " + std::to_string(differ) +
              " differ (timing.csv holds wall times and is excluded)");
}

}  // namespace

int main() {
  const auto t0 = Clock::now();
  fs::create_directories(fs::current_path() / "acceptance_out");
  oracle_equivalence();
  linearization();
  traffic_generator();
  degeneracy();
  determinism();
  matrix_criteria();
  std::cerr << "acceptance finished in " << fmt(std::round(seconds_since(t0))) << " s\n";
  int failures = 0;
  for (const auto& [id, line] : verdicts) {
    std::cout << line << '\n';
    failures += line.starts_with("FAIL");
  }
  return failures == 0 ? 0 : 1;
}
