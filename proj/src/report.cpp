#include "grove/report.hpp"

#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "grove/error.hpp"

namespace grove {

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

std::vector<RepresentativeDay> monthly_days(const std::vector<int>& months) {
  static constexpr int kLength[12] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  std::vector<int> chosen = months;
  if (chosen.empty())
    for (int m = 1; m <= 12; ++m) chosen.push_back(m);
  double total = 0.0;
  for (int m : chosen) {
    if (m < 1 || m > 12) throw ConfigError("months", "month " + std::to_string(m) + " outside 1..12");
    total += kLength[m - 1];
  }
  std::vector<RepresentativeDay> out;
  for (int m : chosen) out.push_back({m, kLength[m - 1] * 365.0 / total});
  return out;
}

std::string ExperimentCell::key() const {
  return city + "-" + std::string(to_string(tier)) + "-" + std::string(to_string(topology)) + "-" +
         std::string(to_string(method)) + "-s" + std::to_string(seed) + "-x" + format_number(solar);
}

void ExperimentMatrix::validate() const {
  if (cities.empty()) throw ConfigError("cities", "must not be empty");
  if (tiers.empty()) throw ConfigError("tiers", "must not be empty");
  if (topologies.empty()) throw ConfigError("topologies", "must not be empty");
  if (methods.empty()) throw ConfigError("methods", "must not be empty");
  if (seeds.empty()) throw ConfigError("seeds", "must not be empty");
  if (solar.empty()) throw ConfigError("solar", "must not be empty");
  if (days.empty()) throw ConfigError("days", "must not be empty");
  for (double x : solar)
    if (!(x >= 0.0) || !std::isfinite(x)) throw ConfigError("solar", "multipliers must be finite and >= 0");
  for (const auto& d : days) {
    if (d.month < 1 || d.month > 12) throw ConfigError("days", "month must lie in 1..12");
    if (!(d.weight > 0.0)) throw ConfigError("days", "weight must be > 0");
  }
  if (parallel_cells < 1) throw ConfigError("parallel_cells", "must be >= 1");
  try {
    solver.validate();
  } catch (const InvalidArgument& err) {
    throw ConfigError("solver", err.what());
  }
}

std::vector<ExperimentCell> ExperimentMatrix::cells() const {
  std::vector<ExperimentCell> out;
  for (const auto& city : cities)
    for (double x : solar)
      for (TrafficTier tier : tiers)
        for (TopologyPreset topo : topologies)
          for (std::uint64_t seed : seeds)
            for (Method m : methods) out.push_back({city, tier, topo, m, seed, x});
  return out;
}

std::string CellResult::status() const {
  for (const auto& d : days)
    if (!d.decisions) return d.status;
  return "ok";
}

double CellResult::annual_opex() const {
  double total = 0.0;
  for (const auto& d : days) {
    if (!d.decisions) return std::numeric_limits<double>::quiet_NaN();
    total += d.opex * d.day.weight;
  }
  return total;
}

double CellResult::max_gap() const {
  double g = 0.0;
  for (const auto& d : days) g = std::max(g, std::isnan(d.gap) ? std::numeric_limits<double>::infinity() : d.gap);
  return g;
}

Scenario cell_scenario(const ExperimentCell& cell, const RepresentativeDay& day, const ScenarioConfig& defaults) {
  ScenarioConfig c = defaults;
  c.preset = cell.topology;
  c.nodes.clear();
  c.edges.clear();
  c.city = cell.city;
  c.month = day.month;
  c.tier = cell.tier;
  c.seed = cell.seed;
  c.energy.solar_scale_cu *= cell.solar;
  c.energy.solar_scale_du *= cell.solar;
  c.name = cell.key() + "-m" + std::to_string(day.month);
  return generate_scenario(c);
}

namespace {

DayResult solve_day(const ExperimentCell& cell, const RepresentativeDay& day, const ScenarioConfig& defaults,
                    const SolverConfig& solver) {
  DayResult out;
  out.day = day;
  try {
    const Scenario s = cell_scenario(cell, day, defaults);
    MethodResult r = solve_method(cell.method, s, solver);
    out.status = std::string(to_string(r.solve.status));
    out.objective = r.model_objective;
    out.bound = r.solve.bound;
    out.gap = r.solve.gap;
    out.nodes = r.solve.nodes;
    out.lp_iterations = r.solve.lp_iterations;
    out.wall_time = r.solve.wall_time;
    out.peak_memory_kb = r.solve.peak_memory_kb;
    out.variables = r.variables;
    out.constraints = r.constraints;
    out.integer_variables = r.integer_variables;
    out.incumbents = r.incumbents;
    out.invalid_incumbents = r.invalid_incumbents;
    if (r.invalid_incumbents > 0) out.message = r.first_violation;
    if (r.decisions) {
      // traffic-aware decisions carry the replayed ledger, so check them against the real scenario
      const ValidationReport report = validate_solution(*r.decisions, s);
      if (!report.feasible()) out.final_violation = report.summary(1);
      out.opex = r.opex;
      out.decisions = std::move(r.decisions);
    }
  } catch (const std::exception& err) {
    out.status = "error";
    out.message = err.what();
    out.decisions.reset();
  }
  return out;
}

std::string csv_field(const std::string& text) {
  if (text.find_first_of(",\"\n") == std::string::npos) return text;
  std::string q = "\"";
  for (char c : text) {
    if (c == '"') q += '"';
    q += c == '\n' ? ' ' : c;
  }
  return q + "\"";
}

std::ofstream open_csv(const std::filesystem::path& path, const std::string& header) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot write " + path.string());
  f << header << '\n';
  return f;
}

std::string cell_prefix(const ExperimentCell& c) {
  return c.city + "," + std::string(to_string(c.tier)) + "," + std::string(to_string(c.topology)) + "," +
         std::string(to_string(c.method)) + "," + std::to_string(c.seed) + "," + format_number(c.solar);
}

std::string unit_name(int u) { return u == 0 ? std::string("CU") : "DU" + std::to_string(u); }

}  // namespace

MetricsBundle run_experiment(const ExperimentMatrix& matrix, const ScenarioConfig& defaults,
                             const std::optional<std::filesystem::path>& out) {
  matrix.validate();
  MetricsBundle bundle;
  const auto cells = matrix.cells();
  bundle.cells.resize(cells.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t k = next++; k < cells.size(); k = next++) {
      CellResult& res = bundle.cells[k];
      res.cell = cells[k];
      for (const auto& day : matrix.days) res.days.push_back(solve_day(cells[k], day, defaults, matrix.solver));
    }
  };
  const int threads = std::min<int>(matrix.parallel_cells, static_cast<int>(cells.size()));
  if (threads <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < threads; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (out) emit_plotdata(bundle, *out);
  return bundle;
}

void emit_plotdata(const MetricsBundle& bundle, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir / "ledgers", ec);
  if (ec) throw IoError("cannot create " + (dir / "ledgers").string() + ": " + ec.message());
  const std::string cell_cols = "city,tier,topology,method,seed,solar";
  auto fig5 = open_csv(dir / "fig5_opex.csv", cell_cols + ",status,annual_opex,currency,max_gap,message");
  auto fig6 = open_csv(dir / "fig6_active_dpes.csv", cell_cols + ",month,interval,side,active_dpes");
  auto fig7 = open_csv(dir / "fig7_unstored.csv", cell_cols + ",month,interval,unit,unstored_kwh");
  auto fig8 = open_csv(dir / "fig8_remaining.csv", cell_cols + ",month,interval,unit,remaining_kwh");
  auto fig9 = open_csv(dir / "fig9_scalability.csv",
                       cell_cols + ",month,status,variables,constraints,integer_variables,nodes,objective,bound,gap,"
                                   "incumbents,invalid_incumbents");
  auto timing = open_csv(dir / "timing.csv", cell_cols + ",month,wall_time_s,peak_memory_kb,lp_iterations");

  for (const CellResult& c : bundle.cells) {
    const std::string prefix = cell_prefix(c.cell);
    std::string message;
    for (const auto& d : c.days) {
      const std::string& m = d.message.empty() ? d.final_violation : d.message;
      if (!m.empty() && message.empty()) message = "m" + std::to_string(d.day.month) + ": " + m;
    }
    fig5 << prefix << ',' << c.status() << ',' << format_number(c.annual_opex()) << ',' << bundle.currency << ','
         << format_number(c.max_gap()) << ',' << csv_field(message) << '\n';
    for (const DayResult& d : c.days) {
      const std::string row = prefix + "," + std::to_string(d.day.month);
      fig9 << row << ',' << d.status << ',' << d.variables << ',' << d.constraints << ',' << d.integer_variables << ','
           << d.nodes << ',' << format_number(d.objective) << ',' << format_number(d.bound) << ','
           << format_number(d.gap) << ',' << d.incumbents << ',' << d.invalid_incumbents << '\n';
      timing << row << ',' << format_number(d.wall_time) << ',' << d.peak_memory_kb << ',' << d.lp_iterations << '\n';
      if (!d.decisions) continue;
      const Decisions& dec = *d.decisions;
      const EnergyLedger& ledger = dec.ledger;
      for (int t = 0; t < dec.intervals(); ++t) {
        int du = 0;
        for (int r = 0; r < static_cast<int>(dec.active_du[static_cast<std::size_t>(t)].rows()); ++r)
          du += dec.active_du_count(t, r);
        fig6 << row << ',' << t << ",cu," << dec.active_cu_count(t) << '\n';
        fig6 << row << ',' << t << ",du," << du << '\n';
        for (int u = 0; u < ledger.units(); ++u) {
          fig7 << row << ',' << t << ',' << unit_name(u) << ',' << format_number(ledger.sold(u, t)) << '\n';
          fig8 << row << ',' << t << ',' << unit_name(u) << ',' << format_number(ledger.stored(u, t)) << '\n';
        }
      }
      const auto path = dir / "ledgers" / (c.cell.key() + "-m" + std::to_string(d.day.month) + ".csv");
      std::ofstream lf(path, std::ios::binary | std::ios::trunc);
      if (!lf) throw IoError("cannot write " + path.string());
      write_ledger_csv(ledger, lf);
    }
  }
  for (std::ofstream* f : {&fig5, &fig6, &fig7, &fig8, &fig9, &timing})
    if (!f->flush()) throw IoError("write failed in " + dir.string());
}

}  // namespace grove
