#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "grove/baselines.hpp"
#include "grove/scenario.hpp"

namespace grove {

/// A day of the year solved as a stand-in for `weight` days.
struct RepresentativeDay {
  int month = 6;
  double weight = 365.0;
};

/// One day per month weighted by its length; with `months` given, only those months,
/// reweighted so the weights still sum to 365.
std::vector<RepresentativeDay> monthly_days(const std::vector<int>& months = {});

struct ExperimentCell {
  std::string city;
  TrafficTier tier = TrafficTier::Medium;
  TopologyPreset topology = TopologyPreset::Du6;
  Method method = Method::Proposed;
  std::uint64_t seed = 1;
  /// Multiplier on both solar panel scales.
  double solar = 1.0;

  /// e.g. `istanbul-medium-du6-proposed-s1-x1`
  std::string key() const;
};

/// Cartesian product of its dimensions, in the order cities, solar, tiers, topologies,
/// seeds, methods (methods vary fastest).
struct ExperimentMatrix {
  std::vector<std::string> cities{"istanbul"};
  std::vector<TrafficTier> tiers{TrafficTier::Medium};
  std::vector<TopologyPreset> topologies{TopologyPreset::Du6};
  std::vector<Method> methods{Method::Proposed, Method::StaticRouting, Method::TrafficAware};
  std::vector<std::uint64_t> seeds{1};
  std::vector<double> solar{1.0};
  std::vector<RepresentativeDay> days = monthly_days();
  SolverConfig solver;
  /// Cells solved concurrently; each solve keeps `solver.workers`.
  int parallel_cells = 1;

  /// Throws ConfigError naming the offending field.
  void validate() const;
  std::vector<ExperimentCell> cells() const;
};

struct DayResult {
  RepresentativeDay day;
  /// SolveStatus name, or "error"
  std::string status;
  std::string message;
  double opex = std::numeric_limits<double>::quiet_NaN();
  double objective = std::numeric_limits<double>::quiet_NaN();
  double bound = std::numeric_limits<double>::quiet_NaN();
  double gap = std::numeric_limits<double>::quiet_NaN();
  long nodes = 0;
  long lp_iterations = 0;
  double wall_time = 0.0;
  long peak_memory_kb = 0;
  int variables = 0;
  int constraints = 0;
  int integer_variables = 0;
  long incumbents = 0;
  long invalid_incumbents = 0;
  /// Empty when validate_solution passed on the final decisions.
  std::string final_violation;
  std::optional<Decisions> decisions;
};

struct CellResult {
  ExperimentCell cell;
  std::vector<DayResult> days;

  /// "ok" when every day produced decisions, otherwise the first failing day's status.
  std::string status() const;
  /// sum of day OpEx times weight; NaN when any day lacks decisions
  double annual_opex() const;
  /// largest day gap
  double max_gap() const;
};

struct MetricsBundle {
  std::vector<CellResult> cells;
  std::string currency = "TRY";
};

/// Scenario of one cell and day: `defaults` with the cell's city, tier, topology, seed,
/// month and solar multiplier applied.
Scenario cell_scenario(const ExperimentCell& cell, const RepresentativeDay& day, const ScenarioConfig& defaults);

/// Solves every cell and day. Failures become status rows; nothing is thrown past
/// matrix validation. Writes plot data to `out` when given.
MetricsBundle run_experiment(const ExperimentMatrix& matrix, const ScenarioConfig& defaults,
                             const std::optional<std::filesystem::path>& out = std::nullopt);

/// Writes into `dir` (created if missing):
///   fig5_opex.csv         city,tier,topology,method,seed,solar,status,annual_opex,currency,max_gap,message
///   fig6_active_dpes.csv  city,tier,topology,method,seed,solar,month,interval,side,active_dpes
///   fig7_unstored.csv     city,tier,topology,method,seed,solar,month,interval,unit,unstored_kwh
///   fig8_remaining.csv    city,tier,topology,method,seed,solar,month,interval,unit,remaining_kwh
///   fig9_scalability.csv  city,tier,topology,method,seed,solar,month,status,variables,constraints,
///                         integer_variables,nodes,objective,bound,gap,incumbents,invalid_incumbents
///   timing.csv            city,tier,topology,method,seed,solar,month,wall_time_s,peak_memory_kb,lp_iterations
///   ledgers/<key>-m<month>.csv per solved day
/// Everything except timing.csv is a function of the inputs alone. Throws IoError.
void emit_plotdata(const MetricsBundle& bundle, const std::filesystem::path& dir);

/// Shortest round-trip decimal text, "nan" and "inf" spelled out.
std::string format_number(double value);

}  // namespace grove
