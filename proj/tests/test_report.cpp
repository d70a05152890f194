#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "grove/error.hpp"
#include "grove/report.hpp"

using namespace grove;
namespace fs = std::filesystem;

namespace {

std::vector<std::vector<std::string>> read_csv(const fs::path& path) {
  std::ifstream in(path);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

ScenarioConfig small_defaults() {
  ScenarioConfig c;
  c.rrhs_per_du = 1;
  c.users_per_rrh = 1;
  c.intervals = 4;
  c.dpe_cu = 2;
  c.dpe_du = 2;
  c.capacity_cu = 3.0;
  c.capacity_du = 2.0;
  return c;
}

ExperimentMatrix small_matrix() {
  ExperimentMatrix m;
  m.days = monthly_days({1, 7});
  m.solver.gap = 0.05;
  // a node limit rather than the clock ends the long solves, so reruns match
  m.solver.time_limit = 3600;
  m.solver.node_limit = 2000;
  return m;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("grove_report_" + name);
  fs::remove_all(p);
  return p;
}

const MetricsBundle& shared_run() {
  static const MetricsBundle bundle = run_experiment(small_matrix(), small_defaults());
  return bundle;
}

}  // namespace

TEST_SUITE("report") {
  TEST_CASE("monthly weights") {
    const auto all = monthly_days();
    REQUIRE(all.size() == 12);
    double total = 0.0;
    for (const auto& d : all) total += d.weight;
    CHECK(total == doctest::Approx(365.0));
    CHECK(all[1].weight == doctest::Approx(28.0));
    const auto two = monthly_days({1, 7});
    CHECK(two[0].weight + two[1].weight == doctest::Approx(365.0));
    CHECK_THROWS_AS(monthly_days({13}), ConfigError);
  }

  TEST_CASE("matrix order and validation") {
    ExperimentMatrix m;
    m.tiers = {TrafficTier::Low, TrafficTier::High};
    const auto cells = m.cells();
    REQUIRE(cells.size() == 6);
    CHECK(cells[0].method == Method::Proposed);
    CHECK(cells[1].method == Method::StaticRouting);
    CHECK(cells[3].tier == TrafficTier::High);
    CHECK(cells[0].key() == "istanbul-low-du6-proposed-s1-x1");
    m.methods.clear();
    CHECK_THROWS_AS(m.validate(), ConfigError);
  }

  TEST_CASE("number formatting") {
    CHECK(format_number(0.1) == "0.1");
    CHECK(format_number(std::nan("")) == "nan");
    CHECK(format_number(-std::numeric_limits<double>::infinity()) == "-inf");
  }

  TEST_CASE("empty bundle writes headers only") {
    const fs::path dir = scratch("empty");
    emit_plotdata(MetricsBundle{}, dir);
    for (const char* f : {"fig5_opex.csv", "fig6_active_dpes.csv", "fig7_unstored.csv", "fig8_remaining.csv",
                          "fig9_scalability.csv", "timing.csv"}) {
      const auto rows = read_csv(dir / f);
      CHECK(rows.size() == 1);
    }
    CHECK(read_csv(dir / "fig5_opex.csv")[0][7] == "annual_opex");
    fs::remove_all(dir);
  }

  TEST_CASE("plot data agrees with the ledgers") {
    const MetricsBundle& bundle = shared_run();
    const fs::path dir = scratch("run");
    emit_plotdata(bundle, dir);
    const ExperimentMatrix m = small_matrix();
    const int T = small_defaults().intervals;

    for (const CellResult& c : bundle.cells) REQUIRE(c.status() == "ok");
    CHECK(read_csv(dir / "fig6_active_dpes.csv").size() ==
          1 + static_cast<std::size_t>(T) * m.methods.size() * m.days.size() * 2);

    const auto fig5 = read_csv(dir / "fig5_opex.csv");
    const auto fig7 = read_csv(dir / "fig7_unstored.csv");
    std::map<std::string, double> unstored;
    for (std::size_t k = 1; k < fig7.size(); ++k)
      unstored[fig7[k][3] + "-m" + fig7[k][6] + "-" + fig7[k][7] + "-" + fig7[k][8]] = std::stod(fig7[k][9]);

    for (std::size_t k = 0; k < bundle.cells.size(); ++k) {
      const CellResult& c = bundle.cells[k];
      double annual = 0.0;
      for (const DayResult& d : c.days) {
        const Scenario s = cell_scenario(c.cell, d.day, small_defaults());
        const auto ledger = read_csv(dir / "ledgers" / (c.cell.key() + "-m" + std::to_string(d.day.month) + ".csv"));
        REQUIRE(ledger.size() == 1 + static_cast<std::size_t>(T * (s.du_count() + 1)));
        double day = 0.0;
        for (std::size_t j = 1; j < ledger.size(); ++j) {
          const int t = std::stoi(ledger[j][1]);
          const double psi = std::stod(ledger[j][2]), green = std::stod(ledger[j][3]), sold = std::stod(ledger[j][4]);
          const double tariff = s.energy.tariff(t);
          day += tariff * (psi - green) - s.energy.sell_ratio * tariff * sold;
          const std::string key = std::string(to_string(c.cell.method)) + "-m" + std::to_string(d.day.month) + "-" +
                                  ledger[j][1] + "-" + ledger[j][0];
          CHECK(unstored.at(key) == sold);
        }
        annual += d.day.weight * day;

        const Decisions& dec = *d.decisions;
        for (int t = 0; t < T; ++t) CHECK(dec.active_cu_count(t) == dec.active_cu.row(t).sum());
      }
      REQUIRE(fig5[k + 1][3] == std::string(to_string(c.cell.method)));
      CHECK(std::stod(fig5[k + 1][7]) == doctest::Approx(annual).epsilon(1e-9));
      CHECK(fig5[k + 1][8] == "TRY");
    }
    fs::remove_all(dir);
  }

  TEST_CASE("active DPE counts match the decisions") {
    const MetricsBundle& bundle = shared_run();
    const fs::path dir = scratch("active");
    emit_plotdata(bundle, dir);
    const auto fig6 = read_csv(dir / "fig6_active_dpes.csv");
    std::size_t row = 1;
    for (const CellResult& c : bundle.cells)
      for (const DayResult& d : c.days) {
        const Decisions& dec = *d.decisions;
        for (int t = 0; t < dec.intervals(); ++t) {
          CHECK(std::stoi(fig6[row][9]) == dec.active_cu.row(t).sum());
          CHECK(std::stoi(fig6[row + 1][9]) == dec.active_du[static_cast<std::size_t>(t)].sum());
          row += 2;
        }
      }
    fs::remove_all(dir);
  }

  TEST_CASE("repeated runs give identical plot data") {
    const fs::path a = scratch("a"), b = scratch("b");
    run_experiment(small_matrix(), small_defaults(), a);
    run_experiment(small_matrix(), small_defaults(), b);
    for (const auto& entry : fs::recursive_directory_iterator(a)) {
      if (!entry.is_regular_file() || entry.path().filename() == "timing.csv") continue;
      const fs::path other = b / fs::relative(entry.path(), a);
      CHECK_MESSAGE(slurp(entry.path()) == slurp(other), entry.path().string());
    }
    fs::remove_all(a);
    fs::remove_all(b);
  }

  TEST_CASE("failures become status rows") {
    ExperimentMatrix m = small_matrix();
    m.methods = {Method::StaticRouting};
    m.days = monthly_days({6});
    ScenarioConfig c = small_defaults();
    c.capacity_cu = 0.01;
    c.capacity_du = 0.01;
    const MetricsBundle bundle = run_experiment(m, c);
    REQUIRE(bundle.cells.size() == 1);
    CHECK(bundle.cells[0].status() != "ok");
    CHECK(std::isnan(bundle.cells[0].annual_opex()));
  }
}
