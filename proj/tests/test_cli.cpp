#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

namespace fs = std::filesystem;

namespace {

int run(const std::string& args) {
  const std::string cmd = std::string(GROVE_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("grove_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("exit codes") {
    const fs::path dir = scratch("codes");
    CHECK(run("") == 4);
    CHECK(run("solve --traffic extreme") == 4);
    CHECK(run("solve --gap -1") == 4);
    CHECK(run("oracle --tiny-seed 1 --out " + dir.string()) != 1);
    CHECK(run("oracle --out " + dir.string() + " --scenario /nonexistent.json") == 1);

    {
      std::ofstream f(dir / "bad.json");
      f << R"({"energy": {"battery_du_kwh": 1, "initial_du_kwh": 2}})";
    }
    CHECK(run("solve --scenario " + (dir / "bad.json").string()) == 4);

    {
      std::ofstream f(dir / "tight.json");
      f << R"({"rrhs_per_du": 1, "users_per_rrh": 1, "intervals": 2, "capacity_cu": 0.01, "capacity_du": 0.01})";
    }
    CHECK(run("solve --time-limit 30 --scenario " + (dir / "tight.json").string() + " --out " + dir.string()) == 2);
    fs::remove_all(dir);
  }

  TEST_CASE("export writes LP text") {
    const fs::path dir = scratch("export");
    REQUIRE(run("export --intervals 2 --out " + dir.string()) == 0);
    bool found = false;
    for (const auto& e : fs::directory_iterator(dir)) found = found || e.path().extension() == ".lp";
    CHECK(found);
    fs::remove_all(dir);
  }

  TEST_CASE("solve writes decisions and a ledger") {
    const fs::path dir = scratch("solve");
    {
      std::ofstream f(dir / "small.json");
      f << R"({"rrhs_per_du": 1, "users_per_rrh": 1, "intervals": 4, "dpe_cu": 2, "dpe_du": 2,
               "capacity_cu": 3, "capacity_du": 2})";
    }
    CHECK(run("solve --gap 0.05 --time-limit 60 --scenario " + (dir / "small.json").string() + " --out " +
              dir.string()) == 0);
    CHECK(fs::exists(dir / "proposed.json"));
    CHECK(fs::exists(dir / "proposed_ledger.csv"));
    fs::remove_all(dir);
  }
}
