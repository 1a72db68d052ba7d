#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "criteria.hpp"
#include "epi/cli.hpp"
#include "epi/dataio.hpp"

using namespace epi;
using namespace epi::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("epi_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int run_args(std::vector<std::string> args) {
  args.insert(args.begin(), "epiinfer");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  return run(static_cast<int>(argv.size()), argv.data());
}

fs::path fixture_copy(const std::string& name) {
  const auto dir = scratch_dir(name);
  fs::copy_file(criteria::fixture_dir() / "config.json", dir / "config.json");
  fs::copy_file(criteria::fixture_dir() / "counts.csv", dir / "counts.csv");
  return dir;
}

Overrides small_run() {
  Overrides o;
  o.chains = 2;
  o.draws = 600;
  o.warmup = 300;
  return o;
}

}  // namespace

TEST_CASE("a single chain is rejected") {
  const auto dir = fixture_copy("chains");
  CHECK(run_args({"fit", "--config", (dir / "config.json").string(), "--chains", "1"}) == 1);
  Overrides o;
  o.chains = 1;
  CHECK_THROWS_AS(cmd_fit(dir / "config.json", o, dir / "out"), dataio::DataError);
}

TEST_CASE("a corrupted data row is reported by number") {
  const auto dir = fixture_copy("corrupt");
  std::ofstream(dir / "counts.csv") << "bin,tests,cases,deaths\n1,1758,108,13\n2,1900,abc,13\n";
  try {
    cmd_fit(dir / "config.json", {}, dir / "out");
    FAIL("expected a data error");
  } catch (const dataio::DataError& e) {
    CHECK(std::string(e.what()).find("row 2") != std::string::npos);
  }
  CHECK(run_args({"fit", "--config", (dir / "config.json").string(), "--out", (dir / "out").string()}) == 1);
  CHECK_FALSE(fs::exists(dir / "out" / "manifest.json"));
}

TEST_CASE("unknown commands and missing fit directories fail") {
  CHECK(run_args({"bogus"}) != 0);
  CHECK(run_args({"summarize", "/nonexistent/fit"}) == 1);
  CHECK(run_args({"forecast", "/nonexistent/fit", "--horizon", "4"}) == 1);
}

TEST_CASE("fit, summarize and forecast on the fixture") {
  const auto dir = fixture_copy("pipeline");
  const auto fit = cmd_fit(dir / "config.json", small_run(), dir / "fit");
  CHECK(fit.exit_code != 1);
  for (const char* f : {"draws.csv", "data.csv", "fit.json", "summary.csv", "diagnostics.csv",
                        "bayes_factor.json", "manifest.json"}) {
    CHECK(fs::exists(dir / "fit" / f));
  }
  const auto line = fit.to_json();
  CHECK(line["command"] == "fit");
  CHECK(line.contains("exit_code"));
  CHECK(line.dump().find('\n') == std::string::npos);

  cmd_summarize(dir / "fit", dir / "s1");
  cmd_summarize(dir / "fit", dir / "s2");
  for (const auto& e : fs::directory_iterator(dir / "s1")) {
    const auto name = e.path().filename();
    CHECK(dataio::read_file(e.path()) == dataio::read_file(dir / "s2" / name));
  }
  CHECK(dataio::read_file(dir / "s1" / "summary.csv") == dataio::read_file(dir / "fit" / "summary.csv"));

  const auto fc = cmd_forecast(dir / "fit", 4.0, 3, dir / "fc");
  CHECK(fc.exit_code == 0);
  CHECK(fs::exists(dir / "fc" / "forecast_deaths.csv"));
  CHECK_THROWS_AS(cmd_forecast(dir / "fit", 0.0, 3, dir / "fc0"), dataio::DataError);
  CHECK(run_args({"forecast", (dir / "fit").string(), "--horizon", "0"}) == 1);
}

TEST_CASE("simulate writes a fit-ready configuration") {
  const auto dir = fixture_copy("simulate");
  const auto r = cmd_simulate(dir / "config.json", {}, dir / "sim");
  CHECK(r.exit_code == 0);
  const auto cfg = dataio::load_config(dir / "sim" / "config.json");
  const auto series = dataio::load_series(cfg);
  CHECK(series.tests.size() == 12);
  // The fixture counts were produced by this command at the configured seed.
  const auto fixture = criteria::fixture_series();
  CHECK(series.tests == fixture.tests);
  CHECK(series.cases == fixture.cases);
  CHECK(series.deaths == fixture.deaths);
}
