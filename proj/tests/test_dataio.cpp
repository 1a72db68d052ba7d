#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "criteria.hpp"
#include "epi/dataio.hpp"
#include "epi/priors.hpp"

using namespace epi;
using namespace epi::dataio;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("epi_dataio_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

std::string error_of(auto&& fn) {
  try {
    fn();
  } catch (const DataError& e) {
    return e.what();
  }
  return "";
}

nlohmann::json base_config() {
  return nlohmann::json::parse(R"({
    "schema_version": 1,
    "period": {"start": "2020-04-14", "end": "2020-05-19", "bin_days": 3},
    "population_size": 3180000,
    "data": {"format": "binned", "path": "counts.csv"}
  })");
}

}  // namespace

TEST_CASE("dates") {
  CHECK(format_date(parse_date("2020-03-30")) == "2020-03-30");
  CHECK_THROWS_AS(parse_date("2020-02-30"), DataError);
  CHECK_THROWS_AS(parse_date("30/03/2020"), DataError);
  const Period p{parse_date("2020-04-14"), parse_date("2020-05-19")};
  CHECK(p.days() == 36);
}

TEST_CASE("line-list deduplication and the first-positive rule") {
  const auto d = [](const char* s) { return parse_date(s); };
  std::vector<LineListRecord> recs = {
      {"a", d("2020-04-01"), TestResult::Negative, std::nullopt, 1},
      {"a", d("2020-04-01"), TestResult::Negative, std::nullopt, 2},  // exact duplicate
      {"a", d("2020-04-02"), TestResult::Positive, std::nullopt, 3},
      {"a", d("2020-04-03"), TestResult::Positive, std::nullopt, 4},  // after first positive
      {"a", d("2020-04-03"), TestResult::Negative, std::nullopt, 5},  // after first positive
      {"b", d("2020-04-02"), TestResult::Negative, d("2020-04-03"), 6},
      {"b", d("2020-04-02"), TestResult::Positive, d("2020-04-02"), 7},  // earlier death date wins
      {"c", d("2020-03-20"), TestResult::Positive, std::nullopt, 8},     // before the window
  };
  const auto out = dedup_and_tabulate(recs, {d("2020-04-01"), d("2020-04-03")});
  CHECK(out.tests == std::vector<std::int64_t>{1, 3, 0});
  CHECK(out.cases == std::vector<std::int64_t>{0, 2, 0});
  CHECK(out.deaths == std::vector<std::int64_t>{0, 1, 0});
}

TEST_CASE("line-list reader") {
  const auto dir = scratch_dir("linelist");
  write(dir / "ll.csv",
        "id,date,result,death_date\n"
        "p1,2020-04-14,negative,\n"
        "p1,2020-04-15,positive,2020-04-16\n"
        "p2,2020-04-15,negative,\n");
  const auto recs = read_line_list(dir / "ll.csv");
  REQUIRE(recs.size() == 3);
  CHECK(recs[1].result == TestResult::Positive);
  CHECK(recs[1].death_date.has_value());
  write(dir / "bad.csv", "id,date,result,death_date\np1,2020-04-14,maybe,\n");
  CHECK(error_of([&] { read_line_list(dir / "bad.csv"); }).find("row 1") != std::string::npos);
}

TEST_CASE("binning") {
  CHECK(bin_series({1, 2, 3, 4, 5, 6}, 3) == std::vector<std::int64_t>{6, 15});
  CHECK_THROWS_AS(bin_series({1, 2, 3, 4}, 3), DataError);
  DailyCounts daily;
  daily.tests = {10, 10, 10, 20, 20, 20};
  daily.cases = {1, 1, 1, 2, 2, 2};
  daily.deaths = {0, 1, 0, 1, 0, 1};
  const auto s = bin_counts(daily, 3);
  CHECK(s.tests == std::vector<std::int64_t>{30, 60});
  CHECK(s.deaths == std::vector<std::int64_t>{1, 2});
  CHECK(s.bin_width == doctest::Approx(3.0 / 7.0));
}

TEST_CASE("binned counts round trip and corrupted rows") {
  const auto dir = scratch_dir("binned");
  const auto series = criteria::fixture_series();
  write(dir / "counts.csv", binned_counts_csv(series));
  const auto back = read_binned_counts(dir / "counts.csv", 3.0 / 7.0);
  CHECK(back.tests == series.tests);
  CHECK(back.cases == series.cases);
  CHECK(back.deaths == series.deaths);
  write(dir / "bad.csv", "bin,tests,cases,deaths\n1,100,5,1\n2,100,x,1\n");
  const auto msg = error_of([&] { read_binned_counts(dir / "bad.csv", 3.0 / 7.0); });
  CHECK(msg.find("row 2") != std::string::npos);
  write(dir / "short.csv", "bin,tests,cases,deaths\n1,100,5\n");
  CHECK_FALSE(error_of([&] { read_binned_counts(dir / "short.csv", 3.0 / 7.0); }).empty());
}

TEST_CASE("daily counts must be consecutive") {
  const auto dir = scratch_dir("daily");
  write(dir / "d.csv", "date,tests,cases,deaths\n2020-04-14,10,1,0\n2020-04-16,10,1,0\n");
  CHECK(error_of([&] { read_daily_counts(dir / "d.csv"); }).find("consecutive") != std::string::npos);
}

TEST_CASE("config parsing and key-path errors") {
  const auto dir = scratch_dir("config");
  auto cfg = parse_config(base_config(), dir);
  CHECK(cfg.bins() == 12);
  CHECK(cfg.constants.bin_width == doctest::Approx(3.0 / 7.0));
  CHECK(cfg.data_path == dir / "counts.csv");

  auto doc = base_config();
  doc.erase("population_size");
  CHECK(error_of([&] { parse_config(doc, dir); }).find("population_size") != std::string::npos);

  doc = base_config();
  doc["sampler"] = {{"chains", 1}};
  CHECK(error_of([&] { parse_config(doc, dir); }).find("sampler.chains") != std::string::npos);

  doc = base_config();
  doc["period"]["end"] = "2020-05-20";
  CHECK(error_of([&] { parse_config(doc, dir); }).find("bin_days") != std::string::npos);

  doc = base_config();
  doc["priors"] = {{"R0", {{"family", "log_normal"}, {"mu", 0.9163}, {"sigma", 0.5}}}};
  cfg = parse_config(doc, dir);
  CHECK(cfg.priors.entries[kR0].prior.a == doctest::Approx(0.9163));

  doc = base_config();
  doc["priors"] = {{"zeta", {{"family", "beta"}, {"alpha", 1}, {"beta", 1}}}};
  CHECK(error_of([&] { parse_config(doc, dir); }).find("priors.zeta") != std::string::npos);

  doc = base_config();
  doc["schema_version"] = 2;
  CHECK(error_of([&] { parse_config(doc, dir); }).find("schema_version") != std::string::npos);
}

TEST_CASE("prior spec serialisation") {
  const auto spec = priors::default_prior_spec();
  const auto j = prior_spec_to_json(spec);
  const auto back = prior_spec_from_json(j, "priors");
  REQUIRE(back.size() == spec.size());
  for (std::size_t i = 0; i < spec.size(); ++i) {
    CHECK(back.entries[i].name == spec.entries[i].name);
    CHECK(back.entries[i].prior.family == spec.entries[i].prior.family);
    CHECK(back.entries[i].prior.a == spec.entries[i].prior.a);
    CHECK(back.entries[i].prior.b == spec.entries[i].prior.b);
  }
  // Frozen digest of the default priors document.
  CHECK(canonical_hash(j) == "f59b090e70c0902640d43339afa613331f3fd3ac45971cb695b01689c1820681");
}

TEST_CASE("SHA-256 test vector") {
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("draws round trip at full precision") {
  PosteriorDraws d;
  d.names = {"a", "b"};
  d.n_chains = 2;
  d.draws_per_chain = 2;
  const double rows[4][2] = {{0.1, 1.0 / 3.0}, {-2.5e-17, 7.0}, {3.14159, 2.0 / 7.0}, {1e300, -0.0}};
  for (int i = 0; i < 4; ++i) d.append(rows[i], i / 2, -12.5 + i, i == 3, 4, 0.0123, 15, 0.91);
  const auto dir = scratch_dir("draws");
  write(dir / "draws.csv", draws_csv(d));
  const auto back = read_draws_csv(dir / "draws.csv");
  CHECK(back.names == d.names);
  CHECK(back.values == d.values);
  CHECK(back.chain == d.chain);
  CHECK(back.divergent == d.divergent);
  CHECK(back.log_density == d.log_density);
  CHECK(back.n_chains == 2);
  CHECK(back.draws_per_chain == 2);
}

TEST_CASE("outputs are written with a hashed manifest") {
  const auto dir = scratch_dir("outputs");
  OutputBundle b;
  b.files["x.csv"] = "a,b\n1,2\n";
  b.manifest = {{"kind", "test"}};
  const auto written = write_outputs(dir, b);
  CHECK(written.size() == 2);
  const auto m = nlohmann::json::parse(read_file(dir / "manifest.json"));
  CHECK(m["schema_version"] == kSchemaVersion);
  CHECK(m["files"]["x.csv"] == sha256_hex("a,b\n1,2\n"));
  CHECK(read_file(dir / "x.csv") == "a,b\n1,2\n");
}
