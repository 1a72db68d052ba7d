#include "epi/dataio.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <tuple>

#include <openssl/evp.h>

namespace epi::dataio {

namespace fs = std::filesystem;
using nlohmann::json;

// ---------------------------------------------------------------------------
// Dates and CSV primitives

Date parse_date(const std::string& text, const std::string& where) {
  int y = 0;
  unsigned m = 0, d = 0;
  char tail = 0;
  if (text.size() != 10 || std::sscanf(text.c_str(), "%4d-%2u-%2u%c", &y, &m, &d, &tail) != 3) {
    throw DataError(where + ": malformed date '" + text + "' (expected YYYY-MM-DD)");
  }
  const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m},
                                        std::chrono::day{d}};
  if (!ymd.ok()) throw DataError(where + ": invalid calendar date '" + text + "'");
  return Date{ymd};
}

std::string format_date(Date d) {
  const std::chrono::year_month_day ymd{d};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file_atomic(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw DataError("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

namespace {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  for (auto& f : out) {
    const auto b = f.find_first_not_of(" \t");
    const auto e = f.find_last_not_of(" \t");
    f = b == std::string::npos ? std::string() : f.substr(b, e - b + 1);
  }
  return out;
}

CsvTable read_csv(const fs::path& path) {
  std::istringstream in(read_file(path));
  CsvTable t;
  std::string line;
  bool have_header = false;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r" || line[0] == '#') continue;
    auto fields = split_csv_line(line);
    if (!have_header) {
      t.header = std::move(fields);
      have_header = true;
      continue;
    }
    if (fields.size() != t.header.size()) {
      throw DataError(path.string() + ": row " + std::to_string(t.rows.size() + 1) + " (line " +
                      std::to_string(line_no) + ") has " + std::to_string(fields.size()) +
                      " fields, expected " + std::to_string(t.header.size()));
    }
    t.rows.push_back(std::move(fields));
  }
  if (!have_header) throw DataError(path.string() + ": empty file");
  return t;
}

std::size_t column(const CsvTable& t, const std::string& name, const fs::path& path) {
  const auto it = std::find(t.header.begin(), t.header.end(), name);
  if (it == t.header.end()) throw DataError(path.string() + ": missing column '" + name + "'");
  return static_cast<std::size_t>(it - t.header.begin());
}

std::string row_ref(const fs::path& path, std::size_t row) {
  return path.string() + ": row " + std::to_string(row);
}

std::int64_t parse_count(const std::string& s, const std::string& where) {
  std::size_t pos = 0;
  long long v = 0;
  try {
    v = std::stoll(s, &pos);
  } catch (const std::exception&) {
    throw DataError(where + ": '" + s + "' is not an integer count");
  }
  if (pos != s.size()) throw DataError(where + ": '" + s + "' is not an integer count");
  if (v < 0) throw DataError(where + ": negative count " + s);
  return v;
}

double parse_real(const std::string& s, const std::string& where) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    throw DataError(where + ": '" + s + "' is not a number");
  }
  if (pos != s.size()) throw DataError(where + ": '" + s + "' is not a number");
  return v;
}

}  // namespace

// ---------------------------------------------------------------------------
// Line lists and counts

std::vector<LineListRecord> read_line_list(const fs::path& path) {
  const auto t = read_csv(path);
  const auto c_id = column(t, "id", path);
  const auto c_date = column(t, "date", path);
  const auto c_result = column(t, "result", path);
  const auto c_death = column(t, "death_date", path);
  std::vector<LineListRecord> out;
  out.reserve(t.rows.size());
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& f = t.rows[r];
    const auto where = row_ref(path, r + 1);
    LineListRecord rec;
    rec.row = r + 1;
    rec.person_id = f[c_id];
    if (rec.person_id.empty()) throw DataError(where + ": empty id");
    rec.specimen_date = parse_date(f[c_date], where + " column date");
    std::string res = f[c_result];
    std::transform(res.begin(), res.end(), res.begin(), [](unsigned char ch) { return std::tolower(ch); });
    if (res == "positive" || res == "pos") {
      rec.result = TestResult::Positive;
    } else if (res == "negative" || res == "neg") {
      rec.result = TestResult::Negative;
    } else {
      throw DataError(where + ": result '" + f[c_result] + "' is neither positive nor negative");
    }
    if (!f[c_death].empty()) rec.death_date = parse_date(f[c_death], where + " column death_date");
    out.push_back(std::move(rec));
  }
  return out;
}

DailyCounts dedup_and_tabulate(const std::vector<LineListRecord>& records, const Period& period) {
  if (period.end < period.start) throw DataError("period: end date precedes start date");
  DailyCounts out;
  out.start = period.start;
  const std::size_t days = period.days();
  out.tests.assign(days, 0);
  out.cases.assign(days, 0);
  out.deaths.assign(days, 0);
  auto day_index = [&](Date d) -> std::optional<std::size_t> {
    if (d < period.start || d > period.end) return std::nullopt;
    return static_cast<std::size_t>((d - period.start).count());
  };

  // Exact duplicates collapse; results sort negatives before positives on a day.
  using Key = std::tuple<std::string, Date, int>;
  std::set<Key> tests;
  std::map<std::string, Date> death_of;
  for (const auto& r : records) {
    tests.emplace(r.person_id, r.specimen_date, r.result == TestResult::Positive ? 1 : 0);
    if (r.death_date) {
      auto [it, inserted] = death_of.emplace(r.person_id, *r.death_date);
      if (!inserted && *r.death_date < it->second) it->second = *r.death_date;
    }
  }

  const std::string* current = nullptr;
  bool seen_positive = false;
  for (const auto& [person, date, positive] : tests) {
    if (current == nullptr || *current != person) {
      current = &person;
      seen_positive = false;
    }
    if (seen_positive) continue;  // everything after the first positive is dropped
    if (const auto idx = day_index(date)) {
      ++out.tests[*idx];
      if (positive) ++out.cases[*idx];
    }
    if (positive) seen_positive = true;
  }
  for (const auto& [person, date] : death_of) {
    if (const auto idx = day_index(date)) ++out.deaths[*idx];
  }
  return out;
}

DailyCounts read_daily_counts(const fs::path& path) {
  const auto t = read_csv(path);
  const auto c_date = column(t, "date", path);
  const auto c_tests = column(t, "tests", path);
  const auto c_cases = column(t, "cases", path);
  const auto c_deaths = column(t, "deaths", path);
  DailyCounts out;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& f = t.rows[r];
    const auto where = row_ref(path, r + 1);
    const Date d = parse_date(f[c_date], where + " column date");
    if (r == 0) {
      out.start = d;
    } else if (d != out.start + std::chrono::days(static_cast<int>(r))) {
      throw DataError(where + ": dates must be consecutive days");
    }
    out.tests.push_back(parse_count(f[c_tests], where + " column tests"));
    out.cases.push_back(parse_count(f[c_cases], where + " column cases"));
    out.deaths.push_back(parse_count(f[c_deaths], where + " column deaths"));
    if (out.cases.back() > out.tests.back()) throw DataError(where + ": cases exceed tests");
  }
  return out;
}

std::vector<std::int64_t> bin_series(const std::vector<std::int64_t>& daily, std::size_t width) {
  if (width == 0) throw DataError("bin width must be at least one day");
  if (daily.size() % width != 0) {
    throw DataError("series of " + std::to_string(daily.size()) + " days is not divisible into " +
                    std::to_string(width) + "-day bins");
  }
  std::vector<std::int64_t> out(daily.size() / width, 0);
  for (std::size_t i = 0; i < daily.size(); ++i) out[i / width] += daily[i];
  return out;
}

surveillance::SurveillanceSeries bin_counts(const DailyCounts& daily, std::size_t width_days) {
  surveillance::SurveillanceSeries s;
  s.bin_width = static_cast<double>(width_days) / 7.0;
  s.tests = bin_series(daily.tests, width_days);
  s.cases = bin_series(daily.cases, width_days);
  s.deaths = bin_series(daily.deaths, width_days);
  return s;
}

surveillance::SurveillanceSeries read_binned_counts(const fs::path& path, double bin_width_weeks) {
  const auto t = read_csv(path);
  const auto c_bin = column(t, "bin", path);
  const auto c_tests = column(t, "tests", path);
  const auto c_cases = column(t, "cases", path);
  const auto c_deaths = column(t, "deaths", path);
  surveillance::SurveillanceSeries s;
  s.bin_width = bin_width_weeks;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& f = t.rows[r];
    const auto where = row_ref(path, r + 1);
    if (parse_count(f[c_bin], where + " column bin") != static_cast<std::int64_t>(r + 1)) {
      throw DataError(where + ": bins must be numbered 1, 2, ... in order");
    }
    s.tests.push_back(parse_count(f[c_tests], where + " column tests"));
    s.cases.push_back(parse_count(f[c_cases], where + " column cases"));
    s.deaths.push_back(parse_count(f[c_deaths], where + " column deaths"));
    if (s.cases.back() > s.tests.back()) throw DataError(where + ": cases exceed tests");
  }
  return s;
}

std::string binned_counts_csv(const surveillance::SurveillanceSeries& series) {
  std::ostringstream os;
  os << "bin,tests,cases,deaths\n";
  for (std::size_t l = 0; l < series.size(); ++l) {
    os << l + 1 << ',' << series.tests[l] << ',' << series.cases[l] << ',' << series.deaths[l] << '\n';
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Priors as JSON

namespace {

std::string support_name(priors::Support s) {
  return s == priors::Support::UnitInterval ? "unit_interval" : "positive";
}

const json& require(const json& obj, const std::string& key, const std::string& path,
                    const std::string& meaning = "") {
  if (!obj.is_object() || !obj.contains(key)) {
    std::string msg = "config: missing key '" + path + (path.empty() ? "" : ".") + key + "'";
    if (!meaning.empty()) msg += " (" + meaning + ")";
    throw DataError(msg);
  }
  return obj.at(key);
}

double number_at(const json& obj, const std::string& key, const std::string& path,
                 const std::string& meaning = "") {
  const auto& v = require(obj, key, path, meaning);
  if (!v.is_number()) throw DataError("config: '" + path + "." + key + "' must be a number");
  return v.get<double>();
}

json prior_to_json(const priors::Prior& p) {
  json j;
  j["family"] = priors::family_name(p.family);
  switch (p.family) {
    case priors::Family::Beta:
      j["alpha"] = p.a;
      j["beta"] = p.b;
      break;
    case priors::Family::LogNormal:
    case priors::Family::TruncatedNormal:
      j["mu"] = p.a;
      j["sigma"] = p.b;
      break;
    case priors::Family::ExponentialInvSqrt:
      j["rate"] = p.a;
      break;
    case priors::Family::Flat:
      break;
  }
  return j;
}

priors::Prior prior_from_json(const json& j, const std::string& path) {
  if (!j.is_object()) throw DataError("config: '" + path + "' must be an object");
  const auto& fam = require(j, "family", path);
  if (!fam.is_string()) throw DataError("config: '" + path + ".family' must be a string");
  priors::Family family;
  try {
    family = priors::family_from_name(fam.get<std::string>());
  } catch (const std::invalid_argument& e) {
    throw DataError("config: '" + path + ".family': " + e.what());
  }
  priors::Prior p;
  p.family = family;
  switch (family) {
    case priors::Family::Beta:
      p.a = number_at(j, "alpha", path);
      p.b = number_at(j, "beta", path);
      break;
    case priors::Family::LogNormal:
    case priors::Family::TruncatedNormal:
      p.a = number_at(j, "mu", path);
      p.b = number_at(j, "sigma", path);
      break;
    case priors::Family::ExponentialInvSqrt:
      p.a = number_at(j, "rate", path);
      break;
    case priors::Family::Flat:
      break;
  }
  try {
    p.validate();
  } catch (const std::invalid_argument& e) {
    throw DataError("config: '" + path + "': " + e.what());
  }
  return p;
}

}  // namespace

json prior_spec_to_json(const priors::PriorSpec& spec) {
  json out;
  out["schema_version"] = kSchemaVersion;
  json params = json::array();
  for (const auto& e : spec.entries) {
    json j = prior_to_json(e.prior);
    j["name"] = e.name;
    j["support"] = support_name(e.support);
    params.push_back(std::move(j));
  }
  out["parameters"] = std::move(params);
  return out;
}

priors::PriorSpec prior_spec_from_json(const json& doc, const std::string& key_path) {
  const auto& params = require(doc, "parameters", key_path);
  if (!params.is_array()) throw DataError("config: '" + key_path + ".parameters' must be an array");
  priors::PriorSpec spec;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const std::string path = key_path + ".parameters[" + std::to_string(i) + "]";
    const auto& j = params[i];
    priors::ParameterPrior e;
    e.name = require(j, "name", path).get<std::string>();
    const auto support = require(j, "support", path).get<std::string>();
    if (support == "unit_interval") {
      e.support = priors::Support::UnitInterval;
    } else if (support == "positive") {
      e.support = priors::Support::Positive;
    } else {
      throw DataError("config: '" + path + ".support' must be unit_interval or positive");
    }
    e.prior = prior_from_json(j, path);
    spec.entries.push_back(std::move(e));
  }
  return spec;
}

// ---------------------------------------------------------------------------
// Hashing

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256: digest failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xf];
  }
  return out;
}

std::string canonical_hash(const json& doc) { return sha256_hex(doc.dump()); }

// ---------------------------------------------------------------------------
// Run configuration

RunConfig parse_config(const json& doc, const fs::path& base_dir) {
  if (!doc.is_object()) throw DataError("config: top level must be an object");
  RunConfig cfg;
  cfg.source = doc;
  const auto version = require(doc, "schema_version", "");
  if (!version.is_number_integer() || version.get<int>() != kSchemaVersion) {
    throw DataError("config: 'schema_version' must be " + std::to_string(kSchemaVersion));
  }

  const auto& period = require(doc, "period", "", "fitting window");
  cfg.period.start = parse_date(require(period, "start", "period").get<std::string>(), "config: 'period.start'");
  cfg.period.end = parse_date(require(period, "end", "period").get<std::string>(), "config: 'period.end'");
  if (period.contains("bin_days")) {
    const auto& b = period.at("bin_days");
    if (!b.is_number_integer() || b.get<long long>() <= 0) {
      throw DataError("config: 'period.bin_days' must be a positive integer");
    }
    cfg.bin_days = b.get<std::size_t>();
  }
  if (cfg.period.end < cfg.period.start) throw DataError("config: 'period.end' precedes 'period.start'");
  if (cfg.period.days() % cfg.bin_days != 0) {
    throw DataError("config: 'period' spans " + std::to_string(cfg.period.days()) +
                    " days, not a multiple of period.bin_days = " + std::to_string(cfg.bin_days));
  }
  cfg.constants.bin_width = static_cast<double>(cfg.bin_days) / 7.0;

  cfg.constants.pop_size = number_at(doc, "population_size", "", "population size");
  if (!(cfg.constants.pop_size > 0.0)) throw DataError("config: 'population_size' (population size) must be positive");
  if (doc.contains("delta")) {
    cfg.constants.delta = number_at(doc, "delta", "");
    if (!(cfg.constants.delta > 0.0 && cfg.constants.delta <= 1.0)) {
      throw DataError("config: 'delta' must lie in (0, 1]");
    }
  }

  const auto& data = require(doc, "data", "", "data source");
  const auto format = require(data, "format", "data").get<std::string>();
  if (format == "line_list") {
    cfg.data_format = DataFormat::LineList;
  } else if (format == "daily") {
    cfg.data_format = DataFormat::Daily;
  } else if (format == "binned") {
    cfg.data_format = DataFormat::Binned;
  } else {
    throw DataError("config: 'data.format' must be line_list, daily or binned");
  }
  cfg.data_path = base_dir / require(data, "path", "data").get<std::string>();

  cfg.priors = priors::default_prior_spec();
  if (doc.contains("priors")) {
    const auto& pr = doc.at("priors");
    if (!pr.is_object()) throw DataError("config: 'priors' must be an object");
    for (const auto& [name, value] : pr.items()) {
      const std::string path = "priors." + name;
      try {
        cfg.priors.set(name, prior_from_json(value, path));
      } catch (const std::out_of_range&) {
        throw DataError("config: '" + path + "' is not a model parameter");
      } catch (const std::invalid_argument& e) {
        throw DataError("config: '" + path + "': " + e.what());
      }
    }
  }

  if (doc.contains("sampler")) {
    const auto& s = doc.at("sampler");
    if (!s.is_object()) throw DataError("config: 'sampler' must be an object");
    auto count = [&](const char* key, std::size_t& dst) {
      if (!s.contains(key)) return;
      const auto& v = s.at(key);
      if (!v.is_number_integer() || v.get<long long>() < 0) {
        throw DataError(std::string("config: 'sampler.") + key + "' must be a non-negative integer");
      }
      dst = v.get<std::size_t>();
    };
    count("chains", cfg.sampler.n_chains);
    count("draws", cfg.sampler.n_draws);
    count("warmup", cfg.sampler.n_warmup);
    if (s.contains("target_accept")) cfg.sampler.target_accept = number_at(s, "target_accept", "sampler");
    if (s.contains("max_tree_depth")) {
      std::size_t depth = 0;
      count("max_tree_depth", depth);
      cfg.sampler.max_tree_depth = static_cast<int>(depth);
    }
    if (s.contains("seed")) {
      const auto& v = s.at("seed");
      if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
        throw DataError("config: 'sampler.seed' must be a non-negative integer");
      }
      cfg.sampler.seed = v.get<std::uint64_t>();
    }
  }
  if (cfg.sampler.n_chains < 2) {
    throw DataError("config: 'sampler.chains' must be at least 2 (convergence diagnostics compare chains)");
  }
  try {
    cfg.sampler.validate();
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("config: 'sampler': ") + e.what());
  }

  if (doc.contains("output_dir")) cfg.output_dir = base_dir / doc.at("output_dir").get<std::string>();
  if (doc.contains("forecast")) {
    const auto& f = doc.at("forecast");
    if (f.contains("horizon_weeks")) cfg.forecast_weeks = number_at(f, "horizon_weeks", "forecast");
    if (f.contains("seed")) cfg.forecast_seed = f.at("seed").get<std::uint64_t>();
  }
  return cfg;
}

RunConfig load_config(const fs::path& path) {
  json doc;
  try {
    doc = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw DataError(path.string() + ": not valid JSON: " + e.what());
  }
  try {
    return parse_config(doc, path.parent_path());
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

surveillance::SurveillanceSeries load_series(const RunConfig& config) {
  surveillance::SurveillanceSeries s;
  switch (config.data_format) {
    case DataFormat::LineList: {
      const auto records = read_line_list(config.data_path);
      s = bin_counts(dedup_and_tabulate(records, config.period), config.bin_days);
      break;
    }
    case DataFormat::Daily: {
      const auto daily = read_daily_counts(config.data_path);
      if (daily.size() == 0) throw DataError(config.data_path.string() + ": no rows");
      if (config.period.start < daily.start ||
          config.period.end > daily.start + std::chrono::days(static_cast<int>(daily.size()) - 1)) {
        throw DataError(config.data_path.string() + ": does not cover the configured period");
      }
      DailyCounts window;
      window.start = config.period.start;
      const auto off = static_cast<std::size_t>((config.period.start - daily.start).count());
      const std::size_t n = config.period.days();
      window.tests.assign(daily.tests.begin() + off, daily.tests.begin() + off + n);
      window.cases.assign(daily.cases.begin() + off, daily.cases.begin() + off + n);
      window.deaths.assign(daily.deaths.begin() + off, daily.deaths.begin() + off + n);
      s = bin_counts(window, config.bin_days);
      break;
    }
    case DataFormat::Binned:
      s = read_binned_counts(config.data_path, config.constants.bin_width);
      if (s.size() != config.bins()) {
        throw DataError(config.data_path.string() + ": has " + std::to_string(s.size()) +
                        " bins, the configured period needs " + std::to_string(config.bins()));
      }
      break;
  }
  return s;
}

// ---------------------------------------------------------------------------
// Output tables

std::string draws_csv(const PosteriorDraws& draws) {
  std::ostringstream os;
  for (const auto& n : draws.names) os << n << ',';
  os << "lp,chain,divergent,tree_depth,step_size,n_leapfrog,accept_stat\n";
  for (std::size_t d = 0; d < draws.size(); ++d) {
    for (std::size_t j = 0; j < draws.n_params(); ++j) os << format_double(draws.at(d, j)) << ',';
    os << format_double(draws.log_density[d]) << ',' << draws.chain[d] << ','
       << static_cast<int>(draws.divergent[d]) << ',' << draws.tree_depth[d] << ','
       << format_double(draws.step_size[d]) << ',' << draws.n_leapfrog[d] << ','
       << format_double(draws.accept_stat[d]) << '\n';
  }
  return os.str();
}

PosteriorDraws read_draws_csv(const fs::path& path) {
  const auto t = read_csv(path);
  const auto c_lp = column(t, "lp", path);
  const auto c_chain = column(t, "chain", path);
  const auto c_div = column(t, "divergent", path);
  const auto c_depth = column(t, "tree_depth", path);
  const auto c_eps = column(t, "step_size", path);
  const auto c_lf = column(t, "n_leapfrog", path);
  const auto c_acc = column(t, "accept_stat", path);
  PosteriorDraws d;
  d.names.assign(t.header.begin(), t.header.begin() + static_cast<std::ptrdiff_t>(c_lp));
  std::set<int> chains;
  std::vector<double> theta(d.names.size());
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& f = t.rows[r];
    const auto where = row_ref(path, r + 1);
    for (std::size_t j = 0; j < theta.size(); ++j) theta[j] = parse_real(f[j], where);
    const int chain = static_cast<int>(parse_count(f[c_chain], where + " column chain"));
    chains.insert(chain);
    d.append(theta, chain, parse_real(f[c_lp], where), parse_count(f[c_div], where) != 0,
             static_cast<int>(parse_count(f[c_depth], where)), parse_real(f[c_eps], where),
             static_cast<int>(parse_count(f[c_lf], where)), parse_real(f[c_acc], where));
  }
  d.n_chains = chains.size();
  d.draws_per_chain = d.n_chains == 0 ? 0 : d.size() / d.n_chains;
  return d;
}

std::string summary_csv(const analysis::SummaryTable& table) {
  std::ostringstream os;
  os << "quantity,time_weeks,mean,median,q2.5,q10,q25,q75,q90,q97.5\n";
  for (const auto& r : table.rows) {
    os << r.label << ',' << format_double(r.time) << ',' << format_double(r.mean) << ','
       << format_double(r.median) << ',' << format_double(r.i95.lo) << ','
       << format_double(r.i80.lo) << ',' << format_double(r.i50.lo) << ','
       << format_double(r.i50.hi) << ',' << format_double(r.i80.hi) << ','
       << format_double(r.i95.hi) << '\n';
  }
  return os.str();
}

std::vector<fs::path> write_outputs(const fs::path& dir, const OutputBundle& bundle) {
  fs::create_directories(dir);
  std::vector<fs::path> written;
  json manifest = bundle.manifest;
  manifest["schema_version"] = kSchemaVersion;
  json files = json::object();
  for (const auto& [name, content] : bundle.files) {
    const fs::path p = dir / name;
    write_file_atomic(p, content);
    files[name] = sha256_hex(content);
    written.push_back(p);
  }
  manifest["files"] = files;
  const fs::path mp = dir / "manifest.json";
  write_file_atomic(mp, manifest.dump(2) + "\n");
  written.push_back(mp);
  return written;
}

}  // namespace epi::dataio
