#include <doctest.h>

#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cli.hpp"
#include "coalition_shap/time.hpp"
#include "fixtures.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using std::chrono::hours;

namespace {

struct Result {
  int code = 0;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  Result r;
  r.code = cshap::cli::run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) out.push_back(line);
  return out;
}

fs::path synthetic_config(const std::string& name, int days = 120) {
  const auto dir = fixture::temp_dir(name);
  fixture::write_text(dir / "config.json", R"({
    "data": {"synthetic": {"seed": 3, "days": )" + std::to_string(days) + R"(, "start": "2024-01-01"}},
    "timezone": "Europe/Berlin",
    "forecaster": "linear",
    "workers": 2,
    "out": "out"
  })");
  return dir;
}

/// Daily-constant temperature T_d and load 100 + 2 T_d.
fs::path oracle_config(const std::string& name) {
  const auto dir = fixture::temp_dir(name);
  std::string load = "timestamp,load_mw\n", weather = "timestamp,temperature_c,irradiance_wm2\n";
  const auto t0 = fixture::at("2024-01-01T00:00:00Z");
  for (int i = 0; i < 24 * 60; ++i) {
    const auto ts = cshap::format_timestamp(t0 + hours{i});
    const int temp = (i / 24 * 7) % 23 - 5;
    load += ts + "," + std::to_string(100 + 2 * temp) + "\n";
    weather += ts + "," + std::to_string(temp) + "," + std::to_string((i % 24) * 10) + "\n";
  }
  fixture::write_text(dir / "load.csv", load);
  fixture::write_text(dir / "weather.csv", weather);
  fixture::write_text(dir / "config.json", R"({
    "data": {"load_csv": "load.csv", "weather_csv": "weather.csv"},
    "forecaster": {"name": "oracle", "oracle": {"intercept": 100, "weights": {"temperature": 2}}},
    "context_hours": 336,
    "out": "out"
  })");
  return dir;
}

}  // namespace

TEST_CASE("ingest writes a manifest with stable hashes") {
  const auto dir = synthetic_config("cli_ingest");
  const auto cfg = (dir / "config.json").string();
  const auto r = run({"--config", cfg, "ingest"});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("1 target + 3 covariates") != std::string::npos);
  const auto manifest = json::parse(fixture::read_text(dir / "out" / "data" / "manifest.json"));
  CHECK(manifest.at("target") == "load");
  CHECK(manifest.at("covariates").size() == 3);
  CHECK(manifest.at("hours") == 120 * 24 - 1);  // spring DST change in Europe/Berlin
  REQUIRE(run({"--config", cfg, "ingest"}).code == 0);
  const auto again = json::parse(fixture::read_text(dir / "out" / "data" / "manifest.json"));
  CHECK(again.at("files") == manifest.at("files"));
}

TEST_CASE("missing source files exit with a data error naming the file") {
  const auto dir = oracle_config("cli_missing");
  fs::remove(dir / "weather.csv");
  const auto r = run({"--config", (dir / "config.json").string(), "ingest"});
  CHECK(r.code == 2);
  CHECK(r.err.find("weather.csv") != std::string::npos);
}

TEST_CASE("a perfect oracle scores zero error") {
  const auto dir = oracle_config("cli_oracle");
  const auto r = run({"--config", (dir / "config.json").string(), "evaluate", "--stride", "24"});
  REQUIRE(r.code == 0);
  const auto rows = lines_of(fixture::read_text(dir / "out" / "metrics.csv"));
  REQUIRE(rows.size() == 2);
  CHECK(rows[0] == "model,stride,mae,rmse,mape,n");
  CHECK(rows[1] == "additive_oracle,24,0,0,0,288");
}

TEST_CASE("context sweeps give one row per context") {
  const auto dir = synthetic_config("cli_sweep", 60);
  const auto r = run({"--config", (dir / "config.json").string(), "evaluate", "--stride", "24", "--forecaster",
                      "seasonal_naive", "--context-sweep", "168,336"});
  REQUIRE(r.code == 0);
  const auto rows = lines_of(fixture::read_text(dir / "out" / "metrics.csv"));
  REQUIRE(rows.size() == 3);
  CHECK(rows[1].starts_with("seasonal_naive_168@168,24,"));
  CHECK(rows[2].starts_with("seasonal_naive_168@336,24,"));
  // Full-input forecasts do not depend on the context beyond the seasonal lag.
  CHECK(rows[1].substr(rows[1].find(",24,")) == rows[2].substr(rows[2].find(",24,")));
  const auto per_lead = lines_of(fixture::read_text(dir / "out" / "metrics_per_lead.csv"));
  CHECK(per_lead.size() == 1 + 2 * 24);
}

TEST_CASE("explain runs 128 evaluations per origin and is reproducible") {
  const auto dir = synthetic_config("cli_explain");
  const auto cfg = (dir / "config.json").string();
  const auto r = run({"--config", cfg, "explain", "--origins", "2024-04-20T22:00:00Z,2024-04-21T22:00:00Z"});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("explained 2 origin(s) with linear: 128 evaluations per explanation (N=7") != std::string::npos);
  CHECK(fs::exists(dir / "out" / "explanations" / "20240420T22.json"));
  CHECK(fs::exists(dir / "out" / "tables" / "20240421T22.json"));
  const auto shap_long = lines_of(fixture::read_text(dir / "out" / "shap_long.csv"));
  CHECK(shap_long.size() == 1 + 2 * 24 * 7);

  const auto other = dir / "again";
  REQUIRE(run({"--config", cfg, "--out", other.string(), "--workers", "1", "explain", "--origins",
               "2024-04-20T22:00:00Z,2024-04-21T22:00:00Z"})
              .code == 0);
  CHECK(fixture::read_text(other / "shap_long.csv") == fixture::read_text(dir / "out" / "shap_long.csv"));
  CHECK(fixture::read_text(other / "explanations" / "20240420T22.json") ==
        fixture::read_text(dir / "out" / "explanations" / "20240420T22.json"));

  SUBCASE("reports") {
    const auto imp = run({"--config", cfg, "report", "importance"});
    REQUIRE(imp.code == 0);
    const auto rows = lines_of(fixture::read_text(dir / "out" / "reports" / "importance.csv"));
    REQUIRE(rows.size() == 8);
    double total = 0.0;
    for (std::size_t i = 1; i < rows.size(); ++i) total += std::stod(rows[i].substr(rows[i].find(',') + 1));
    CHECK(std::abs(total - 100.0) < 1e-6);
    CHECK(fs::exists(dir / "out" / "reports" / "importance.svg"));

    REQUIRE(run({"--config", cfg, "report", "local"}).code == 0);
    const auto local = lines_of(fixture::read_text(dir / "out" / "reports" / "local_2024-04.csv"));
    CHECK(local.size() == 1 + 48);
    CHECK(fs::exists(dir / "out" / "reports" / "local_2024-04.svg"));

    REQUIRE(run({"--config", cfg, "report", "dependence"}).code == 0);
    CHECK(fs::exists(dir / "out" / "reports" / "dependence_temperature_hour.csv"));
    CHECK(fs::exists(dir / "out" / "reports" / "dependence_holiday_day.svg"));
    REQUIRE(run({"--config", cfg, "report", "dependence", "--group", "temperature", "--interaction", "day"}).code == 0);
    CHECK(lines_of(fixture::read_text(dir / "out" / "reports" / "dependence_temperature_day.csv")).size() == 49);
    CHECK(run({"--config", cfg, "report", "dependence", "--group", "last_day"}).code == 2);
  }
}

TEST_CASE("an empty origin list is not an error") {
  const auto dir = synthetic_config("cli_empty", 60);
  const auto r = run({"--config", (dir / "config.json").string(), "explain", "--origins", ","});
  CHECK(r.code == 0);
  CHECK(r.out == "no origins to explain\n");
}

TEST_CASE("exit codes") {
  const auto dir = synthetic_config("cli_codes", 60);
  const auto cfg = (dir / "config.json").string();
  CHECK(run({"--config", cfg}).code == 1);
  CHECK(run({"--config", cfg, "frobnicate"}).code == 1);
  CHECK(run({"--config", (dir / "nope.json").string(), "ingest"}).code == 1);
  CHECK(run({"--config", cfg, "--forecaster", "prophet", "evaluate"}).code == 1);
  CHECK(run({"--config", cfg, "explain", "--origins", "yesterday"}).code == 1);
  CHECK(run({"--config", cfg, "report", "importance"}).code == 2);

  fixture::write_text(dir / "remote.json", R"({
    "data": {"synthetic": {"seed": 3, "days": 60}},
    "forecaster": {"name": "exec:exit 0", "capabilities": {"accepts_missing_target": true}},
    "out": "remote_out"
  })");
  const auto r = run({"--config", (dir / "remote.json").string(), "--context-hours", "168", "explain", "--origins",
                      "2023-02-20T00:00:00Z"});
  CHECK(r.code == 3);
  CHECK(r.err.find("coalition") != std::string::npos);
  CHECK(run({"--config", cfg, "--help"}).code == 0);
}
