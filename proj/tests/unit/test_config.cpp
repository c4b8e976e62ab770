#include <doctest.h>

#include <nlohmann/json.hpp>

#include "coalition_shap/config.hpp"
#include "coalition_shap/errors.hpp"
#include "fixtures.hpp"

using namespace cshap;
using nlohmann::json;
using std::chrono::hours;

namespace {

/// Three days of hourly load and weather plus one holiday.
std::filesystem::path write_sources(const std::string& name) {
  const auto dir = fixture::temp_dir(name);
  std::string load = "timestamp,load_mw\n", weather = "timestamp,temperature_c,irradiance_wm2\n";
  const auto t0 = fixture::at("2024-05-01T00:00:00Z");
  for (int i = 0; i < 72; ++i) {
    const auto ts = format_timestamp(t0 + hours{i});
    load += ts + "," + std::to_string(5000 + i) + "\n";
    weather += ts + "," + std::to_string(10 + i % 24) + "," + std::to_string(i % 24 > 6 ? 100 : 0) + "\n";
  }
  fixture::write_text(dir / "load.csv", load);
  fixture::write_text(dir / "weather.csv", weather);
  fixture::write_text(dir / "holidays.txt", "# public holidays\n2024-05-01\n");
  fixture::write_text(dir / "config.json", R"({
    "data": {"load_csv": "load.csv", "weather_csv": "weather.csv", "holidays": "holidays.txt"},
    "timezone": "Europe/Berlin",
    "out": "run"
  })");
  return dir;
}

}  // namespace

TEST_CASE("config paths resolve against the config file") {
  const auto dir = write_sources("config_paths");
  const auto c = load_config(dir / "config.json");
  CHECK(c.load_csv == dir / "load.csv");
  CHECK(c.out == dir / "run");
  CHECK(c.bundle_dir() == dir / "run" / "data");
  CHECK(c.timezone == "Europe/Berlin");
  CHECK(c.forecaster == "linear");
  CHECK(c.grouping_edges == std::vector<int>{24, 168, 672});
}

TEST_CASE("config round trip") {
  const auto j = json::parse(R"({
    "data": {"synthetic": {"seed": 4, "days": 90, "start": "2024-01-01", "effects": {"noise": 0}}},
    "covariates": ["temperature", {"name": "holiday", "future_known": true}],
    "timezone": "UTC",
    "split": {"train_end": "2024-02-15T00:00:00Z", "val_end": "2024-03-01T00:00:00Z", "test_end": "2024-03-31T00:00:00Z"},
    "forecaster": {"name": "oracle", "oracle": {"intercept": 10, "weights": {"temperature": 2}}},
    "context_hours": 336,
    "grouping": {"edges": [24, 168], "names": ["recent", "week", "older"]},
    "workers": 2
  })");
  const auto c = config_from_json(j);
  REQUIRE(c.synthetic);
  CHECK(c.synthetic->seed == 4);
  CHECK(c.synthetic->effects.noise == 0.0);
  CHECK(c.covariates.size() == 2);
  REQUIRE(c.oracle);
  CHECK(c.oracle->weights.at("temperature") == 2.0);
  const auto again = config_from_json(config_to_json(c));
  CHECK(config_to_json(again) == config_to_json(c));
  CHECK(again.context_hours == 336);
  CHECK(again.split->val_end == c.split->val_end);
}

TEST_CASE("invalid configs are usage errors") {
  CHECK_THROWS_AS(config_from_json(json::array()), ConfigError);
  auto with = [](const char* extra) {
    auto j = json::parse(R"({"data": {"synthetic": {"days": 30}}})");
    j.update(json::parse(extra));
    return j;
  };
  CHECK_NOTHROW(config_from_json(with("{}")));
  CHECK_THROWS_AS(config_from_json(json::object()), ConfigError);
  CHECK_THROWS_AS(config_from_json(with(R"({"timezone": "Mars/Olympus"})")), ConfigError);
  CHECK_THROWS_AS(config_from_json(with(R"({"context_hours": "long"})")), ConfigError);
  CHECK_THROWS_AS(config_from_json(with(R"({"context_hours": 0})")), ConfigError);
  CHECK_THROWS_AS(config_from_json(with(R"({"grouping": {"edges": [24, 168], "names": ["a"]}})")), ConfigError);
  CHECK_THROWS_AS(config_from_json(with(R"({"forecaster": "exec:cat"})")), ConfigError);
  CHECK_THROWS_AS(load_config(fixture::temp_dir("no_config") / "missing.json"), ConfigError);
}

TEST_CASE("sources load with the holiday indicator") {
  const auto dir = write_sources("config_sources");
  const auto c = load_config(dir / "config.json");
  const auto data = load_sources(c);
  CHECK(data.target().size() == 72);
  CHECK(data.covariate_names() == std::vector<std::string>{"temperature", "irradiance", "holiday"});
  // Local 2024-05-01 ends at 22:00Z.
  CHECK(*data.covariate("holiday").series.at(fixture::at("2024-05-01T21:00:00Z")) == 1.0);
  CHECK(*data.covariate("holiday").series.at(fixture::at("2024-05-01T22:00:00Z")) == 0.0);
}

TEST_CASE("missing source files are data errors naming the file") {
  const auto dir = write_sources("config_missing");
  std::filesystem::remove(dir / "weather.csv");
  const auto c = load_config(dir / "config.json");
  try {
    load_sources(c);
    FAIL("expected a data error");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("weather.csv") != std::string::npos);
  }
}

TEST_CASE("bundles round trip and detect tampering") {
  const auto dir = write_sources("config_bundle");
  const auto c = load_config(dir / "config.json");
  const auto data = load_sources(c);
  const auto bundle = write_bundle(c.bundle_dir(), data, c.timezone);
  REQUIRE(bundle.files.size() == 3);
  CHECK(bundle.covariates.size() == 3);
  const auto back = read_bundle(c.bundle_dir());
  CHECK(back.target() == data.target());
  CHECK(back.covariate_names() == data.covariate_names());
  for (const auto& name : data.covariate_names()) CHECK(back.covariate(name).series.values().size() == 72);
  CHECK(back.holidays() == data.holidays());

  const auto manifest = json::parse(fixture::read_text(c.bundle_dir() / "manifest.json"));
  CHECK(manifest.at("hours") == 72);
  CHECK(manifest.at("files")[0].at("sha256") == sha256_file(c.bundle_dir() / "target.csv"));

  const auto again = write_bundle(c.bundle_dir(), data, c.timezone);
  for (std::size_t i = 0; i < 3; ++i) CHECK(again.files[i].sha256 == bundle.files[i].sha256);

  fixture::write_text(c.bundle_dir() / "target.csv", fixture::read_text(c.bundle_dir() / "target.csv") + "\n");
  CHECK_THROWS_AS(read_bundle(c.bundle_dir()), DataError);
}

TEST_CASE("sha256 of a known string") {
  const auto dir = fixture::temp_dir("sha");
  fixture::write_text(dir / "abc.txt", "abc");
  CHECK(sha256_file(dir / "abc.txt") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("default split") {
  const auto data = generate_synthetic_dataset(1, 100);
  RunConfig c;
  const auto s = resolve_split(c, data);
  CHECK(s.test_end == data.end());
  CHECK(s.val_end == data.end() - hours{20 * 24});
  CHECK(s.train_end == s.val_end - hours{10 * 24});
  c.split = SplitSpec{data.start(), data.start() + hours{10}, data.end() + hours{1}};
  CHECK_THROWS_AS(resolve_split(c, data), DataError);
}

TEST_CASE("forecaster selection") {
  const auto data = generate_synthetic_dataset(1, 60);
  RunConfig c;
  const auto split = resolve_split(c, data);
  CHECK(make_forecaster(c, "linear", data, split, 0).forecaster->id() == "linear");
  const auto baseline = make_forecaster(c, "daytype_baseline", data, split, 0);
  CHECK(baseline.default_context_hours == 62 * 24);
  CHECK(make_forecaster(c, "seasonal_naive", data, split, 0).forecaster->id() == "seasonal_naive_168");
  CHECK_THROWS_AS(make_forecaster(c, "oracle", data, split, 0), ConfigError);
  CHECK_THROWS_AS(make_forecaster(c, "exec:cat", data, split, 0), ConfigError);
  CHECK_THROWS_AS(make_forecaster(c, "prophet", data, split, 0), ConfigError);
  c.oracle = AdditiveOracleSpec{1.0, {}, {}};
  CHECK(make_forecaster(c, "oracle", data, split, 0).forecaster->id() == "additive_oracle");
}
