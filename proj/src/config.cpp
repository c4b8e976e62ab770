#include "coalition_shap/config.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <fstream>
#include <set>

#include <openssl/evp.h>
#include <nlohmann/json.hpp>

#include "coalition_shap/errors.hpp"
#include "coalition_shap/wire.hpp"

namespace cshap {

namespace fs = std::filesystem;
using nlohmann::json;
using std::chrono::hours;

namespace {

fs::path resolve(const fs::path& base, const std::string& p) {
  if (p.empty()) return {};
  fs::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

template <typename T>
T get(const json& j, const char* key, T fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

void require_file(const fs::path& path, const char* what) {
  if (!fs::is_regular_file(path)) throw DataError(std::string(what) + " file not found: " + path.string());
}

HourlySeries renamed(const HourlySeries& s, const std::string& name) {
  return HourlySeries(name, s.start(), std::vector<Value>(s.values().begin(), s.values().end()), s.unit());
}

HourlySeries clipped(const HourlySeries& s, Timestamp from, Timestamp to) {
  if (!s.covers(from, to)) {
    throw DataError("series '" + s.name() + "' covers " + format_timestamp(s.start()) + " .. " +
                    format_timestamp(s.end()) + " but the load needs " + format_timestamp(from) + " .. " +
                    format_timestamp(to));
  }
  return s.slice(from, to);
}

Dataset apply_covariate_selection(const Dataset& dataset, const std::vector<CovariateConfig>& selection) {
  if (selection.empty()) return dataset;
  std::vector<CovariateSeries> covariates;
  for (const auto& c : selection) {
    auto cov = dataset.covariate(c.name);
    cov.future_known = c.future_known;
    covariates.push_back(std::move(cov));
  }
  return Dataset(dataset.target(), std::move(covariates), dataset.holidays());
}

}  // namespace

void RunConfig::validate() const {
  if (!synthetic && load_csv.empty()) throw ConfigError("config needs data.load_csv or data.synthetic");
  if (synthetic && synthetic->days < 14) throw ConfigError("synthetic data needs at least 14 days");
  if (forecaster.empty()) throw ConfigError("no forecaster selected");
  if (is_remote_selector(forecaster) && !capabilities) {
    throw ConfigError("external forecaster '" + forecaster + "' needs a capabilities block");
  }
  if (capabilities) capabilities->validate();
  if (context_hours && *context_hours < 1) throw ConfigError("context_hours must be positive");
  if (capabilities && context_hours && *context_hours > capabilities->max_context_hours) {
    throw ConfigError("context_hours " + std::to_string(*context_hours) + " exceeds the forecaster maximum of " +
                      std::to_string(capabilities->max_context_hours));
  }
  if (base_window_hours < 1) throw ConfigError("base_window_hours must be positive");
  if (!(ridge >= 0.0)) throw ConfigError("ridge must be non-negative");
  if (seasonal_period_hours < 1) throw ConfigError("seasonal period must be positive");
  if (grouping_names.size() != grouping_edges.size() + 1) {
    throw ConfigError("grouping needs one more window name than edges");
  }
  if (workers < 0) throw ConfigError("workers must be non-negative");
  if (split && !(split->train_end < split->val_end && split->val_end < split->test_end)) {
    throw ConfigError("split boundaries must be increasing");
  }
  TimeZone check(timezone);
}

Capabilities capabilities_from_json(const json& j) {
  Capabilities caps;
  caps.accepts_missing_target = get(j, "accepts_missing_target", caps.accepts_missing_target);
  caps.accepts_row_drop = get(j, "accepts_row_drop", caps.accepts_row_drop);
  caps.accepts_empty_target = get(j, "accepts_empty_target", caps.accepts_empty_target);
  caps.max_context_hours = get(j, "max_context_hours", caps.max_context_hours);
  caps.deterministic = get(j, "deterministic", caps.deterministic);
  caps.serial_only = get(j, "serial_only", caps.serial_only);
  caps.validate();
  return caps;
}

json capabilities_to_json(const Capabilities& caps) {
  return {{"accepts_missing_target", caps.accepts_missing_target},
          {"accepts_row_drop", caps.accepts_row_drop},
          {"accepts_empty_target", caps.accepts_empty_target},
          {"max_context_hours", caps.max_context_hours},
          {"deterministic", caps.deterministic},
          {"serial_only", caps.serial_only}};
}

AdditiveOracleSpec oracle_spec_from_json(const json& j) {
  AdditiveOracleSpec spec;
  spec.intercept = get(j, "intercept", 0.0);
  spec.weights = get(j, "weights", std::map<std::string, double>{});
  spec.temporal_weights = get(j, "temporal_weights", std::map<std::string, double>{});
  return spec;
}

PlantedEffects planted_effects_from_json(const json& j) {
  PlantedEffects e;
  e.base_load = get(j, "base_load", e.base_load);
  e.weekly_amplitude = get(j, "weekly_amplitude", e.weekly_amplitude);
  e.heating_slope = get(j, "heating_slope", e.heating_slope);
  e.heating_threshold = get(j, "heating_threshold", e.heating_threshold);
  e.irradiance_slope = get(j, "irradiance_slope", e.irradiance_slope);
  e.holiday_effect = get(j, "holiday_effect", e.holiday_effect);
  e.noise = get(j, "noise", e.noise);
  e.holidays_per_year = get(j, "holidays_per_year", e.holidays_per_year);
  return e;
}

RunConfig config_from_json(const json& j, const fs::path& base_dir) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  RunConfig c;
  try {
    const json data = j.value("data", json::object());
    c.load_csv = resolve(base_dir, get(data, "load_csv", std::string{}));
    c.load_column = get(data, "load_column", c.load_column);
    c.weather_csv = resolve(base_dir, get(data, "weather_csv", std::string{}));
    c.weather_columns = get(data, "weather_columns", c.weather_columns);
    c.holidays = resolve(base_dir, get(data, "holidays", std::string{}));
    if (data.contains("synthetic")) {
      const auto& s = data.at("synthetic");
      SyntheticSource src;
      src.seed = get(s, "seed", get<std::uint64_t>(j, "seed", 0));
      src.days = get(s, "days", src.days);
      if (s.contains("start")) src.start = parse_date(s.at("start").get<std::string>());
      src.effects = planted_effects_from_json(s.value("effects", json::object()));
      c.synthetic = src;
    }
    for (const auto& cov : j.value("covariates", json::array())) {
      if (cov.is_string()) {
        c.covariates.push_back({cov.get<std::string>(), true});
      } else {
        c.covariates.push_back({cov.at("name").get<std::string>(), get(cov, "future_known", true)});
      }
    }
    c.timezone = get(j, "timezone", c.timezone);
    if (j.contains("split")) {
      const auto& s = j.at("split");
      c.split = SplitSpec{parse_timestamp(s.at("train_end").get<std::string>()),
                          parse_timestamp(s.at("val_end").get<std::string>()),
                          parse_timestamp(s.at("test_end").get<std::string>())};
    }
    const json f = j.contains("forecaster") && j.at("forecaster").is_string()
                       ? json{{"name", j.at("forecaster")}}
                       : j.value("forecaster", json::object());
    c.forecaster = get(f, "name", c.forecaster);
    if (f.contains("capabilities")) c.capabilities = capabilities_from_json(f.at("capabilities"));
    if (f.contains("recipe")) c.recipe = recipe_from_json(f.at("recipe"));
    c.ridge = get(f, "ridge", c.ridge);
    if (f.contains("oracle")) c.oracle = oracle_spec_from_json(f.at("oracle"));
    c.seasonal_period_hours = get(f, "period_hours", c.seasonal_period_hours);

    if (j.contains("context_hours")) c.context_hours = j.at("context_hours").get<int>();
    c.base_window_hours = get(j, "base_window_hours", c.base_window_hours);
    if (j.contains("grouping")) {
      const auto& g = j.at("grouping");
      c.grouping_edges = get(g, "edges", c.grouping_edges);
      c.grouping_names = get(g, "names", c.grouping_names);
    }
    c.utc_midnights = get(j, "utc_midnights", c.utc_midnights);
    c.out = resolve(base_dir, get(j, "out", std::string("out")));
    c.seed = get<std::uint64_t>(j, "seed", 0);
    c.workers = get(j, "workers", c.workers);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  } catch (const DataError& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  c.validate();
  return c;
}

RunConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return config_from_json(j, path.parent_path());
}

json config_to_json(const RunConfig& c) {
  json data = json::object();
  if (!c.load_csv.empty()) data["load_csv"] = c.load_csv.string();
  data["load_column"] = c.load_column;
  if (!c.weather_csv.empty()) data["weather_csv"] = c.weather_csv.string();
  data["weather_columns"] = c.weather_columns;
  if (!c.holidays.empty()) data["holidays"] = c.holidays.string();
  if (c.synthetic) {
    const auto& e = c.synthetic->effects;
    data["synthetic"] = {{"seed", c.synthetic->seed},
                         {"days", c.synthetic->days},
                         {"start", format_date(c.synthetic->start)},
                         {"effects",
                          {{"base_load", e.base_load},
                           {"weekly_amplitude", e.weekly_amplitude},
                           {"heating_slope", e.heating_slope},
                           {"heating_threshold", e.heating_threshold},
                           {"irradiance_slope", e.irradiance_slope},
                           {"holiday_effect", e.holiday_effect},
                           {"noise", e.noise},
                           {"holidays_per_year", e.holidays_per_year}}}};
  }
  json covs = json::array();
  for (const auto& cov : c.covariates) covs.push_back({{"name", cov.name}, {"future_known", cov.future_known}});
  json f = {{"name", c.forecaster}, {"ridge", c.ridge}, {"period_hours", c.seasonal_period_hours}};
  if (c.capabilities) f["capabilities"] = capabilities_to_json(*c.capabilities);
  if (c.recipe) f["recipe"] = recipe_to_json(*c.recipe);
  if (c.oracle) {
    f["oracle"] = {{"intercept", c.oracle->intercept},
                   {"weights", c.oracle->weights},
                   {"temporal_weights", c.oracle->temporal_weights}};
  }
  json j = {{"data", data},
            {"covariates", covs},
            {"timezone", c.timezone},
            {"forecaster", f},
            {"base_window_hours", c.base_window_hours},
            {"grouping", {{"edges", c.grouping_edges}, {"names", c.grouping_names}}},
            {"utc_midnights", c.utc_midnights},
            {"out", c.out.string()},
            {"seed", c.seed},
            {"workers", c.workers}};
  if (c.context_hours) j["context_hours"] = *c.context_hours;
  if (c.split) {
    j["split"] = {{"train_end", format_timestamp(c.split->train_end)},
                  {"val_end", format_timestamp(c.split->val_end)},
                  {"test_end", format_timestamp(c.split->test_end)}};
  }
  return j;
}

Dataset load_sources(const RunConfig& config) {
  const auto zone = config.zone();
  Dataset dataset;
  if (config.synthetic) {
    const auto& s = *config.synthetic;
    dataset = generate_synthetic_dataset(s.seed, s.days, s.effects, s.start, zone);
  } else {
    require_file(config.load_csv, "load");
    auto load = ingest_load_csv(config.load_csv, config.load_column, "load");
    const auto from = load.start();
    const auto to = load.end();
    std::vector<CovariateSeries> covariates;
    if (!config.weather_csv.empty()) {
      require_file(config.weather_csv, "weather");
      CsvColumns columns;
      for (const auto& [column, _] : config.weather_columns) columns.values.push_back(column);
      auto weather = ingest_csv(config.weather_csv, columns);
      for (std::size_t i = 0; i < weather.size(); ++i) {
        const auto& name = config.weather_columns.at(columns.values[i]);
        covariates.push_back({clipped(renamed(weather[i], name), from, to), true});
      }
      // Reverse alphabetical: temperature before irradiance.
      std::sort(covariates.begin(), covariates.end(),
                [](const CovariateSeries& a, const CovariateSeries& b) { return a.name() > b.name(); });
    }
    HolidayCalendar holidays;
    if (!config.holidays.empty()) {
      require_file(config.holidays, "holiday");
      holidays = read_holiday_calendar(config.holidays);
      covariates.push_back(build_holiday_covariate(holidays, from, to, zone));
    }
    dataset = Dataset(std::move(load), std::move(covariates), std::move(holidays));
  }
  return apply_covariate_selection(dataset, config.covariates);
}

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) throw DataError("SHA-256 unavailable");
  std::array<char, 1 << 16> buf{};
  while (in) {
    in.read(buf.data(), buf.size());
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), digest.data(), &len);
  std::string hex;
  for (unsigned i = 0; i < len; ++i) {
    char byte[3];
    std::snprintf(byte, sizeof byte, "%02x", digest[i]);
    hex += byte;
  }
  return hex;
}

Bundle write_bundle(const fs::path& dir, const Dataset& dataset, const std::string& timezone) {
  fs::create_directories(dir);
  Bundle bundle;
  bundle.target = dataset.target().name();
  bundle.timezone = timezone;

  const std::array<HourlySeries, 1> target{dataset.target()};
  write_canonical_csv(dir / "target.csv", target);
  std::vector<HourlySeries> covs;
  for (const auto& c : dataset.covariates()) {
    covs.push_back(c.series);
    bundle.covariates.push_back({c.name(), c.future_known});
  }
  write_canonical_csv(dir / "covariates.csv", covs);
  write_holiday_calendar(dir / "holidays.txt", dataset.holidays());

  json files = json::array();
  for (const auto& [role, name] : {std::pair{"target", "target.csv"}, std::pair{"covariates", "covariates.csv"},
                                   std::pair{"holidays", "holidays.txt"}}) {
    bundle.files.push_back({role, name, sha256_file(dir / name)});
    files.push_back({{"role", role}, {"path", name}, {"sha256", bundle.files.back().sha256}});
  }
  json covariates = json::array();
  for (std::size_t i = 0; i < bundle.covariates.size(); ++i) {
    const auto& c = bundle.covariates[i];
    covariates.push_back({{"name", c.name}, {"future_known", c.future_known}, {"unit", covs[i].unit()}});
  }
  const json manifest = {{"kind", "dataset_bundle"},
                         {"target", bundle.target},
                         {"target_unit", dataset.target().unit()},
                         {"covariates", covariates},
                         {"timezone", timezone},
                         {"start", format_timestamp(dataset.start())},
                         {"end", format_timestamp(dataset.end())},
                         {"hours", dataset.target().size()},
                         {"missing_target_hours", dataset.target().missing_count()},
                         {"files", files}};
  std::ofstream out(dir / "manifest.json");
  out << manifest.dump(2) << '\n';
  if (!out) throw DataError("cannot write " + (dir / "manifest.json").string());
  return bundle;
}

Dataset read_bundle(const fs::path& dir) {
  const auto manifest_path = dir / "manifest.json";
  require_file(manifest_path, "manifest");
  json manifest;
  try {
    std::ifstream in(manifest_path);
    manifest = json::parse(in);
  } catch (const json::exception& e) {
    throw DataError("manifest " + manifest_path.string() + " is not valid JSON: " + e.what());
  }
  for (const auto& f : manifest.at("files")) {
    const auto path = dir / f.at("path").get<std::string>();
    require_file(path, f.at("role").get<std::string>().c_str());
    if (sha256_file(path) != f.at("sha256").get<std::string>()) {
      throw DataError("content hash mismatch for " + path.string());
    }
  }
  const auto target_name = manifest.at("target").get<std::string>();
  auto target = ingest_csv(dir / "target.csv",
                           CsvColumns{"timestamp", {target_name}, {manifest.value("target_unit", std::string{})}})
                    .front();
  CsvColumns columns;
  std::vector<bool> future_known;
  for (const auto& c : manifest.at("covariates")) {
    columns.values.push_back(c.at("name").get<std::string>());
    future_known.push_back(c.value("future_known", true));
    columns.units.push_back(c.value("unit", std::string{}));
  }
  std::vector<CovariateSeries> covariates;
  if (!columns.values.empty()) {
    auto series = ingest_csv(dir / "covariates.csv", columns);
    for (std::size_t i = 0; i < series.size(); ++i) {
      covariates.push_back({clipped(series[i], target.start(), target.end()), future_known[i]});
    }
  }
  auto holidays = read_holiday_calendar(dir / "holidays.txt");
  return Dataset(std::move(target), std::move(covariates), std::move(holidays));
}

SplitSpec resolve_split(const RunConfig& config, const Dataset& dataset) {
  if (config.split) {
    const auto& s = *config.split;
    if (s.train_end <= dataset.start() || s.test_end > dataset.end()) {
      throw DataError("split boundaries fall outside the data " + format_timestamp(dataset.start()) + " .. " +
                      format_timestamp(dataset.end()));
    }
    return s;
  }
  const auto days = (dataset.end() - dataset.start()).count() / 24;
  if (days < 3) throw DataError("too little data for a default split");
  const auto test_days = std::max<long>(1, days / 5);
  const auto val_days = std::max<long>(1, days / 10);
  SplitSpec s;
  s.test_end = dataset.start() + hours{days * 24};
  s.val_end = s.test_end - hours{test_days * 24};
  s.train_end = s.val_end - hours{val_days * 24};
  return s;
}

ForecasterBundle make_forecaster(const RunConfig& config, const std::string& selector, const Dataset& dataset,
                                 const SplitSpec& split, int context_hours) {
  ForecasterBundle b;
  if (is_remote_selector(selector)) {
    if (!config.capabilities) throw ConfigError("external forecaster '" + selector + "' needs a capabilities block");
    b.forecaster = make_remote_forecaster(selector, *config.capabilities);
    b.remote = true;
  } else if (selector == "daytype_baseline" || selector == "baseline") {
    auto f = std::make_unique<DayTypeBaseline>(dataset.holidays(), config.zone());
    b.default_context_hours = f->required_context_hours();
    b.forecaster = std::move(f);
  } else if (selector == "seasonal_naive") {
    b.forecaster = std::make_unique<SeasonalNaive>(config.seasonal_period_hours);
    b.default_context_hours = std::max(b.default_context_hours, config.seasonal_period_hours);
  } else if (selector == "linear") {
    const auto recipe = config.recipe ? *config.recipe : default_recipe(dataset.covariate_names());
    b.forecaster = std::make_unique<LinearCovariateForecaster>(LinearCovariateForecaster::fit(
        dataset.slice(dataset.start(), split.train_end), recipe, config.ridge, config.zone()));
  } else if (selector == "oracle" || selector == "additive_oracle") {
    if (!config.oracle) throw ConfigError("forecaster 'oracle' needs an oracle block");
    const int c = context_hours > 0 ? context_hours : b.default_context_hours;
    auto grouping = make_grouping(config.grouping_edges, config.grouping_names, dataset.covariate_names(), c);
    b.forecaster = std::make_unique<AdditiveOracle>(*config.oracle, std::move(grouping));
  } else {
    throw ConfigError("unknown forecaster '" + selector +
                      "' (expected daytype_baseline, seasonal_naive, linear, oracle, exec:CMD or http:URL)");
  }
  const int c = context_hours > 0 ? context_hours : b.default_context_hours;
  const auto caps = b.forecaster->capabilities();
  if (c > caps.max_context_hours) {
    throw ConfigError("context of " + std::to_string(c) + " h exceeds the forecaster maximum of " +
                      std::to_string(caps.max_context_hours) + " h");
  }
  return b;
}

}  // namespace cshap
