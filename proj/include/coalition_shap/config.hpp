#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "coalition_shap/builtin.hpp"
#include "coalition_shap/data_model.hpp"
#include "coalition_shap/forecaster.hpp"
#include "coalition_shap/masking.hpp"

namespace cshap {

struct SyntheticSource {
  std::uint64_t seed = 0;
  int days = 365;
  LocalDate start{std::chrono::year{2023} / 1 / 2};
  PlantedEffects effects;
};

struct CovariateConfig {
  std::string name;
  bool future_known = true;
};

/// Run configuration, read from a JSON file. Relative paths resolve against
/// the file's directory.
struct RunConfig {
  // data sources: either files or a synthetic generator
  std::filesystem::path load_csv;
  std::string load_column = "load_mw";
  std::filesystem::path weather_csv;
  std::map<std::string, std::string> weather_columns{{"temperature_c", "temperature"},
                                                     {"irradiance_wm2", "irradiance"}};
  std::filesystem::path holidays;
  std::optional<SyntheticSource> synthetic;
  std::vector<CovariateConfig> covariates;  // empty = every available covariate

  std::string timezone = "UTC";
  std::optional<SplitSpec> split;

  std::string forecaster = "linear";
  std::optional<Capabilities> capabilities;  // for exec:/http: forecasters
  std::optional<FeatureRecipe> recipe;  // unset = default recipe over the dataset covariates
  double ridge = 1.0;
  std::optional<AdditiveOracleSpec> oracle;
  int seasonal_period_hours = 168;

  std::optional<int> context_hours;  // unset = forecaster default
  int base_window_hours = 8064;
  std::vector<int> grouping_edges{24, 168, 672};
  std::vector<std::string> grouping_names{"last_day", "short_term", "intermediate", "long_term"};
  bool utc_midnights = false;

  std::filesystem::path out = "out";
  std::uint64_t seed = 0;
  int workers = 0;  // 0 = available parallelism

  /// Throws ConfigError on inconsistent settings.
  void validate() const;
  TimeZone zone() const { return TimeZone(timezone); }
  std::filesystem::path bundle_dir() const { return out / "data"; }
};

RunConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
RunConfig load_config(const std::filesystem::path& path);
nlohmann::json config_to_json(const RunConfig& config);

Capabilities capabilities_from_json(const nlohmann::json& j);
nlohmann::json capabilities_to_json(const Capabilities& caps);
AdditiveOracleSpec oracle_spec_from_json(const nlohmann::json& j);
PlantedEffects planted_effects_from_json(const nlohmann::json& j);

/// Builds the dataset from the configured sources (files or synthetic).
/// Missing files raise DataError naming the file.
Dataset load_sources(const RunConfig& config);

/// Canonical on-disk form written by `ingest`.
struct BundleFile {
  std::string role;  // "target", "covariates", "holidays"
  std::filesystem::path path;
  std::string sha256;
};

struct Bundle {
  std::vector<BundleFile> files;
  std::string target;
  std::vector<CovariateConfig> covariates;
  std::string timezone;
};

/// Writes target.csv, covariates.csv, holidays.txt and manifest.json.
Bundle write_bundle(const std::filesystem::path& dir, const Dataset& dataset, const std::string& timezone);
Dataset read_bundle(const std::filesystem::path& dir);
std::string sha256_file(const std::filesystem::path& path);

/// Train / validation / test; without a configured split the last 20 % of
/// whole days is the test span and the 10 % before it validation.
SplitSpec resolve_split(const RunConfig& config, const Dataset& dataset);

struct ForecasterBundle {
  std::unique_ptr<Forecaster> forecaster;
  int default_context_hours = 1344;  // eight weeks: all four default windows present
  bool remote = false;
};

/// Instantiates the configured forecaster; `linear` is fitted on the training
/// span, `oracle` uses the grouping for `context_hours`.
ForecasterBundle make_forecaster(const RunConfig& config, const std::string& selector, const Dataset& dataset,
                                 const SplitSpec& split, int context_hours);

}  // namespace cshap
