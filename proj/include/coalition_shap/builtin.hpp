#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "coalition_shap/data_model.hpp"
#include "coalition_shap/forecaster.hpp"
#include "coalition_shap/masking.hpp"

namespace cshap {

// ---------------------------------------------------------------------------
// Day-type persistence baseline

enum class DayType { kWorkday, kSaturday, kSundayOrHoliday };

/// Listed holidays override the weekday (a holiday Saturday is a holiday).
DayType day_type(LocalDate date, const HolidayCalendar& holidays);
std::string_view to_string(DayType type);

/// Copies, for each forecast hour, the load at the same local hour on the most
/// recent strictly earlier day of the same type that has an observed value.
class DayTypeBaseline : public Forecaster {
 public:
  DayTypeBaseline(HolidayCalendar holidays, TimeZone zone, int max_search_days = 60);

  std::string id() const override { return "daytype_baseline"; }
  Capabilities capabilities() const override;
  ForecastOutput predict(const MaskedInput& input) const override;

  /// Context long enough to reach back max_search_days.
  int required_context_hours() const noexcept { return (max_search_days_ + 2) * 24; }

 private:
  HolidayCalendar holidays_;
  TimeZone zone_;
  int max_search_days_;
};

ForecastOutput daytype_baseline(const Dataset& dataset, const ForecastTask& task, const TimeZone& zone);

// ---------------------------------------------------------------------------
// Seasonal naive

/// output[k] = load at origin + k - period (recursing on its own output when
/// period < horizon).
class SeasonalNaive : public Forecaster {
 public:
  explicit SeasonalNaive(int period_hours = 168);

  std::string id() const override { return "seasonal_naive_" + std::to_string(period_); }
  Capabilities capabilities() const override;
  ForecastOutput predict(const MaskedInput& input) const override;

 private:
  int period_;
};

ForecastOutput seasonal_naive(const Dataset& dataset, const ForecastTask& task, int period_hours = 168);

// ---------------------------------------------------------------------------
// Ridge regression on lags, calendar dummies and covariates

enum class CalendarFeatures { kNone, kHourOfDay, kHourOfWeek };

struct CovariateFeatureSpec {
  std::string name;
  std::vector<int> lags{0};  // hours back from the predicted hour
  /// If set, the feature is min(x - threshold, 0) (heating-degree style).
  std::optional<double> cold_threshold;
};

struct FeatureRecipe {
  std::vector<int> target_lags{24, 168};
  CalendarFeatures calendar = CalendarFeatures::kHourOfWeek;
  std::vector<CovariateFeatureSpec> covariates;
};

/// Lags {24, 168}, hour-of-week dummies, lags {0, 24} of every covariate,
/// temperature as a heating term below 15 degC.
FeatureRecipe default_recipe(const std::vector<std::string>& covariates);
FeatureRecipe recipe_from_json(const nlohmann::json& j);
nlohmann::json recipe_to_json(const FeatureRecipe& recipe);

/// Linear forecaster. Missing or masked target lags fall back to the mean of
/// the observed context (or the training mean when there is none); absent
/// covariates contribute their training mean, i.e. nothing relative to it.
class LinearCovariateForecaster : public Forecaster {
 public:
  /// Rows with a missing target or feature are dropped. Throws DataError when
  /// no row survives or the normal equations are singular.
  static LinearCovariateForecaster fit(const Dataset& train, const FeatureRecipe& recipe, double ridge_penalty,
                                       const TimeZone& zone = TimeZone::utc());
  static LinearCovariateForecaster load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  std::string id() const override { return "linear"; }
  Capabilities capabilities() const override;
  ForecastOutput predict(const MaskedInput& input) const override;

  double intercept() const noexcept { return intercept_; }
  const std::vector<std::string>& feature_names() const noexcept { return names_; }
  const std::vector<double>& coefficients() const noexcept { return coefficients_; }
  /// Coefficient by feature name, e.g. "lag_24", "temperature@0", "how_37".
  double coefficient(std::string_view name) const;
  const FeatureRecipe& recipe() const noexcept { return recipe_; }
  std::size_t training_rows() const noexcept { return rows_; }

 private:
  LinearCovariateForecaster(FeatureRecipe recipe, TimeZone zone) : recipe_(std::move(recipe)), zone_(std::move(zone)) {}

  FeatureRecipe recipe_;
  TimeZone zone_;
  double ridge_ = 0.0;
  double intercept_ = 0.0;
  std::vector<std::string> names_;
  std::vector<double> coefficients_;
  std::vector<double> means_;
  std::size_t rows_ = 0;
};

// ---------------------------------------------------------------------------
// Additive oracle

struct AdditiveOracleSpec {
  double intercept = 0.0;
  std::map<std::string, double> weights;           // covariate -> weight on mean future value
  std::map<std::string, double> temporal_weights;  // window -> weight on mean observed load
};

/// f = intercept + sum_c w_c mean(future_c) + sum_g tw_g mean(load in g),
/// each term present only when its group is. Grouped Shapley values equal the
/// individual terms, which makes this a closed-form test fixture.
class AdditiveOracle : public Forecaster {
 public:
  AdditiveOracle(AdditiveOracleSpec spec, GroupingSpec grouping);

  std::string id() const override { return "additive_oracle"; }
  Capabilities capabilities() const override;
  ForecastOutput predict(const MaskedInput& input) const override;
  std::optional<ForecastOutput> empty_input_forecast(const MaskedInput& input) const override;

  /// Each group's additive term for the full input (group name -> value).
  std::map<std::string, double> contributions(const ContextSlice& slice) const;

 private:
  double covariate_term(const CovariateInput& cov) const;
  double temporal_term(const TemporalGroup& group, const MaskedInput& input) const;

  AdditiveOracleSpec spec_;
  GroupingSpec grouping_;
};

// ---------------------------------------------------------------------------
// Synthetic data with planted effects

struct PlantedEffects {
  double base_load = 7000.0;         // MW
  double weekly_amplitude = 2000.0;  // MW, half range of the weekly profile
  double heating_slope = -50.0;      // MW per degC below the threshold
  double heating_threshold = 15.0;   // degC
  double irradiance_slope = -2.0;    // MW per W/m2
  double holiday_effect = -800.0;    // MW on every hour of a planted holiday
  double noise = 50.0;               // uniform +-noise MW
  int holidays_per_year = 10;
};

/// Load level of the weekly profile. weekday 0 = Sunday, hour in local time.
double weekly_profile(unsigned weekday, int hour, const PlantedEffects& effects);

/// Hourly dataset with covariates "temperature", "irradiance", "holiday".
/// Planted holidays fall on Tuesday..Saturday and are never adjacent to each
/// other. Reproducible for a given seed.
Dataset generate_synthetic_dataset(std::uint64_t seed, int days, const PlantedEffects& effects = {},
                                   LocalDate start = LocalDate{std::chrono::year{2023} / 1 / 2},
                                   const TimeZone& zone = TimeZone::utc());

}  // namespace cshap
