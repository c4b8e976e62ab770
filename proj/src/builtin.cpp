#include "coalition_shap/builtin.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "coalition_shap/errors.hpp"

namespace cshap {

using std::chrono::days;
using std::chrono::hours;

namespace {

constexpr int kUnboundedContext = 1 << 22;

/// Observed value at `t`, if the input carries one.
Value lookup(const MaskedInput& input, Timestamp t) {
  const auto& target = input.target;
  if (target.empty() || t < target.front().time || t > target.back().time) return std::nullopt;
  const auto direct = static_cast<std::size_t>((t - target.front().time).count());
  if (direct < target.size() && target[direct].time == t) return target[direct].value;
  const auto it = std::lower_bound(target.begin(), target.end(), t,
                                   [](const TargetPoint& p, Timestamp x) { return p.time < x; });
  if (it != target.end() && it->time == t) return it->value;
  return std::nullopt;
}

std::optional<double> observed_mean(const MaskedInput& input) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& p : input.target) {
    if (p.value) {
      sum += *p.value;
      ++n;
    }
  }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

MaskedInput full_input(const Dataset& dataset, const ForecastTask& task, const Capabilities& caps) {
  const auto slice = slice_context(dataset, task);
  GroupingSpec everything;
  everything.temporal.push_back({"context", -task.context_hours, -1});
  everything.covariates = dataset.covariate_names();
  auto masked = apply_coalition(slice, everything, Coalition::full(everything.size()), caps, task.quantiles);
  if (std::holds_alternative<BaseSignal>(masked)) {
    throw DataError("no observed load in the context before " + format_timestamp(task.origin));
  }
  return std::get<MaskedInput>(std::move(masked));
}

}  // namespace

// --- day types ----------------------------------------------------------------

DayType day_type(LocalDate date, const HolidayCalendar& holidays) {
  if (holidays.contains(date)) return DayType::kSundayOrHoliday;
  switch (weekday_index(date)) {
    case 0:
      return DayType::kSundayOrHoliday;
    case 6:
      return DayType::kSaturday;
    default:
      return DayType::kWorkday;
  }
}

std::string_view to_string(DayType type) {
  switch (type) {
    case DayType::kWorkday:
      return "workday";
    case DayType::kSaturday:
      return "saturday";
    case DayType::kSundayOrHoliday:
      return "sunday_or_holiday";
  }
  return "unknown";
}

DayTypeBaseline::DayTypeBaseline(HolidayCalendar holidays, TimeZone zone, int max_search_days)
    : holidays_(std::move(holidays)), zone_(std::move(zone)), max_search_days_(max_search_days) {
  if (max_search_days_ < 1) throw ConfigError("baseline search depth must be positive");
}

Capabilities DayTypeBaseline::capabilities() const {
  return {.accepts_missing_target = true,
          .accepts_row_drop = true,
          .accepts_empty_target = false,
          .max_context_hours = kUnboundedContext,
          .deterministic = true,
          .serial_only = false};
}

ForecastOutput DayTypeBaseline::predict(const MaskedInput& input) const {
  ForecastOutput out;
  out.median.reserve(static_cast<std::size_t>(input.horizon_hours));
  for (int k = 0; k < input.horizon_hours; ++k) {
    const Timestamp t = input.origin + hours{k};
    const auto local = zone_.to_local(t);
    const auto type = day_type(local.date, holidays_);
    std::optional<double> value;
    for (int back = 1; back <= max_search_days_ && !value; ++back) {
      const LocalDate candidate = local.date - days{back};
      if (day_type(candidate, holidays_) != type) continue;
      const auto source = zone_.from_local(candidate, local.hour);
      if (!source || *source >= input.origin) continue;
      value = lookup(input, *source);
    }
    if (!value) {
      throw ForecasterError("no observed " + std::string(to_string(type)) + " within " +
                            std::to_string(max_search_days_) + " days before " + format_timestamp(t));
    }
    out.median.push_back(*value);
  }
  return out;
}

ForecastOutput daytype_baseline(const Dataset& dataset, const ForecastTask& task, const TimeZone& zone) {
  DayTypeBaseline baseline(dataset.holidays(), zone);
  return forecast(baseline, full_input(dataset, task, baseline.capabilities()));
}

// --- seasonal naive -------------------------------------------------------------

SeasonalNaive::SeasonalNaive(int period_hours) : period_(period_hours) {
  if (period_ < 1) throw ConfigError("seasonal period must be positive");
}

Capabilities SeasonalNaive::capabilities() const {
  return {.accepts_missing_target = true,
          .accepts_row_drop = true,
          .accepts_empty_target = false,
          .max_context_hours = kUnboundedContext,
          .deterministic = true,
          .serial_only = false};
}

ForecastOutput SeasonalNaive::predict(const MaskedInput& input) const {
  ForecastOutput out;
  for (int k = 0; k < input.horizon_hours; ++k) {
    if (k >= period_) {
      out.median.push_back(out.median[static_cast<std::size_t>(k - period_)]);
      continue;
    }
    const Timestamp source = input.origin + hours{k - period_};
    const auto v = lookup(input, source);
    if (!v) throw ForecasterError("seasonal naive: no observed load at " + format_timestamp(source));
    out.median.push_back(*v);
  }
  return out;
}

ForecastOutput seasonal_naive(const Dataset& dataset, const ForecastTask& task, int period_hours) {
  SeasonalNaive model(period_hours);
  return forecast(model, full_input(dataset, task, model.capabilities()));
}

// --- linear forecaster ----------------------------------------------------------

namespace {

int calendar_width(CalendarFeatures c) {
  switch (c) {
    case CalendarFeatures::kNone:
      return 0;
    case CalendarFeatures::kHourOfDay:
      return 23;
    case CalendarFeatures::kHourOfWeek:
      return 167;
  }
  return 0;
}

std::string_view calendar_key(CalendarFeatures c) {
  switch (c) {
    case CalendarFeatures::kNone:
      return "none";
    case CalendarFeatures::kHourOfDay:
      return "hour_of_day";
    case CalendarFeatures::kHourOfWeek:
      return "hour_of_week";
  }
  return "none";
}

CalendarFeatures calendar_from_key(std::string_view key) {
  if (key == "none") return CalendarFeatures::kNone;
  if (key == "hour_of_day") return CalendarFeatures::kHourOfDay;
  if (key == "hour_of_week") return CalendarFeatures::kHourOfWeek;
  throw ConfigError("unknown calendar feature set '" + std::string(key) + "'");
}

/// Index (1-based, 0 = reference level) of the active calendar dummy.
int calendar_level(CalendarFeatures c, const TimeZone& zone, Timestamp t) {
  if (c == CalendarFeatures::kNone) return 0;
  const auto local = zone.to_local(t);
  if (c == CalendarFeatures::kHourOfDay) return local.hour;
  return static_cast<int>(weekday_index(local.date)) * 24 + local.hour;
}

double transform(const CovariateFeatureSpec& spec, double x) {
  return spec.cold_threshold ? std::min(x - *spec.cold_threshold, 0.0) : x;
}

std::vector<std::string> recipe_feature_names(const FeatureRecipe& recipe) {
  std::vector<std::string> names;
  for (int lag : recipe.target_lags) names.push_back("lag_" + std::to_string(lag));
  const char* prefix = recipe.calendar == CalendarFeatures::kHourOfDay ? "hod_" : "how_";
  for (int i = 1; i <= calendar_width(recipe.calendar); ++i) names.push_back(prefix + std::to_string(i));
  for (const auto& cov : recipe.covariates) {
    for (int lag : cov.lags) names.push_back(cov.name + "@" + std::to_string(lag));
  }
  return names;
}

/// Fills `row` with the training features of hour t; false if any is missing.
bool training_row(const Dataset& data, const FeatureRecipe& recipe, const TimeZone& zone, Timestamp t,
                  std::span<double> row) {
  std::size_t f = 0;
  for (int lag : recipe.target_lags) {
    const auto v = data.target().at(t - hours{lag});
    if (!v) return false;
    row[f++] = *v;
  }
  const int width = calendar_width(recipe.calendar);
  const int level = calendar_level(recipe.calendar, zone, t);
  for (int i = 1; i <= width; ++i) row[f++] = (i == level) ? 1.0 : 0.0;
  for (const auto& spec : recipe.covariates) {
    const auto& series = data.covariate(spec.name).series;
    for (int lag : spec.lags) {
      const auto v = series.at(t - hours{lag});
      if (!v) return false;
      row[f++] = transform(spec, *v);
    }
  }
  return true;
}

void validate_recipe(const FeatureRecipe& recipe) {
  for (int lag : recipe.target_lags) {
    if (lag < 1) throw ConfigError("target lags must be at least 1 hour");
  }
  for (const auto& cov : recipe.covariates) {
    for (int lag : cov.lags) {
      if (lag < 0) throw ConfigError("covariate lags must be non-negative");
    }
  }
}

}  // namespace

nlohmann::json recipe_to_json(const FeatureRecipe& recipe) {
  nlohmann::json covs = nlohmann::json::array();
  for (const auto& c : recipe.covariates) {
    nlohmann::json j = {{"name", c.name}, {"lags", c.lags}};
    if (c.cold_threshold) j["cold_threshold"] = *c.cold_threshold;
    covs.push_back(j);
  }
  return {{"target_lags", recipe.target_lags}, {"calendar", calendar_key(recipe.calendar)}, {"covariates", covs}};
}

FeatureRecipe default_recipe(const std::vector<std::string>& covariates) {
  FeatureRecipe recipe;
  for (const auto& name : covariates) {
    CovariateFeatureSpec spec{name, {0, 24}, std::nullopt};
    if (name == "temperature") spec.cold_threshold = 15.0;
    recipe.covariates.push_back(std::move(spec));
  }
  return recipe;
}

FeatureRecipe recipe_from_json(const nlohmann::json& j) {
  FeatureRecipe recipe;
  recipe.target_lags = j.value("target_lags", recipe.target_lags);
  recipe.calendar = calendar_from_key(j.value("calendar", std::string("hour_of_week")));
  for (const auto& c : j.value("covariates", nlohmann::json::array())) {
    CovariateFeatureSpec spec;
    spec.name = c.at("name").get<std::string>();
    spec.lags = c.value("lags", std::vector<int>{0});
    if (c.contains("cold_threshold")) spec.cold_threshold = c.at("cold_threshold").get<double>();
    recipe.covariates.push_back(std::move(spec));
  }
  validate_recipe(recipe);
  return recipe;
}

LinearCovariateForecaster LinearCovariateForecaster::fit(const Dataset& train, const FeatureRecipe& recipe,
                                                         double ridge_penalty, const TimeZone& zone) {
  validate_recipe(recipe);
  if (!(ridge_penalty >= 0.0)) throw ConfigError("ridge penalty must be non-negative");
  for (const auto& cov : recipe.covariates) train.covariate(cov.name);

  LinearCovariateForecaster model(recipe, zone);
  model.ridge_ = ridge_penalty;
  model.names_ = recipe_feature_names(recipe);
  const auto p = model.names_.size();
  const auto& target = train.target();

  // Pass 1: means over usable rows.
  std::vector<double> row(p);
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p));
  double y_sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < target.size(); ++i) {
    const auto t = target.time_at(i);
    const auto y = target.values()[i];
    if (!y || !training_row(train, recipe, zone, t, row)) continue;
    sum += Eigen::Map<const Eigen::VectorXd>(row.data(), static_cast<Eigen::Index>(p));
    y_sum += *y;
    ++n;
  }
  if (n == 0) throw DataError("linear forecaster: no complete training rows");
  const Eigen::VectorXd mean = sum / static_cast<double>(n);
  const double y_mean = y_sum / static_cast<double>(n);

  // Pass 2: centered normal equations, accumulated block-wise.
  constexpr Eigen::Index kBlock = 2048;
  const auto pi = static_cast<Eigen::Index>(p);
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(pi, pi);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(pi);
  Eigen::MatrixXd block(kBlock, pi);
  Eigen::VectorXd block_y(kBlock);
  Eigen::Index filled = 0;
  auto flush = [&] {
    if (filled == 0) return;
    const auto b = block.topRows(filled);
    gram.selfadjointView<Eigen::Lower>().rankUpdate(b.transpose());
    rhs.noalias() += b.transpose() * block_y.head(filled);
    filled = 0;
  };
  for (std::size_t i = 0; i < target.size(); ++i) {
    const auto t = target.time_at(i);
    const auto y = target.values()[i];
    if (!y || !training_row(train, recipe, zone, t, row)) continue;
    block.row(filled) = Eigen::Map<const Eigen::RowVectorXd>(row.data(), pi) - mean.transpose();
    block_y(filled) = *y - y_mean;
    if (++filled == kBlock) flush();
  }
  flush();
  gram.triangularView<Eigen::StrictlyUpper>() = gram.transpose();
  gram.diagonal().array() += ridge_penalty;

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(pi);
  if (p > 0) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(gram);
    if (ridge_penalty == 0.0) {
      qr.setThreshold(1e-12);
      if (qr.rank() < pi) {
        throw DataError("linear forecaster: singular normal equations (rank " + std::to_string(qr.rank()) +
                        " of " + std::to_string(p) + "); add a ridge penalty");
      }
    }
    beta = qr.solve(rhs);
  }
  model.coefficients_.assign(beta.data(), beta.data() + pi);
  model.means_.assign(mean.data(), mean.data() + pi);
  model.intercept_ = y_mean - mean.dot(beta);
  model.rows_ = n;
  return model;
}

Capabilities LinearCovariateForecaster::capabilities() const {
  return {.accepts_missing_target = true,
          .accepts_row_drop = true,
          .accepts_empty_target = true,
          .max_context_hours = kUnboundedContext,
          .deterministic = true,
          .serial_only = false};
}

double LinearCovariateForecaster::coefficient(std::string_view name) const {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (names_[i] == name) return coefficients_[i];
  }
  throw ConfigError("linear forecaster has no feature '" + std::string(name) + "'");
}

ForecastOutput LinearCovariateForecaster::predict(const MaskedInput& input) const {
  const auto context_mean = observed_mean(input);
  ForecastOutput out;
  out.median.reserve(static_cast<std::size_t>(input.horizon_hours));
  for (int k = 0; k < input.horizon_hours; ++k) {
    const Timestamp t = input.origin + hours{k};
    double y = intercept_;
    std::size_t f = 0;
    for (int lag : recipe_.target_lags) {
      const Timestamp s = t - hours{lag};
      Value v = s < input.origin ? lookup(input, s) : std::nullopt;
      if (!v) v = context_mean;
      y += coefficients_[f] * v.value_or(means_[f]);
      ++f;
    }
    const int width = calendar_width(recipe_.calendar);
    const int level = calendar_level(recipe_.calendar, zone_, t);
    if (level >= 1 && level <= width) y += coefficients_[f + static_cast<std::size_t>(level - 1)];
    f += static_cast<std::size_t>(width);
    for (const auto& spec : recipe_.covariates) {
      const auto* cov = input.find_covariate(spec.name);
      for (int lag : spec.lags) {
        double x = means_[f];
        if (cov != nullptr) {
          const Timestamp s = t - hours{lag};
          if (s >= input.origin) {
            if (cov->future) x = transform(spec, (*cov->future)[static_cast<std::size_t>((s - input.origin).count())]);
          } else {
            const auto back = static_cast<std::size_t>((input.origin - s).count());
            if (back <= cov->past.size() && cov->past[cov->past.size() - back]) {
              x = transform(spec, *cov->past[cov->past.size() - back]);
            }
          }
        }
        y += coefficients_[f] * x;
        ++f;
      }
    }
    out.median.push_back(y);
  }
  return out;
}

void LinearCovariateForecaster::save(const std::filesystem::path& path) const {
  nlohmann::json coefs = nlohmann::json::array();
  for (std::size_t i = 0; i < names_.size(); ++i) {
    coefs.push_back({{"name", names_[i]}, {"value", coefficients_[i]}, {"mean", means_[i]}});
  }
  const nlohmann::json j = {{"kind", "linear_forecaster"},
                            {"version", 1},
                            {"recipe", recipe_to_json(recipe_)},
                            {"timezone", zone_.name()},
                            {"ridge_penalty", ridge_},
                            {"training_rows", rows_},
                            {"intercept", intercept_},
                            {"coefficients", coefs}};
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << j.dump(1) << '\n';
}

LinearCovariateForecaster LinearCovariateForecaster::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read '" + path.string() + "'");
  try {
    const auto j = nlohmann::json::parse(in);
    if (j.at("kind") != "linear_forecaster") throw DataError(path.string() + ": not a linear forecaster file");
    LinearCovariateForecaster model(recipe_from_json(j.at("recipe")), TimeZone(j.at("timezone").get<std::string>()));
    model.ridge_ = j.at("ridge_penalty").get<double>();
    model.rows_ = j.at("training_rows").get<std::size_t>();
    model.intercept_ = j.at("intercept").get<double>();
    model.names_ = recipe_feature_names(model.recipe_);
    const auto& coefs = j.at("coefficients");
    if (coefs.size() != model.names_.size()) throw DataError(path.string() + ": coefficient count mismatch");
    for (std::size_t i = 0; i < coefs.size(); ++i) {
      if (coefs[i].at("name") != model.names_[i]) throw DataError(path.string() + ": coefficient order mismatch");
      model.coefficients_.push_back(coefs[i].at("value").get<double>());
      model.means_.push_back(coefs[i].at("mean").get<double>());
    }
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

// --- additive oracle ------------------------------------------------------------

AdditiveOracle::AdditiveOracle(AdditiveOracleSpec spec, GroupingSpec grouping)
    : spec_(std::move(spec)), grouping_(std::move(grouping)) {
  grouping_.validate();
}

Capabilities AdditiveOracle::capabilities() const {
  return {.accepts_missing_target = true,
          .accepts_row_drop = true,
          .accepts_empty_target = true,
          .max_context_hours = kUnboundedContext,
          .deterministic = true,
          .serial_only = false};
}

double AdditiveOracle::covariate_term(const CovariateInput& cov) const {
  const auto it = spec_.weights.find(cov.name);
  if (it == spec_.weights.end() || it->second == 0.0) return 0.0;
  double sum = 0.0;
  std::size_t n = 0;
  if (cov.future) {
    for (double v : *cov.future) sum += v;
    n = cov.future->size();
  } else {
    for (const auto& v : cov.past) {
      if (v) {
        sum += *v;
        ++n;
      }
    }
  }
  return n == 0 ? 0.0 : it->second * sum / static_cast<double>(n);
}

double AdditiveOracle::temporal_term(const TemporalGroup& group, const MaskedInput& input) const {
  const auto it = spec_.temporal_weights.find(group.name);
  if (it == spec_.temporal_weights.end() || it->second == 0.0) return 0.0;
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& p : input.target) {
    const int offset = -static_cast<int>((input.origin - p.time).count());
    if (p.value && group.contains(offset)) {
      sum += *p.value;
      ++n;
    }
  }
  return n == 0 ? 0.0 : it->second * sum / static_cast<double>(n);
}

ForecastOutput AdditiveOracle::predict(const MaskedInput& input) const {
  double y = spec_.intercept;
  for (const auto& cov : input.covariates) y += covariate_term(cov);
  for (const auto& group : grouping_.temporal) y += temporal_term(group, input);
  return ForecastOutput::constant(y, input.horizon_hours);
}

std::optional<ForecastOutput> AdditiveOracle::empty_input_forecast(const MaskedInput& input) const {
  return ForecastOutput::constant(spec_.intercept, input.horizon_hours);
}

std::map<std::string, double> AdditiveOracle::contributions(const ContextSlice& slice) const {
  auto masked = apply_coalition(slice, grouping_, Coalition::full(grouping_.size()), capabilities());
  std::map<std::string, double> result;
  for (const auto& g : grouping_.temporal) result[g.name] = 0.0;
  for (const auto& c : grouping_.covariates) result[c] = 0.0;
  if (const auto* input = std::get_if<MaskedInput>(&masked)) {
    for (const auto& g : grouping_.temporal) result[g.name] = temporal_term(g, *input);
    for (const auto& c : input->covariates) result[c.name] = covariate_term(c);
  }
  return result;
}

// --- synthetic data -------------------------------------------------------------

double weekly_profile(unsigned weekday, int hour, const PlantedEffects& effects) {
  const double day_shape = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * hour / 24.0));
  const double day_factor = weekday == 0 ? 0.3 : (weekday == 6 ? 0.55 : 1.0);
  return effects.base_load + effects.weekly_amplitude * (2.0 * day_shape * day_factor - 1.0);
}

Dataset generate_synthetic_dataset(std::uint64_t seed, int day_count, const PlantedEffects& effects,
                                   LocalDate start, const TimeZone& zone) {
  if (day_count < 14) throw ConfigError("synthetic datasets need at least 14 days");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> anomaly_noise(0.0, 2.5);
  std::uniform_real_distribution<double> cloud(0.2, 1.0);
  std::uniform_real_distribution<double> load_noise(-1.0, 1.0);

  // Per-day weather state.
  std::vector<double> anomaly(static_cast<std::size_t>(day_count));
  std::vector<double> cloudiness(static_cast<std::size_t>(day_count));
  double a = 0.0;
  for (int d = 0; d < day_count; ++d) {
    a = 0.8 * a + anomaly_noise(rng);
    anomaly[static_cast<std::size_t>(d)] = a;
    cloudiness[static_cast<std::size_t>(d)] = cloud(rng);
  }

  // Isolated Tuesday..Saturday holidays.
  HolidayCalendar holidays;
  if (effects.holidays_per_year > 0) {
    const int wanted = std::max(1, static_cast<int>(std::lround(day_count / 365.0 * effects.holidays_per_year)));
    std::vector<int> candidates;
    for (int d = 1; d + 1 < day_count; ++d) {
      const auto wd = weekday_index(start + days{d});
      if (wd >= 2 && wd <= 6) candidates.push_back(d);
    }
    std::shuffle(candidates.begin(), candidates.end(), rng);
    for (int d : candidates) {
      if (static_cast<int>(holidays.size()) >= wanted) break;
      const LocalDate date = start + days{d};
      if (holidays.contains(date - days{1}) || holidays.contains(date + days{1})) continue;
      holidays.insert(date);
    }
  }

  const Timestamp from = zone.start_of_day(start);
  const Timestamp to = zone.start_of_day(start + days{day_count});
  const auto n = static_cast<std::size_t>((to - from).count());
  std::vector<Value> load(n), temperature(n), irradiance(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Timestamp t = from + hours{i};
    const auto local = zone.to_local(t);
    const auto d = static_cast<std::size_t>(std::clamp<long>((local.date - start).count(), 0, day_count - 1));
    const std::chrono::year_month_day ymd{local.date};
    const auto jan1 = LocalDate{ymd.year() / 1 / 1};
    const double doy = static_cast<double>((local.date - jan1).count());
    const double season = -std::cos(2.0 * std::numbers::pi * (doy - 15.0) / 365.0);  // -1 mid-January
    const double temp = 10.0 + 9.0 * season + 4.0 * std::sin(2.0 * std::numbers::pi * (local.hour - 9) / 24.0) +
                        anomaly[d];
    const double daylight = std::max(0.0, std::sin(std::numbers::pi * (local.hour - 6) / 12.0));
    const double irr = daylight * (550.0 + 250.0 * season) * cloudiness[d];

    double y = weekly_profile(weekday_index(local.date), local.hour, effects);
    y += effects.heating_slope * std::min(temp - effects.heating_threshold, 0.0);
    y += effects.irradiance_slope * irr;
    if (holidays.contains(local.date)) y += effects.holiday_effect;
    y += effects.noise * load_noise(rng);

    load[i] = y;
    temperature[i] = temp;
    irradiance[i] = irr;
  }

  std::vector<CovariateSeries> covariates;
  covariates.push_back({HourlySeries("temperature", from, std::move(temperature), "degC"), true});
  covariates.push_back({HourlySeries("irradiance", from, std::move(irradiance), "W/m2"), true});
  covariates.push_back(build_holiday_covariate(holidays, from, to, zone));
  return Dataset(HourlySeries("load", from, std::move(load), "MW"), std::move(covariates), std::move(holidays));
}

}  // namespace cshap
