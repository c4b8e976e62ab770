#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "coalition_shap/time.hpp"

namespace cshap {

/// A series value; nullopt is the missing marker.
using Value = std::optional<double>;

/// Hourly UTC series. Entry k sits at start() + k hours. Values are finite or
/// missing; the constructor rejects anything else.
class HourlySeries {
 public:
  HourlySeries() = default;
  HourlySeries(std::string name, Timestamp start, std::vector<Value> values, std::string unit = {});

  const std::string& name() const noexcept { return name_; }
  const std::string& unit() const noexcept { return unit_; }
  Timestamp start() const noexcept { return start_; }
  /// One past the last covered hour.
  Timestamp end() const noexcept { return start_ + std::chrono::hours{values_.size()}; }
  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }
  std::span<const Value> values() const noexcept { return values_; }

  Timestamp time_at(std::size_t index) const { return start_ + std::chrono::hours{index}; }
  bool covers(Timestamp from, Timestamp to) const { return from >= start_ && to <= end(); }
  /// Value at `t`; missing when `t` lies outside the series.
  Value at(Timestamp t) const;
  /// Hours [from, to) as a new series; throws DataError when not covered.
  HourlySeries slice(Timestamp from, Timestamp to) const;
  std::size_t missing_count() const;

  friend bool operator==(const HourlySeries&, const HourlySeries&) = default;

 private:
  std::string name_;
  Timestamp start_{};
  std::vector<Value> values_;
  std::string unit_;
};

struct CovariateSeries {
  HourlySeries series;
  /// Known over the forecast horizon (calendar, weather used as forecasts).
  bool future_known = true;

  const std::string& name() const noexcept { return series.name(); }
};

using HolidayCalendar = std::set<LocalDate>;

/// Target load plus covariates. Covariates cover at least the target span.
class Dataset {
 public:
  Dataset() = default;
  Dataset(HourlySeries target, std::vector<CovariateSeries> covariates,
          HolidayCalendar holidays = {});

  const HourlySeries& target() const noexcept { return target_; }
  const std::vector<CovariateSeries>& covariates() const noexcept { return covariates_; }
  const HolidayCalendar& holidays() const noexcept { return holidays_; }

  const CovariateSeries* find_covariate(std::string_view name) const;
  const CovariateSeries& covariate(std::string_view name) const;
  std::vector<std::string> covariate_names() const;

  Timestamp start() const noexcept { return target_.start(); }
  Timestamp end() const noexcept { return target_.end(); }

  /// Restricts every series to [from, to).
  Dataset slice(Timestamp from, Timestamp to) const;
  /// Keeps only the named covariates, in the given order.
  Dataset with_covariates(const std::vector<std::string>& names) const;

 private:
  HourlySeries target_;
  std::vector<CovariateSeries> covariates_;
  HolidayCalendar holidays_;
};

struct ForecastTask {
  Timestamp origin{};  // first forecast hour
  int context_hours = 0;
  int horizon_hours = 24;
  std::vector<double> quantiles{0.5};

  void validate() const;
};

struct SplitSpec {
  Timestamp train_end{};
  Timestamp val_end{};
  Timestamp test_end{};
};

struct SplitDatasets {
  Dataset train;
  Dataset validation;
  Dataset test;
};

/// Past and (optionally) future window of one covariate around an origin.
struct CovariateSlice {
  std::string name;
  std::vector<Value> past;                    // hours [origin - C, origin)
  std::optional<std::vector<double>> future;  // hours [origin, origin + H)
};

struct ContextSlice {
  Timestamp origin{};
  int horizon_hours = 0;
  std::vector<Value> target;  // hours [origin - C, origin)
  std::vector<CovariateSlice> covariates;
};

struct CsvColumns {
  std::string timestamp = "timestamp";
  std::vector<std::string> values;
  std::vector<std::string> units;  // optional, parallel to values
};

/// Reads one or more numeric columns from a CSV with a header row. Sub-hourly
/// rows are averaged into their hour, absent hours become missing markers.
std::vector<HourlySeries> ingest_csv(const std::filesystem::path& path, const CsvColumns& columns);

/// Load CSV (`timestamp,load_mw` by default).
HourlySeries ingest_load_csv(const std::filesystem::path& path,
                             const std::string& value_column = "load_mw",
                             const std::string& series_name = "load");

/// One ISO date per line; blank lines and `#` comments are ignored.
HolidayCalendar read_holiday_calendar(const std::filesystem::path& path);
void write_holiday_calendar(const std::filesystem::path& path, const HolidayCalendar& calendar);

/// Canonical CSV: `timestamp,<series names...>`, empty cell = missing. Values
/// are written in shortest round-trip form. Series may differ in span; the
/// file covers their union.
void write_canonical_csv(const std::filesystem::path& path, std::span<const HourlySeries> series);

/// 1 for every hour of a local Sunday or listed holiday, else 0.
CovariateSeries build_holiday_covariate(const HolidayCalendar& calendar, Timestamp from, Timestamp to,
                                        const TimeZone& zone, std::string name = "holiday");

ContextSlice slice_context(const Dataset& dataset, const ForecastTask& task);

SplitDatasets split(const Dataset& dataset, const SplitSpec& spec);

}  // namespace cshap
