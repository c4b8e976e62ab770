#include "coalition_shap/data_model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "coalition_shap/errors.hpp"

namespace cshap {
namespace {

using std::chrono::hours;

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (char c : line) {
    if (c == '"') {
      quoted = !quoted;
    } else if (c == ',' && !quoted) {
      fields.push_back(std::move(field));
      field.clear();
    } else if (c != '\r') {
      field.push_back(c);
    }
  }
  fields.push_back(std::move(field));
  return fields;
}

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t");
  return s.substr(first, last - first + 1);
}

Value parse_cell(const std::string& raw, const std::filesystem::path& path, std::size_t line) {
  const auto cell = trim(raw);
  if (cell.empty() || cell == "NaN" || cell == "nan" || cell == "NA" || cell == "null") {
    return std::nullopt;
  }
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc{} || ptr != cell.data() + cell.size()) {
    throw DataError(path.string() + ":" + std::to_string(line) + ": not a number: '" + cell + "'");
  }
  if (!std::isfinite(v)) {
    throw DataError(path.string() + ":" + std::to_string(line) + ": non-finite value '" + cell + "'");
  }
  return v;
}

struct Row {
  std::chrono::sys_seconds time;
  std::vector<Value> cells;
};

std::string format_number(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace

HourlySeries::HourlySeries(std::string name, Timestamp start, std::vector<Value> values, std::string unit)
    : name_(std::move(name)), start_(start), values_(std::move(values)), unit_(std::move(unit)) {
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (values_[i] && !std::isfinite(*values_[i])) {
      throw DataError("series '" + name_ + "': non-finite value at " + format_timestamp(time_at(i)));
    }
  }
}

Value HourlySeries::at(Timestamp t) const {
  if (t < start_ || t >= end()) return std::nullopt;
  return values_[static_cast<std::size_t>((t - start_).count())];
}

HourlySeries HourlySeries::slice(Timestamp from, Timestamp to) const {
  if (from > to || !covers(from, to)) {
    throw DataError("series '" + name_ + "' does not cover [" + format_timestamp(from) + ", " +
                    format_timestamp(to) + ")");
  }
  const auto first = values_.begin() + (from - start_).count();
  return HourlySeries(name_, from, std::vector<Value>(first, first + (to - from).count()), unit_);
}

std::size_t HourlySeries::missing_count() const {
  return static_cast<std::size_t>(
      std::count_if(values_.begin(), values_.end(), [](const Value& v) { return !v; }));
}

Dataset::Dataset(HourlySeries target, std::vector<CovariateSeries> covariates, HolidayCalendar holidays)
    : target_(std::move(target)), covariates_(std::move(covariates)), holidays_(std::move(holidays)) {
  for (const auto& cov : covariates_) {
    if (!cov.series.covers(target_.start(), target_.end())) {
      throw DataError("covariate '" + cov.name() + "' does not cover the target span [" +
                      format_timestamp(target_.start()) + ", " + format_timestamp(target_.end()) + ")");
    }
    if (std::count_if(covariates_.begin(), covariates_.end(),
                      [&](const CovariateSeries& c) { return c.name() == cov.name(); }) > 1) {
      throw DataError("duplicate covariate '" + cov.name() + "'");
    }
  }
}

const CovariateSeries* Dataset::find_covariate(std::string_view name) const {
  for (const auto& cov : covariates_) {
    if (cov.name() == name) return &cov;
  }
  return nullptr;
}

const CovariateSeries& Dataset::covariate(std::string_view name) const {
  if (const auto* cov = find_covariate(name)) return *cov;
  throw DataError("unknown covariate '" + std::string(name) + "'");
}

std::vector<std::string> Dataset::covariate_names() const {
  std::vector<std::string> names;
  for (const auto& cov : covariates_) names.push_back(cov.name());
  return names;
}

Dataset Dataset::slice(Timestamp from, Timestamp to) const {
  std::vector<CovariateSeries> covs;
  for (const auto& cov : covariates_) covs.push_back({cov.series.slice(from, to), cov.future_known});
  return Dataset(target_.slice(from, to), std::move(covs), holidays_);
}

Dataset Dataset::with_covariates(const std::vector<std::string>& names) const {
  std::vector<CovariateSeries> covs;
  for (const auto& name : names) covs.push_back(covariate(name));
  return Dataset(target_, std::move(covs), holidays_);
}

void ForecastTask::validate() const {
  if (context_hours < 1) throw ConfigError("context length must be at least 1 hour");
  if (horizon_hours < 1) throw ConfigError("horizon must be at least 1 hour");
  for (double q : quantiles) {
    if (!(q > 0.0 && q < 1.0)) throw ConfigError("quantile levels must lie in (0, 1)");
  }
}

std::vector<HourlySeries> ingest_csv(const std::filesystem::path& path, const CsvColumns& columns) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line)) throw DataError(path.string() + ": zero usable rows");
  const auto header = split_csv_line(line);
  auto column_index = [&](const std::string& name) {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (trim(header[i]) == name) return i;
    }
    throw DataError(path.string() + ": missing column '" + name + "'");
  };
  const auto ts_col = column_index(columns.timestamp);
  std::vector<std::size_t> value_cols;
  for (const auto& name : columns.values) value_cols.push_back(column_index(name));

  std::vector<Row> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != header.size()) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                      std::to_string(header.size()) + " fields, got " + std::to_string(fields.size()));
    }
    Row row{parse_datetime(fields[ts_col]), {}};
    bool any = false;
    for (auto col : value_cols) {
      row.cells.push_back(parse_cell(fields[col], path, line_no));
      any = any || row.cells.back().has_value();
    }
    if (any) rows.push_back(std::move(row));
  }
  if (rows.empty()) throw DataError(path.string() + ": zero usable rows");

  std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.time < b.time; });
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].time != rows[i - 1].time) continue;
    for (std::size_t c = 0; c < value_cols.size(); ++c) {
      const auto& a = rows[i - 1].cells[c];
      const auto& b = rows[i].cells[c];
      if (a && b && *a != *b) {
        throw DataError(path.string() + ": conflicting duplicate rows at " +
                        format_timestamp(std::chrono::floor<hours>(rows[i].time)) + " for '" +
                        columns.values[c] + "'");
      }
    }
  }

  const Timestamp first = std::chrono::floor<hours>(rows.front().time);
  const Timestamp last = std::chrono::floor<hours>(rows.back().time);
  const auto n = static_cast<std::size_t>((last - first).count()) + 1;
  std::vector<HourlySeries> result;
  for (std::size_t c = 0; c < value_cols.size(); ++c) {
    std::vector<double> sum(n, 0.0);
    std::vector<int> count(n, 0);
    const Row* prev = nullptr;
    for (const auto& row : rows) {
      const bool duplicate = prev != nullptr && prev->time == row.time && prev->cells[c];
      prev = &row;
      if (!row.cells[c] || duplicate) continue;
      const auto idx = static_cast<std::size_t>((std::chrono::floor<hours>(row.time) - first).count());
      sum[idx] += *row.cells[c];
      ++count[idx];
    }
    std::vector<Value> values(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (count[i] > 0) values[i] = sum[i] / count[i];
    }
    const std::string unit = c < columns.units.size() ? columns.units[c] : std::string{};
    result.emplace_back(columns.values[c], first, std::move(values), unit);
  }
  return result;
}

HourlySeries ingest_load_csv(const std::filesystem::path& path, const std::string& value_column,
                             const std::string& series_name) {
  auto series = ingest_csv(path, {"timestamp", {value_column}, {"MW"}});
  const auto& s = series.front();
  return HourlySeries(series_name, s.start(), std::vector<Value>(s.values().begin(), s.values().end()),
                      "MW");
}

HolidayCalendar read_holiday_calendar(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read '" + path.string() + "'");
  HolidayCalendar calendar;
  std::string line;
  while (std::getline(in, line)) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    calendar.insert(parse_date(line));
  }
  return calendar;
}

void write_holiday_calendar(const std::filesystem::path& path, const HolidayCalendar& calendar) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  for (const auto& d : calendar) out << format_date(d) << '\n';
}

void write_canonical_csv(const std::filesystem::path& path, std::span<const HourlySeries> series) {
  if (series.empty()) throw DataError("nothing to write to '" + path.string() + "'");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  Timestamp from = series.front().start();
  Timestamp to = series.front().end();
  out << "timestamp";
  for (const auto& s : series) {
    from = std::min(from, s.start());
    to = std::max(to, s.end());
    out << ',' << s.name();
  }
  out << '\n';
  for (Timestamp t = from; t < to; t += hours{1}) {
    out << format_timestamp(t);
    for (const auto& s : series) {
      out << ',';
      if (const auto v = s.at(t)) out << format_number(*v);
    }
    out << '\n';
  }
}

CovariateSeries build_holiday_covariate(const HolidayCalendar& calendar, Timestamp from, Timestamp to,
                                        const TimeZone& zone, std::string name) {
  std::vector<Value> values;
  values.reserve(static_cast<std::size_t>(std::max<long>(0, (to - from).count())));
  for (Timestamp t = from; t < to; t += hours{1}) {
    const auto local = zone.to_local(t);
    const bool off = weekday_index(local.date) == 0 || calendar.contains(local.date);
    values.emplace_back(off ? 1.0 : 0.0);
  }
  return {HourlySeries(std::move(name), from, std::move(values), "indicator"), true};
}

ContextSlice slice_context(const Dataset& dataset, const ForecastTask& task) {
  task.validate();
  const Timestamp from = task.origin - hours{task.context_hours};
  const Timestamp to = task.origin + hours{task.horizon_hours};
  if (!dataset.target().covers(from, task.origin)) {
    throw DataError("insufficient coverage: target has no context [" + format_timestamp(from) + ", " +
                    format_timestamp(task.origin) + ")");
  }
  ContextSlice slice;
  slice.origin = task.origin;
  slice.horizon_hours = task.horizon_hours;
  const auto target_past = dataset.target().slice(from, task.origin);
  slice.target.assign(target_past.values().begin(), target_past.values().end());
  for (const auto& cov : dataset.covariates()) {
    CovariateSlice cs;
    cs.name = cov.name();
    if (!cov.series.covers(from, task.origin)) {
      throw DataError("insufficient coverage: covariate '" + cov.name() + "' lacks the context window");
    }
    const auto past = cov.series.slice(from, task.origin);
    cs.past.assign(past.values().begin(), past.values().end());
    if (cov.future_known) {
      if (!cov.series.covers(task.origin, to)) {
        throw DataError("insufficient coverage: future-known covariate '" + cov.name() +
                        "' ends before " + format_timestamp(to));
      }
      std::vector<double> future;
      future.reserve(static_cast<std::size_t>(task.horizon_hours));
      for (Timestamp t = task.origin; t < to; t += hours{1}) {
        const auto v = cov.series.at(t);
        if (!v) {
          throw DataError("insufficient coverage: covariate '" + cov.name() + "' missing at " +
                          format_timestamp(t) + " inside the horizon");
        }
        future.push_back(*v);
      }
      cs.future = std::move(future);
    }
    slice.covariates.push_back(std::move(cs));
  }
  return slice;
}

SplitDatasets split(const Dataset& dataset, const SplitSpec& spec) {
  if (!(spec.train_end < spec.val_end && spec.val_end < spec.test_end)) {
    throw DataError("split boundaries must satisfy train_end < val_end < test_end");
  }
  if (spec.train_end <= dataset.start() || spec.test_end > dataset.end()) {
    throw DataError("split boundaries lie outside the dataset span [" + format_timestamp(dataset.start()) +
                    ", " + format_timestamp(dataset.end()) + ")");
  }
  return {dataset.slice(dataset.start(), spec.train_end), dataset.slice(spec.train_end, spec.val_end),
          dataset.slice(spec.val_end, spec.test_end)};
}

}  // namespace cshap
