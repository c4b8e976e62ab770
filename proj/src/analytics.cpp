#include "coalition_shap/analytics.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <mutex>
#include <thread>

#include "coalition_shap/errors.hpp"
#include "coalition_shap/masking.hpp"

namespace cshap {

using std::chrono::hours;

namespace {

std::string number(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

struct ErrorSums {
  double abs = 0.0;
  double sq = 0.0;
  double pct = 0.0;
  std::size_t n = 0;
  std::size_t skipped = 0;

  void add(Value actual, double predicted) {
    if (!actual) {
      ++skipped;
      return;
    }
    if (*actual == 0.0) throw DataError("MAPE undefined: actual value is zero");
    const double e = *actual - predicted;
    abs += std::abs(e);
    sq += e * e;
    pct += std::abs(e / *actual);
    ++n;
  }

  MetricReport report() const {
    if (n == 0) return {0.0, 0.0, 0.0, 0, skipped};
    const auto dn = static_cast<double>(n);
    return {abs / dn, std::sqrt(sq / dn), 100.0 * pct / dn, n, skipped};
  }
};

}  // namespace

MetricReport score(std::span<const Value> actual, std::span<const double> predicted) {
  if (actual.size() != predicted.size()) {
    throw DataError("metric inputs differ in length: " + std::to_string(actual.size()) + " vs " +
                    std::to_string(predicted.size()));
  }
  ErrorSums sums;
  for (std::size_t i = 0; i < actual.size(); ++i) sums.add(actual[i], predicted[i]);
  if (sums.n == 0) throw DataError("no observed actuals to score");
  return sums.report();
}

MetricReport score(std::span<const double> actual, std::span<const double> predicted) {
  std::vector<Value> values(actual.begin(), actual.end());
  return score(values, predicted);
}

double mae(std::span<const double> actual, std::span<const double> predicted) {
  if (actual.size() != predicted.size() || actual.empty()) throw DataError("MAE needs equal, non-empty inputs");
  double sum = 0.0;
  for (std::size_t i = 0; i < actual.size(); ++i) sum += std::abs(actual[i] - predicted[i]);
  return sum / static_cast<double>(actual.size());
}

double rmse(std::span<const double> actual, std::span<const double> predicted) {
  if (actual.size() != predicted.size() || actual.empty()) throw DataError("RMSE needs equal, non-empty inputs");
  double sum = 0.0;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    const double e = actual[i] - predicted[i];
    sum += e * e;
  }
  return std::sqrt(sum / static_cast<double>(actual.size()));
}

double mape(std::span<const double> actual, std::span<const double> predicted) {
  if (actual.size() != predicted.size() || actual.empty()) throw DataError("MAPE needs equal, non-empty inputs");
  double sum = 0.0;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    if (actual[i] == 0.0) throw DataError("MAPE undefined: actual value is zero");
    sum += std::abs((actual[i] - predicted[i]) / actual[i]);
  }
  return 100.0 * sum / static_cast<double>(actual.size());
}

RollingResult rolling_evaluation(const Dataset& dataset, const Forecaster& forecaster, const RollingOptions& options) {
  if (options.stride_hours < 1) throw ConfigError("stride must be at least 1 hour");
  if (options.horizon_hours < 1) throw ConfigError("horizon must be at least 1 hour");
  if (options.to - options.from < hours{options.horizon_hours}) {
    throw DataError("evaluation span is shorter than the horizon");
  }
  std::vector<Timestamp> origins;
  for (Timestamp t = options.from; t + hours{options.horizon_hours} <= options.to; t += hours{options.stride_hours}) {
    origins.push_back(t);
  }

  const auto caps = forecaster.capabilities();
  caps.validate();
  GroupingSpec whole;
  whole.temporal.push_back({"context", -options.context_hours, -1});
  whole.covariates = dataset.covariate_names();
  const auto all = Coalition::full(whole.size());
  const auto h = static_cast<std::size_t>(options.horizon_hours);

  std::vector<std::vector<double>> predictions(origins.size());
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::mutex error_mutex;
  std::optional<Error> error;

  auto worker = [&] {
    while (!failed.load(std::memory_order_relaxed)) {
      const auto i = next.fetch_add(1);
      if (i >= origins.size()) return;
      try {
        ForecastTask task{origins[i], options.context_hours, options.horizon_hours, {0.5}};
        auto masked = apply_coalition(slice_context(dataset, task), whole, all, caps);
        if (std::holds_alternative<BaseSignal>(masked)) {
          throw DataError("no usable input");
        }
        predictions[i] = forecast(forecaster, std::get<MaskedInput>(masked)).median;
      } catch (const std::exception& e) {
        std::lock_guard lock(error_mutex);
        if (!failed.exchange(true)) {
          const auto* ce = dynamic_cast<const Error*>(&e);
          error.emplace(ce ? ce->kind() : ErrorKind::kForecaster,
                        "origin " + format_timestamp(origins[i]) + ": " + e.what());
        }
      }
    }
  };
  const int workers = caps.serial_only ? 1 : std::max(1, options.workers);
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  if (error) throw *error;

  ErrorSums pooled;
  std::vector<ErrorSums> per_lead(h);
  const auto& target = dataset.target();
  for (std::size_t i = 0; i < origins.size(); ++i) {
    for (std::size_t k = 0; k < h; ++k) {
      const auto actual = target.at(origins[i] + hours{k});
      pooled.add(actual, predictions[i][k]);
      per_lead[k].add(actual, predictions[i][k]);
    }
  }
  if (pooled.n == 0) throw DataError("no observed actuals in the evaluation span");
  RollingResult result;
  result.pooled = pooled.report();
  for (const auto& s : per_lead) result.per_lead.push_back(s.report());
  result.origins = origins.size();
  return result;
}

// --- importance ----------------------------------------------------------------------

double ImportanceTable::total() const {
  double sum = 0.0;
  for (const auto& [_, p] : percent) sum += p;
  return sum;
}

double ImportanceTable::at(std::string_view group) const {
  for (const auto& [name, p] : percent) {
    if (name == group) return p;
  }
  throw DataError("importance table has no group '" + std::string(group) + "'");
}

ImportanceTable global_importance(std::span<const Explanation> explanations) {
  if (explanations.empty()) throw DataError("no explanations to aggregate");
  const auto& spec = explanations.front().spec;
  std::vector<long double> mass(static_cast<std::size_t>(spec.size()), 0.0L);
  for (const auto& ex : explanations) {
    if (!(ex.spec == spec)) throw DataError("explanations use different groupings");
    for (std::size_t g = 0; g < mass.size(); ++g) {
      for (double v : ex.shap[g]) mass[g] += std::abs(static_cast<long double>(v));
    }
  }
  long double total = 0.0L;
  for (auto m : mass) total += m;
  if (!(total > 0.0L)) throw DataError("all SHAP values are zero; importance is undefined");
  ImportanceTable table;
  for (std::size_t g = 0; g < mass.size(); ++g) {
    table.percent.emplace_back(spec.group_name(static_cast<int>(g)), static_cast<double>(100.0L * mass[g] / total));
  }
  return table;
}

void write_importance_csv(std::ostream& out, const ImportanceTable& table) {
  out << "group,percent\n";
  for (const auto& [group, p] : table.percent) out << group << ',' << number(p) << '\n';
}

// --- dependence -------------------------------------------------------------------------

std::string day_category(const Dataset& dataset, Timestamp t, const TimeZone& zone, std::string_view holiday_covariate) {
  const auto& indicator = dataset.covariate(holiday_covariate).series;
  const auto current = indicator.at(t);
  const auto previous = indicator.at(t - hours{24});
  if (!current || !previous) {
    throw DataError("holiday indicator does not cover " + format_timestamp(t) + " and the day before");
  }
  const auto weekday = weekday_index(zone.to_local(t).date);
  if (weekday == 0) return "sunday";
  if (weekday == 1 && *current == 0.0) return "monday";
  const std::string prev = *previous != 0.0 ? "holiday" : "workday";
  const std::string cur = *current != 0.0 ? "holiday" : "workday";
  return prev + "_" + cur;
}

DependenceTable dependence_table(std::span<const Explanation> explanations, const Dataset& dataset,
                                 const std::string& group, Interaction interaction, const TimeZone& zone,
                                 std::string_view holiday_covariate) {
  const auto& series = dataset.covariate(group).series;
  DependenceTable table;
  for (const auto& ex : explanations) {
    const int g = ex.spec.index_of(group);
    if (g < ex.spec.temporal_count()) {
      throw DataError("'" + group + "' is not a covariate group of the explanation at " +
                      format_timestamp(ex.task.origin));
    }
    for (std::size_t k = 0; k < ex.full.size(); ++k) {
      const Timestamp t = ex.task.origin + hours{k};
      const auto value = series.at(t);
      const auto before = series.at(t - hours{24});
      if (!value || !before) {
        throw DataError("covariate '" + group + "' does not cover " + format_timestamp(t) + " and 24 h before");
      }
      DependenceRow row;
      row.time = t;
      row.group = group;
      row.value = *value;
      row.delta_24h = *value - *before;
      row.interaction = interaction == Interaction::kHourOfDay
                            ? std::to_string(zone.to_local(t).hour)
                            : day_category(dataset, t, zone, holiday_covariate);
      row.shap = ex.shap[static_cast<std::size_t>(g)][k];
      table.push_back(std::move(row));
    }
  }
  return table;
}

void write_dependence_csv(std::ostream& out, const DependenceTable& table) {
  out << "timestamp,group,value,delta_24h,interaction,shap\n";
  for (const auto& r : table) {
    out << format_timestamp(r.time) << ',' << r.group << ',' << number(r.value) << ',' << number(r.delta_24h) << ','
        << r.interaction << ',' << number(r.shap) << '\n';
  }
}

// --- local report -----------------------------------------------------------------------

LocalReport local_report(std::span<const Explanation> explanations, const Dataset& dataset, Timestamp from,
                         Timestamp to) {
  if (explanations.empty()) throw DataError("no explanations for the local report");
  const auto& spec = explanations.front().spec;
  LocalReport report;
  report.groups = spec.group_names();
  report.covariates = dataset.covariate_names();

  // hour -> (explanation index, horizon index), latest origin wins
  std::map<Timestamp, std::pair<std::size_t, std::size_t>> cover;
  for (std::size_t e = 0; e < explanations.size(); ++e) {
    const auto& ex = explanations[e];
    if (!(ex.spec == spec)) throw DataError("explanations use different groupings");
    for (std::size_t k = 0; k < ex.full.size(); ++k) {
      const Timestamp t = ex.task.origin + hours{k};
      if (t < from || t >= to) continue;
      auto it = cover.find(t);
      if (it == cover.end() || explanations[it->second.first].task.origin < ex.task.origin) cover[t] = {e, k};
    }
  }

  std::optional<Timestamp> gap_start;
  for (Timestamp t = from; t < to; t += hours{1}) {
    const auto it = cover.find(t);
    if (it == cover.end()) {
      if (!gap_start) gap_start = t;
      continue;
    }
    if (gap_start) {
      report.gaps.emplace_back(*gap_start, t);
      gap_start.reset();
    }
    const auto& ex = explanations[it->second.first];
    const auto k = it->second.second;
    LocalReportRow row;
    row.time = t;
    row.actual = dataset.target().at(t);
    row.prediction = ex.full[k];
    row.base = ex.base[k];
    for (const auto& shap : ex.shap) row.shap.push_back(shap[k]);
    for (const auto& cov : dataset.covariates()) row.covariates.push_back(cov.series.at(t));
    report.rows.push_back(std::move(row));
  }
  if (gap_start) report.gaps.emplace_back(*gap_start, to);
  return report;
}

void write_local_report_csv(std::ostream& out, const LocalReport& report) {
  out << "timestamp,actual,prediction,base";
  for (const auto& g : report.groups) out << ",shap_" << g;
  for (const auto& c : report.covariates) out << ',' << c;
  out << '\n';
  for (const auto& r : report.rows) {
    out << format_timestamp(r.time) << ',' << (r.actual ? number(*r.actual) : "") << ',' << number(r.prediction)
        << ',' << number(r.base);
    for (double s : r.shap) out << ',' << number(s);
    for (const auto& c : r.covariates) out << ',' << (c ? number(*c) : "");
    out << '\n';
  }
}

namespace {

constexpr const char* kPalette[] = {"#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f",
                                    "#edc948", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac"};

std::string fixed(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

struct Axis {
  double lo = 0.0;
  double hi = 1.0;
  double top = 0.0;
  double height = 1.0;

  double map(double v) const { return top + height * (hi - v) / (hi - lo); }
};

Axis make_axis(double lo, double hi, double top, double height) {
  if (!(hi > lo)) {
    lo -= 1.0;
    hi += 1.0;
  }
  const double pad = 0.05 * (hi - lo);
  return {lo - pad, hi + pad, top, height};
}

void polyline(std::ostream& out, const std::vector<std::pair<double, double>>& pts, const char* color, double width,
              const char* dash = nullptr) {
  if (pts.empty()) return;
  out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"" << width << '"';
  if (dash != nullptr) out << " stroke-dasharray=\"" << dash << '"';
  out << " points=\"";
  for (const auto& [x, y] : pts) out << fixed(x) << ',' << fixed(y) << ' ';
  out << "\"/>\n";
}

}  // namespace

void write_local_report_svg(std::ostream& out, const LocalReport& report, const std::string& title,
                            std::string_view holiday_covariate) {
  constexpr double kWidth = 1200, kLeft = 70, kRight = 150, kTop = 40;
  constexpr double kLoadHeight = 260, kGap = 40, kShapHeight = 200;
  const double plot_width = kWidth - kLeft - kRight;
  const double total_height = kTop + kLoadHeight + kGap + kShapHeight + 40;
  const std::size_t n = report.rows.size();
  const double step = n > 1 ? plot_width / static_cast<double>(n - 1) : plot_width;
  auto x_of = [&](std::size_t i) { return kLeft + step * static_cast<double>(i); };

  double load_lo = 1e300, load_hi = -1e300, shap_lo = 0.0, shap_hi = 0.0;
  for (const auto& r : report.rows) {
    if (r.actual) {
      load_lo = std::min(load_lo, *r.actual);
      load_hi = std::max(load_hi, *r.actual);
    }
    load_lo = std::min(load_lo, r.prediction);
    load_hi = std::max(load_hi, r.prediction);
    double pos = 0.0, neg = 0.0;
    for (double s : r.shap) (s > 0 ? pos : neg) += s;
    shap_lo = std::min(shap_lo, neg);
    shap_hi = std::max(shap_hi, pos);
  }
  if (n == 0) load_lo = 0.0, load_hi = 1.0;
  const auto load_axis = make_axis(load_lo, load_hi, kTop, kLoadHeight);
  const auto shap_axis = make_axis(shap_lo, shap_hi, kTop + kLoadHeight + kGap, kShapHeight);

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << total_height
      << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << kLeft << "\" y=\"22\" font-size=\"14\">" << title << "</text>\n";

  // Holiday shading.
  std::size_t holiday_col = report.covariates.size();
  for (std::size_t c = 0; c < report.covariates.size(); ++c) {
    if (report.covariates[c] == holiday_covariate) holiday_col = c;
  }
  if (holiday_col < report.covariates.size()) {
    for (std::size_t i = 0; i < n; ++i) {
      const auto& v = report.rows[i].covariates[holiday_col];
      if (v && *v != 0.0) {
        out << "<rect x=\"" << fixed(x_of(i) - step / 2) << "\" y=\"" << kTop << "\" width=\"" << fixed(step)
            << "\" height=\"" << fixed(kLoadHeight + kGap + kShapHeight) << "\" fill=\"#fbd3e0\"/>\n";
      }
    }
  }

  // Stacked SHAP bands: positive parts stack upwards from zero, negative downwards.
  std::vector<double> pos(n, 0.0), neg(n, 0.0);
  for (std::size_t g = 0; g < report.groups.size(); ++g) {
    const char* color = kPalette[g % std::size(kPalette)];
    for (std::size_t i = 0; i < n; ++i) {
      const double s = report.rows[i].shap[g];
      if (s == 0.0) continue;
      double& edge = s > 0 ? pos[i] : neg[i];
      const double y0 = shap_axis.map(edge);
      const double y1 = shap_axis.map(edge + s);
      edge += s;
      out << "<rect x=\"" << fixed(x_of(i) - step / 2) << "\" y=\"" << fixed(std::min(y0, y1)) << "\" width=\""
          << fixed(step) << "\" height=\"" << fixed(std::abs(y1 - y0)) << "\" fill=\"" << color << "\"/>\n";
    }
    out << "<rect x=\"" << kWidth - kRight + 15 << "\" y=\"" << fixed(shap_axis.top + 16.0 * g) << "\" width=\"10\" height=\"10\" fill=\""
        << color << "\"/><text x=\"" << kWidth - kRight + 30 << "\" y=\"" << fixed(shap_axis.top + 16.0 * g + 9)
        << "\">" << report.groups[g] << "</text>\n";
  }
  out << "<line x1=\"" << kLeft << "\" x2=\"" << kLeft + plot_width << "\" y1=\"" << fixed(shap_axis.map(0.0))
      << "\" y2=\"" << fixed(shap_axis.map(0.0)) << "\" stroke=\"#333\" stroke-width=\"0.5\"/>\n";

  // Covariate overlays scaled into the load panel.
  for (std::size_t c = 0; c < report.covariates.size(); ++c) {
    if (c == holiday_col) continue;
    double lo = 1e300, hi = -1e300;
    for (const auto& r : report.rows) {
      if (r.covariates[c]) {
        lo = std::min(lo, *r.covariates[c]);
        hi = std::max(hi, *r.covariates[c]);
      }
    }
    if (lo > hi) continue;
    const auto axis = make_axis(lo, hi, kTop, kLoadHeight);
    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = 0; i < n; ++i) {
      if (const auto& v = report.rows[i].covariates[c]) pts.emplace_back(x_of(i), axis.map(*v));
    }
    const char* color = c % 2 == 0 ? "#d62728" : "#e6a700";
    polyline(out, pts, color, 0.8, "3,2");
    out << "<text x=\"" << kWidth - kRight + 15 << "\" y=\"" << fixed(kTop + 16.0 * (c + 2)) << "\" fill=\"" << color
        << "\">" << report.covariates[c] << " [" << fixed(lo) << ", " << fixed(hi) << "]</text>\n";
  }

  std::vector<std::pair<double, double>> actual, predicted;
  for (std::size_t i = 0; i < n; ++i) {
    if (report.rows[i].actual) actual.emplace_back(x_of(i), load_axis.map(*report.rows[i].actual));
    predicted.emplace_back(x_of(i), load_axis.map(report.rows[i].prediction));
  }
  polyline(out, actual, "black", 1.2);
  polyline(out, predicted, "#1f77b4", 1.2);
  out << "<text x=\"" << kWidth - kRight + 15 << "\" y=\"" << kTop + 4 << "\">actual</text>\n";
  out << "<text x=\"" << kWidth - kRight + 15 << "\" y=\"" << kTop + 18 << "\" fill=\"#1f77b4\">prediction</text>\n";

  // Axes labels.
  for (const auto* axis : {&load_axis, &shap_axis}) {
    out << "<text x=\"" << kLeft - 5 << "\" y=\"" << fixed(axis->top + 10) << "\" text-anchor=\"end\">"
        << fixed(axis->hi) << "</text>\n";
    out << "<text x=\"" << kLeft - 5 << "\" y=\"" << fixed(axis->top + axis->height) << "\" text-anchor=\"end\">"
        << fixed(axis->lo) << "</text>\n";
    out << "<rect x=\"" << kLeft << "\" y=\"" << fixed(axis->top) << "\" width=\"" << fixed(plot_width)
        << "\" height=\"" << fixed(axis->height) << "\" fill=\"none\" stroke=\"#999\"/>\n";
  }
  if (n > 0) {
    out << "<text x=\"" << kLeft << "\" y=\"" << fixed(total_height - 15) << "\">" << format_timestamp(report.rows.front().time)
        << "</text>\n";
    out << "<text x=\"" << kLeft + plot_width << "\" y=\"" << fixed(total_height - 15) << "\" text-anchor=\"end\">"
        << format_timestamp(report.rows.back().time) << "</text>\n";
  }
  out << "</svg>\n";
}

void write_importance_svg(std::ostream& out, const ImportanceTable& table, const std::string& title) {
  constexpr double kLeft = 140, kBar = 22, kWidth = 640, kTop = 40;
  const double plot = kWidth - kLeft - 70;
  const double height = kTop + kBar * static_cast<double>(table.percent.size()) + 20;
  double top = 0.0;
  for (const auto& [_, p] : table.percent) top = std::max(top, p);
  if (top <= 0.0) top = 1.0;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << fixed(height)
      << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"10\" y=\"22\" font-size=\"14\">" << title << "</text>\n";
  for (std::size_t i = 0; i < table.percent.size(); ++i) {
    const auto& [group, p] = table.percent[i];
    const double y = kTop + kBar * static_cast<double>(i);
    out << "<text x=\"" << kLeft - 6 << "\" y=\"" << fixed(y + 14) << "\" text-anchor=\"end\">" << group
        << "</text>\n";
    out << "<rect x=\"" << kLeft << "\" y=\"" << fixed(y + 3) << "\" width=\"" << fixed(plot * p / top)
        << "\" height=\"" << kBar - 6 << "\" fill=\"" << kPalette[i % std::size(kPalette)] << "\"/>\n";
    out << "<text x=\"" << fixed(kLeft + plot * p / top + 4) << "\" y=\"" << fixed(y + 14) << "\">" << fixed(p)
        << " %</text>\n";
  }
  out << "</svg>\n";
}

void write_dependence_svg(std::ostream& out, const DependenceTable& table, const std::string& title) {
  constexpr double kPanel = 420, kHeight = 320, kLeft = 60, kTop = 40, kGap = 60;
  const double width = kLeft + 2 * kPanel + kGap + 140;
  std::vector<std::string> labels;
  for (const auto& r : table) {
    if (std::find(labels.begin(), labels.end(), r.interaction) == labels.end()) labels.push_back(r.interaction);
  }
  std::sort(labels.begin(), labels.end());
  auto color_of = [&](const std::string& label) {
    const auto i = static_cast<std::size_t>(std::find(labels.begin(), labels.end(), label) - labels.begin());
    return kPalette[i % std::size(kPalette)];
  };
  double s_lo = 0.0, s_hi = 0.0, v_lo = 1e300, v_hi = -1e300, d_lo = 1e300, d_hi = -1e300;
  for (const auto& r : table) {
    s_lo = std::min(s_lo, r.shap);
    s_hi = std::max(s_hi, r.shap);
    v_lo = std::min(v_lo, r.value);
    v_hi = std::max(v_hi, r.value);
    d_lo = std::min(d_lo, r.delta_24h);
    d_hi = std::max(d_hi, r.delta_24h);
  }
  if (table.empty()) v_lo = d_lo = 0.0, v_hi = d_hi = 1.0;
  const auto y_axis = make_axis(s_lo, s_hi, kTop, kHeight);
  const auto vx = make_axis(v_lo, v_hi, 0.0, kPanel);
  const auto dx = make_axis(d_lo, d_hi, 0.0, kPanel);
  // Axis::map runs top-down, so x positions are mirrored from the right edge.
  auto x_value = [&](double v) { return kLeft + kPanel - vx.map(v); };
  auto x_delta = [&](double v) { return kLeft + kPanel + kGap + kPanel - dx.map(v); };

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fixed(width) << "\" height=\""
      << fixed(kTop + kHeight + 40) << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << kLeft << "\" y=\"22\" font-size=\"14\">" << title << "</text>\n";
  for (double x0 : {kLeft, kLeft + kPanel + kGap}) {
    out << "<rect x=\"" << fixed(x0) << "\" y=\"" << kTop << "\" width=\"" << kPanel << "\" height=\"" << kHeight
        << "\" fill=\"none\" stroke=\"#999\"/>\n";
    out << "<line x1=\"" << fixed(x0) << "\" x2=\"" << fixed(x0 + kPanel) << "\" y1=\"" << fixed(y_axis.map(0.0))
        << "\" y2=\"" << fixed(y_axis.map(0.0)) << "\" stroke=\"#333\" stroke-width=\"0.5\"/>\n";
  }
  for (const auto& r : table) {
    const char* color = color_of(r.interaction);
    const double y = y_axis.map(r.shap);
    out << "<circle cx=\"" << fixed(x_value(r.value)) << "\" cy=\"" << fixed(y) << "\" r=\"2\" fill=\"" << color
        << "\" fill-opacity=\"0.6\"/>\n";
    out << "<circle cx=\"" << fixed(x_delta(r.delta_24h)) << "\" cy=\"" << fixed(y) << "\" r=\"2\" fill=\"" << color
        << "\" fill-opacity=\"0.6\"/>\n";
  }
  const double label_y = kTop + kHeight + 25;
  out << "<text x=\"" << fixed(kLeft + kPanel / 2) << "\" y=\"" << fixed(label_y) << "\" text-anchor=\"middle\">value ["
      << fixed(v_lo) << ", " << fixed(v_hi) << "]</text>\n";
  out << "<text x=\"" << fixed(kLeft + kPanel * 1.5 + kGap) << "\" y=\"" << fixed(label_y)
      << "\" text-anchor=\"middle\">delta vs 24 h before [" << fixed(d_lo) << ", " << fixed(d_hi) << "]</text>\n";
  out << "<text x=\"" << kLeft - 5 << "\" y=\"" << fixed(kTop + 10) << "\" text-anchor=\"end\">" << fixed(y_axis.hi)
      << "</text>\n";
  out << "<text x=\"" << kLeft - 5 << "\" y=\"" << fixed(kTop + kHeight) << "\" text-anchor=\"end\">"
      << fixed(y_axis.lo) << "</text>\n";
  const double legend_x = kLeft + 2 * kPanel + kGap + 15;
  for (std::size_t i = 0; i < labels.size() && i < 30; ++i) {
    out << "<circle cx=\"" << fixed(legend_x) << "\" cy=\"" << fixed(kTop + 6 + 14.0 * i) << "\" r=\"4\" fill=\""
        << color_of(labels[i]) << "\"/><text x=\"" << fixed(legend_x + 8) << "\" y=\"" << fixed(kTop + 10 + 14.0 * i)
        << "\">" << labels[i] << "</text>\n";
  }
  out << "</svg>\n";
}

}  // namespace cshap
