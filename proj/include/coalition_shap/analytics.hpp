#pragma once

#include <cstddef>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "coalition_shap/data_model.hpp"
#include "coalition_shap/forecaster.hpp"
#include "coalition_shap/shap_engine.hpp"

namespace cshap {

// --- point-forecast metrics ---------------------------------------------------

struct MetricReport {
  double mae = 0.0;   // MW
  double rmse = 0.0;  // MW
  double mape = 0.0;  // percent
  std::size_t n = 0;        // scored pairs
  std::size_t skipped = 0;  // pairs with a missing actual
};

/// All three metrics over pairs with an observed actual. Throws DataError on
/// length mismatch, when nothing is scored, or when an actual is zero.
MetricReport score(std::span<const Value> actual, std::span<const double> predicted);
MetricReport score(std::span<const double> actual, std::span<const double> predicted);

double mae(std::span<const double> actual, std::span<const double> predicted);
double rmse(std::span<const double> actual, std::span<const double> predicted);
double mape(std::span<const double> actual, std::span<const double> predicted);

// --- rolling-origin evaluation -------------------------------------------------

struct RollingOptions {
  Timestamp from{};  // first origin
  Timestamp to{};    // no forecast hour reaches past this
  int stride_hours = 1;
  int horizon_hours = 24;
  int context_hours = 168;
  int workers = 1;
};

struct RollingResult {
  MetricReport pooled;
  std::vector<MetricReport> per_lead;  // index = lead hour
  std::size_t origins = 0;
};

/// Forecasts with the full (unmasked) input at every stride-th hour in
/// [from, to - horizon] and pools all (origin, lead) errors with equal weight.
RollingResult rolling_evaluation(const Dataset& dataset, const Forecaster& forecaster, const RollingOptions& options);

// --- global importance ------------------------------------------------------------

struct ImportanceTable {
  std::vector<std::pair<std::string, double>> percent;  // group order of the grouping

  double total() const;
  double at(std::string_view group) const;
};

/// Share of summed absolute SHAP per group, in percent. All explanations must
/// share one grouping.
ImportanceTable global_importance(std::span<const Explanation> explanations);
void write_importance_csv(std::ostream& out, const ImportanceTable& table);
/// Horizontal bar chart.
void write_importance_svg(std::ostream& out, const ImportanceTable& table, const std::string& title);

// --- dependence ---------------------------------------------------------------------

enum class Interaction { kHourOfDay, kDayCategory };

/// Day categories of the holiday dependence view: "sunday", "monday", and
/// "<previous>_<current>" pairs such as "holiday_workday" (a workday that
/// follows a holiday). Built from the holiday indicator at hour t and t - 24h.
std::string day_category(const Dataset& dataset, Timestamp t, const TimeZone& zone,
                         std::string_view holiday_covariate = "holiday");

struct DependenceRow {
  Timestamp time{};
  std::string group;
  double value = 0.0;
  double delta_24h = 0.0;
  std::string interaction;
  double shap = 0.0;
};

using DependenceTable = std::vector<DependenceRow>;

DependenceTable dependence_table(std::span<const Explanation> explanations, const Dataset& dataset,
                                 const std::string& group, Interaction interaction, const TimeZone& zone,
                                 std::string_view holiday_covariate = "holiday");
void write_dependence_csv(std::ostream& out, const DependenceTable& table);
/// Two scatter panels: SHAP against the value and against the 24 h delta,
/// colored by interaction label.
void write_dependence_svg(std::ostream& out, const DependenceTable& table, const std::string& title);

// --- local report ---------------------------------------------------------------------

struct LocalReportRow {
  Timestamp time{};
  Value actual;
  double prediction = 0.0;
  double base = 0.0;
  std::vector<double> shap;        // per group
  std::vector<Value> covariates;   // per dataset covariate
};

struct LocalReport {
  std::vector<std::string> groups;
  std::vector<std::string> covariates;
  std::vector<LocalReportRow> rows;
  std::vector<std::pair<Timestamp, Timestamp>> gaps;  // [from, to) hours without explanation
};

/// Hour-aligned view of explanations over [from, to). Hours explained by more
/// than one forecast take the latest origin. Uncovered hours are listed as
/// gaps.
LocalReport local_report(std::span<const Explanation> explanations, const Dataset& dataset, Timestamp from,
                         Timestamp to);
void write_local_report_csv(std::ostream& out, const LocalReport& report);
/// Static SVG: load and prediction lines, stacked SHAP bands per group, and
/// covariate overlays; hours with holiday == 1 are shaded.
void write_local_report_svg(std::ostream& out, const LocalReport& report, const std::string& title,
                            std::string_view holiday_covariate = "holiday");

}  // namespace cshap
