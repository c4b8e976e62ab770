#pragma once

#include <bit>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "coalition_shap/data_model.hpp"
#include "coalition_shap/forecaster.hpp"

namespace cshap {

inline constexpr int kMaxGroups = 20;

/// Past-load window, as inclusive hour offsets relative to the origin
/// (e.g. last day = [-24, -1]).
struct TemporalGroup {
  std::string name;
  int oldest_offset = 0;
  int newest_offset = 0;

  int hours() const noexcept { return newest_offset - oldest_offset + 1; }
  bool contains(int offset) const noexcept { return offset >= oldest_offset && offset <= newest_offset; }

  friend bool operator==(const TemporalGroup&, const TemporalGroup&) = default;
};

/// Shapley players: temporal windows ordered oldest first, then one group per
/// covariate. Group index k corresponds to coalition bit k.
struct GroupingSpec {
  std::vector<TemporalGroup> temporal;
  std::vector<std::string> covariates;
  std::vector<std::string> dropped;  // windows removed because the context is too short

  int size() const noexcept { return static_cast<int>(temporal.size() + covariates.size()); }
  int temporal_count() const noexcept { return static_cast<int>(temporal.size()); }
  std::string group_name(int index) const;
  std::vector<std::string> group_names() const;
  int index_of(std::string_view name) const;  // -1 if absent
  /// Throws ConfigError unless windows are disjoint, contiguous, oldest-first
  /// and N <= kMaxGroups.
  void validate() const;

  friend bool operator==(const GroupingSpec& a, const GroupingSpec& b) {
    return a.temporal == b.temporal && a.covariates == b.covariates;
  }
};

/// Subset of groups; bit k set = group k present.
struct Coalition {
  std::uint32_t bits = 0;

  bool contains(int group) const noexcept { return (bits >> group) & 1u; }
  int size() const noexcept { return std::popcount(bits); }
  Coalition with(int group) const noexcept { return {bits | (1u << group)}; }
  Coalition without(int group) const noexcept { return {bits & ~(1u << group)}; }
  static Coalition full(int n) noexcept { return {n == 0 ? 0u : (~0u >> (32 - n))}; }

  friend bool operator==(Coalition, Coalition) = default;
};

/// Signals that nothing informative is left: the caller substitutes the base
/// prediction.
struct BaseSignal {
  friend bool operator==(BaseSignal, BaseSignal) = default;
};

using MaskResult = std::variant<MaskedInput, BaseSignal>;

/// Window edges in hours back from the origin. `{24, 168, 672}` gives the
/// default last_day / short_term / intermediate / long_term split.
GroupingSpec make_grouping(const std::vector<int>& edges, const std::vector<std::string>& window_names,
                           std::vector<std::string> covariates, int context_hours);

/// Default four windows clipped to the context, plus one group per covariate.
GroupingSpec default_grouping(const Dataset& dataset, const ForecastTask& task);
GroupingSpec default_grouping(std::vector<std::string> covariates, int context_hours);

std::vector<Coalition> enumerate_coalitions(const GroupingSpec& spec);

/// Builds the forecaster payload for one coalition. The oldest absent prefix
/// of windows (and any leading missing values) is cut off; other absent hours
/// become missing markers, or dropped rows when the forecaster cannot take
/// markers. Absent covariates are omitted entirely.
MaskResult apply_coalition(const ContextSlice& slice, const GroupingSpec& spec, Coalition coalition,
                           const Capabilities& caps, const std::vector<double>& quantiles = {0.5});
MaskResult apply_coalition(const Dataset& dataset, const ForecastTask& task, const GroupingSpec& spec,
                           Coalition coalition, const Capabilities& caps);

}  // namespace cshap
