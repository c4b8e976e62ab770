#include "coalition_shap/masking.hpp"

#include <algorithm>

#include "coalition_shap/errors.hpp"

namespace cshap {

using std::chrono::hours;

std::string GroupingSpec::group_name(int index) const {
  if (index < 0 || index >= size()) throw ConfigError("group index out of range");
  if (index < temporal_count()) return temporal[static_cast<std::size_t>(index)].name;
  return covariates[static_cast<std::size_t>(index - temporal_count())];
}

std::vector<std::string> GroupingSpec::group_names() const {
  std::vector<std::string> names;
  for (int g = 0; g < size(); ++g) names.push_back(group_name(g));
  return names;
}

int GroupingSpec::index_of(std::string_view name) const {
  for (int g = 0; g < size(); ++g) {
    if (group_name(g) == name) return g;
  }
  return -1;
}

void GroupingSpec::validate() const {
  if (size() > kMaxGroups) {
    throw ConfigError("grouping has " + std::to_string(size()) + " groups; at most " +
                      std::to_string(kMaxGroups) + " are supported");
  }
  for (std::size_t i = 0; i < temporal.size(); ++i) {
    const auto& g = temporal[i];
    if (g.oldest_offset > g.newest_offset || g.newest_offset >= 0) {
      throw ConfigError("temporal group '" + g.name + "' has an invalid hour range");
    }
    if (i + 1 < temporal.size() && temporal[i + 1].oldest_offset != g.newest_offset + 1) {
      throw ConfigError("temporal groups '" + g.name + "' and '" + temporal[i + 1].name +
                        "' are not contiguous and ordered oldest first");
    }
  }
  if (!temporal.empty() && temporal.back().newest_offset != -1) {
    throw ConfigError("the newest temporal group must end at hour -1");
  }
  auto names = group_names();
  std::sort(names.begin(), names.end());
  if (std::adjacent_find(names.begin(), names.end()) != names.end()) {
    throw ConfigError("group names must be unique");
  }
}

GroupingSpec make_grouping(const std::vector<int>& edges, const std::vector<std::string>& window_names,
                           std::vector<std::string> covariates, int context_hours) {
  if (window_names.size() != edges.size() + 1) {
    throw ConfigError("need one window name per edge plus one for the oldest window");
  }
  if (edges.empty() || edges.front() < 1 || !std::is_sorted(edges.begin(), edges.end()) ||
      std::adjacent_find(edges.begin(), edges.end()) != edges.end()) {
    throw ConfigError("window edges must be positive and strictly increasing");
  }
  if (context_hours < edges.front()) {
    throw ConfigError("context of " + std::to_string(context_hours) + " h is shorter than the newest window (" +
                      std::to_string(edges.front()) + " h)");
  }
  GroupingSpec spec;
  spec.covariates = std::move(covariates);
  int newer_edge = 0;
  std::vector<TemporalGroup> newest_first;
  for (std::size_t i = 0; i <= edges.size(); ++i) {
    const int oldest_back = i < edges.size() ? edges[i] : context_hours;
    const int clipped = std::min(oldest_back, context_hours);
    if (clipped <= newer_edge) {
      spec.dropped.push_back(window_names[i]);
    } else {
      newest_first.push_back({window_names[i], -clipped, -(newer_edge + 1)});
    }
    newer_edge = std::max(newer_edge, std::min(oldest_back, context_hours));
  }
  spec.temporal.assign(newest_first.rbegin(), newest_first.rend());
  spec.validate();
  return spec;
}

GroupingSpec default_grouping(std::vector<std::string> covariates, int context_hours) {
  if (context_hours < 24) {
    throw ConfigError("the default grouping needs at least 24 h of context");
  }
  return make_grouping({24, 168, 672}, {"last_day", "short_term", "intermediate", "long_term"},
                       std::move(covariates), context_hours);
}

GroupingSpec default_grouping(const Dataset& dataset, const ForecastTask& task) {
  return default_grouping(dataset.covariate_names(), task.context_hours);
}

std::vector<Coalition> enumerate_coalitions(const GroupingSpec& spec) {
  spec.validate();
  const std::uint32_t count = 1u << spec.size();
  std::vector<Coalition> all;
  all.reserve(count);
  for (std::uint32_t bits = 0; bits < count; ++bits) all.push_back({bits});
  return all;
}

MaskResult apply_coalition(const ContextSlice& slice, const GroupingSpec& spec, Coalition coalition,
                           const Capabilities& caps, const std::vector<double>& quantiles) {
  if (spec.size() < 32 && (coalition.bits >> spec.size()) != 0) {
    throw InvariantError("coalition " + std::to_string(coalition.bits) + " is not valid for " +
                         std::to_string(spec.size()) + " groups");
  }
  if (!caps.accepts_missing_target && !caps.accepts_row_drop) {
    throw InvariantError("no masking strategy is available for this forecaster");
  }
  const int context = static_cast<int>(slice.target.size());
  if (!spec.temporal.empty() && spec.temporal.front().oldest_offset < -context) {
    throw InvariantError("grouping reaches further back than the context");
  }

  // Per-hour presence, indexed like slice.target.
  std::vector<char> present(static_cast<std::size_t>(context), 0);
  for (int g = 0; g < spec.temporal_count(); ++g) {
    if (!coalition.contains(g)) continue;
    const auto& window = spec.temporal[static_cast<std::size_t>(g)];
    for (int offset = window.oldest_offset; offset <= window.newest_offset; ++offset) {
      present[static_cast<std::size_t>(context + offset)] = 1;
    }
  }

  MaskedInput input;
  input.origin = slice.origin;
  input.horizon_hours = slice.horizon_hours;
  input.quantiles = quantiles;

  // Everything older than the first observed present hour is truncated.
  std::size_t first = 0;
  while (first < present.size() && !(present[first] && slice.target[first])) ++first;
  const Timestamp start = slice.origin - hours{context};
  for (std::size_t i = first; i < present.size(); ++i) {
    Value v = present[i] ? slice.target[i] : std::nullopt;
    if (!v && !caps.accepts_missing_target) continue;  // row drop
    input.target.push_back({start + hours{i}, v});
  }

  for (std::size_t c = 0; c < spec.covariates.size(); ++c) {
    if (!coalition.contains(spec.temporal_count() + static_cast<int>(c))) continue;
    const auto& name = spec.covariates[c];
    const auto it = std::find_if(slice.covariates.begin(), slice.covariates.end(),
                                 [&](const CovariateSlice& cs) { return cs.name == name; });
    if (it == slice.covariates.end()) {
      throw DataError("covariate '" + name + "' is not part of the dataset");
    }
    input.covariates.push_back({it->name, it->past, it->future});
  }

  if (input.target.empty() && (input.covariates.empty() || !caps.accepts_empty_target)) {
    return BaseSignal{};
  }
  return input;
}

MaskResult apply_coalition(const Dataset& dataset, const ForecastTask& task, const GroupingSpec& spec,
                           Coalition coalition, const Capabilities& caps) {
  return apply_coalition(slice_context(dataset, task), spec, coalition, caps, task.quantiles);
}

}  // namespace cshap
