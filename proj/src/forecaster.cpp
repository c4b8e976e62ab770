#include "coalition_shap/forecaster.hpp"

#include <algorithm>
#include <cmath>

#include "coalition_shap/errors.hpp"

namespace cshap {

using std::chrono::hours;

void Capabilities::validate() const {
  if (!accepts_missing_target && !accepts_row_drop) {
    throw ConfigError("a forecaster must accept missing target values or dropped rows");
  }
  if (max_context_hours < 1) throw ConfigError("max_context_hours must be positive");
}

const CovariateInput* MaskedInput::find_covariate(std::string_view name) const {
  for (const auto& cov : covariates) {
    if (cov.name == name) return &cov;
  }
  return nullptr;
}

bool MaskedInput::has_missing() const {
  return std::any_of(target.begin(), target.end(), [](const TargetPoint& p) { return !p.value; });
}

bool MaskedInput::is_contiguous() const {
  for (std::size_t i = 1; i < target.size(); ++i) {
    if (target[i].time - target[i - 1].time != hours{1}) return false;
  }
  return true;
}

int MaskedInput::context_span_hours() const {
  return target.empty() ? 0 : static_cast<int>((origin - target.front().time).count());
}

ForecastOutput ForecastOutput::constant(double value, int horizon_hours) {
  return {std::vector<double>(static_cast<std::size_t>(horizon_hours), value), {}};
}

void check_input(const MaskedInput& input, const Capabilities& caps) {
  for (std::size_t i = 0; i < input.target.size(); ++i) {
    if (input.target[i].time >= input.origin) {
      throw InvariantError("target timestamp " + format_timestamp(input.target[i].time) +
                           " does not precede the origin");
    }
    if (i > 0 && input.target[i].time <= input.target[i - 1].time) {
      throw InvariantError("target timestamps are not strictly increasing");
    }
  }
  if (input.has_missing() && !caps.accepts_missing_target) {
    throw InvariantError("capability violation: missing target values sent to a forecaster that rejects them");
  }
  if (!input.is_contiguous() && !caps.accepts_row_drop) {
    throw InvariantError("capability violation: non-contiguous target sent to a forecaster without row-drop support");
  }
  if (input.target.empty() && !caps.accepts_empty_target) {
    throw InvariantError("capability violation: empty target sent to a forecaster that requires one");
  }
  if (input.context_span_hours() > caps.max_context_hours) {
    throw InvariantError("capability violation: context of " + std::to_string(input.context_span_hours()) +
                         " h exceeds the forecaster maximum of " + std::to_string(caps.max_context_hours) + " h");
  }
  for (const auto& cov : input.covariates) {
    if (cov.future && static_cast<int>(cov.future->size()) != input.horizon_hours) {
      throw InvariantError("covariate '" + cov.name + "' future slice has the wrong length");
    }
  }
}

void check_output(const ForecastOutput& output, int horizon_hours) {
  const auto h = static_cast<std::size_t>(horizon_hours);
  if (output.median.size() != h) {
    throw ForecasterError("forecast has " + std::to_string(output.median.size()) + " median values, expected " +
                          std::to_string(horizon_hours));
  }
  for (double v : output.median) {
    if (!std::isfinite(v)) throw ForecasterError("forecast median contains a non-finite value");
  }
  const std::vector<double>* previous = nullptr;
  for (const auto& [level, values] : output.quantiles) {
    if (!(level > 0.0 && level < 1.0)) throw ForecasterError("quantile level outside (0, 1)");
    if (values.size() != h) throw ForecasterError("quantile vector has the wrong length");
    for (std::size_t k = 0; k < h; ++k) {
      if (!std::isfinite(values[k])) throw ForecasterError("quantile forecast contains a non-finite value");
      if (previous != nullptr && values[k] < (*previous)[k]) {
        throw ForecasterError("quantile forecasts cross at horizon hour " + std::to_string(k));
      }
    }
    if (level == 0.5 && values != output.median) {
      throw ForecasterError("median differs from the 0.5 quantile");
    }
    previous = &values;
  }
}

ForecastOutput forecast(const Forecaster& forecaster, const MaskedInput& input) {
  check_input(input, forecaster.capabilities());
  auto out = forecaster.predict(input);
  check_output(out, input.horizon_hours);
  return out;
}

ForecastOutput base_prediction(const Dataset& dataset, const ForecastTask& task, int base_window_hours) {
  if (base_window_hours < 1) throw ConfigError("base window must be at least 1 hour");
  const auto& target = dataset.target();
  const Timestamp from = std::max(task.origin - hours{base_window_hours}, target.start());
  const Timestamp to = std::min(task.origin, target.end());
  double sum = 0.0;
  std::size_t n = 0;
  for (Timestamp t = from; t < to; t += hours{1}) {
    if (const auto v = target.at(t)) {
      sum += *v;
      ++n;
    }
  }
  if (n == 0) {
    throw DataError("base window before " + format_timestamp(task.origin) + " contains no observed load");
  }
  return ForecastOutput::constant(sum / static_cast<double>(n), task.horizon_hours);
}

}  // namespace cshap
