#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "coalition_shap/data_model.hpp"

namespace cshap {

/// What input forms a forecaster can consume. At least one of
/// accepts_missing_target / accepts_row_drop must hold.
struct Capabilities {
  bool accepts_missing_target = true;  // holes marked as missing
  bool accepts_row_drop = false;       // non-contiguous target timestamps
  bool accepts_empty_target = false;   // covariates only
  int max_context_hours = 8192;
  bool deterministic = true;
  bool serial_only = false;

  void validate() const;
};

struct TargetPoint {
  Timestamp time{};
  Value value;

  friend bool operator==(const TargetPoint&, const TargetPoint&) = default;
};

/// One covariate as presented to a forecaster. `past` ends at origin - 1 and
/// covers the full configured context, independent of target masking.
struct CovariateInput {
  std::string name;
  std::vector<Value> past;
  std::optional<std::vector<double>> future;  // horizon_hours entries from origin

  friend bool operator==(const CovariateInput&, const CovariateInput&) = default;
};

/// Exactly what a forecaster receives for one coalition.
struct MaskedInput {
  std::vector<TargetPoint> target;  // strictly increasing, all before origin
  std::vector<CovariateInput> covariates;
  Timestamp origin{};
  int horizon_hours = 24;
  std::vector<double> quantiles{0.5};

  const CovariateInput* find_covariate(std::string_view name) const;
  bool has_missing() const;
  bool is_contiguous() const;
  /// Hours between the oldest target point and the origin (0 when empty).
  int context_span_hours() const;

  friend bool operator==(const MaskedInput&, const MaskedInput&) = default;
};

struct ForecastOutput {
  std::vector<double> median;
  std::map<double, std::vector<double>> quantiles;

  static ForecastOutput constant(double value, int horizon_hours);
};

class Forecaster {
 public:
  virtual ~Forecaster() = default;

  virtual std::string id() const = 0;
  virtual Capabilities capabilities() const = 0;
  /// Called only with inputs that satisfy capabilities().
  virtual ForecastOutput predict(const MaskedInput& input) const = 0;

  /// Forecast used when nothing is presented. nullopt means the engine's
  /// trailing-mean base prediction applies.
  virtual std::optional<ForecastOutput> empty_input_forecast(const MaskedInput& /*empty_input*/) const {
    return std::nullopt;
  }
};

/// Throws InvariantError if `input` violates the MaskedInput invariants or
/// the given capabilities.
void check_input(const MaskedInput& input, const Capabilities& caps);

/// Throws ForecasterError for wrong length, non-finite values, quantile
/// crossing, or a median that disagrees with the 0.5 quantile.
void check_output(const ForecastOutput& output, int horizon_hours);

/// Validates the input against the forecaster's capabilities, calls it and
/// validates the result.
ForecastOutput forecast(const Forecaster& forecaster, const MaskedInput& input);

/// Mean of the observed target values in [origin - window, origin), repeated
/// horizon_hours times. The window is clipped at the start of the data.
ForecastOutput base_prediction(const Dataset& dataset, const ForecastTask& task, int base_window_hours);

}  // namespace cshap
