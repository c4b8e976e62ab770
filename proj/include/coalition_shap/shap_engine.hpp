#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "coalition_shap/data_model.hpp"
#include "coalition_shap/forecaster.hpp"
#include "coalition_shap/masking.hpp"

namespace cshap {

/// n choose k, exact for n <= 62.
std::uint64_t binomial(int n, int k);

/// (N-1-s)! s! / N!, evaluated as 1 / (N * C(N-1, s)) with an exact integer
/// denominator.
double shapley_weight(int subset_size, int group_count);

/// Median forecast of every coalition for one origin; values[bits] holds the
/// vector of Coalition{bits}.
struct CoalitionTable {
  ForecastTask task;
  GroupingSpec spec;
  std::string forecaster_id;
  std::vector<std::vector<double>> values;
  std::vector<std::uint8_t> from_base;  // 1 where the base prediction was substituted
  int forecaster_calls = 0;
  int base_substitutions = 0;

  const std::vector<double>& value(Coalition c) const { return values.at(c.bits); }
  /// Throws InvariantError unless the table has 2^N finite H-vectors.
  void validate() const;
};

struct EfficiencyTolerance {
  double absolute = 1e-9;
  double relative = 0.0;

  /// Tolerance for forecasters reached through the text wire protocol.
  static EfficiencyTolerance remote() { return {1e-9, 1e-6}; }
  double bound(double reference) const;
};

struct Explanation {
  ForecastTask task;
  GroupingSpec spec;
  std::string forecaster_id;
  std::vector<double> base;               // H
  std::vector<double> full;               // H
  std::vector<std::vector<double>> shap;  // N x H
  int evaluations = 0;                    // forecaster calls
  int base_substitutions = 0;
  double max_efficiency_residual = 0.0;

  const std::vector<double>& group_shap(std::string_view group) const;
};

struct EngineOptions {
  int workers = 1;
  int base_window_hours = 8064;  // 48 weeks
  EfficiencyTolerance tolerance{};
};

/// Evaluates every coalition exactly once. Workers pull coalitions from a
/// shared counter and write into preassigned slots, so the table does not
/// depend on scheduling. Serial-only forecasters are called from one thread.
CoalitionTable evaluate_coalitions(const Dataset& dataset, const ForecastTask& task, const GroupingSpec& spec,
                                   const Forecaster& forecaster, const EngineOptions& options = {});

/// Exact grouped Shapley values per horizon hour from a complete table.
Explanation compute_shap(const CoalitionTable& table, const EfficiencyTolerance& tolerance = {});

/// Reference implementation averaging marginal contributions over all N!
/// orderings. Only for N <= 8.
std::vector<std::vector<double>> permutation_oracle(const CoalitionTable& table);

Explanation explain(const Dataset& dataset, const ForecastTask& task, const GroupingSpec& spec,
                    const Forecaster& forecaster, const EngineOptions& options = {});

void save_explanation(const std::filesystem::path& path, const Explanation& explanation);
Explanation load_explanation(const std::filesystem::path& path);
void save_coalition_table(const std::filesystem::path& path, const CoalitionTable& table);
CoalitionTable load_coalition_table(const std::filesystem::path& path);

/// Long form: `origin,horizon_hour,group,shap_value`. The header is written
/// when `header` is set.
void write_shap_long_csv(std::ostream& out, const Explanation& explanation, bool header = true);

}  // namespace cshap
