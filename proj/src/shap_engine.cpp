#include "coalition_shap/shap_engine.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <mutex>
#include <numeric>
#include <ostream>
#include <thread>

#include <nlohmann/json.hpp>

#include "coalition_shap/errors.hpp"

namespace cshap {

using nlohmann::json;

std::uint64_t binomial(int n, int k) {
  if (k < 0 || k > n || n > 62) throw ConfigError("binomial coefficient out of range");
  k = std::min(k, n - k);
  std::uint64_t result = 1;
  for (int i = 1; i <= k; ++i) {
    // result * (n - k + i) / i stays integral at every step
    result = result / static_cast<std::uint64_t>(i) * static_cast<std::uint64_t>(n - k + i) +
             result % static_cast<std::uint64_t>(i) * static_cast<std::uint64_t>(n - k + i) /
                 static_cast<std::uint64_t>(i);
  }
  return result;
}

double shapley_weight(int subset_size, int group_count) {
  if (group_count < 1 || group_count > kMaxGroups) throw ConfigError("group count out of range");
  if (subset_size < 0 || subset_size > group_count - 1) {
    throw ConfigError("subset size " + std::to_string(subset_size) + " out of range for " +
                      std::to_string(group_count) + " groups");
  }
  const auto denominator = static_cast<std::uint64_t>(group_count) * binomial(group_count - 1, subset_size);
  return 1.0 / static_cast<double>(denominator);
}

void CoalitionTable::validate() const {
  const auto expected = std::size_t{1} << spec.size();
  if (values.size() != expected) {
    throw InvariantError("coalition table has " + std::to_string(values.size()) + " entries, expected " +
                         std::to_string(expected));
  }
  for (std::size_t bits = 0; bits < values.size(); ++bits) {
    if (values[bits].size() != static_cast<std::size_t>(task.horizon_hours)) {
      throw InvariantError("coalition " + std::to_string(bits) + " has the wrong horizon length");
    }
    for (double v : values[bits]) {
      if (!std::isfinite(v)) throw InvariantError("coalition " + std::to_string(bits) + " holds a non-finite value");
    }
  }
}

double EfficiencyTolerance::bound(double reference) const { return absolute + relative * std::abs(reference); }

const std::vector<double>& Explanation::group_shap(std::string_view group) const {
  const int g = spec.index_of(group);
  if (g < 0) throw DataError("explanation has no group '" + std::string(group) + "'");
  return shap[static_cast<std::size_t>(g)];
}

namespace {

std::string describe(const GroupingSpec& spec, Coalition c) {
  std::string out = "coalition " + std::to_string(c.bits) + " {";
  bool first = true;
  for (int g = 0; g < spec.size(); ++g) {
    if (!c.contains(g)) continue;
    out += (first ? "" : ", ") + spec.group_name(g);
    first = false;
  }
  return out + "}";
}

}  // namespace

CoalitionTable evaluate_coalitions(const Dataset& dataset, const ForecastTask& task, const GroupingSpec& spec,
                                   const Forecaster& forecaster, const EngineOptions& options) {
  spec.validate();
  const auto caps = forecaster.capabilities();
  caps.validate();
  const auto slice = slice_context(dataset, task);
  const auto coalitions = enumerate_coalitions(spec);

  CoalitionTable table;
  table.task = task;
  table.spec = spec;
  table.forecaster_id = forecaster.id();
  table.values.resize(coalitions.size());
  table.from_base.assign(coalitions.size(), 0);

  std::once_flag base_once;
  ForecastOutput base;
  auto base_vector = [&]() -> const std::vector<double>& {
    std::call_once(base_once, [&] {
      MaskedInput empty;
      empty.origin = task.origin;
      empty.horizon_hours = task.horizon_hours;
      empty.quantiles = task.quantiles;
      auto own = forecaster.empty_input_forecast(empty);
      base = own ? std::move(*own) : base_prediction(dataset, task, options.base_window_hours);
      check_output(base, task.horizon_hours);
    });
    return base.median;
  };

  std::atomic<std::size_t> next{0};
  std::atomic<int> calls{0};
  std::atomic<int> substitutions{0};
  std::atomic<bool> failed{false};
  std::mutex error_mutex;
  std::exception_ptr error;
  std::string error_context;
  ErrorKind error_kind = ErrorKind::kForecaster;

  auto worker = [&] {
    while (!failed.load(std::memory_order_relaxed)) {
      const auto i = next.fetch_add(1);
      if (i >= coalitions.size()) return;
      const auto coalition = coalitions[i];
      try {
        auto masked = apply_coalition(slice, spec, coalition, caps, task.quantiles);
        if (std::holds_alternative<BaseSignal>(masked)) {
          table.values[i] = base_vector();
          table.from_base[i] = 1;
          substitutions.fetch_add(1);
        } else {
          calls.fetch_add(1);
          table.values[i] = forecast(forecaster, std::get<MaskedInput>(masked)).median;
        }
      } catch (const std::exception& e) {
        std::lock_guard lock(error_mutex);
        if (!failed.exchange(true)) {
          error_context = format_timestamp(task.origin) + ", " + describe(spec, coalition) + ": " + e.what();
          if (const auto* ce = dynamic_cast<const Error*>(&e)) error_kind = ce->kind();
          error = std::current_exception();
        }
      }
    }
  };

  const int workers = caps.serial_only ? 1 : std::max(1, options.workers);
  if (workers == 1 || coalitions.size() == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    const auto n = std::min<std::size_t>(static_cast<std::size_t>(workers), coalitions.size());
    for (std::size_t w = 0; w < n; ++w) pool.emplace_back(worker);
  }
  if (error) throw Error(error_kind, error_context);

  table.forecaster_calls = calls.load();
  table.base_substitutions = substitutions.load();
  table.validate();
  return table;
}

Explanation compute_shap(const CoalitionTable& table, const EfficiencyTolerance& tolerance) {
  table.validate();
  const int n = table.spec.size();
  const auto h = static_cast<std::size_t>(table.task.horizon_hours);
  const auto full_bits = Coalition::full(n);

  Explanation ex;
  ex.task = table.task;
  ex.spec = table.spec;
  ex.forecaster_id = table.forecaster_id;
  ex.base = table.value(Coalition{0});
  ex.full = table.value(full_bits);
  ex.evaluations = table.forecaster_calls;
  ex.base_substitutions = table.base_substitutions;
  ex.shap.assign(static_cast<std::size_t>(n), std::vector<double>(h, 0.0));

  std::vector<double> weights;
  for (int s = 0; s < n; ++s) weights.push_back(shapley_weight(s, n));

  std::vector<long double> acc(h);
  for (int g = 0; g < n; ++g) {
    std::fill(acc.begin(), acc.end(), 0.0L);
    const std::uint32_t bit = 1u << g;
    for (std::uint32_t bits = 0; bits <= full_bits.bits; ++bits) {
      if (bits & bit) continue;
      const auto& without = table.values[bits];
      const auto& with = table.values[bits | bit];
      const long double w = weights[static_cast<std::size_t>(std::popcount(bits))];
      for (std::size_t k = 0; k < h; ++k) {
        acc[k] += w * (static_cast<long double>(with[k]) - static_cast<long double>(without[k]));
      }
      if (bits == full_bits.bits) break;
    }
    for (std::size_t k = 0; k < h; ++k) ex.shap[static_cast<std::size_t>(g)][k] = static_cast<double>(acc[k]);
  }

  for (std::size_t k = 0; k < h; ++k) {
    long double total = ex.base[k];
    for (int g = 0; g < n; ++g) total += ex.shap[static_cast<std::size_t>(g)][k];
    const double residual = static_cast<double>(std::abs(total - static_cast<long double>(ex.full[k])));
    ex.max_efficiency_residual = std::max(ex.max_efficiency_residual, residual);
    if (residual > tolerance.bound(ex.full[k])) {
      throw InvariantError("efficiency violated at " + format_timestamp(table.task.origin) + " hour " +
                           std::to_string(k) + ": residual " + std::to_string(residual));
    }
  }
  return ex;
}

std::vector<std::vector<double>> permutation_oracle(const CoalitionTable& table) {
  table.validate();
  const int n = table.spec.size();
  if (n > 8) throw ConfigError("permutation oracle is limited to 8 groups");
  const auto h = static_cast<std::size_t>(table.task.horizon_hours);
  std::vector<std::vector<long double>> acc(static_cast<std::size_t>(n), std::vector<long double>(h, 0.0L));
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  long double permutations = 0;
  do {
    std::uint32_t bits = 0;
    for (int g : order) {
      const auto& before = table.values[bits];
      bits |= 1u << g;
      const auto& after = table.values[bits];
      for (std::size_t k = 0; k < h; ++k) {
        acc[static_cast<std::size_t>(g)][k] += static_cast<long double>(after[k]) - before[k];
      }
    }
    permutations += 1;
  } while (std::next_permutation(order.begin(), order.end()));
  std::vector<std::vector<double>> result(static_cast<std::size_t>(n), std::vector<double>(h));
  for (std::size_t g = 0; g < result.size(); ++g) {
    for (std::size_t k = 0; k < h; ++k) result[g][k] = static_cast<double>(acc[g][k] / permutations);
  }
  return result;
}

Explanation explain(const Dataset& dataset, const ForecastTask& task, const GroupingSpec& spec,
                    const Forecaster& forecaster, const EngineOptions& options) {
  return compute_shap(evaluate_coalitions(dataset, task, spec, forecaster, options), options.tolerance);
}

// --- persistence -----------------------------------------------------------

namespace {

json grouping_to_json(const GroupingSpec& spec) {
  json temporal = json::array();
  for (const auto& g : spec.temporal) {
    temporal.push_back({{"name", g.name}, {"oldest_offset", g.oldest_offset}, {"newest_offset", g.newest_offset}});
  }
  return {{"temporal", temporal}, {"covariates", spec.covariates}, {"dropped", spec.dropped}};
}

GroupingSpec grouping_from_json(const json& j) {
  GroupingSpec spec;
  for (const auto& g : j.at("temporal")) {
    spec.temporal.push_back(
        {g.at("name").get<std::string>(), g.at("oldest_offset").get<int>(), g.at("newest_offset").get<int>()});
  }
  spec.covariates = j.at("covariates").get<std::vector<std::string>>();
  spec.dropped = j.value("dropped", std::vector<std::string>{});
  spec.validate();
  return spec;
}

json task_to_json(const ForecastTask& task) {
  return {{"origin", format_timestamp(task.origin)},
          {"context_hours", task.context_hours},
          {"horizon_hours", task.horizon_hours},
          {"quantiles", task.quantiles}};
}

ForecastTask task_from_json(const json& j) {
  ForecastTask task;
  task.origin = parse_timestamp(j.at("origin").get<std::string>());
  task.context_hours = j.at("context_hours").get<int>();
  task.horizon_hours = j.at("horizon_hours").get<int>();
  task.quantiles = j.at("quantiles").get<std::vector<double>>();
  return task;
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void write_json(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << j.dump(1) << '\n';
}

}  // namespace

void save_explanation(const std::filesystem::path& path, const Explanation& ex) {
  json shap = json::array();
  for (int g = 0; g < ex.spec.size(); ++g) {
    shap.push_back({{"group", ex.spec.group_name(g)}, {"values", ex.shap[static_cast<std::size_t>(g)]}});
  }
  write_json(path, {{"kind", "explanation"},
                    {"version", 1},
                    {"task", task_to_json(ex.task)},
                    {"grouping", grouping_to_json(ex.spec)},
                    {"forecaster", ex.forecaster_id},
                    {"evaluations", ex.evaluations},
                    {"base_substitutions", ex.base_substitutions},
                    {"max_efficiency_residual", ex.max_efficiency_residual},
                    {"base", ex.base},
                    {"full", ex.full},
                    {"shap", shap}});
}

Explanation load_explanation(const std::filesystem::path& path) {
  const auto j = read_json(path);
  try {
    if (j.at("kind") != "explanation") throw DataError(path.string() + ": not an explanation file");
    Explanation ex;
    ex.task = task_from_json(j.at("task"));
    ex.spec = grouping_from_json(j.at("grouping"));
    ex.forecaster_id = j.at("forecaster").get<std::string>();
    ex.evaluations = j.at("evaluations").get<int>();
    ex.base_substitutions = j.value("base_substitutions", 0);
    ex.max_efficiency_residual = j.value("max_efficiency_residual", 0.0);
    ex.base = j.at("base").get<std::vector<double>>();
    ex.full = j.at("full").get<std::vector<double>>();
    const auto& shap = j.at("shap");
    if (static_cast<int>(shap.size()) != ex.spec.size()) throw DataError(path.string() + ": SHAP matrix size mismatch");
    for (int g = 0; g < ex.spec.size(); ++g) {
      const auto& row = shap.at(static_cast<std::size_t>(g));
      if (row.at("group").get<std::string>() != ex.spec.group_name(g)) {
        throw DataError(path.string() + ": SHAP rows out of group order");
      }
      ex.shap.push_back(row.at("values").get<std::vector<double>>());
    }
    return ex;
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void save_coalition_table(const std::filesystem::path& path, const CoalitionTable& table) {
  write_json(path, {{"kind", "coalition_table"},
                    {"version", 1},
                    {"task", task_to_json(table.task)},
                    {"grouping", grouping_to_json(table.spec)},
                    {"forecaster", table.forecaster_id},
                    {"forecaster_calls", table.forecaster_calls},
                    {"base_substitutions", table.base_substitutions},
                    {"from_base", table.from_base},
                    {"values", table.values}});
}

CoalitionTable load_coalition_table(const std::filesystem::path& path) {
  const auto j = read_json(path);
  try {
    if (j.at("kind") != "coalition_table") throw DataError(path.string() + ": not a coalition table file");
    CoalitionTable table;
    table.task = task_from_json(j.at("task"));
    table.spec = grouping_from_json(j.at("grouping"));
    table.forecaster_id = j.at("forecaster").get<std::string>();
    table.forecaster_calls = j.at("forecaster_calls").get<int>();
    table.base_substitutions = j.at("base_substitutions").get<int>();
    table.from_base = j.at("from_base").get<std::vector<std::uint8_t>>();
    table.values = j.at("values").get<std::vector<std::vector<double>>>();
    table.validate();
    return table;
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void write_shap_long_csv(std::ostream& out, const Explanation& ex, bool header) {
  if (header) out << "origin,horizon_hour,group,shap_value\n";
  const auto origin = format_timestamp(ex.task.origin);
  char buf[64];
  for (std::size_t k = 0; k < ex.full.size(); ++k) {
    for (int g = 0; g < ex.spec.size(); ++g) {
      auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, ex.shap[static_cast<std::size_t>(g)][k]);
      out << origin << ',' << k << ',' << ex.spec.group_name(g) << ',' << std::string_view(buf, ptr) << '\n';
    }
  }
}

}  // namespace cshap
