#include <doctest.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <random>
#include <sstream>

#include "coalition_shap/builtin.hpp"
#include "coalition_shap/errors.hpp"
#include "coalition_shap/shap_engine.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace cshap;
using std::chrono::hours;

namespace {

const std::vector<std::string> kCovariates{"temperature", "irradiance", "holiday"};

void check_matrix_close(const std::vector<std::vector<double>>& a, const std::vector<std::vector<double>>& b,
                        double tol) {
  REQUIRE(a.size() == b.size());
  for (std::size_t g = 0; g < a.size(); ++g) {
    REQUIRE(a[g].size() == b[g].size());
    for (std::size_t k = 0; k < a[g].size(); ++k) CHECK(std::abs(a[g][k] - b[g][k]) <= tol);
  }
}

/// Constant covariates: temperature 10, irradiance 300, holiday 0.
Dataset flat_weather(int hours_total) {
  const auto base = fixture::ramp(hours_total);
  const auto t0 = base.start();
  const auto n = static_cast<std::size_t>(hours_total);
  return Dataset(base.target(), {{HourlySeries("temperature", t0, std::vector<Value>(n, 10.0)), true},
                                 {HourlySeries("irradiance", t0, std::vector<Value>(n, 300.0)), true},
                                 {HourlySeries("holiday", t0, std::vector<Value>(n, 0.0)), true}});
}

class Counting : public Forecaster {
 public:
  explicit Counting(Capabilities caps = {}) : caps_(caps) {}
  std::string id() const override { return "counting"; }
  Capabilities capabilities() const override { return caps_; }
  ForecastOutput predict(const MaskedInput& in) const override {
    ++calls;
    double v = static_cast<double>(in.target.size());
    for (const auto& c : in.covariates) v += 1000.0 * static_cast<double>(c.name.size());
    return ForecastOutput::constant(v, in.horizon_hours);
  }
  mutable std::atomic<int> calls{0};

 private:
  Capabilities caps_;
};

class Failing : public Forecaster {
 public:
  std::string id() const override { return "failing"; }
  Capabilities capabilities() const override { return {}; }
  ForecastOutput predict(const MaskedInput& in) const override {
    if (in.covariates.size() == 3) throw std::runtime_error("model exploded");
    return ForecastOutput::constant(1.0, in.horizon_hours);
  }
};

}  // namespace

TEST_CASE("shapley weights") {
  CHECK(shapley_weight(0, 7) == doctest::Approx(1.0 / 7.0).epsilon(1e-15));
  CHECK(shapley_weight(6, 7) == doctest::Approx(1.0 / 7.0).epsilon(1e-15));
  CHECK(shapley_weight(3, 7) == doctest::Approx(1.0 / 140.0).epsilon(1e-15));
  for (int n = 1; n <= 10; ++n) {
    long double sum = 0.0L;
    for (int s = 0; s < n; ++s) sum += static_cast<long double>(binomial(n - 1, s)) * shapley_weight(s, n);
    CHECK(static_cast<double>(sum) == doctest::Approx(1.0).epsilon(1e-14));
  }
  CHECK(shapley_weight(10, 20) > 0.0);
  CHECK_THROWS_AS(shapley_weight(7, 7), ConfigError);
  CHECK_THROWS_AS(shapley_weight(-1, 7), ConfigError);
  CHECK(binomial(20, 10) == 184756u);
  CHECK(binomial(62, 31) == 465428353255261088ull);
}

TEST_CASE("two-player game by hand") {
  CoalitionTable table;
  table.task.horizon_hours = 1;
  table.spec.covariates = {"one", "two"};
  table.values = {{0.0}, {1.0}, {3.0}, {6.0}};
  table.from_base = {1, 0, 0, 0};
  const auto ex = compute_shap(table);
  CHECK(ex.shap[0][0] == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(ex.shap[1][0] == doctest::Approx(4.0).epsilon(1e-15));
  const auto perm = permutation_oracle(table);
  CHECK(perm[0][0] == doctest::Approx(2.0));
  CHECK(perm[1][0] == doctest::Approx(4.0));
}

TEST_CASE("single player takes the whole shift") {
  CoalitionTable table;
  table.task.horizon_hours = 2;
  table.spec.covariates = {"only"};
  table.values = {{1.0, 2.0}, {4.0, -3.0}};
  const auto ex = compute_shap(table);
  CHECK(ex.shap[0] == std::vector<double>{3.0, -5.0});
  CHECK(permutation_oracle(table)[0] == std::vector<double>{3.0, -5.0});
}

TEST_CASE("empty grouping holds only the base") {
  const auto data = fixture::ramp(300);
  const ForecastTask task{data.start() + hours{200}, 48, 24, {0.5}};
  oracle::MeanStub stub(Capabilities{});
  const auto table = evaluate_coalitions(data, task, GroupingSpec{}, stub);
  REQUIRE(table.values.size() == 1);
  CHECK(table.forecaster_calls == 0);
  CHECK(table.base_substitutions == 1);
  const auto ex = compute_shap(table);
  CHECK(ex.shap.empty());
  CHECK(ex.base == ex.full);
  CHECK(ex.base == base_prediction(data, task, 8064).median);
}

TEST_CASE("weighted formula agrees with both reference oracles on random tables") {
  std::mt19937_64 rng(2024);
  for (int n = 1; n <= 6; ++n) {
    for (int trial = 0; trial < 5; ++trial) {
      const auto table = oracle::random_table(rng, n, 4);
      const auto ex = compute_shap(table);
      check_matrix_close(ex.shap, oracle::subset_shapley(oracle::table_game(table), n), 1e-9);
      check_matrix_close(ex.shap, oracle::ordering_shapley(oracle::table_game(table), n), 1e-9);
      if (n <= 8) check_matrix_close(permutation_oracle(table), oracle::ordering_shapley(oracle::table_game(table), n), 1e-9);
    }
  }
  CoalitionTable nine;
  nine.task.horizon_hours = 1;
  for (int g = 0; g < 9; ++g) nine.spec.covariates.push_back("g" + std::to_string(g));
  nine.values.assign(512, {0.0});
  CHECK_THROWS_AS(permutation_oracle(nine), ConfigError);
}

TEST_CASE("additive oracle: the covariate shift is attributed to its group") {
  const auto data = flat_weather(2000);
  const ForecastTask task{data.start() + hours{1500}, 1000, 24, {0.5}};
  const auto spec = default_grouping(data, task);
  const AdditiveOracle f({500.0, {{"temperature", 2.0}}, {}}, spec);
  const auto ex = explain(data, task, spec, f);
  CHECK(ex.base == std::vector<double>(24, 500.0));
  CHECK(ex.full == std::vector<double>(24, 520.0));
  for (int g = 0; g < spec.size(); ++g) {
    const double expected = spec.group_name(g) == "temperature" ? 20.0 : 0.0;
    for (double v : ex.shap[static_cast<std::size_t>(g)]) CHECK(std::abs(v - expected) <= 1e-9);
  }
  const auto brute = oracle::subset_shapley(
      [&](std::uint32_t bits) {
        const auto m = apply_coalition(data, task, spec, Coalition{bits}, f.capabilities());
        if (std::holds_alternative<BaseSignal>(m)) return std::vector<double>(24, 500.0);
        return f.predict(std::get<MaskedInput>(m)).median;
      },
      spec.size());
  check_matrix_close(ex.shap, brute, 1e-9);
}

TEST_CASE("null game and null player") {
  const auto data = flat_weather(2000);
  const ForecastTask task{data.start() + hours{1500}, 1000, 24, {0.5}};
  const auto spec = default_grouping(data, task);
  const AdditiveOracle constant({123.0, {}, {}}, spec);
  const auto ex = explain(data, task, spec, constant);
  CHECK(ex.base == ex.full);
  for (const auto& row : ex.shap) {
    for (double v : row) CHECK(v == 0.0);
  }

  const AdditiveOracle zero_weight({0.0, {{"temperature", 2.0}, {"irradiance", 0.0}}, {{"last_day", 0.5}}}, spec);
  const auto table = evaluate_coalitions(data, task, spec, zero_weight);
  const int irr = spec.index_of("irradiance");
  for (std::uint32_t bits = 0; bits < table.values.size(); ++bits) {
    if (bits & (1u << irr)) continue;
    CHECK(table.values[bits] == table.values[bits | (1u << irr)]);
  }
  const auto ex2 = compute_shap(table);
  for (double v : ex2.group_shap("irradiance")) CHECK(v == 0.0);
}

TEST_CASE("duplicated covariates receive equal attributions") {
  const auto base = fixture::ramp(2000, {"temperature"});
  auto twin = base.covariate("temperature");
  twin.series = HourlySeries("temperature_copy", twin.series.start(),
                             std::vector<Value>(twin.series.values().begin(), twin.series.values().end()));
  const Dataset data(base.target(), {base.covariate("temperature"), twin});
  const ForecastTask task{data.start() + hours{1500}, 1000, 24, {0.5}};
  const auto spec = default_grouping(data, task);
  const AdditiveOracle f({0.0, {{"temperature", 3.0}, {"temperature_copy", 3.0}}, {{"short_term", 0.1}}}, spec);
  const auto ex = explain(data, task, spec, f);
  const auto& a = ex.group_shap("temperature");
  const auto& b = ex.group_shap("temperature_copy");
  for (std::size_t k = 0; k < a.size(); ++k) CHECK(std::abs(a[k] - b[k]) <= 1e-9);
}

TEST_CASE("every coalition is evaluated exactly once") {
  const auto data = fixture::ramp(2000, kCovariates);
  const ForecastTask task{data.start() + hours{1500}, 1000, 24, {0.5}};
  const auto spec = default_grouping(data, task);
  Counting f;
  oracle::Recorder rec(f);
  const auto table = evaluate_coalitions(data, task, spec, rec, {.workers = 4});
  CHECK(table.forecaster_calls + table.base_substitutions == 128);
  CHECK(f.calls.load() == table.forecaster_calls);
  CHECK(rec.calls() == table.forecaster_calls);
  // Only the empty coalition and the covariate-only ones fall back to the base.
  CHECK(table.base_substitutions == 8);
  auto inputs = rec.inputs();
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    for (std::size_t j = i + 1; j < inputs.size(); ++j) CHECK_FALSE(inputs[i] == inputs[j]);
  }
}

TEST_CASE("worker count does not change the table") {
  const auto data = fixture::ramp(2000, kCovariates);
  const ForecastTask task{data.start() + hours{1500}, 1000, 24, {0.5}};
  const auto spec = default_grouping(data, task);
  const AdditiveOracle f({7.0, {{"temperature", 2.0}, {"holiday", -5.0}}, {{"last_day", 0.25}, {"long_term", -0.5}}},
                         spec);
  const auto one = evaluate_coalitions(data, task, spec, f, {.workers = 1});
  const auto eight = evaluate_coalitions(data, task, spec, f, {.workers = 8});
  CHECK(one.values == eight.values);
  CHECK(compute_shap(one).shap == compute_shap(eight).shap);
  const auto again = evaluate_coalitions(data, task, spec, f, {.workers = 1});
  CHECK(again.values == one.values);
}

TEST_CASE("serial-only forecasters are called from one thread") {
  const auto data = fixture::ramp(2000, kCovariates);
  const ForecastTask task{data.start() + hours{1500}, 1000, 24, {0.5}};
  const auto spec = default_grouping(data, task);
  Capabilities serial;
  serial.serial_only = true;
  Counting f(serial);
  const auto table = evaluate_coalitions(data, task, spec, f, {.workers = 8});
  CHECK(f.calls.load() == table.forecaster_calls);
}

TEST_CASE("forecaster errors name the origin and coalition") {
  const auto data = fixture::ramp(2000, kCovariates);
  const ForecastTask task{data.start() + hours{1500}, 1000, 24, {0.5}};
  const auto spec = default_grouping(data, task);
  Failing f;
  try {
    evaluate_coalitions(data, task, spec, f, {.workers = 3});
    FAIL("expected a failure");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kForecaster);
    const std::string what = e.what();
    CHECK(what.find(format_timestamp(task.origin)) != std::string::npos);
    CHECK(what.find("coalition") != std::string::npos);
    CHECK(what.find("model exploded") != std::string::npos);
  }
}

TEST_CASE("efficiency violations are hard errors") {
  std::mt19937_64 rng(5);
  bool found = false;
  for (int trial = 0; trial < 200 && !found; ++trial) {
    auto table = oracle::random_table(rng, 5, 1);
    for (auto& v : table.values) v[0] *= 1e13;
    const auto ex = compute_shap(table, {1e300, 0.0});
    if (ex.max_efficiency_residual > 0.0) {
      found = true;
      CHECK_THROWS_AS(compute_shap(table, {0.0, 0.0}), InvariantError);
    }
  }
  CHECK(found);
  CHECK(EfficiencyTolerance::remote().bound(1000.0) == doctest::Approx(1e-9 + 1e-3));
}

TEST_CASE("explanations and tables survive a JSON round trip") {
  const auto dir = fixture::temp_dir("engine_io");
  const auto data = fixture::ramp(2000, kCovariates);
  const ForecastTask task{data.start() + hours{1500}, 1000, 24, {0.5}};
  const auto spec = default_grouping(data, task);
  const AdditiveOracle f({1.0 / 3.0, {{"temperature", 2.0}}, {{"intermediate", 0.1}}}, spec);
  const auto table = evaluate_coalitions(data, task, spec, f);
  const auto ex = compute_shap(table);
  save_explanation(dir / "ex.json", ex);
  save_coalition_table(dir / "t.json", table);
  const auto ex2 = load_explanation(dir / "ex.json");
  const auto t2 = load_coalition_table(dir / "t.json");
  CHECK(ex2.shap == ex.shap);
  CHECK(ex2.base == ex.base);
  CHECK(ex2.full == ex.full);
  CHECK(ex2.spec == ex.spec);
  CHECK(ex2.task.origin == ex.task.origin);
  CHECK(ex2.evaluations == ex.evaluations);
  CHECK(t2.values == table.values);
  CHECK(t2.from_base == table.from_base);

  std::ostringstream csv;
  write_shap_long_csv(csv, ex);
  const auto text = csv.str();
  CHECK(text.rfind("origin,horizon_hour,group,shap_value\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 1 + 7 * 24);
  CHECK_THROWS_AS(load_explanation(dir / "missing.json"), DataError);
}
