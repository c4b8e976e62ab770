#include <cmath>
#include <sstream>

#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "cli.hpp"
#include "coalition_shap/analytics.hpp"
#include "coalition_shap/builtin.hpp"
#include "coalition_shap/errors.hpp"
#include "coalition_shap/shap_engine.hpp"
#include "coalition_shap/wire.hpp"

namespace py = pybind11;
using namespace cshap;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

std::vector<Value> to_values(const Array& a) {
  std::vector<Value> out;
  const auto r = a.unchecked<1>();
  for (py::ssize_t i = 0; i < r.shape(0); ++i) {
    if (std::isnan(r(i))) {
      out.emplace_back(std::nullopt);
    } else {
      out.emplace_back(r(i));
    }
  }
  return out;
}

Array from_values(std::span<const Value> values) {
  Array out(static_cast<py::ssize_t>(values.size()));
  auto w = out.mutable_unchecked<1>();
  for (std::size_t i = 0; i < values.size(); ++i) w(static_cast<py::ssize_t>(i)) = values[i].value_or(NAN);
  return out;
}

Array matrix(const std::vector<std::vector<double>>& rows) {
  const auto n = static_cast<py::ssize_t>(rows.size());
  const auto h = n == 0 ? py::ssize_t{0} : static_cast<py::ssize_t>(rows.front().size());
  Array out({n, h});
  auto w = out.mutable_unchecked<2>();
  for (py::ssize_t g = 0; g < n; ++g) {
    for (py::ssize_t k = 0; k < h; ++k) w(g, k) = rows[static_cast<std::size_t>(g)][static_cast<std::size_t>(k)];
  }
  return out;
}

Dataset make_dataset(const std::string& start, const Array& target, const std::map<std::string, Array>& covariates,
                     const std::vector<std::string>& holidays) {
  const auto t0 = parse_timestamp(start);
  std::vector<CovariateSeries> covs;
  for (const auto& [name, values] : covariates) covs.push_back({HourlySeries(name, t0, to_values(values)), true});
  HolidayCalendar calendar;
  for (const auto& d : holidays) calendar.insert(parse_date(d));
  return Dataset(HourlySeries("load", t0, to_values(target)), std::move(covs), std::move(calendar));
}

CoalitionTable table_from(const Array& values, const std::vector<std::string>& groups) {
  if (values.ndim() != 2) throw ConfigError("coalition table must be 2-D (2^N x H)");
  CoalitionTable table;
  table.spec.covariates = groups;
  table.task.horizon_hours = static_cast<int>(values.shape(1));
  const auto r = values.unchecked<2>();
  for (py::ssize_t c = 0; c < r.shape(0); ++c) {
    std::vector<double> row;
    for (py::ssize_t k = 0; k < r.shape(1); ++k) row.push_back(r(c, k));
    table.values.push_back(std::move(row));
  }
  table.from_base.assign(table.values.size(), 0);
  return table;
}

py::dict input_to_dict(const MaskedInput& in) {
  py::list times, target;
  for (const auto& p : in.target) {
    times.append(format_timestamp(p.time));
    target.append(p.value ? py::cast(*p.value) : py::none());
  }
  py::dict covariates;
  for (const auto& c : in.covariates) {
    py::dict d;
    d["past"] = from_values(c.past);
    d["future"] = c.future ? py::cast(*c.future) : py::none();
    covariates[py::str(c.name)] = d;
  }
  py::dict out;
  out["origin"] = format_timestamp(in.origin);
  out["horizon"] = in.horizon_hours;
  out["target_times"] = times;
  out["target"] = target;
  out["covariates"] = covariates;
  return out;
}

/// Forecaster implemented by a Python callable taking the masked input as a
/// dict and returning the median forecast.
class CallbackForecaster : public Forecaster {
 public:
  CallbackForecaster(py::function fn, Capabilities caps, std::string name)
      : fn_(std::move(fn)), caps_(caps), name_(std::move(name)) {
    caps_.serial_only = true;
    caps_.validate();
  }
  std::string id() const override { return name_; }
  Capabilities capabilities() const override { return caps_; }
  ForecastOutput predict(const MaskedInput& input) const override {
    py::gil_scoped_acquire gil;
    ForecastOutput out;
    out.median = py::cast<std::vector<double>>(fn_(input_to_dict(input)));
    return out;
  }

 private:
  py::function fn_;
  Capabilities caps_;
  std::string name_;
};

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Exact grouped SHAP for covariate-informed load forecasters";

  static py::exception<Error> base_error(m, "Error");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      base_error(e.what());
    }
  });

  m.attr("PROTOCOL_VERSION") = kProtocolVersion;
  m.def("binomial", &binomial);
  m.def("shapley_weight", &shapley_weight, py::arg("subset_size"), py::arg("group_count"));

  py::class_<Capabilities>(m, "Capabilities")
      .def(py::init([](bool missing, bool row_drop, bool empty, int max_context) {
             Capabilities c;
             c.accepts_missing_target = missing;
             c.accepts_row_drop = row_drop;
             c.accepts_empty_target = empty;
             c.max_context_hours = max_context;
             return c;
           }),
           py::arg("accepts_missing_target") = true, py::arg("accepts_row_drop") = false,
           py::arg("accepts_empty_target") = false, py::arg("max_context_hours") = 8192)
      .def_readwrite("accepts_missing_target", &Capabilities::accepts_missing_target)
      .def_readwrite("accepts_row_drop", &Capabilities::accepts_row_drop)
      .def_readwrite("accepts_empty_target", &Capabilities::accepts_empty_target)
      .def_readwrite("max_context_hours", &Capabilities::max_context_hours);

  py::class_<Dataset>(m, "Dataset")
      .def(py::init(&make_dataset), py::arg("start"), py::arg("target"),
           py::arg("covariates") = std::map<std::string, Array>{}, py::arg("holidays") = std::vector<std::string>{},
           "Hourly dataset; NaN marks a missing value.")
      .def_property_readonly("start", [](const Dataset& d) { return format_timestamp(d.start()); })
      .def_property_readonly("end", [](const Dataset& d) { return format_timestamp(d.end()); })
      .def_property_readonly("target", [](const Dataset& d) { return from_values(d.target().values()); })
      .def_property_readonly("covariate_names", &Dataset::covariate_names)
      .def("covariate", [](const Dataset& d, const std::string& name) {
        return from_values(d.covariate(name).series.values());
      })
      .def_property_readonly("holidays", [](const Dataset& d) {
        std::vector<std::string> out;
        for (const auto& h : d.holidays()) out.push_back(format_date(h));
        return out;
      })
      .def("__len__", [](const Dataset& d) { return d.target().size(); });

  m.def(
      "synthetic_dataset",
      [](std::uint64_t seed, int days, double noise, const std::string& start) {
        PlantedEffects e;
        e.noise = noise;
        return generate_synthetic_dataset(seed, days, e, parse_date(start));
      },
      py::arg("seed"), py::arg("days") = 365, py::arg("noise") = 50.0, py::arg("start") = "2023-01-02",
      "Synthetic load with planted heating, irradiance and holiday effects (UTC).");

  m.def(
      "default_groups",
      [](const std::vector<std::string>& covariates, int context_hours) {
        return default_grouping(covariates, context_hours).group_names();
      },
      py::arg("covariates"), py::arg("context_hours"));

  py::class_<Explanation>(m, "Explanation")
      .def_property_readonly("origin", [](const Explanation& e) { return format_timestamp(e.task.origin); })
      .def_property_readonly("groups", [](const Explanation& e) { return e.spec.group_names(); })
      .def_readonly("forecaster", &Explanation::forecaster_id)
      .def_readonly("base", &Explanation::base)
      .def_readonly("full", &Explanation::full)
      .def_property_readonly("shap", [](const Explanation& e) { return matrix(e.shap); })
      .def_readonly("evaluations", &Explanation::evaluations)
      .def_readonly("base_substitutions", &Explanation::base_substitutions)
      .def_readonly("max_efficiency_residual", &Explanation::max_efficiency_residual)
      .def("group_shap", &Explanation::group_shap)
      .def("save", [](const Explanation& e, const std::filesystem::path& p) { save_explanation(p, e); })
      .def_static("load", &load_explanation);

  py::class_<Forecaster, std::shared_ptr<Forecaster>>(m, "Forecaster")
      .def_property_readonly("id", &Forecaster::id)
      .def_property_readonly("capabilities", &Forecaster::capabilities);

  py::class_<LinearCovariateForecaster, Forecaster, std::shared_ptr<LinearCovariateForecaster>>(m, "LinearForecaster")
      .def_static(
          "fit",
          [](const Dataset& train, double ridge) {
            return std::make_shared<LinearCovariateForecaster>(
                LinearCovariateForecaster::fit(train, default_recipe(train.covariate_names()), ridge));
          },
          py::arg("train"), py::arg("ridge") = 1.0)
      .def_property_readonly("intercept", &LinearCovariateForecaster::intercept)
      .def("coefficient", &LinearCovariateForecaster::coefficient);

  py::class_<AdditiveOracle, Forecaster, std::shared_ptr<AdditiveOracle>>(m, "AdditiveOracle")
      .def(py::init([](double intercept, std::map<std::string, double> weights,
                       std::map<std::string, double> temporal_weights, const std::vector<std::string>& covariates,
                       int context_hours) {
             return std::make_shared<AdditiveOracle>(
                 AdditiveOracleSpec{intercept, std::move(weights), std::move(temporal_weights)},
                 default_grouping(covariates, context_hours));
           }),
           py::arg("intercept"), py::arg("weights"), py::arg("temporal_weights") = std::map<std::string, double>{},
           py::arg("covariates"), py::arg("context_hours"));

  py::class_<DayTypeBaseline, Forecaster, std::shared_ptr<DayTypeBaseline>>(m, "DayTypeBaseline")
      .def(py::init([](const Dataset& d, const std::string& zone) {
             return std::make_shared<DayTypeBaseline>(d.holidays(), TimeZone(zone));
           }),
           py::arg("dataset"), py::arg("timezone") = "UTC");

  py::class_<SeasonalNaive, Forecaster, std::shared_ptr<SeasonalNaive>>(m, "SeasonalNaive")
      .def(py::init<int>(), py::arg("period_hours") = 168);

  py::class_<CallbackForecaster, Forecaster, std::shared_ptr<CallbackForecaster>>(m, "CallbackForecaster")
      .def(py::init<py::function, Capabilities, std::string>(), py::arg("fn"), py::arg("capabilities"),
           py::arg("name") = "python");

  m.def(
      "remote_forecaster",
      [](const std::string& selector, const Capabilities& caps) {
        return std::shared_ptr<Forecaster>(make_remote_forecaster(selector, caps));
      },
      py::arg("selector"), py::arg("capabilities"), "exec:<command> or http:<url>.");

  m.def(
      "explain",
      [](const Dataset& data, const std::string& origin, int context_hours, const Forecaster& f, int horizon,
         int workers) {
        const ForecastTask task{parse_timestamp(origin), context_hours, horizon, {0.5}};
        EngineOptions opt;
        opt.workers = workers;
        Explanation ex;
        {
          py::gil_scoped_release release;
          ex = explain(data, task, default_grouping(data, task), f, opt);
        }
        return ex;
      },
      py::arg("dataset"), py::arg("origin"), py::arg("context_hours"), py::arg("forecaster"), py::arg("horizon") = 24,
      py::arg("workers") = 1);

  m.def(
      "shap_from_table",
      [](const Array& values, const std::vector<std::string>& groups) {
        return matrix(compute_shap(table_from(values, groups)).shap);
      },
      py::arg("values"), py::arg("groups"), "Row c of `values` is the forecast of coalition bitmask c.");
  m.def(
      "permutation_shap",
      [](const Array& values, const std::vector<std::string>& groups) {
        return matrix(permutation_oracle(table_from(values, groups)));
      },
      py::arg("values"), py::arg("groups"));

  m.def("mae", [](const std::vector<double>& a, const std::vector<double>& p) { return mae(a, p); });
  m.def("rmse", [](const std::vector<double>& a, const std::vector<double>& p) { return rmse(a, p); });
  m.def("mape", [](const std::vector<double>& a, const std::vector<double>& p) { return mape(a, p); });
  m.def(
      "global_importance",
      [](const std::vector<Explanation>& explanations) {
        std::map<std::string, double> out;
        for (const auto& [g, p] : global_importance(explanations).percent) out[g] = p;
        return out;
      },
      py::arg("explanations"), "Percent of summed absolute SHAP per group.");

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        int code = 0;
        {
          py::gil_scoped_release release;
          code = cli::run(args, out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs the command-line interface in-process; returns (exit_code, stdout, stderr).");
}
