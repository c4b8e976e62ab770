#include "cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

#include "coalition_shap/analytics.hpp"
#include "coalition_shap/config.hpp"
#include "coalition_shap/errors.hpp"
#include "coalition_shap/shap_engine.hpp"

namespace cshap::cli {

namespace fs = std::filesystem;
using std::chrono::hours;

namespace {

struct Options {
  std::string config;
  std::string forecaster;
  std::optional<int> context_hours;
  std::optional<int> stride;
  std::string origins = "midnights";
  std::string out;
  std::optional<int> workers;
  std::optional<std::uint64_t> seed;
  std::vector<int> context_sweep;
  std::string report_kind;
  std::string group;
  std::string interaction;
  std::string month;
};

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> items;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (!item.empty()) items.push_back(item);
  }
  return items;
}

std::string compact(Timestamp t) {
  std::string s = format_timestamp(t);  // YYYY-MM-DDTHH:00:00Z
  return s.substr(0, 4) + s.substr(5, 2) + s.substr(8, 2) + "T" + s.substr(11, 2);
}

void write_file(const fs::path& path, const std::function<void(std::ostream&)>& body) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  body(out);
  if (!out) throw DataError("write failed: " + path.string());
}

class Session {
 public:
  Session(Options opts, std::ostream& out, std::shared_ptr<spdlog::logger> log)
      : opts_(std::move(opts)), out_(out), log_(std::move(log)) {
    config_ = load_config(opts_.config);
    if (!opts_.out.empty()) config_.out = opts_.out;
    if (opts_.workers) config_.workers = *opts_.workers;
    if (opts_.seed) {
      config_.seed = *opts_.seed;
      if (config_.synthetic) config_.synthetic->seed = *opts_.seed;
    }
    if (opts_.context_hours) config_.context_hours = *opts_.context_hours;
    config_.validate();
  }

  int ingest() {
    const auto dataset = load_sources(config_);
    const auto bundle = write_bundle(config_.bundle_dir(), dataset, config_.timezone);
    out_ << "ingested " << dataset.target().size() << " hours (" << format_timestamp(dataset.start()) << " .. "
         << format_timestamp(dataset.end()) << "), 1 target + " << bundle.covariates.size() << " covariates -> "
         << (config_.bundle_dir() / "manifest.json").string() << '\n';
    for (const auto& f : bundle.files) log_->info("{} {} sha256={}", f.role, f.path.string(), f.sha256);
    return 0;
  }

  int evaluate() {
    const auto dataset = load_dataset();
    const auto split = resolve_split(config_, dataset);
    const int stride = opts_.stride.value_or(1);
    std::vector<std::string> selectors =
        opts_.forecaster.empty() ? std::vector<std::string>{config_.forecaster} : split_list(opts_.forecaster);
    std::vector<int> contexts = opts_.context_sweep;
    const bool sweep = !contexts.empty();
    if (!sweep) contexts.push_back(config_.context_hours.value_or(0));

    std::ostringstream metrics, per_lead;
    metrics << "model,stride,mae,rmse,mape,n\n";
    per_lead << "model,stride,lead,mae,rmse,mape,n\n";
    for (const auto& selector : selectors) {
      for (int requested : contexts) {
        auto fb = make_forecaster(config_, selector, dataset, split, requested);
        const int context = requested > 0 ? requested : fb.default_context_hours;
        RollingOptions ro;
        ro.from = split.val_end;
        ro.to = split.test_end;
        ro.stride_hours = stride;
        ro.context_hours = context;
        ro.workers = workers();
        log_->info("evaluating {} with {} h context over {} .. {}", fb.forecaster->id(), context,
                   format_timestamp(ro.from), format_timestamp(ro.to));
        const auto result = rolling_evaluation(dataset, *fb.forecaster, ro);
        const std::string model = sweep ? fb.forecaster->id() + "@" + std::to_string(context) : fb.forecaster->id();
        const auto& m = result.pooled;
        metrics << model << ',' << stride << ',' << num(m.mae) << ',' << num(m.rmse) << ',' << num(m.mape) << ','
                << m.n << '\n';
        for (std::size_t k = 0; k < result.per_lead.size(); ++k) {
          const auto& l = result.per_lead[k];
          per_lead << model << ',' << stride << ',' << k + 1 << ',' << num(l.mae) << ',' << num(l.rmse) << ','
                   << num(l.mape) << ',' << l.n << '\n';
        }
        out_ << model << ": MAE " << fixed(m.mae, 1) << " MW, RMSE " << fixed(m.rmse, 1) << " MW, MAPE "
             << fixed(m.mape, 2) << " % over " << m.n << " hours from " << result.origins << " origins\n";
      }
    }
    write_file(config_.out / "metrics.csv", [&](std::ostream& o) { o << metrics.str(); });
    write_file(config_.out / "metrics_per_lead.csv", [&](std::ostream& o) { o << per_lead.str(); });
    return 0;
  }

  int explain() {
    const auto dataset = load_dataset();
    const auto split = resolve_split(config_, dataset);
    const auto selector = opts_.forecaster.empty() ? config_.forecaster : opts_.forecaster;
    const int requested = config_.context_hours.value_or(0);
    auto fb = make_forecaster(config_, selector, dataset, split, requested);
    const int context = requested > 0 ? requested : fb.default_context_hours;
    const auto grouping = make_grouping(config_.grouping_edges, config_.grouping_names, dataset.covariate_names(),
                                        context);
    for (const auto& d : grouping.dropped) log_->warn("window '{}' lies outside the {} h context", d, context);

    const auto origins = resolve_origins(dataset, split, context);
    if (origins.empty()) {
      out_ << "no origins to explain\n";
      return 0;
    }
    EngineOptions eo;
    eo.workers = workers();
    eo.base_window_hours = config_.base_window_hours;
    if (fb.remote) eo.tolerance = EfficiencyTolerance::remote();

    fs::create_directories(config_.out / "explanations");
    fs::create_directories(config_.out / "tables");
    const auto start = std::chrono::steady_clock::now();
    std::vector<Explanation> explanations;
    long calls = 0, base = 0;
    for (const auto origin : origins) {
      ForecastTask task{origin, context, 24, {0.5}};
      const auto table = evaluate_coalitions(dataset, task, grouping, *fb.forecaster, eo);
      Explanation ex;
      try {
        ex = compute_shap(table, eo.tolerance);
      } catch (const InvariantError& e) {
        throw InvariantError("origin " + format_timestamp(origin) + ": " + e.what());
      }
      const auto name = compact(origin);
      save_explanation(config_.out / "explanations" / (name + ".json"), ex);
      save_coalition_table(config_.out / "tables" / (name + ".json"), table);
      calls += table.forecaster_calls;
      base += table.base_substitutions;
      log_->info("{}: {} forecaster calls, {} base substitutions, max residual {:.3g}", format_timestamp(origin),
                 table.forecaster_calls, table.base_substitutions, ex.max_efficiency_residual);
      explanations.push_back(std::move(ex));
    }
    write_file(config_.out / "shap_long.csv", [&](std::ostream& o) {
      bool header = true;
      for (const auto& ex : explanations) {
        write_shap_long_csv(o, ex, header);
        header = false;
      }
    });
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const auto per = (calls + base) / static_cast<long>(origins.size());
    out_ << "explained " << origins.size() << " origin(s) with " << fb.forecaster->id() << ": " << per
         << " evaluations per explanation (N=" << grouping.size() << ", " << calls << " forecaster calls, " << base
         << " base substitutions in total), wall time " << fixed(seconds, 3) << " s\n";
    return 0;
  }

  int report() {
    const auto explanations = load_explanations();
    const auto dir = config_.out / "reports";
    if (opts_.report_kind == "importance") {
      const auto table = global_importance(explanations);
      write_file(dir / "importance.csv", [&](std::ostream& o) { write_importance_csv(o, table); });
      write_file(dir / "importance.svg", [&](std::ostream& o) {
        write_importance_svg(o, table, "Global importance over " + std::to_string(explanations.size()) +
                                           " explanations (% of absolute SHAP)");
      });
      for (const auto& [g, p] : table.percent) out_ << g << ' ' << fixed(p, 2) << " %\n";
      return 0;
    }
    const auto dataset = load_dataset();
    const auto zone = config_.zone();
    if (opts_.report_kind == "dependence") {
      std::vector<std::string> groups =
          opts_.group.empty() ? explanations.front().spec.covariates : split_list(opts_.group);
      for (const auto& g : groups) {
        const std::string label = opts_.interaction.empty() ? (g == "holiday" ? "day" : "hour") : opts_.interaction;
        if (label != "hour" && label != "day") throw ConfigError("interaction must be 'hour' or 'day'");
        const auto interaction = label == "day" ? Interaction::kDayCategory : Interaction::kHourOfDay;
        const auto table = dependence_table(explanations, dataset, g, interaction, zone);
        const auto stem = "dependence_" + g + "_" + label;
        write_file(dir / (stem + ".csv"), [&](std::ostream& o) { write_dependence_csv(o, table); });
        write_file(dir / (stem + ".svg"), [&](std::ostream& o) {
          write_dependence_svg(o, table, "SHAP of " + g + " by " + (label == "day" ? "day category" : "hour of day"));
        });
        out_ << stem << ": " << table.size() << " rows\n";
      }
      return 0;
    }
    if (opts_.report_kind == "local") {
      for (const auto& [month, range] : months(explanations, zone)) {
        const auto report = local_report(explanations, dataset, range.first, range.second);
        for (const auto& [from, to] : report.gaps) {
          log_->warn("{}: no explanation covers {} .. {}", month, format_timestamp(from), format_timestamp(to));
        }
        write_file(dir / ("local_" + month + ".csv"), [&](std::ostream& o) { write_local_report_csv(o, report); });
        write_file(dir / ("local_" + month + ".svg"),
                   [&](std::ostream& o) { write_local_report_svg(o, report, "Local explanations " + month); });
        out_ << "local_" << month << ": " << report.rows.size() << " hours, " << report.gaps.size() << " gap(s)\n";
      }
      return 0;
    }
    throw ConfigError("unknown report kind '" + opts_.report_kind + "' (importance, dependence, local)");
  }

 private:
  static std::string num(double v) {
    std::ostringstream s;
    s.precision(17);
    s << v;
    return s.str();
  }

  static std::string fixed(double v, int digits) {
    std::ostringstream s;
    s.setf(std::ios::fixed);
    s.precision(digits);
    s << v;
    return s.str();
  }

  int workers() const {
    if (config_.workers > 0) return config_.workers;
    return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  }

  Dataset load_dataset() const {
    const auto bundle = config_.bundle_dir();
    if (fs::exists(bundle / "manifest.json")) {
      log_->debug("reading dataset bundle {}", bundle.string());
      return read_bundle(bundle);
    }
    log_->info("no bundle at {}, reading configured sources", bundle.string());
    return load_sources(config_);
  }

  std::vector<Timestamp> resolve_origins(const Dataset& dataset, const SplitSpec& split, int context) const {
    std::vector<Timestamp> origins;
    const auto& spec = opts_.origins;
    if (spec == "midnights" || spec == "utc-midnights") {
      const bool utc = spec == "utc-midnights" || config_.utc_midnights;
      const auto zone = utc ? TimeZone::utc() : config_.zone();
      const auto earliest = std::max(split.val_end, dataset.start() + hours{context});
      for (auto date = zone.to_local(earliest).date;; date += std::chrono::days{1}) {
        const auto origin = zone.start_of_day(date);
        if (origin + hours{24} > split.test_end) break;
        if (origin >= earliest) origins.push_back(origin);
      }
      return origins;
    }
    for (const auto& item : split_list(spec)) {
      try {
        origins.push_back(parse_timestamp(item));
      } catch (const Error& e) {
        throw ConfigError("bad origin '" + item + "': " + e.what());
      }
    }
    std::sort(origins.begin(), origins.end());
    origins.erase(std::unique(origins.begin(), origins.end()), origins.end());
    return origins;
  }

  std::vector<Explanation> load_explanations() const {
    const auto dir = config_.out / "explanations";
    std::vector<fs::path> files;
    if (fs::is_directory(dir)) {
      for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.path().extension() == ".json") files.push_back(entry.path());
      }
    }
    if (files.empty()) throw DataError("no explanations found in " + dir.string());
    std::sort(files.begin(), files.end());
    std::vector<Explanation> explanations;
    for (const auto& f : files) explanations.push_back(load_explanation(f));
    return explanations;
  }

  /// Local-calendar months touched by the explanations, or the requested one.
  std::map<std::string, std::pair<Timestamp, Timestamp>> months(const std::vector<Explanation>& explanations,
                                                                const TimeZone& zone) const {
    using namespace std::chrono;
    std::map<std::string, std::pair<Timestamp, Timestamp>> result;
    auto add = [&](year_month ym) {
      char key[16];
      std::snprintf(key, sizeof key, "%04d-%02u", static_cast<int>(ym.year()), static_cast<unsigned>(ym.month()));
      const auto next = ym + std::chrono::months{1};
      result[key] = {zone.start_of_day(local_days{ym / 1}), zone.start_of_day(local_days{next / 1})};
    };
    if (!opts_.month.empty()) {
      const auto d = parse_date(opts_.month + "-01");
      const year_month_day ymd{d};
      add(ymd.year() / ymd.month());
      return result;
    }
    for (const auto& ex : explanations) {
      for (int k = 0; k < ex.task.horizon_hours; ++k) {
        const year_month_day ymd{zone.to_local(ex.task.origin + hours{k}).date};
        add(ymd.year() / ymd.month());
      }
    }
    return result;
  }

  Options opts_;
  std::ostream& out_;
  std::shared_ptr<spdlog::logger> log_;
  RunConfig config_;
};

std::shared_ptr<spdlog::logger> make_logger(std::ostream& err) {
  auto sink = std::make_shared<spdlog::sinks::ostream_sink_mt>(err);
  auto log = std::make_shared<spdlog::logger>("coalition-shap", sink);
  log->set_pattern("[%l] %v");
  const char* env = std::getenv("COALITION_SHAP_LOG");
  log->set_level(env != nullptr ? spdlog::level::from_str(env) : spdlog::level::warn);
  return log;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options opts;
  CLI::App app{"Exact grouped SHAP for covariate-informed forecasters"};
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--config", opts.config, "Run configuration (JSON)")->required()->check(CLI::ExistingFile);
  app.add_option("--forecaster", opts.forecaster, "NAME, exec:CMD or http:URL (evaluate: comma list)");
  app.add_option("--context-hours", opts.context_hours, "Context length C")->check(CLI::PositiveNumber);
  app.add_option("--out", opts.out, "Output directory");
  app.add_option("--workers", opts.workers, "Parallel workers")->check(CLI::NonNegativeNumber);
  app.add_option("--seed", opts.seed, "Seed for synthetic data");

  auto* ingest = app.add_subcommand("ingest", "Write the canonical dataset bundle");
  auto* evaluate = app.add_subcommand("evaluate", "Rolling-origin evaluation over the test span");
  evaluate->add_option("--stride", opts.stride, "Hours between origins")->check(CLI::PositiveNumber);
  evaluate->add_option("--context-sweep", opts.context_sweep, "Context lengths to compare")->delimiter(',');
  auto* explain = app.add_subcommand("explain", "Explain forecasts at the given origins");
  explain->add_option("--origins", opts.origins, "midnights, utc-midnights or a comma list of timestamps");
  auto* report = app.add_subcommand("report", "Aggregate saved explanations");
  report->add_option("kind", opts.report_kind, "importance, dependence or local")
      ->required()
      ->check(CLI::IsMember({"importance", "dependence", "local"}));
  report->add_option("--group", opts.group, "Covariate group(s) for dependence");
  report->add_option("--interaction", opts.interaction, "hour or day");
  report->add_option("--month", opts.month, "YYYY-MM for local");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return static_cast<int>(ErrorKind::kUsage);
  }

  const auto log = make_logger(err);
  try {
    Session session(opts, out, log);
    if (ingest->parsed()) return session.ingest();
    if (evaluate->parsed()) return session.evaluate();
    if (explain->parsed()) return session.explain();
    if (report->parsed()) return session.report();
    return static_cast<int>(ErrorKind::kUsage);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return static_cast<int>(e.kind());
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return static_cast<int>(ErrorKind::kData);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return static_cast<int>(ErrorKind::kForecaster);
  }
}

}  // namespace cshap::cli
