#include "coalition_shap/wire.hpp"

#include <charconv>
#include <cmath>
#include <csignal>
#include <mutex>

#include <boost/process.hpp>
#include <httplib.h>
#include <nlohmann/json.hpp>

#include "coalition_shap/errors.hpp"

namespace cshap {

using nlohmann::json;
namespace bp = boost::process;

namespace {

std::string level_key(double level) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, level);
  return std::string(buf, ptr);
}

json value_array(const std::vector<Value>& values) {
  json arr = json::array();
  for (const auto& v : values) {
    if (v) {
      arr.push_back(*v);
    } else {
      arr.push_back(nullptr);
    }
  }
  return arr;
}

std::vector<Value> read_value_array(const json& arr) {
  std::vector<Value> values;
  values.reserve(arr.size());
  for (const auto& v : arr) {
    if (v.is_null()) {
      values.emplace_back(std::nullopt);
    } else if (v.is_number()) {
      values.emplace_back(v.get<double>());
    } else {
      throw ForecasterError("expected number or null");
    }
  }
  return values;
}

std::vector<double> read_finite_array(const json& arr, const char* what) {
  if (!arr.is_array()) throw ForecasterError(std::string(what) + " is not an array");
  std::vector<double> values;
  values.reserve(arr.size());
  for (const auto& v : arr) {
    if (!v.is_number()) throw ForecasterError(std::string(what) + " contains a non-numeric entry");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ForecasterError(std::string(what) + " contains a non-finite value");
    values.push_back(d);
  }
  return values;
}

json parse(std::string_view message) {
  // Infinities are not JSON; a peer that prints them produces a parse error,
  // which is the intended outcome.
  try {
    return json::parse(message);
  } catch (const json::exception& e) {
    throw ForecasterError(std::string("malformed message: ") + e.what());
  }
}

void check_version(const json& j) {
  if (j.contains("protocol_version") && j.at("protocol_version") != kProtocolVersion) {
    throw ForecasterError("protocol version mismatch: peer speaks " + j.at("protocol_version").dump() +
                          ", expected " + std::to_string(kProtocolVersion));
  }
}

}  // namespace

std::string encode_request(const MaskedInput& input) {
  json target = json::array();
  for (const auto& p : input.target) {
    json point = {{"t", format_timestamp(p.time)}};
    point["v"] = p.value ? json(*p.value) : json(nullptr);
    target.push_back(std::move(point));
  }
  json covariates = json::object();
  for (const auto& cov : input.covariates) {
    json c = {{"past", value_array(cov.past)}};
    if (cov.future) c["future"] = *cov.future;
    covariates[cov.name] = std::move(c);
  }
  json j = {{"protocol_version", kProtocolVersion},
            {"origin", format_timestamp(input.origin)},
            {"target", std::move(target)},
            {"covariates", std::move(covariates)},
            {"horizon", input.horizon_hours},
            {"quantiles", input.quantiles}};
  return j.dump();
}

MaskedInput decode_request(std::string_view message) {
  const auto j = parse(message);
  try {
    if (j.at("protocol_version") != kProtocolVersion) {
      throw ForecasterError("protocol version mismatch: request speaks " + j.at("protocol_version").dump());
    }
    MaskedInput input;
    input.origin = parse_timestamp(j.at("origin").get<std::string>());
    input.horizon_hours = j.at("horizon").get<int>();
    input.quantiles = j.value("quantiles", std::vector<double>{0.5});
    for (const auto& p : j.at("target")) {
      const auto& v = p.at("v");
      input.target.push_back(
          {parse_timestamp(p.at("t").get<std::string>()), v.is_null() ? Value{} : Value{v.get<double>()}});
    }
    // nlohmann orders object keys alphabetically; covariate order is not part
    // of the protocol.
    for (const auto& [name, c] : j.at("covariates").items()) {
      CovariateInput cov{name, read_value_array(c.at("past")), std::nullopt};
      if (c.contains("future")) cov.future = read_finite_array(c.at("future"), "future covariate slice");
      input.covariates.push_back(std::move(cov));
    }
    return input;
  } catch (const json::exception& e) {
    throw ForecasterError(std::string("malformed request: ") + e.what());
  } catch (const DataError& e) {
    throw ForecasterError(std::string("malformed request: ") + e.what());
  }
}

std::string encode_response(const ForecastOutput& output) {
  json j = {{"protocol_version", kProtocolVersion}, {"median", output.median}};
  if (!output.quantiles.empty()) {
    json q = json::object();
    for (const auto& [level, values] : output.quantiles) q[level_key(level)] = values;
    j["quantiles"] = std::move(q);
  }
  return j.dump();
}

std::string encode_error_response(std::string_view message) {
  return json{{"protocol_version", kProtocolVersion}, {"error", std::string(message)}}.dump();
}

ForecastOutput decode_response(std::string_view message, int horizon_hours) {
  const auto j = parse(message);
  if (!j.is_object()) throw ForecasterError("response is not a JSON object");
  check_version(j);
  if (j.contains("error")) {
    throw ForecasterError("forecaster reported: " +
                          (j.at("error").is_string() ? j.at("error").get<std::string>() : j.at("error").dump()));
  }
  if (!j.contains("median")) throw ForecasterError("response lacks 'median'");
  ForecastOutput out;
  out.median = read_finite_array(j.at("median"), "median");
  if (j.contains("quantiles")) {
    for (const auto& [key, values] : j.at("quantiles").items()) {
      double level = 0.0;
      auto [ptr, ec] = std::from_chars(key.data(), key.data() + key.size(), level);
      if (ec != std::errc{} || ptr != key.data() + key.size()) {
        throw ForecasterError("quantile key '" + key + "' is not a number");
      }
      out.quantiles[level] = read_finite_array(values, "quantile forecast");
    }
  }
  check_output(out, horizon_hours);
  return out;
}

std::string handle_request(const Forecaster& forecaster, std::string_view message) {
  try {
    return encode_response(forecast(forecaster, decode_request(message)));
  } catch (const std::exception& e) {
    return encode_error_response(e.what());
  }
}

void serve_stdio(const Forecaster& forecaster, std::istream& in, std::ostream& out) {
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    out << handle_request(forecaster, line) << '\n' << std::flush;
  }
}

// --- subprocess transport ---------------------------------------------------

struct ExecForecaster::Process {
  std::mutex mutex;
  bp::opstream to_child;
  bp::ipstream from_child;
  bp::child child;

  explicit Process(const std::string& command)
      : child(bp::search_path("sh"), "-c", command, bp::std_in < to_child, bp::std_out > from_child) {}
};

ExecForecaster::ExecForecaster(std::string command, Capabilities caps)
    : command_(std::move(command)), caps_(caps) {
  caps_.validate();
  // A child that dies mid-run has to surface as a ForecasterError, not kill the process.
  std::signal(SIGPIPE, SIG_IGN);
  try {
    process_ = std::make_unique<Process>(command_);
  } catch (const std::exception& e) {
    throw ForecasterError("cannot start '" + command_ + "': " + e.what());
  }
}

ExecForecaster::~ExecForecaster() {
  if (!process_) return;
  try {
    process_->to_child.close();
    process_->to_child.pipe().close();
    if (!process_->child.wait_for(std::chrono::seconds(5))) process_->child.terminate();
  } catch (...) {
  }
}

ForecastOutput ExecForecaster::predict(const MaskedInput& input) const {
  const auto request = encode_request(input);
  std::string response;
  {
    std::lock_guard lock(process_->mutex);
    process_->to_child << request << '\n' << std::flush;
    if (!process_->to_child || !std::getline(process_->from_child, response)) {
      throw ForecasterError("forecaster process '" + command_ + "' closed its output");
    }
  }
  return decode_response(response, input.horizon_hours);
}

// --- HTTP transport -----------------------------------------------------------

HttpForecaster::HttpForecaster(std::string url, Capabilities caps) : url_(std::move(url)), caps_(caps) {
  caps_.validate();
  const auto scheme_end = url_.find("://");
  if (scheme_end == std::string::npos) throw ConfigError("forecaster URL needs a scheme: '" + url_ + "'");
  const auto path_start = url_.find('/', scheme_end + 3);
  scheme_host_port_ = url_.substr(0, path_start);
  path_ = path_start == std::string::npos ? std::string{} : url_.substr(path_start);
  while (!path_.empty() && path_.back() == '/') path_.pop_back();
  if (path_.size() < 9 || path_.substr(path_.size() - 9) != "/forecast") path_ += "/forecast";
}

ForecastOutput HttpForecaster::predict(const MaskedInput& input) const {
  httplib::Client client(scheme_host_port_);
  client.set_read_timeout(std::chrono::seconds(600));
  auto res = client.Post(path_, encode_request(input), "application/json");
  if (!res) {
    throw ForecasterError("HTTP request to " + url_ + " failed: " + httplib::to_string(res.error()));
  }
  if (res->status != 200) {
    try {
      decode_response(res->body, input.horizon_hours);
    } catch (const ForecasterError& e) {
      throw ForecasterError("HTTP " + std::to_string(res->status) + " from " + url_ + ": " + e.what());
    }
    throw ForecasterError("HTTP " + std::to_string(res->status) + " from " + url_);
  }
  return decode_response(res->body, input.horizon_hours);
}

bool is_remote_selector(std::string_view selector) {
  return selector.starts_with("exec:") || selector.starts_with("http:") || selector.starts_with("https:");
}

std::unique_ptr<Forecaster> make_remote_forecaster(std::string_view selector, const Capabilities& caps) {
  if (selector.starts_with("exec:")) {
    return std::make_unique<ExecForecaster>(std::string(selector.substr(5)), caps);
  }
  if (selector.starts_with("http:")) {
    auto rest = std::string(selector.substr(5));
    if (rest.starts_with("//")) rest = "http:" + rest;
    if (rest.find("://") == std::string::npos) rest = "http://" + rest;
    return std::make_unique<HttpForecaster>(rest, caps);
  }
  throw ConfigError("not a remote forecaster selector: '" + std::string(selector) + "'");
}

}  // namespace cshap
