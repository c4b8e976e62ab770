#pragma once

#include <istream>
#include <memory>
#include <ostream>
#include <string>
#include <string_view>

#include "coalition_shap/forecaster.hpp"

namespace cshap {

inline constexpr int kProtocolVersion = 1;

/// Single-line JSON request. Missing target values are encoded as null.
std::string encode_request(const MaskedInput& input);
MaskedInput decode_request(std::string_view message);

std::string encode_response(const ForecastOutput& output);
std::string encode_error_response(std::string_view message);
/// Parses and validates a response (length, finiteness, quantile order).
/// An `error` member or a foreign protocol version raises ForecasterError.
ForecastOutput decode_response(std::string_view message, int horizon_hours);

/// Answers one request line with one response line. Failures become error
/// responses.
std::string handle_request(const Forecaster& forecaster, std::string_view message);
/// Request/response loop over newline-delimited streams until EOF.
void serve_stdio(const Forecaster& forecaster, std::istream& in, std::ostream& out);

/// Forecaster living in a child process (`sh -c command`), one request line in,
/// one response line out. Calls are serialized over the single pipe pair.
class ExecForecaster : public Forecaster {
 public:
  ExecForecaster(std::string command, Capabilities caps);
  ~ExecForecaster() override;
  ExecForecaster(const ExecForecaster&) = delete;
  ExecForecaster& operator=(const ExecForecaster&) = delete;

  std::string id() const override { return "exec:" + command_; }
  Capabilities capabilities() const override { return caps_; }
  ForecastOutput predict(const MaskedInput& input) const override;

 private:
  struct Process;
  std::string command_;
  Capabilities caps_;
  std::unique_ptr<Process> process_;
};

/// Forecaster behind HTTP POST `<url>/forecast`.
class HttpForecaster : public Forecaster {
 public:
  HttpForecaster(std::string url, Capabilities caps);

  std::string id() const override { return "http:" + url_; }
  Capabilities capabilities() const override { return caps_; }
  ForecastOutput predict(const MaskedInput& input) const override;

 private:
  std::string url_;
  std::string scheme_host_port_;
  std::string path_;
  Capabilities caps_;
};

/// `exec:<command>` or `http:<url>`.
std::unique_ptr<Forecaster> make_remote_forecaster(std::string_view selector, const Capabilities& caps);
bool is_remote_selector(std::string_view selector);

}  // namespace cshap
