#pragma once

#include <chrono>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

namespace cshap {

/// A UTC instant aligned to the full hour. All series are indexed by these.
using Timestamp = std::chrono::sys_time<std::chrono::hours>;
/// A calendar date in some local time zone (holidays, day types).
using LocalDate = std::chrono::local_days;

/// Parses ISO-8601 date-times: `YYYY-MM-DD[T ]HH:MM[:SS[.fff]]` with an optional
/// `Z` or `+HH:MM` / `-HH:MM` suffix. Naive times are read as UTC.
std::chrono::sys_seconds parse_datetime(std::string_view text);

/// Like parse_datetime but requires the instant to sit on a full hour.
Timestamp parse_timestamp(std::string_view text);

/// `YYYY-MM-DD`.
LocalDate parse_date(std::string_view text);

/// `YYYY-MM-DDTHH:MM:SSZ`.
std::string format_timestamp(Timestamp t);
std::string format_date(LocalDate d);

/// Weekday of a local date, 0 = Sunday.
unsigned weekday_index(LocalDate d);

struct LocalHour {
  LocalDate date;
  int hour = 0;
};

/// IANA time zone backed by the ICU zone database. Copies share the same
/// immutable zone object.
class TimeZone {
 public:
  explicit TimeZone(const std::string& iana_name);
  static TimeZone utc();

  const std::string& name() const noexcept { return name_; }

  std::chrono::seconds utc_offset(std::chrono::sys_seconds t) const;
  LocalHour to_local(Timestamp t) const;

  /// UTC hour at which the given local wall-clock hour occurs. Returns nullopt
  /// for wall-clock hours skipped by a DST transition. For repeated hours the
  /// first occurrence is returned.
  std::optional<Timestamp> from_local(LocalDate date, int hour) const;

  /// First UTC hour whose local date is `date`.
  Timestamp start_of_day(LocalDate date) const;

 private:
  struct Impl;
  std::string name_;
  std::shared_ptr<const Impl> impl_;
};

}  // namespace cshap
