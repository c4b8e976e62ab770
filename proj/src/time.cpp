#include "coalition_shap/time.hpp"

#include <unicode/basictz.h>
#include <unicode/timezone.h>
#include <unicode/unistr.h>

#include <charconv>
#include <cstdio>

#include "coalition_shap/errors.hpp"

namespace cshap {
namespace {

using namespace std::chrono;

int read_int(std::string_view text, std::size_t pos, std::size_t len) {
  if (pos + len > text.size()) {
    throw DataError("truncated timestamp: '" + std::string(text) + "'");
  }
  int value = 0;
  auto [ptr, ec] = std::from_chars(text.data() + pos, text.data() + pos + len, value);
  if (ec != std::errc{} || ptr != text.data() + pos + len) {
    throw DataError("malformed timestamp: '" + std::string(text) + "'");
  }
  return value;
}

void expect(std::string_view text, std::size_t pos, std::string_view allowed) {
  if (pos >= text.size() || allowed.find(text[pos]) == std::string_view::npos) {
    throw DataError("malformed timestamp: '" + std::string(text) + "'");
  }
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '"')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' || s.back() == '"')) {
    s.remove_suffix(1);
  }
  return s;
}

year_month_day checked_date(int y, int m, int d, std::string_view text) {
  year_month_day ymd{year{y}, month{static_cast<unsigned>(m)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) {
    throw DataError("invalid calendar date: '" + std::string(text) + "'");
  }
  return ymd;
}

}  // namespace

sys_seconds parse_datetime(std::string_view raw) {
  const auto text = trim(raw);
  const int y = read_int(text, 0, 4);
  expect(text, 4, "-");
  const int mo = read_int(text, 5, 2);
  expect(text, 7, "-");
  const int d = read_int(text, 8, 2);
  const auto ymd = checked_date(y, mo, d, text);
  int hh = 0, mm = 0, ss = 0;
  std::size_t pos = 10;
  if (pos < text.size() && (text[pos] == 'T' || text[pos] == ' ')) {
    hh = read_int(text, pos + 1, 2);
    expect(text, pos + 3, ":");
    mm = read_int(text, pos + 4, 2);
    pos += 6;
    if (pos < text.size() && text[pos] == ':') {
      ss = read_int(text, pos + 1, 2);
      pos += 3;
      if (pos < text.size() && text[pos] == '.') {
        ++pos;
        while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') ++pos;
      }
    }
  }
  if (hh > 23 || mm > 59 || ss > 60) {
    throw DataError("time of day out of range: '" + std::string(text) + "'");
  }
  seconds offset{0};
  if (pos < text.size()) {
    const char c = text[pos];
    if (c == 'Z' || c == 'z') {
      ++pos;
    } else if (c == '+' || c == '-') {
      const int oh = read_int(text, pos + 1, 2);
      int om = 0;
      std::size_t next = pos + 3;
      if (next < text.size() && text[next] == ':') ++next;
      if (next < text.size()) {
        om = read_int(text, next, 2);
        next += 2;
      }
      offset = hours{oh} + minutes{om};
      if (c == '-') offset = -offset;
      pos = next;
    }
  }
  if (pos != text.size()) {
    throw DataError("trailing characters in timestamp: '" + std::string(text) + "'");
  }
  return sys_days{ymd} + hours{hh} + minutes{mm} + seconds{ss} - offset;
}

Timestamp parse_timestamp(std::string_view text) {
  const auto t = parse_datetime(text);
  const auto h = floor<hours>(t);
  if (h != t) {
    throw DataError("timestamp is not aligned to the hour: '" + std::string(trim(text)) + "'");
  }
  return h;
}

LocalDate parse_date(std::string_view raw) {
  const auto text = trim(raw);
  if (text.size() != 10) {
    throw DataError("expected YYYY-MM-DD, got '" + std::string(text) + "'");
  }
  const int y = read_int(text, 0, 4);
  expect(text, 4, "-");
  const int m = read_int(text, 5, 2);
  expect(text, 7, "-");
  const int d = read_int(text, 8, 2);
  return local_days{checked_date(y, m, d, text)};
}

std::string format_timestamp(Timestamp t) {
  const auto day = floor<days>(t);
  const year_month_day ymd{day};
  const auto hour = (t - day).count();
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:00:00Z", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<int>(hour));
  return buf;
}

std::string format_date(LocalDate d) {
  const year_month_day ymd{d};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

unsigned weekday_index(LocalDate d) { return weekday{d}.c_encoding(); }

struct TimeZone::Impl {
  std::unique_ptr<icu::BasicTimeZone> zone;  // null for UTC
};

TimeZone::TimeZone(const std::string& iana_name) : name_(iana_name) {
  auto impl = std::make_shared<Impl>();
  if (iana_name != "UTC" && iana_name != "Etc/UTC") {
    std::unique_ptr<icu::TimeZone> tz(
        icu::TimeZone::createTimeZone(icu::UnicodeString::fromUTF8(iana_name)));
    icu::UnicodeString id;
    tz->getID(id);
    if (*tz == icu::TimeZone::getUnknown()) {
      throw ConfigError("unknown time zone '" + iana_name + "'");
    }
    auto* basic = dynamic_cast<icu::BasicTimeZone*>(tz.get());
    if (basic == nullptr) {
      throw ConfigError("time zone '" + iana_name + "' lacks transition data");
    }
    tz.release();
    impl->zone.reset(basic);
  }
  impl_ = std::move(impl);
}

TimeZone TimeZone::utc() { return TimeZone("UTC"); }

seconds TimeZone::utc_offset(sys_seconds t) const {
  if (!impl_->zone) return seconds{0};
  int32_t raw = 0, dst = 0;
  UErrorCode status = U_ZERO_ERROR;
  const auto ms = static_cast<UDate>(t.time_since_epoch().count()) * 1000.0;
  impl_->zone->getOffset(ms, false, raw, dst, status);
  if (U_FAILURE(status)) {
    throw DataError("time zone offset lookup failed for " + name_);
  }
  return seconds{(raw + dst) / 1000};
}

LocalHour TimeZone::to_local(Timestamp t) const {
  const auto local = local_seconds{(t + utc_offset(t)).time_since_epoch()};
  const auto day = floor<days>(local);
  return {day, static_cast<int>(floor<hours>(local - day).count())};
}

std::optional<Timestamp> TimeZone::from_local(LocalDate date, int hour) const {
  const auto wall = date + hours{hour};
  if (!impl_->zone) return Timestamp{wall.time_since_epoch()};
  int32_t raw = 0, dst = 0;
  UErrorCode status = U_ZERO_ERROR;
  const auto ms = static_cast<UDate>(duration_cast<seconds>(wall.time_since_epoch()).count()) * 1000.0;
  impl_->zone->getOffsetFromLocal(ms, UCAL_TZ_LOCAL_FORMER, UCAL_TZ_LOCAL_FORMER, raw, dst, status);
  if (U_FAILURE(status)) {
    throw DataError("time zone offset lookup failed for " + name_);
  }
  const auto utc = sys_seconds{duration_cast<seconds>(wall.time_since_epoch())} -
                   seconds{(raw + dst) / 1000};
  const auto aligned = floor<hours>(utc);
  if (aligned != utc) return std::nullopt;  // zones with non-hour offsets
  const auto back = to_local(aligned);
  if (back.date != date || back.hour != hour) return std::nullopt;
  return aligned;
}

Timestamp TimeZone::start_of_day(LocalDate date) const {
  for (int h = 0; h < 24; ++h) {
    if (auto t = from_local(date, h)) return *t;
  }
  throw DataError("local date " + format_date(date) + " has no whole hours in " + name_);
}

}  // namespace cshap
