#include <doctest.h>

#include "coalition_shap/errors.hpp"
#include "coalition_shap/time.hpp"

using namespace cshap;
using namespace std::chrono;

TEST_CASE("timestamps parse with offsets and format as UTC") {
  CHECK(format_timestamp(parse_timestamp("2024-10-01T00:00:00Z")) == "2024-10-01T00:00:00Z");
  CHECK(parse_timestamp("2024-10-01T02:00:00+02:00") == parse_timestamp("2024-10-01T00:00:00Z"));
  CHECK(parse_timestamp("2024-10-01 05:00") == parse_timestamp("2024-10-01T05:00:00Z"));
  CHECK(parse_datetime("2024-10-01T05:15:00Z") - parse_timestamp("2024-10-01T05:00:00Z") == minutes{15});
  CHECK_THROWS_AS(parse_timestamp("2024-10-01T05:30:00Z"), DataError);
  CHECK_THROWS_AS(parse_timestamp("yesterday"), DataError);
}

TEST_CASE("weekday index counts from Sunday") {
  CHECK(weekday_index(parse_date("2024-01-07")) == 0);
  CHECK(weekday_index(parse_date("2024-01-08")) == 1);
  CHECK(weekday_index(parse_date("2024-01-06")) == 6);
}

TEST_CASE("Europe/Berlin offsets follow daylight saving time") {
  const TimeZone berlin("Europe/Berlin");
  CHECK(berlin.utc_offset(parse_datetime("2024-01-15T12:00:00Z")) == hours{1});
  CHECK(berlin.utc_offset(parse_datetime("2024-07-15T12:00:00Z")) == hours{2});

  const auto local = berlin.to_local(parse_timestamp("2024-06-30T22:00:00Z"));
  CHECK(local.date == parse_date("2024-07-01"));
  CHECK(local.hour == 0);

  CHECK(berlin.start_of_day(parse_date("2024-07-01")) == parse_timestamp("2024-06-30T22:00:00Z"));
  CHECK(berlin.start_of_day(parse_date("2024-01-01")) == parse_timestamp("2023-12-31T23:00:00Z"));
}

TEST_CASE("skipped local hour on the spring transition has no UTC instant") {
  const TimeZone berlin("Europe/Berlin");
  CHECK_FALSE(berlin.from_local(parse_date("2024-03-31"), 2).has_value());
  CHECK(berlin.from_local(parse_date("2024-03-31"), 3) == parse_timestamp("2024-03-31T01:00:00Z"));
  // The repeated autumn hour maps to its first occurrence.
  CHECK(berlin.from_local(parse_date("2024-10-27"), 2) == parse_timestamp("2024-10-27T00:00:00Z"));
}

TEST_CASE("unknown zone is a configuration error") {
  CHECK_THROWS_AS(TimeZone("Mars/Olympus_Mons"), ConfigError);
  CHECK(TimeZone::utc().name() == "UTC");
  CHECK(TimeZone("UTC").utc_offset(parse_datetime("2024-07-01T00:00:00Z")) == seconds{0});
}
