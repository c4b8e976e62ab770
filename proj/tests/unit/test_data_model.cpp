#include <doctest.h>

#include <cmath>
#include <limits>

#include "coalition_shap/data_model.hpp"
#include "coalition_shap/errors.hpp"
#include "fixtures.hpp"

using namespace cshap;
using fixture::at;
using std::chrono::hours;

TEST_CASE("HourlySeries rejects non-finite values and indexes by hour") {
  const auto t0 = at("2024-01-01T00:00:00Z");
  CHECK_THROWS_AS(HourlySeries("x", t0, {1.0, std::numeric_limits<double>::infinity()}), DataError);
  CHECK_THROWS_AS(HourlySeries("x", t0, {std::nan("")}), DataError);

  const HourlySeries s("x", t0, {1.0, std::nullopt, 3.0});
  CHECK(s.end() - s.start() == hours{3});
  CHECK(s.at(t0 + hours{2}) == 3.0);
  CHECK_FALSE(s.at(t0 + hours{1}).has_value());
  CHECK_FALSE(s.at(t0 + hours{5}).has_value());
  CHECK(s.missing_count() == 1);
  for (std::size_t k = 0; k < s.size(); ++k) CHECK(s.time_at(k) - s.time_at(0) == hours{k});
}

TEST_CASE("load CSV ingestion averages sub-hourly rows and fills gaps") {
  const auto dir = fixture::temp_dir("ingest");
  fixture::write_text(dir / "quarter.csv", "timestamp,load_mw\n2024-01-01T10:00:00Z,100\n2024-01-01T10:15:00Z,120\n");
  const auto q = ingest_load_csv(dir / "quarter.csv");
  REQUIRE(q.size() == 1);
  CHECK(q.start() == at("2024-01-01T10:00:00Z"));
  CHECK(*q.values()[0] == 110.0);

  fixture::write_text(dir / "gap.csv", "timestamp,load_mw\n2024-01-01T00:00:00Z,5\n2024-01-01T02:00:00Z,7\n");
  const auto g = ingest_load_csv(dir / "gap.csv");
  REQUIRE(g.size() == 3);
  CHECK(g.values()[0] == 5.0);
  CHECK_FALSE(g.values()[1].has_value());
  CHECK(g.values()[2] == 7.0);

  fixture::write_text(dir / "empty.csv", "");
  try {
    ingest_load_csv(dir / "empty.csv");
    FAIL("expected an error");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("zero usable rows") != std::string::npos);
  }
  fixture::write_text(dir / "header_only.csv", "timestamp,load_mw\n");
  CHECK_THROWS_AS(ingest_load_csv(dir / "header_only.csv"), DataError);
}

TEST_CASE("ingestion normalizes offsets, sorts rows and rejects conflicting duplicates") {
  const auto dir = fixture::temp_dir("ingest_order");
  fixture::write_text(dir / "shuffled.csv",
                      "timestamp,load_mw\n2024-01-01T03:00:00+01:00,2\n2024-01-01T01:00:00Z,1\n"
                      "2024-01-01T01:00:00Z,1\n");
  const auto s = ingest_load_csv(dir / "shuffled.csv");
  REQUIRE(s.size() == 2);
  CHECK(s.values()[0] == 1.0);
  CHECK(s.values()[1] == 2.0);

  fixture::write_text(dir / "conflict.csv", "timestamp,load_mw\n2024-01-01T01:00:00Z,1\n2024-01-01T01:00:00Z,2\n");
  CHECK_THROWS_AS(ingest_load_csv(dir / "conflict.csv"), DataError);
  CHECK_THROWS_AS(ingest_load_csv(dir / "does_not_exist.csv"), DataError);
  fixture::write_text(dir / "bad.csv", "timestamp,load_mw\n2024-01-01T01:00:00Z,abc\n");
  CHECK_THROWS_AS(ingest_load_csv(dir / "bad.csv"), DataError);
  fixture::write_text(dir / "nocol.csv", "timestamp,mw\n2024-01-01T01:00:00Z,1\n");
  CHECK_THROWS_AS(ingest_load_csv(dir / "nocol.csv"), DataError);
}

TEST_CASE("canonical CSV round trip is bit exact") {
  const auto dir = fixture::temp_dir("roundtrip");
  const auto t0 = at("2024-03-01T00:00:00Z");
  std::vector<Value> values{0.1, 1.0 / 3.0, std::nullopt, -1234.5678901234567, 1e-300, 6.02214076e23};
  const HourlySeries s("load", t0, values);
  write_canonical_csv(dir / "s.csv", std::vector<HourlySeries>{s});
  const auto back = ingest_csv(dir / "s.csv", CsvColumns{"timestamp", {"load"}, {}}).front();
  CHECK(back.start() == s.start());
  REQUIRE(back.size() == s.size());
  for (std::size_t i = 0; i < s.size(); ++i) CHECK(back.values()[i] == s.values()[i]);
}

TEST_CASE("holiday indicator follows local Sundays and listed dates") {
  const TimeZone utc = TimeZone::utc();
  // Saturday 2024-01-13, then Sunday 2024-01-14.
  const auto weekend = build_holiday_covariate({}, at("2024-01-13T00:00:00Z"), at("2024-01-15T00:00:00Z"), utc);
  for (int h = 0; h < 24; ++h) CHECK(weekend.series.values()[h] == 0.0);
  for (int h = 24; h < 48; ++h) CHECK(weekend.series.values()[h] == 1.0);
  CHECK(weekend.future_known);

  const auto jan6 = build_holiday_covariate({parse_date("2024-01-06")}, at("2024-01-06T00:00:00Z"),
                                            at("2024-01-07T00:00:00Z"), utc);
  for (const auto& v : jan6.series.values()) CHECK(v == 1.0);

  const auto wednesday = build_holiday_covariate({}, at("2024-01-10T00:00:00Z"), at("2024-01-11T00:00:00Z"), utc);
  for (const auto& v : wednesday.series.values()) CHECK(v == 0.0);

  // In Berlin the local Sunday starts at 23:00 UTC on Saturday.
  const auto berlin = build_holiday_covariate({}, at("2024-01-13T00:00:00Z"), at("2024-01-15T00:00:00Z"),
                                              TimeZone("Europe/Berlin"));
  CHECK(berlin.series.at(at("2024-01-13T22:00:00Z")) == 0.0);
  CHECK(berlin.series.at(at("2024-01-13T23:00:00Z")) == 1.0);
  CHECK(berlin.series.at(at("2024-01-14T22:00:00Z")) == 1.0);
  CHECK(berlin.series.at(at("2024-01-14T23:00:00Z")) == 0.0);
}

TEST_CASE("holiday calendar file allows comments") {
  const auto dir = fixture::temp_dir("holidays");
  fixture::write_text(dir / "h.txt", "# public holidays\n2024-01-01\n\n2024-01-06  # Epiphany\n");
  const auto cal = read_holiday_calendar(dir / "h.txt");
  CHECK(cal == HolidayCalendar{parse_date("2024-01-01"), parse_date("2024-01-06")});
  write_holiday_calendar(dir / "out.txt", cal);
  CHECK(read_holiday_calendar(dir / "out.txt") == cal);
}

TEST_CASE("slice_context indexes past and future windows") {
  const auto data = fixture::ramp(100, {"temp"});
  const auto origin = data.start() + hours{50};
  const auto slice = slice_context(data, ForecastTask{origin, 2, 24, {0.5}});
  REQUIRE(slice.target.size() == 2);
  CHECK(slice.target[0] == 1048.0);
  CHECK(slice.target[1] == 1049.0);
  REQUIRE(slice.covariates.size() == 1);
  CHECK(slice.covariates[0].past.size() == 2);
  REQUIRE(slice.covariates[0].future.has_value());
  CHECK(slice.covariates[0].future->size() == 24);
  CHECK(slice.covariates[0].future->front() == 10.0 + 50 % 24);

  CHECK_THROWS_AS(slice_context(data, ForecastTask{data.start() + hours{1}, 2, 24, {0.5}}), DataError);
  CHECK_THROWS_AS(slice_context(data, ForecastTask{data.start() + hours{90}, 24, 24, {0.5}}), DataError);
}

TEST_CASE("past-only covariates carry no future slice") {
  auto data = fixture::ramp(100, {"temp"});
  auto cov = data.covariate("temp");
  cov.future_known = false;
  const Dataset past_only(data.target(), {cov});
  const auto slice = slice_context(past_only, ForecastTask{data.start() + hours{50}, 24, 24, {0.5}});
  CHECK_FALSE(slice.covariates[0].future.has_value());
  // Near the end the horizon need not be covered by past-only covariates.
  CHECK_NOTHROW(slice_context(past_only, ForecastTask{data.start() + hours{90}, 24, 24, {0.5}}));
}

TEST_CASE("split partitions the span") {
  const auto data = fixture::ramp(300, {"temp"});
  const auto t = data.start();
  const auto parts = split(data, SplitSpec{t + hours{100}, t + hours{200}, t + hours{300}});
  CHECK(parts.train.start() == t);
  CHECK(parts.train.end() == parts.validation.start());
  CHECK(parts.validation.end() == parts.test.start());
  CHECK(parts.test.end() == data.end());
  CHECK(parts.train.target().size() + parts.validation.target().size() + parts.test.target().size() == 300);
  CHECK(parts.test.covariate("temp").series.size() == 100);

  CHECK_THROWS_AS(split(data, SplitSpec{t + hours{100}, t + hours{100}, t + hours{300}}), DataError);
  CHECK_THROWS_AS(split(data, SplitSpec{t + hours{100}, t + hours{200}, t + hours{301}}), DataError);
}

TEST_CASE("dataset validation") {
  const auto t0 = at("2024-01-01T00:00:00Z");
  const HourlySeries load("load", t0, std::vector<Value>(48, 1.0));
  const HourlySeries short_cov("temp", t0, std::vector<Value>(24, 1.0));
  CHECK_THROWS_AS(Dataset(load, {{short_cov, true}}), DataError);
  const HourlySeries cov("temp", t0, std::vector<Value>(48, 1.0));
  CHECK_THROWS_AS(Dataset(load, {{cov, true}, {cov, true}}), DataError);
  const Dataset ok(load, {{cov, true}});
  CHECK_THROWS_AS(ok.covariate("rain"), DataError);
  CHECK(ok.with_covariates({}).covariates().empty());
}
