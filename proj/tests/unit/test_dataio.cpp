#include <doctest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include <fxcast/dataio.hpp>
#include <fxcast/errors.hpp>

#include "fixtures.hpp"
#include "oracles.hpp"

using namespace fxcast;

namespace {

PriceSeries parse(const std::string& text) {
    std::istringstream in(text);
    return parse_price_csv(in, "AUD/USD");
}

PriceSeries minutes(std::vector<std::int64_t> ts, std::vector<double> closes) {
    return PriceSeries("X", std::move(ts), std::move(closes));
}

}  // namespace

TEST_CASE("iso-8601 timestamps round-trip") {
    CHECK(parse_iso8601_utc("1970-01-01T00:00:00Z") == 0);
    CHECK(parse_iso8601_utc("2017-01-04T00:00:00Z") == 1483488000);
    CHECK(format_iso8601_utc(1483488000) == "2017-01-04T00:00:00Z");
    CHECK(parse_iso8601_utc("2016-02-29T23:59:59Z") == 1456790399);
    for (std::int64_t t : {0LL, 951782400LL, 1483488000LL, 4102444799LL}) {
        CHECK(parse_iso8601_utc(format_iso8601_utc(t)) == t);
    }
    CHECK_THROWS_AS(parse_iso8601_utc("2017-01-04 00:00:00"), DataError);
    CHECK_THROWS_AS(parse_iso8601_utc("2017-02-30T00:00:00Z"), DataError);
    CHECK_THROWS_AS(parse_iso8601_utc("2017-01-04T24:00:00Z"), DataError);
}

TEST_CASE("parse a single row") {
    const auto s = parse("timestamp,close\n2017-01-04T00:00:00Z,0.722\n");
    REQUIRE(s.size() == 1);
    CHECK(s.closes()[0] == 0.722);
    CHECK(s.timestamps()[0] == 1483488000);
    CHECK(s.pair_label() == "AUD/USD");
}

TEST_CASE("header only is an error") {
    CHECK_THROWS_WITH_AS(parse("timestamp,close\n"), doctest::Contains("no data rows"), DataError);
}

TEST_CASE("duplicate timestamps are rejected") {
    CHECK_THROWS_AS(parse("timestamp,close\n2017-01-04T00:00:00Z,1\n2017-01-04T00:00:00Z,2\n"), ParseError);
}

TEST_CASE("malformed rows report their line") {
    try {
        (void)parse("timestamp,close\n2017-01-04T00:00:00Z,1\n2017-01-04T00:01:00Z,abc\n");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 3);
    }
    CHECK_THROWS_AS(parse("timestamp,close\n2017-01-04T00:00:00Z,-1\n"), ParseError);
    CHECK_THROWS_AS(parse("timestamp,close\n2017-01-04T00:00:00Z\n"), ParseError);
    CHECK_THROWS_AS(parse("time,price\n2017-01-04T00:00:00Z,1\n"), DataError);
}

TEST_CASE("rows are sorted, blank lines and CRLF tolerated") {
    const auto s = parse("\xEF\xBB\xBFtimestamp,close\r\n2017-01-04T00:05:00Z,2\r\n\r\n2017-01-04T00:00:00Z,1\r\n");
    REQUIRE(s.size() == 2);
    CHECK(s.closes()[0] == 1.0);
    CHECK(s.closes()[1] == 2.0);
}

TEST_CASE("missing file is an io error") {
    CHECK_THROWS_AS(load_price_csv("/nonexistent/prices.csv"), IoError);
}

TEST_CASE("resample keeps the last close per bucket") {
    const auto s = minutes({0, 60, 120, 180, 240}, {1, 2, 3, 4, 5});
    const auto r = resample_last(s, 300);
    REQUIRE(r.size() == 1);
    CHECK(r.closes()[0] == 5.0);
    CHECK(r.timestamps()[0] == 300);
    CHECK(r.resolution_seconds() == 300);
}

TEST_CASE("bucket equal to the native resolution keeps every close") {
    const auto s = minutes({0, 60, 120}, {1, 2, 3});
    const auto r = resample_last(s, 60);
    CHECK(std::vector<double>(r.closes().begin(), r.closes().end()) == std::vector<double>{1, 2, 3});
    CHECK(std::vector<std::int64_t>(r.timestamps().begin(), r.timestamps().end()) ==
          std::vector<std::int64_t>{60, 120, 180});
}

TEST_CASE("empty buckets are not filled") {
    const auto r = resample_last(minutes({0, 600}, {1, 2}), 300);
    CHECK(r.size() == 2);
}

TEST_CASE("resample is idempotent") {
    std::mt19937_64 rng(17);
    std::uniform_int_distribution<int> gap(1, 400);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<std::int64_t> ts;
        std::vector<double> cl;
        std::int64_t t = gap(rng);
        for (int i = 0; i < 200; ++i) {
            ts.push_back(t);
            cl.push_back(1.0 + 0.001 * i);
            t += gap(rng);
        }
        const auto s = minutes(ts, cl);
        for (std::int64_t b : {60, 300, 900}) {
            const auto once = resample_last(s, b);
            CHECK(resample_last(once, b) == once);
        }
    }
}

TEST_CASE("summary stats hand cases") {
    const std::vector<double> a{1, 2, 3, 4, 5};
    const auto s = summary_stats(a);
    CHECK(s.mean == 3.0);
    CHECK(s.q2 == 3.0);
    CHECK(s.min == 1.0);
    CHECK(s.max == 5.0);

    const std::vector<double> c{2, 2, 2};
    const auto k = summary_stats(c);
    CHECK(k.std == 0.0);
    CHECK(k.q1 == 2.0);
    CHECK(k.q2 == 2.0);
    CHECK(k.q3 == 2.0);

    const std::vector<double> d{1, 2, 3, 4};
    const auto q = summary_stats(d);
    CHECK(q.q1 == 1.75);
    CHECK(q.q3 == 3.25);
    CHECK(q.std == doctest::Approx(std::sqrt(1.25)));
}

TEST_CASE("summary stats ignore order") {
    std::mt19937_64 rng(23);
    auto v = testing::noisy_sine(501, 0.01, 4);
    auto sorted = v;
    std::sort(sorted.begin(), sorted.end());
    std::shuffle(v.begin(), v.end(), rng);
    const auto a = summary_stats(v);
    const auto b = summary_stats(sorted);
    CHECK(a.mean == b.mean);
    CHECK(a.std == b.std);
    CHECK(a.q1 == b.q1);
    CHECK(a.q3 == b.q3);
}

TEST_CASE("summary stats agree with a streaming oracle") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto v = testing::noisy_sine(1000 + seed * 37, 0.01, seed);
        oracle::StreamingStats o;
        for (double x : v) o.push(x);
        const auto s = summary_stats(v);
        CHECK(std::fabs(s.mean - o.mean) <= 1e-12);
        CHECK(std::fabs(s.std - o.std_pop()) <= 1e-12);
        CHECK(s.min == o.lo);
        CHECK(s.max == o.hi);
        CHECK(std::fabs(s.q1 - oracle::quantile(v, 0.25)) <= 1e-12);
        CHECK(std::fabs(s.q2 - oracle::quantile(v, 0.5)) <= 1e-12);
        CHECK(std::fabs(s.q3 - oracle::quantile(v, 0.75)) <= 1e-12);
    }
}

TEST_CASE("stats csv format") {
    std::vector<std::pair<std::string, StatsRow>> rows{{"AUD/USD", StatsRow{0.722, 0.023, 0.023, 0.705, 0.716, 0.746, 0.772}}};
    std::ostringstream out;
    write_stats_csv(out, rows);
    CHECK(out.str() ==
          "pair,mean,std,min,q1,q2,q3,max\nAUD/USD,0.722000,0.023000,0.023000,0.705000,0.716000,0.746000,0.772000\n");
}

TEST_CASE("series csv re-parses to the same series") {
    const auto s = testing::as_series(testing::noisy_sine(50, 0.01, 2), "EUR/USD");
    std::ostringstream out;
    write_series_csv(out, s);
    std::istringstream in(out.str());
    const auto back = parse_price_csv(in, "EUR/USD");
    REQUIRE(back.size() == s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        CHECK(back.timestamps()[i] == s.timestamps()[i]);
        CHECK(back.closes()[i] == s.closes()[i]);
    }
}

TEST_CASE("chronological split") {
    CHECK(split_point(10, 0.8) == 8);
    CHECK(split_point(5, 0.8) == 4);
    CHECK_THROWS(split_point(1, 0.8));
    CHECK_THROWS_AS(split_point(10, 1.0), ConfigError);

    const std::vector<double> v{1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15};
    const auto ds = make_windows(v, 3);
    const auto [train, test] = chronological_split(ds, 0.8);
    CHECK(train.size() == 9);
    CHECK(test.size() == 3);
    CHECK(test.origin_index[0] == train.origin_index.back() + 1);
    std::vector<double> joined(train.labels.begin(), train.labels.end());
    joined.insert(joined.end(), test.labels.begin(), test.labels.end());
    CHECK(joined == ds.labels.std());
}
