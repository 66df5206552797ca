#include "fxcast/dataio.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <ostream>

#include <fmt/format.h>

#include "fxcast/errors.hpp"

namespace fxcast {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

template <class Int>
bool parse_fixed_int(std::string_view text, Int& out) {
    if (text.empty()) {
        return false;
    }
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, out);
    return ec == std::errc{} && ptr == end &&
           std::all_of(text.begin(), text.end(), [](char c) { return c >= '0' && c <= '9'; });
}

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) {
        --q;
    }
    return q;
}

}  // namespace

PriceSeries::PriceSeries(std::string pair_label, std::vector<std::int64_t> timestamps,
                         std::vector<double> closes, std::int64_t resolution_seconds)
    : pair_label_(std::move(pair_label)),
      timestamps_(std::move(timestamps)),
      closes_(std::move(closes)),
      resolution_seconds_(resolution_seconds) {
    if (timestamps_.size() != closes_.size()) {
        throw DataError(fmt::format("price series '{}': {} timestamps but {} closes", pair_label_,
                                    timestamps_.size(), closes_.size()));
    }
    if (resolution_seconds_ < 0) {
        throw DataError("price series resolution must be non-negative");
    }
    for (std::size_t i = 0; i < closes_.size(); ++i) {
        if (!std::isfinite(closes_[i]) || closes_[i] <= 0.0) {
            throw DataError(fmt::format("price series '{}': close at index {} is not positive",
                                        pair_label_, i));
        }
        if (i > 0 && timestamps_[i] <= timestamps_[i - 1]) {
            throw DataError(fmt::format(
                "price series '{}': timestamps not strictly increasing at index {}", pair_label_, i));
        }
    }
}

std::int64_t parse_iso8601_utc(std::string_view text) {
    // YYYY-MM-DDTHH:MM:SSZ
    if (text.size() != 20 || text[4] != '-' || text[7] != '-' || (text[10] != 'T' && text[10] != 't') ||
        text[13] != ':' || text[16] != ':' || (text[19] != 'Z' && text[19] != 'z')) {
        throw DataError(fmt::format("invalid ISO-8601 UTC timestamp '{}'", text));
    }
    int year = 0;
    unsigned month = 0, day = 0, hour = 0, minute = 0, second = 0;
    if (!parse_fixed_int(text.substr(0, 4), year) || !parse_fixed_int(text.substr(5, 2), month) ||
        !parse_fixed_int(text.substr(8, 2), day) || !parse_fixed_int(text.substr(11, 2), hour) ||
        !parse_fixed_int(text.substr(14, 2), minute) || !parse_fixed_int(text.substr(17, 2), second)) {
        throw DataError(fmt::format("invalid ISO-8601 UTC timestamp '{}'", text));
    }
    const std::chrono::year_month_day ymd{std::chrono::year{year}, std::chrono::month{month},
                                          std::chrono::day{day}};
    if (!ymd.ok() || hour > 23 || minute > 59 || second > 59) {
        throw DataError(fmt::format("timestamp '{}' is out of range", text));
    }
    const auto days = std::chrono::sys_days{ymd}.time_since_epoch().count();
    return static_cast<std::int64_t>(days) * 86400 + hour * 3600 + minute * 60 + second;
}

std::string format_iso8601_utc(std::int64_t epoch_seconds) {
    const std::int64_t days = floor_div(epoch_seconds, 86400);
    const std::int64_t rem = epoch_seconds - days * 86400;
    const std::chrono::year_month_day ymd{
        std::chrono::sys_days{std::chrono::days{static_cast<int>(days)}}};
    return fmt::format("{:04d}-{:02d}-{:02d}T{:02d}:{:02d}:{:02d}Z", static_cast<int>(ymd.year()),
                       static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                       rem / 3600, (rem % 3600) / 60, rem % 60);
}

PriceSeries parse_price_csv(std::istream& source, std::string pair_label) {
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    std::vector<std::pair<std::int64_t, double>> rows;
    std::vector<std::size_t> row_lines;

    while (std::getline(source, line)) {
        ++line_no;
        auto text = trim(line);
        if (line_no == 1 && text.starts_with("\xEF\xBB\xBF")) {
            text.remove_prefix(3);
        }
        if (text.empty()) {
            continue;
        }
        if (!header_seen) {
            const auto comma = text.find(',');
            if (comma == std::string_view::npos || trim(text.substr(0, comma)) != "timestamp" ||
                trim(text.substr(comma + 1)) != "close") {
                throw ParseError(line_no, "expected header 'timestamp,close'");
            }
            header_seen = true;
            continue;
        }
        const auto comma = text.find(',');
        if (comma == std::string_view::npos || text.find(',', comma + 1) != std::string_view::npos) {
            throw ParseError(line_no, "expected exactly two fields");
        }
        const auto ts_text = trim(text.substr(0, comma));
        const auto close_text = trim(text.substr(comma + 1));
        std::int64_t ts = 0;
        try {
            ts = parse_iso8601_utc(ts_text);
        } catch (const DataError& e) {
            throw ParseError(line_no, e.what());
        }
        double close = 0.0;
        const auto* end = close_text.data() + close_text.size();
        auto [ptr, ec] = std::from_chars(close_text.data(), end, close);
        if (close_text.empty() || ec != std::errc{} || ptr != end || !std::isfinite(close)) {
            throw ParseError(line_no, fmt::format("invalid close value '{}'", close_text));
        }
        if (close <= 0.0) {
            throw ParseError(line_no, fmt::format("close must be positive, got {}", close_text));
        }
        rows.emplace_back(ts, close);
        row_lines.push_back(line_no);
    }
    if (!header_seen) {
        throw ParseError(line_no == 0 ? 1 : line_no, "missing header 'timestamp,close'");
    }
    if (rows.empty()) {
        throw DataError("no data rows");
    }

    std::vector<std::size_t> order(rows.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return rows[a].first < rows[b].first; });

    std::vector<std::int64_t> timestamps;
    std::vector<double> closes;
    timestamps.reserve(rows.size());
    closes.reserve(rows.size());
    for (std::size_t k = 0; k < order.size(); ++k) {
        const auto& [ts, close] = rows[order[k]];
        if (k > 0 && ts == timestamps.back()) {
            throw ParseError(row_lines[order[k]],
                             fmt::format("duplicate timestamp {}", format_iso8601_utc(ts)));
        }
        timestamps.push_back(ts);
        closes.push_back(close);
    }
    return PriceSeries(std::move(pair_label), std::move(timestamps), std::move(closes));
}

PriceSeries load_price_csv(const std::string& path, std::string pair_label) {
    std::ifstream in(path);
    if (!in) {
        throw IoError(fmt::format("cannot open '{}'", path));
    }
    return parse_price_csv(in, std::move(pair_label));
}

PriceSeries resample_last(const PriceSeries& series, std::int64_t bucket_seconds) {
    if (bucket_seconds < 1) {
        throw ConfigError("resample bucket must be at least 1 second");
    }
    if (series.empty()) {
        throw DataError("cannot resample an empty series");
    }
    // A resampled point labelled t covers [t - resolution, t); bucket by the interval start
    // so that re-bucketing at the same width is the identity.
    const auto ts = series.timestamps();
    const auto closes = series.closes();
    const std::int64_t shift = series.resolution_seconds();

    std::vector<std::int64_t> out_ts;
    std::vector<double> out_close;
    for (std::size_t i = 0; i < series.size(); ++i) {
        const std::int64_t bucket_end = (floor_div(ts[i] - shift, bucket_seconds) + 1) * bucket_seconds;
        if (!out_ts.empty() && out_ts.back() == bucket_end) {
            out_close.back() = closes[i];
        } else {
            out_ts.push_back(bucket_end);
            out_close.push_back(closes[i]);
        }
    }
    return PriceSeries(series.pair_label(), std::move(out_ts), std::move(out_close), bucket_seconds);
}

double quantile_sorted(std::span<const double> sorted, double p) {
    if (sorted.empty()) {
        throw DataError("quantile of empty data");
    }
    const double pos = static_cast<double>(sorted.size() - 1) * p;
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

StatsRow summary_stats(std::span<const double> closes) {
    if (closes.empty()) {
        throw DataError("summary statistics need at least one value");
    }
    std::vector<double> sorted(closes.begin(), closes.end());
    std::sort(sorted.begin(), sorted.end());
    const double n = static_cast<double>(sorted.size());

    // Summing in sorted order makes the result independent of input order.
    double sum = 0.0;
    for (double v : sorted) {
        sum += v;
    }
    const double mean = sum / n;
    double ss = 0.0;
    for (double v : sorted) {
        ss += (v - mean) * (v - mean);
    }

    StatsRow row;
    row.mean = mean;
    row.std = std::sqrt(ss / n);
    row.min = sorted.front();
    row.q1 = quantile_sorted(sorted, 0.25);
    row.q2 = quantile_sorted(sorted, 0.5);
    row.q3 = quantile_sorted(sorted, 0.75);
    row.max = sorted.back();
    return row;
}

void write_stats_csv(std::ostream& out, std::span<const std::pair<std::string, StatsRow>> rows) {
    out << "pair,mean,std,min,q1,q2,q3,max\n";
    for (const auto& [pair, s] : rows) {
        out << fmt::format("{},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f}\n", pair, s.mean,
                           s.std, s.min, s.q1, s.q2, s.q3, s.max);
    }
}

void write_series_csv(std::ostream& out, const PriceSeries& series) {
    out << "timestamp,close\n";
    const auto ts = series.timestamps();
    const auto closes = series.closes();
    for (std::size_t i = 0; i < series.size(); ++i) {
        out << format_iso8601_utc(ts[i]) << ',' << fmt::format("{}", closes[i]) << '\n';
    }
}

std::size_t split_point(std::size_t n, double train_fraction) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw ConfigError(fmt::format("train fraction must lie in (0, 1), got {}", train_fraction));
    }
    const auto n_train = static_cast<std::size_t>(std::floor(static_cast<double>(n) * train_fraction));
    if (n_train == 0 || n_train >= n) {
        throw DataError(fmt::format(
            "splitting {} samples at fraction {} leaves an empty {} side", n, train_fraction,
            n_train == 0 ? "training" : "test"));
    }
    return n_train;
}

std::pair<WindowedDataset, WindowedDataset> chronological_split(const WindowedDataset& dataset,
                                                                double train_fraction) {
    if (dataset.empty()) {
        throw DataError("cannot split an empty dataset");
    }
    const auto n_train = split_point(dataset.size(), train_fraction);
    return {dataset.slice(0, n_train), dataset.slice(n_train, dataset.size() - n_train)};
}

}  // namespace fxcast
