#pragma once

// Close-price ingestion, fixed-interval resampling, descriptive statistics and
// chronological splitting.

#include <cstdint>
#include <istream>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fxcast/pipeline.hpp"

namespace fxcast {

/// Timestamped close prices for one currency pair.
///
/// Timestamps are epoch seconds, strictly increasing. `resolution_seconds` is 0 for raw
/// instantaneous observations; after resampling it holds the bucket width and each
/// point is labelled by the end of the interval it summarises.
class PriceSeries {
public:
    PriceSeries() = default;

    /// Throws DataError if the invariants (equal lengths, strictly increasing timestamps,
    /// positive finite closes) do not hold.
    PriceSeries(std::string pair_label, std::vector<std::int64_t> timestamps,
                std::vector<double> closes, std::int64_t resolution_seconds = 0);

    const std::string& pair_label() const noexcept { return pair_label_; }
    std::span<const std::int64_t> timestamps() const noexcept { return timestamps_; }
    std::span<const double> closes() const noexcept { return closes_; }
    std::int64_t resolution_seconds() const noexcept { return resolution_seconds_; }
    std::size_t size() const noexcept { return closes_.size(); }
    bool empty() const noexcept { return closes_.empty(); }

    friend bool operator==(const PriceSeries&, const PriceSeries&) = default;

private:
    std::string pair_label_;
    std::vector<std::int64_t> timestamps_;
    std::vector<double> closes_;
    std::int64_t resolution_seconds_ = 0;
};

/// Parses `YYYY-MM-DDTHH:MM:SSZ` into epoch seconds. Throws DataError.
std::int64_t parse_iso8601_utc(std::string_view text);

/// Formats epoch seconds as `YYYY-MM-DDTHH:MM:SSZ`.
std::string format_iso8601_utc(std::int64_t epoch_seconds);

/// Reads `timestamp,close` CSV. Rows are sorted by timestamp; duplicate timestamps,
/// malformed rows and non-positive closes raise ParseError with the line number.
PriceSeries parse_price_csv(std::istream& source, std::string pair_label = {});
PriceSeries load_price_csv(const std::string& path, std::string pair_label = {});

/// Keeps the last close of every non-empty bucket of width `bucket_seconds`, stamped at
/// the bucket's end. Empty buckets are dropped, not filled.
PriceSeries resample_last(const PriceSeries& series, std::int64_t bucket_seconds);

struct StatsRow {
    double mean = 0.0;
    double std = 0.0;  // population standard deviation
    double min = 0.0;
    double q1 = 0.0;
    double q2 = 0.0;
    double q3 = 0.0;
    double max = 0.0;
};

/// Linear-interpolation quantile of sorted data: position (n - 1) * p.
double quantile_sorted(std::span<const double> sorted, double p);

StatsRow summary_stats(std::span<const double> closes);
inline StatsRow summary_stats(const PriceSeries& series) { return summary_stats(series.closes()); }

/// Writes the `pair,mean,std,min,q1,q2,q3,max` CSV with values at 6 decimals.
void write_stats_csv(std::ostream& out,
                     std::span<const std::pair<std::string, StatsRow>> rows);

/// Writes the series as `timestamp,close` with ISO-8601 timestamps.
void write_series_csv(std::ostream& out, const PriceSeries& series);

/// Number of leading samples that go to the training side: floor(n * train_fraction).
/// Throws ConfigError if the fraction is outside (0, 1) or either side would be empty.
std::size_t split_point(std::size_t n, double train_fraction);

/// First floor(n * train_fraction) samples in time order form the training set.
std::pair<WindowedDataset, WindowedDataset> chronological_split(const WindowedDataset& dataset,
                                                                double train_fraction);

}  // namespace fxcast
