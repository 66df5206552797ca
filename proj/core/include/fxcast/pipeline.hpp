#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "fxcast/numkit.hpp"

namespace fxcast {

/// Min-max scaler mapping [x_min, x_max] onto [0, 1] and back.
class Scaler {
public:
    /// Throws ConfigError unless x_max > x_min and both are finite.
    Scaler(double x_min, double x_max);

    double x_min() const noexcept { return x_min_; }
    double x_max() const noexcept { return x_max_; }

    /// (x - x_min) / (x_max - x_min). Values outside the fitted range map outside [0, 1].
    double scale(double x) const noexcept { return (x - x_min_) / (x_max_ - x_min_); }

    /// y * (x_max - x_min) + x_min.
    double unscale(double y) const noexcept { return y * (x_max_ - x_min_) + x_min_; }

    Vector scale(std::span<const double> xs) const;
    Vector unscale(std::span<const double> ys) const;

    friend bool operator==(const Scaler&, const Scaler&) = default;

private:
    double x_min_;
    double x_max_;
};

/// Extrema of `values`. Throws DataError on empty input and on a constant series.
Scaler fit_scaler(std::span<const double> values);

/// Free-function forms of Scaler::scale / Scaler::unscale.
inline double scale(const Scaler& s, double x) noexcept { return s.scale(x); }
inline double unscale(const Scaler& s, double y) noexcept { return s.unscale(y); }

/// Stride-1 sliding windows: sample i has features values[i, i+window_len) and label
/// values[i+window_len].
struct WindowedDataset {
    std::size_t window_len = 0;
    Matrix features;                        // n x window_len
    Vector labels;                          // n
    std::vector<std::size_t> origin_index;  // index of each label in the source series

    std::size_t size() const noexcept { return labels.size(); }
    bool empty() const noexcept { return labels.empty(); }

    Vector feature_row(std::size_t i) const;

    /// Samples [first, first + count) as a new dataset.
    WindowedDataset slice(std::size_t first, std::size_t count) const;

    friend bool operator==(const WindowedDataset&, const WindowedDataset&) = default;
};

/// Throws DataError when values.size() < window_len + 1, naming the required length.
/// `origin_offset` is added to every origin_index entry.
WindowedDataset make_windows(std::span<const double> values, std::size_t window_len,
                             std::size_t origin_offset = 0);

}  // namespace fxcast
