#include "fxcast/pipeline.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "fxcast/errors.hpp"

namespace fxcast {

Scaler::Scaler(double x_min, double x_max) : x_min_(x_min), x_max_(x_max) {
    if (!std::isfinite(x_min) || !std::isfinite(x_max) || !(x_max > x_min)) {
        throw ConfigError(fmt::format("scaler needs x_max > x_min, got [{}, {}]", x_min, x_max));
    }
}

Vector Scaler::scale(std::span<const double> xs) const {
    Vector out(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        out[i] = scale(xs[i]);
    }
    return out;
}

Vector Scaler::unscale(std::span<const double> ys) const {
    Vector out(ys.size());
    for (std::size_t i = 0; i < ys.size(); ++i) {
        out[i] = unscale(ys[i]);
    }
    return out;
}

Scaler fit_scaler(std::span<const double> values) {
    if (values.empty()) {
        throw DataError("cannot fit a scaler on an empty series");
    }
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    if (!(*hi > *lo)) {
        throw DataError(fmt::format("cannot fit a scaler on a constant series (value {})", *lo));
    }
    return Scaler(*lo, *hi);
}

Vector WindowedDataset::feature_row(std::size_t i) const {
    const auto r = features.row(i);
    return Vector(std::vector<double>(r.begin(), r.end()));
}

WindowedDataset WindowedDataset::slice(std::size_t first, std::size_t count) const {
    if (first + count > size()) {
        throw DimensionError(fmt::format("slice [{}, {}) exceeds dataset of {} samples", first,
                                         first + count, size()));
    }
    WindowedDataset out;
    out.window_len = window_len;
    out.features = Matrix(count, window_len);
    out.labels = Vector(count);
    out.origin_index.assign(origin_index.begin() + static_cast<std::ptrdiff_t>(first),
                            origin_index.begin() + static_cast<std::ptrdiff_t>(first + count));
    for (std::size_t i = 0; i < count; ++i) {
        const auto src = features.row(first + i);
        std::copy(src.begin(), src.end(), out.features.row(i).begin());
        out.labels[i] = labels[first + i];
    }
    return out;
}

WindowedDataset make_windows(std::span<const double> values, std::size_t window_len,
                             std::size_t origin_offset) {
    if (window_len == 0) {
        throw ConfigError("window length must be at least 1");
    }
    if (values.size() < window_len + 1) {
        throw DataError(fmt::format("series of length {} is too short for window {}: need at least {}",
                                    values.size(), window_len, window_len + 1));
    }
    const std::size_t n = values.size() - window_len;
    WindowedDataset out;
    out.window_len = window_len;
    out.features = Matrix(n, window_len);
    out.labels = Vector(n);
    out.origin_index.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto row = out.features.row(i);
        std::copy_n(values.begin() + static_cast<std::ptrdiff_t>(i), window_len, row.begin());
        out.labels[i] = values[i + window_len];
        out.origin_index[i] = origin_offset + i + window_len;
    }
    return out;
}

}  // namespace fxcast
