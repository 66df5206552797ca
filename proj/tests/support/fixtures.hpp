#pragma once

// Synthetic price series shared by unit and acceptance tests.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include <fxcast/dataio.hpp>
#include <fxcast/pipeline.hpp>

namespace fxcast::testing {

/// 1 + 0.1 sin(2 pi i / 50) + N(0, sigma^2).
inline std::vector<double> noisy_sine(std::size_t n, double sigma, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, sigma);
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) {
        v[i] = 1.0 + 0.1 * std::sin(2.0 * std::numbers::pi * static_cast<double>(i) / 50.0) + noise(rng);
    }
    return v;
}

/// AR(1) around a 20-step seasonal cycle, shifted to rate-like levels:
///   z_t = phi z_{t-1} + e_t,   x_t = 1 + a sin(2 pi t / 20) + z_t.
inline std::vector<double> seasonal_ar(std::size_t n, std::uint64_t seed, double phi = 0.8,
                                       double amplitude = 0.05, double sigma = 0.01) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, sigma);
    std::vector<double> v(n);
    double z = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
        z = phi * z + noise(rng);
        v[t] = 1.0 + amplitude * std::sin(2.0 * std::numbers::pi * static_cast<double>(t) / 20.0) + z;
    }
    return v;
}

/// Series stamped every `step` seconds from 2017-01-04T00:00:00Z.
inline PriceSeries as_series(const std::vector<double>& closes, std::string label = "SYN/USD",
                             std::int64_t step = 300) {
    std::vector<std::int64_t> ts(closes.size());
    const std::int64_t t0 = 1483488000;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        ts[i] = t0 + step * static_cast<std::int64_t>(i + 1);
    }
    return PriceSeries(std::move(label), std::move(ts), closes, step);
}

/// Chronological 8:2 split with the scaler fit on the training side only.
struct SplitData {
    Scaler scaler;
    WindowedDataset train;
    WindowedDataset test;
};

inline SplitData split_scale_window(const std::vector<double>& values, std::size_t window_len,
                                    double train_fraction = 0.8) {
    const std::size_t cut = split_point(values.size(), train_fraction);
    const std::span<const double> all(values);
    const Scaler s = fit_scaler(all.first(cut));
    const Vector tr = s.scale(all.first(cut));
    const Vector te = s.scale(all.subspan(cut));
    return SplitData{s, make_windows(tr.values(), window_len), make_windows(te.values(), window_len, cut)};
}

}  // namespace fxcast::testing
