#pragma once

// Reference implementations written independently of the library, used as test oracles.
// Plain loops and nested std::vector on purpose: nothing here shares code with core/.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

namespace fxcast::oracle {

inline double rmse(const std::vector<double>& p, const std::vector<double>& t) {
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); i++) s += (p[i] - t[i]) * (p[i] - t[i]);
    return std::sqrt(s / static_cast<double>(p.size()));
}

inline double mae(const std::vector<double>& p, const std::vector<double>& t) {
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); i++) s += std::fabs(p[i] - t[i]);
    return s / static_cast<double>(p.size());
}

inline double mape(const std::vector<double>& p, const std::vector<double>& t) {
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); i++) s += std::fabs((t[i] - p[i]) / t[i]);
    return s / static_cast<double>(p.size());
}

/// Rolling windows by a double loop: features[i][k] = v[i + k], label[i] = v[i + dt].
struct Windows {
    std::vector<std::vector<double>> features;
    std::vector<double> labels;
};

inline Windows windows(const std::vector<double>& v, std::size_t dt) {
    Windows w;
    for (std::size_t i = 0; i + dt < v.size(); i++) {
        std::vector<double> row;
        for (std::size_t k = 0; k < dt; k++) row.push_back(v[i + k]);
        w.features.push_back(row);
        w.labels.push_back(v[i + dt]);
    }
    return w;
}

/// One-pass (Welford) mean and population variance plus running extrema; quantiles by
/// selecting the two neighbouring order statistics with nth_element.
struct StreamingStats {
    std::size_t n = 0;
    double mean = 0.0;
    double m2 = 0.0;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();

    void push(double x) {
        n++;
        const double d = x - mean;
        mean += d / static_cast<double>(n);
        m2 += d * (x - mean);
        lo = std::min(lo, x);
        hi = std::max(hi, x);
    }
    double std_pop() const { return std::sqrt(m2 / static_cast<double>(n)); }
};

inline double quantile(std::vector<double> v, double p) {
    const double pos = p * static_cast<double>(v.size() - 1);
    const auto k = static_cast<std::size_t>(std::floor(pos));
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(k), v.end());
    const double a = v[k];
    if (k + 1 >= v.size()) return a;
    const double b = *std::min_element(v.begin() + static_cast<std::ptrdiff_t>(k) + 1, v.end());
    return a + (pos - static_cast<double>(k)) * (b - a);
}

/// Sigmoid multilayer perceptron updated exactly as the textbook delta rule reads:
///   I_j = sum_i W_ij O_i + theta_j,   O_j = 1 / (1 + e^-I_j)
///   output layer:  E_j = O_j (1 - O_j) (T_j - O_j)
///   hidden layer:  E_j = O_j (1 - O_j) sum_k E_k W_jk
///   W_ij += l E_j O_i,   theta_j += l E_j
/// w[layer][j][i] is the weight from unit i of the layer below into unit j.
struct LiteralNet {
    std::vector<std::vector<std::vector<double>>> w;
    std::vector<std::vector<double>> theta;
};

inline void literal_update(LiteralNet& net, const std::vector<double>& x, double target, double l) {
    const std::size_t layers = net.w.size();
    std::vector<std::vector<double>> O(layers + 1);
    O[0] = x;
    for (std::size_t L = 0; L < layers; L++) {
        O[L + 1].resize(net.w[L].size());
        for (std::size_t j = 0; j < net.w[L].size(); j++) {
            double I = net.theta[L][j];
            for (std::size_t i = 0; i < O[L].size(); i++) I += net.w[L][j][i] * O[L][i];
            O[L + 1][j] = 1.0 / (1.0 + std::exp(-I));
        }
    }
    std::vector<std::vector<double>> E(layers);
    E[layers - 1].resize(1);
    const double out = O[layers][0];
    E[layers - 1][0] = out * (1 - out) * (target - out);
    for (std::size_t L = layers - 1; L-- > 0;) {
        E[L].resize(net.w[L].size());
        for (std::size_t j = 0; j < net.w[L].size(); j++) {
            double s = 0.0;
            for (std::size_t k = 0; k < net.w[L + 1].size(); k++) s += E[L + 1][k] * net.w[L + 1][k][j];
            const double o = O[L + 1][j];
            E[L][j] = o * (1 - o) * s;
        }
    }
    for (std::size_t L = 0; L < layers; L++) {
        for (std::size_t j = 0; j < net.w[L].size(); j++) {
            for (std::size_t i = 0; i < O[L].size(); i++) net.w[L][j][i] += l * E[L][j] * O[L][i];
            net.theta[L][j] += l * E[L][j];
        }
    }
}

}  // namespace fxcast::oracle
