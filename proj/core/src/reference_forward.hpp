#pragma once

// Straightforward forward passes templated on the scalar type, written independently of
// models.cpp. The gradient certifier evaluates its finite differences with these in
// extended precision so cancellation noise stays far below the analytic gradients.

#include <cmath>
#include <span>
#include <vector>

#include "fxcast/models.hpp"

namespace fxcast::reference {

template <class Real>
using Vec = std::vector<Real>;

inline constexpr std::size_t kNoBias = static_cast<std::size_t>(-1);

template <class Real>
Real act(Activation kind, Real x) {
    switch (kind) {
        case Activation::Sigmoid: return Real(1) / (Real(1) + std::exp(-x));
        case Activation::Tanh: return std::tanh(x);
        case Activation::Relu: return x > Real(0) ? x : Real(0);
        case Activation::Linear: return x;
    }
    return x;
}

/// Reads parameters through `w(array_index, element)`, so callers can perturb one entry
/// without copying the model.
template <class Real, class Weight>
Vec<Real> affine(const Weight& w, std::size_t array, std::size_t rows, std::size_t cols,
                 const Vec<Real>& x, std::size_t bias_array) {
    Vec<Real> out(rows);
    for (std::size_t r = 0; r < rows; ++r) {
        Real acc = bias_array == kNoBias ? Real(0) : w(bias_array, r);
        for (std::size_t c = 0; c < cols; ++c) {
            acc += w(array, r * cols + c) * x[c];
        }
        out[r] = acc;
    }
    return out;
}

template <class Real, class Weight>
Real readout(const Readout& r, std::size_t w_array, const Weight& w, const Vec<Real>& h) {
    Real acc = w(w_array + 1, 0);
    for (std::size_t k = 0; k < h.size(); ++k) {
        acc += w(w_array, k) * h[k];
    }
    return act(r.activation, acc);
}

// Array indices follow for_each_array order.

template <class Real, class Weight>
Real rnn(const RnnParams& p, const Weight& w, std::span<const double> window) {
    std::vector<Vec<Real>> seq;
    for (double v : window) {
        seq.push_back({Real(v)});
    }
    std::size_t base = 0;
    for (const auto& layer : p.layers) {
        const std::size_t hidden = layer.hidden_size();
        const std::size_t in = layer.input_size();
        Vec<Real> h(hidden, Real(0));
        for (auto& x : seq) {
            Vec<Real> a = affine(w, base, hidden, in, x, base + 2);
            Vec<Real> rec = affine(w, base + 1, hidden, hidden, h, kNoBias);
            for (std::size_t k = 0; k < hidden; ++k) {
                h[k] = act(layer.activation, a[k] + rec[k]);
            }
            x = h;
        }
        base += 3;
    }
    return readout(p.readout, base, w, seq.back());
}

template <class Real, class Weight>
Real lstm(const LstmParams& p, const Weight& w, std::span<const double> window) {
    std::vector<Vec<Real>> seq;
    for (double v : window) {
        seq.push_back({Real(v)});
    }
    std::size_t base = 0;
    for (const auto& layer : p.layers) {
        const std::size_t hidden = layer.hidden_size();
        const std::size_t cols = hidden + layer.input_size();
        Vec<Real> h(hidden, Real(0));
        Vec<Real> c(hidden, Real(0));
        for (auto& x : seq) {
            Vec<Real> z = h;
            z.insert(z.end(), x.begin(), x.end());
            const Vec<Real> f = affine(w, base + 0, hidden, cols, z, base + 4);
            const Vec<Real> i = affine(w, base + 1, hidden, cols, z, base + 5);
            const Vec<Real> g = affine(w, base + 2, hidden, cols, z, base + 6);
            const Vec<Real> o = affine(w, base + 3, hidden, cols, z, base + 7);
            Vec<Real> out(hidden);
            for (std::size_t k = 0; k < hidden; ++k) {
                c[k] = act(Activation::Sigmoid, f[k]) * c[k] +
                       act(Activation::Sigmoid, i[k]) * std::tanh(g[k]);
                h[k] = act(Activation::Sigmoid, o[k]) * std::tanh(c[k]);
                out[k] = act(layer.output_activation, h[k]);
            }
            x = out;
        }
        base += 8;
    }
    return readout(p.readout, base, w, seq.back());
}

template <class Real, class Weight>
Real mlp(const MlpParams& p, const Weight& w, std::span<const double> window) {
    Vec<Real> o(window.begin(), window.end());
    std::size_t base = 0;
    for (const auto& layer : p.layers) {
        Vec<Real> in = affine(w, base, layer.weights.rows(), layer.weights.cols(), o, base + 1);
        for (auto& v : in) {
            v = act(layer.activation, v);
        }
        o = std::move(in);
        base += 2;
    }
    return o[0];
}

template <class Real, class Weight>
Real forward(const ModelParams& p, const Weight& w, std::span<const double> window) {
    return std::visit(
        [&](const auto& concrete) -> Real {
            using P = std::decay_t<decltype(concrete)>;
            if constexpr (std::is_same_v<P, RnnParams>) {
                return rnn<Real>(concrete, w, window);
            } else if constexpr (std::is_same_v<P, LstmParams>) {
                return lstm<Real>(concrete, w, window);
            } else {
                return mlp<Real>(concrete, w, window);
            }
        },
        p);
}

}  // namespace fxcast::reference
