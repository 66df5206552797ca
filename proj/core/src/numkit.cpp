#include "fxcast/numkit.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include <fmt/format.h>

#include "fxcast/errors.hpp"

namespace fxcast {

double dot_span(std::span<const double> a, std::span<const double> b) noexcept {
    // Four partial sums; the fixed grouping keeps results deterministic.
    double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
    const std::size_t n = a.size();
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) {
        s0 += a[j] * b[j];
        s1 += a[j + 1] * b[j + 1];
        s2 += a[j + 2] * b[j + 2];
        s3 += a[j + 3] * b[j + 3];
    }
    for (; j < n; ++j) {
        s0 += a[j] * b[j];
    }
    return (s0 + s1) + (s2 + s3);
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows)
    : rows_(rows.size()), cols_(rows.size() == 0 ? 0 : rows.begin()->size()) {
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
        if (r.size() != cols_) {
            throw DimensionError("ragged matrix initializer");
        }
        data_.insert(data_.end(), r.begin(), r.end());
    }
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        m(i, i) = 1.0;
    }
    return m;
}

std::string shape_string(const Matrix& m) { return fmt::format("{}x{}", m.rows(), m.cols()); }

Vector matvec(const Matrix& a, const Vector& x) {
    if (a.cols() != x.size()) {
        throw DimensionError(fmt::format("matvec: matrix {} cannot multiply vector of length {}",
                                         shape_string(a), x.size()));
    }
    Vector out(a.rows());
    const auto xs = x.values();
    for (std::size_t i = 0; i < a.rows(); ++i) {
        out[i] = dot_span(a.row(i), xs);
    }
    return out;
}

Vector matvec_transposed(const Matrix& a, const Vector& y) {
    if (a.rows() != y.size()) {
        throw DimensionError(
            fmt::format("matvec_transposed: matrix {} (transposed) cannot multiply vector of length {}",
                        shape_string(a), y.size()));
    }
    Vector out(a.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const auto r = a.row(i);
        const double yi = y[i];
        if (yi == 0.0) {
            continue;
        }
        for (std::size_t j = 0; j < r.size(); ++j) {
            out[j] += r[j] * yi;
        }
    }
    return out;
}

void add_outer(Matrix& a, const Vector& u, const Vector& v, double scale) {
    if (a.rows() != u.size() || a.cols() != v.size()) {
        throw DimensionError(fmt::format("add_outer: matrix {} vs outer product {}x{}",
                                         shape_string(a), u.size(), v.size()));
    }
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const double ui = scale * u[i];
        if (ui == 0.0) {
            continue;
        }
        auto r = a.row(i);
        for (std::size_t j = 0; j < r.size(); ++j) {
            r[j] += ui * v[j];
        }
    }
}

void axpy(Vector& y, const Vector& x, double scale) {
    if (y.size() != x.size()) {
        throw DimensionError(fmt::format("axpy: lengths {} and {} differ", y.size(), x.size()));
    }
    for (std::size_t i = 0; i < y.size(); ++i) {
        y[i] += scale * x[i];
    }
}

double dot(const Vector& a, const Vector& b) {
    if (a.size() != b.size()) {
        throw DimensionError(fmt::format("dot: lengths {} and {} differ", a.size(), b.size()));
    }
    return dot_span(a.values(), b.values());
}

Vector hadamard(const Vector& a, const Vector& b) {
    if (a.size() != b.size()) {
        throw DimensionError(fmt::format("hadamard: lengths {} and {} differ", a.size(), b.size()));
    }
    Vector out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        out[i] = a[i] * b[i];
    }
    return out;
}

Vector concat(const Vector& a, const Vector& b) {
    std::vector<double> out;
    out.reserve(a.size() + b.size());
    out.insert(out.end(), a.begin(), a.end());
    out.insert(out.end(), b.begin(), b.end());
    return Vector(std::move(out));
}

bool all_finite(std::span<const double> values) noexcept {
    return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

std::string_view to_string(Activation kind) noexcept {
    switch (kind) {
        case Activation::Sigmoid: return "sigmoid";
        case Activation::Tanh: return "tanh";
        case Activation::Relu: return "relu";
        case Activation::Linear: return "linear";
    }
    return "unknown";
}

Activation parse_activation(std::string_view name) {
    std::string lower(name);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    for (auto kind : {Activation::Sigmoid, Activation::Tanh, Activation::Relu, Activation::Linear}) {
        if (lower == to_string(kind)) {
            return kind;
        }
    }
    throw ConfigError(fmt::format("unknown activation '{}'", name));
}

double sigmoid(double x) noexcept {
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

double activate(Activation kind, double x) noexcept {
    switch (kind) {
        case Activation::Sigmoid: return sigmoid(x);
        case Activation::Tanh: return std::tanh(x);
        case Activation::Relu: return x > 0.0 ? x : 0.0;
        case Activation::Linear: return x;
    }
    return x;
}

double activate_prime(Activation kind, double x) noexcept {
    switch (kind) {
        case Activation::Sigmoid: {
            const double s = sigmoid(x);
            return s * (1.0 - s);
        }
        case Activation::Tanh: {
            const double t = std::tanh(x);
            return 1.0 - t * t;
        }
        case Activation::Relu: return x < 0.0 ? 0.0 : 1.0;
        case Activation::Linear: return 1.0;
    }
    return 1.0;
}

Vector activate(Activation kind, const Vector& x) {
    Vector out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        out[i] = activate(kind, x[i]);
    }
    return out;
}

Vector activate_prime(Activation kind, const Vector& x) {
    Vector out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        out[i] = activate_prime(kind, x[i]);
    }
    return out;
}

}  // namespace fxcast
