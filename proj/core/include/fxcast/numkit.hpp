#pragma once

// Dense float64 vectors and matrices plus the activation functions the
// models are built from. Everything here is a pure function of its inputs.

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fxcast {

/// Fixed-length vector of doubles.
class Vector {
public:
    Vector() = default;
    explicit Vector(std::size_t n, double fill = 0.0) : data_(n, fill) {}
    Vector(std::initializer_list<double> values) : data_(values) {}
    explicit Vector(std::vector<double> values) : data_(std::move(values)) {}

    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    double& operator[](std::size_t i) noexcept { return data_[i]; }
    double operator[](std::size_t i) const noexcept { return data_[i]; }

    std::span<double> values() noexcept { return data_; }
    std::span<const double> values() const noexcept { return data_; }

    auto begin() noexcept { return data_.begin(); }
    auto end() noexcept { return data_.end(); }
    auto begin() const noexcept { return data_.begin(); }
    auto end() const noexcept { return data_.end(); }

    const std::vector<double>& std() const noexcept { return data_; }

    friend bool operator==(const Vector&, const Vector&) = default;

private:
    std::vector<double> data_;
};

/// Row-major dense matrix. Shape is fixed at construction.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
    Matrix(std::initializer_list<std::initializer_list<double>> rows);

    static Matrix identity(std::size_t n);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return data_.size(); }

    double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

    std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const noexcept {
        return {data_.data() + r * cols_, cols_};
    }

    std::span<double> values() noexcept { return data_; }
    std::span<const double> values() const noexcept { return data_; }

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

std::string shape_string(const Matrix& m);

/// A * x. Throws DimensionError when A.cols() != x.size().
Vector matvec(const Matrix& a, const Vector& x);

/// Aᵀ * y. Throws DimensionError when A.rows() != y.size().
Vector matvec_transposed(const Matrix& a, const Vector& y);

/// A += scale * u vᵀ.
void add_outer(Matrix& a, const Vector& u, const Vector& v, double scale = 1.0);

/// y += scale * x.
void axpy(Vector& y, const Vector& x, double scale = 1.0);

double dot(const Vector& a, const Vector& b);

/// Unchecked inner product of equal-length spans.
double dot_span(std::span<const double> a, std::span<const double> b) noexcept;

/// Element-wise product.
Vector hadamard(const Vector& a, const Vector& b);

/// [a, b] concatenation.
Vector concat(const Vector& a, const Vector& b);

bool all_finite(std::span<const double> values) noexcept;

enum class Activation { Sigmoid, Tanh, Relu, Linear };

std::string_view to_string(Activation kind) noexcept;

/// Parses "sigmoid", "tanh", "relu" or "linear" (case-insensitive).
Activation parse_activation(std::string_view name);

double sigmoid(double x) noexcept;

double activate(Activation kind, double x) noexcept;

/// First derivative with respect to the pre-activation input.
/// The Relu derivative at exactly 0 is taken as 1.
double activate_prime(Activation kind, double x) noexcept;

Vector activate(Activation kind, const Vector& x);
Vector activate_prime(Activation kind, const Vector& x);

}  // namespace fxcast
