#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "snp/errors.hpp"

namespace snp {

/// Dense row-major matrix of doubles. Small and value-semantic; rows are
/// addressable as contiguous spans.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
    std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

    bool operator==(const Matrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

/// y += alpha * x
inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

/// Lower-triangular Cholesky factor of a symmetric positive definite matrix.
/// Throws DegenerateEnsembleError when a pivot is not strictly positive.
Matrix cholesky_lower(const Matrix& a);

/// Solve L y = b for lower-triangular L (forward substitution).
std::vector<double> solve_lower(const Matrix& lower, std::span<const double> b);

/// Explicit inverse of a lower-triangular matrix.
Matrix invert_lower(const Matrix& lower);

/// out = m * v
std::vector<double> matvec(const Matrix& m, std::span<const double> v);

}  // namespace snp
