#include "snp/linalg.hpp"

#include <cmath>
#include <string>

namespace snp {

Matrix cholesky_lower(const Matrix& a) {
    const std::size_t n = a.rows();
    if (a.cols() != n) throw UsageError("cholesky_lower: matrix must be square");
    Matrix l(n, n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        double diag = a(j, j);
        for (std::size_t k = 0; k < j; ++k) diag -= l(j, k) * l(j, k);
        if (!(diag > 0.0) || !std::isfinite(diag)) {
            throw DegenerateEnsembleError(
                "cholesky_lower: matrix is not positive definite (pivot " +
                std::to_string(j) + " = " + std::to_string(diag) + ")");
        }
        const double ljj = std::sqrt(diag);
        l(j, j) = ljj;
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = a(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
            l(i, j) = s / ljj;
        }
    }
    return l;
}

std::vector<double> solve_lower(const Matrix& lower, std::span<const double> b) {
    const std::size_t n = lower.rows();
    if (b.size() != n) throw UsageError("solve_lower: size mismatch");
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        double s = b[i];
        for (std::size_t k = 0; k < i; ++k) s -= lower(i, k) * y[k];
        y[i] = s / lower(i, i);
    }
    return y;
}

Matrix invert_lower(const Matrix& lower) {
    const std::size_t n = lower.rows();
    Matrix inv(n, n, 0.0);
    std::vector<double> e(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        e[j] = 1.0;
        std::vector<double> col = solve_lower(lower, e);
        for (std::size_t i = 0; i < n; ++i) inv(i, j) = col[i];
        e[j] = 0.0;
    }
    return inv;
}

std::vector<double> matvec(const Matrix& m, std::span<const double> v) {
    if (v.size() != m.cols()) throw UsageError("matvec: size mismatch");
    std::vector<double> out(m.rows(), 0.0);
    for (std::size_t i = 0; i < m.rows(); ++i) out[i] = dot(m.row(i), v);
    return out;
}

}  // namespace snp
