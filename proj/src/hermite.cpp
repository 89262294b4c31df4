#include "snp/hermite.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "snp/errors.hpp"

namespace snp {

namespace {
constexpr double kInvSqrt2Pi = 0.3989422804014326779399460599343819;
constexpr double kInvSqrt2 = 0.7071067811865475244008443621048490;
}  // namespace

double hermite_eval(int n, double z) {
    if (n < 0) throw UsageError("hermite_eval: order must be nonnegative");
    if (n == 0) return 1.0;
    double prev = 1.0;  // H_0
    double cur = z;     // H_1
    for (int k = 1; k < n; ++k) {
        const double next = z * cur - static_cast<double>(k) * prev;
        prev = cur;
        cur = next;
    }
    return cur;
}

void hermite_eval_all(int max_order, double z, std::span<double> out) {
    out[0] = 1.0;
    if (max_order == 0) return;
    out[1] = z;
    for (int k = 1; k < max_order; ++k) {
        out[k + 1] = z * out[k] - static_cast<double>(k) * out[k - 1];
    }
}

HermiteTable hermite_eval_all(int max_order, double z) {
    if (max_order < 0) throw UsageError("hermite_eval_all: order must be nonnegative");
    HermiteTable table;
    table.max_order = max_order;
    table.values.resize(static_cast<std::size_t>(max_order) + 1);
    hermite_eval_all(max_order, z, table.values);
    return table;
}

double normal_pdf(double z) { return kInvSqrt2Pi * std::exp(-0.5 * z * z); }

double normal_cdf(double z) { return 0.5 * std::erfc(-z * kInvSqrt2); }

double gaussian_lower_integral(int n, double x) {
    if (n < 0) throw UsageError("gaussian_lower_integral: order must be nonnegative");
    if (n == 0) return normal_cdf(x);
    return -hermite_eval(n - 1, x) * normal_pdf(x);
}

void gaussian_lower_integral_all(int max_order, double x, std::span<double> out) {
    out[0] = normal_cdf(x);
    if (max_order == 0) return;
    const double phi = normal_pdf(x);
    // G_n = -H_{n-1} * phi, with H built by the recurrence in place.
    double prev = 1.0;
    double cur = x;
    out[1] = -prev * phi;
    for (int n = 2; n <= max_order; ++n) {
        out[n] = -cur * phi;
        const double next = x * cur - static_cast<double>(n - 1) * prev;
        prev = cur;
        cur = next;
    }
}

std::int64_t factorial64(int n) {
    if (n < 0 || n > 20) throw UsageError("factorial64: argument out of range [0,20]");
    std::int64_t f = 1;
    for (int k = 2; k <= n; ++k) f *= k;
    return f;
}

std::int64_t binomial64(int n, int k) {
    if (k < 0 || k > n) return 0;
    if (k > n - k) k = n - k;
    std::int64_t c = 1;
    for (int i = 1; i <= k; ++i) {
        c = c * (n - k + i) / i;  // exact: partial products are binomials
    }
    return c;
}

std::vector<HermiteProductTerm> hermite_product_linearization(int i, int j) {
    if (i < 0 || j < 0) throw UsageError("hermite_product_linearization: orders must be nonnegative");
    if (i > kMaxLinearizationOrder || j > kMaxLinearizationOrder) {
        throw UsageError("hermite_product_linearization: order above " +
                         std::to_string(kMaxLinearizationOrder) +
                         " would overflow the exact integer coefficients");
    }
    const int kmax = std::min(i, j);
    std::vector<HermiteProductTerm> terms;
    terms.reserve(static_cast<std::size_t>(kmax) + 1);
    for (int k = 0; k <= kmax; ++k) {
        const std::int64_t coeff = factorial64(k) * binomial64(i, k) * binomial64(j, k);
        terms.push_back({i + j - 2 * k, coeff});
    }
    return terms;
}

double crossed_lower_integral(int p, int q, std::span<const double> g_table) {
    const int kmax = std::min(p, q);
    double sum = 0.0;
    for (int k = 0; k <= kmax; ++k) {
        const double coeff =
            static_cast<double>(factorial64(k) * binomial64(p, k) * binomial64(q, k));
        sum += coeff * g_table[p + q - 2 * k];
    }
    return sum;
}

double crossed_lower_integral(int p, int q, double x) {
    if (p < 0 || q < 0) throw UsageError("crossed_lower_integral: orders must be nonnegative");
    if (p > kMaxLinearizationOrder || q > kMaxLinearizationOrder) {
        throw UsageError("crossed_lower_integral: order above " +
                         std::to_string(kMaxLinearizationOrder) + " is not supported");
    }
    std::vector<double> g(static_cast<std::size_t>(p + q) + 1);
    gaussian_lower_integral_all(p + q, x, g);
    return crossed_lower_integral(p, q, g);
}

}  // namespace snp
