#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace snp {

// Probabilists' Hermite polynomials H_n and the Gaussian-weighted lower
// integrals G_n and J_{p,q} used by the analytic CDF. All functions here are
// pure and thread-safe.

/// Largest order accepted by the product linearization; k!*C(i,k)*C(j,k)
/// stays inside int64 up to here.
inline constexpr int kMaxLinearizationOrder = 16;

/// H_0(z) .. H_K(z) for a single scalar z.
struct HermiteTable {
    int max_order = 0;
    std::vector<double> values;
};

/// H_n(z) by the three-term recurrence H_{n+1} = z*H_n - n*H_{n-1}.
double hermite_eval(int n, double z);

HermiteTable hermite_eval_all(int max_order, double z);

/// Same, writing into a caller buffer of size max_order + 1 (hot path).
void hermite_eval_all(int max_order, double z, std::span<double> out);

/// Standard normal density.
double normal_pdf(double z);

/// Standard normal CDF via erfc; absolute accuracy well below 1e-12.
double normal_cdf(double z);

/// G_n(x) = integral of phi*H_n over (-inf, x]:
/// Phi(x) for n = 0, -H_{n-1}(x)*phi(x) for n >= 1.
double gaussian_lower_integral(int n, double x);

/// G_0(x) .. G_max(x) into a buffer of size max_order + 1.
void gaussian_lower_integral_all(int max_order, double x, std::span<double> out);

struct HermiteProductTerm {
    int order;
    std::int64_t coefficient;
};

/// Terms of H_i * H_j = sum_k k! C(i,k) C(j,k) H_{i+j-2k}, exact integers.
/// Orders above kMaxLinearizationOrder are rejected.
std::vector<HermiteProductTerm> hermite_product_linearization(int i, int j);

/// J_{p,q}(x) = integral of phi*H_p*H_q over (-inf, x].
double crossed_lower_integral(int p, int q, double x);

/// J_{p,q}(x) given a precomputed table g[n] = G_n(x) for n <= p + q.
double crossed_lower_integral(int p, int q, std::span<const double> g_table);

/// Exact binomial coefficient; arguments must keep the result in int64.
std::int64_t binomial64(int n, int k);

/// Exact n! for 0 <= n <= 20.
std::int64_t factorial64(int n);

}  // namespace snp
