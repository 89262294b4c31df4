#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace snp {

// Fixed partition width for reductions. Partial sums are produced per block
// and combined in block order, so results do not depend on the thread count
// or the schedule; reruns are bit-identical.
inline constexpr std::size_t kReductionBlock = 2048;

/// Run f(i) for i in [0, n). Iterations must be independent.
template <class F>
void parallel_for(std::size_t n, F&& f) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < static_cast<long long>(n); ++i) f(static_cast<std::size_t>(i));
#else
    for (std::size_t i = 0; i < n; ++i) f(i);
#endif
}

/// Deterministic sum of term(i) over i in [0, n).
template <class F>
double blocked_sum(std::size_t n, F&& term) {
    const std::size_t nblocks = (n + kReductionBlock - 1) / kReductionBlock;
    std::vector<double> partial(nblocks, 0.0);
    parallel_for(nblocks, [&](std::size_t b) {
        const std::size_t lo = b * kReductionBlock;
        const std::size_t hi = std::min(n, lo + kReductionBlock);
        double s = 0.0;
        for (std::size_t i = lo; i < hi; ++i) s += term(i);
        partial[b] = s;
    });
    double total = 0.0;
    for (double p : partial) total += p;
    return total;
}

/// Deterministic vector-valued sum: calls accumulate(i, acc) which must add
/// element i's length-m contribution into acc. Result is written to out.
template <class F>
void blocked_sum_vec(std::size_t n, std::size_t m, std::span<double> out, F&& accumulate) {
    const std::size_t nblocks = (n + kReductionBlock - 1) / kReductionBlock;
    std::vector<double> partial(nblocks * m, 0.0);
    parallel_for(nblocks, [&](std::size_t b) {
        const std::size_t lo = b * kReductionBlock;
        const std::size_t hi = std::min(n, lo + kReductionBlock);
        std::span<double> acc(partial.data() + b * m, m);
        for (std::size_t i = lo; i < hi; ++i) accumulate(i, acc);
    });
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t b = 0; b < nblocks; ++b) {
        const double* acc = partial.data() + b * m;
        for (std::size_t j = 0; j < m; ++j) out[j] += acc[j];
    }
}

inline int max_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

}  // namespace snp
