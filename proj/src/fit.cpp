#include "snp/fit.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <string>

#include <json.hpp>

#include "optimize.hpp"
#include "snp/errors.hpp"
#include "snp/hermite.hpp"
#include "snp/parallel.hpp"

namespace snp {

namespace {

constexpr double kInfinity = std::numeric_limits<double>::infinity();

// Basis row for one sample, using caller scratch of size d*(K+1).
void basis_row(const MultiIndexSet& set, std::span<const double> z, std::span<double> tables,
               std::span<double> out) {
    const int d = set.dimension();
    const std::size_t stride = static_cast<std::size_t>(set.order()) + 1;
    for (int c = 0; c < d; ++c) {
        hermite_eval_all(set.order(), z[c], tables.subspan(c * stride, stride));
    }
    for (std::size_t m = 0; m < set.size(); ++m) {
        const MultiIndex& alpha = set.index(m);
        double prod = 1.0;
        for (int c = 0; c < d; ++c) {
            prod *= tables[c * stride + static_cast<std::size_t>(alpha.entries[c])];
        }
        out[m] = prod;
    }
}

void check_problem_sizes(std::span<const double> theta, const Matrix& whitened,
                         std::span<const double> weights, const MultiIndexSet& set) {
    if (theta.size() != set.size()) {
        throw UsageError("theta length does not match the index set");
    }
    if (static_cast<int>(whitened.cols()) != set.dimension()) {
        throw UsageError("sample dimension does not match the index set");
    }
    if (weights.size() != whitened.rows()) {
        throw UsageError("weight count does not match the sample count");
    }
}

double theta_quadratic(std::span<const double> theta, const MultiIndexSet& set) {
    double q = 0.0;
    for (std::size_t m = 0; m < theta.size(); ++m) {
        q += theta[m] * theta[m] * static_cast<double>(set.weight(m));
    }
    return q;
}

// Precomputed per-sample basis, scaled by 1/sqrt(alpha!) so the quadratic
// penalty becomes the plain squared norm of the scaled coefficients. The
// scaling is a pure reparametrization: objective values are unchanged.
struct ScaledBasis {
    const MultiIndexSet* set = nullptr;
    Matrix rows;                    // N x M, rows[i][m] = H_m(z_i)/sqrt(alpha_m!)
    std::vector<double> sqrt_w;     // sqrt(alpha_m!)
    std::vector<double> sample_w;   // w_i

    std::size_t samples() const { return rows.rows(); }
    std::size_t terms() const { return rows.cols(); }
};

ScaledBasis build_scaled_basis(const MultiIndexSet& set, const Matrix& whitened,
                               std::span<const double> weights) {
    ScaledBasis basis;
    basis.set = &set;
    const std::size_t n = whitened.rows();
    const std::size_t m = set.size();
    basis.rows = Matrix(n, m);
    basis.sample_w.assign(weights.begin(), weights.end());
    basis.sqrt_w.resize(m);
    for (std::size_t k = 0; k < m; ++k) {
        basis.sqrt_w[k] = std::sqrt(static_cast<double>(set.weight(k)));
    }
    const std::size_t scratch = static_cast<std::size_t>(set.dimension()) *
                                (static_cast<std::size_t>(set.order()) + 1);
    const std::size_t nblocks = (n + kReductionBlock - 1) / kReductionBlock;
    parallel_for(nblocks, [&](std::size_t blk) {
        std::vector<double> tables(scratch);
        const std::size_t lo = blk * kReductionBlock;
        const std::size_t hi = std::min(n, lo + kReductionBlock);
        for (std::size_t i = lo; i < hi; ++i) {
            basis_row(set, whitened.row(i), tables, basis.rows.row(i));
            double* row = basis.rows.row(i).data();
            for (std::size_t k = 0; k < m; ++k) row[k] /= basis.sqrt_w[k];
        }
    });
    return basis;
}

std::vector<double> scale_theta(std::span<const double> theta, const ScaledBasis& basis) {
    std::vector<double> scaled(theta.size());
    for (std::size_t m = 0; m < theta.size(); ++m) scaled[m] = theta[m] * basis.sqrt_w[m];
    return scaled;
}

std::vector<double> unscale_theta(std::span<const double> scaled, const ScaledBasis& basis) {
    std::vector<double> theta(scaled.size());
    for (std::size_t m = 0; m < scaled.size(); ++m) theta[m] = scaled[m] / basis.sqrt_w[m];
    return theta;
}

struct NonlinearEval {
    double objective = 0.0;
    double min_abs_p = kInfinity;
};

// Guarded likelihood term over all samples plus the log normalization.
NonlinearEval nonlinear_value(const ScaledBasis& basis, std::span<const double> theta_s,
                              double guard) {
    const std::size_t n = basis.samples();
    const std::size_t nblocks = (n + kReductionBlock - 1) / kReductionBlock;
    std::vector<double> partial(nblocks, 0.0);
    std::vector<double> partial_min(nblocks, kInfinity);
    parallel_for(nblocks, [&](std::size_t blk) {
        const std::size_t lo = blk * kReductionBlock;
        const std::size_t hi = std::min(n, lo + kReductionBlock);
        double s = 0.0;
        double mn = kInfinity;
        for (std::size_t i = lo; i < hi; ++i) {
            const double p = 1.0 + dot(theta_s, basis.rows.row(i));
            const double ap = std::abs(p);
            mn = std::min(mn, ap);
            s += -2.0 * basis.sample_w[i] * std::log(std::max(ap, guard));
        }
        partial[blk] = s;
        partial_min[blk] = mn;
    });
    NonlinearEval eval;
    for (double v : partial) eval.objective += v;
    for (double v : partial_min) eval.min_abs_p = std::min(eval.min_abs_p, v);
    const double q = dot(theta_s, theta_s);
    eval.objective += std::log1p(q);
    return eval;
}

// Gradient of the guarded objective. Samples inside the guard band contribute
// through a sign-preserving clamped denominator; callers that must fail
// instead check min_abs_p first.
double nonlinear_value_and_gradient(const ScaledBasis& basis, std::span<const double> theta_s,
                                    double guard, std::span<double> grad_out) {
    const std::size_t n = basis.samples();
    const std::size_t m = basis.terms();
    const std::size_t nblocks = (n + kReductionBlock - 1) / kReductionBlock;
    std::vector<double> partial(nblocks, 0.0);
    std::vector<double> partial_grad(nblocks * m, 0.0);
    parallel_for(nblocks, [&](std::size_t blk) {
        const std::size_t lo = blk * kReductionBlock;
        const std::size_t hi = std::min(n, lo + kReductionBlock);
        double s = 0.0;
        std::span<double> acc(partial_grad.data() + blk * m, m);
        for (std::size_t i = lo; i < hi; ++i) {
            std::span<const double> row = basis.rows.row(i);
            const double p = 1.0 + dot(theta_s, row);
            const double ap = std::abs(p);
            s += -2.0 * basis.sample_w[i] * std::log(std::max(ap, guard));
            double denom = p;
            if (ap < guard) denom = (p < 0.0) ? -guard : guard;
            axpy(-2.0 * basis.sample_w[i] / denom, row, acc);
        }
        partial[blk] = s;
    });
    double objective = 0.0;
    for (double v : partial) objective += v;
    std::fill(grad_out.begin(), grad_out.end(), 0.0);
    for (std::size_t blk = 0; blk < nblocks; ++blk) {
        const double* acc = partial_grad.data() + blk * m;
        for (std::size_t k = 0; k < m; ++k) grad_out[k] += acc[k];
    }
    const double q = dot(theta_s, theta_s);
    objective += std::log1p(q);
    const double shrink = 2.0 / (1.0 + q);
    for (std::size_t k = 0; k < m; ++k) grad_out[k] += shrink * theta_s[k];
    return objective;
}

// Relaxed branch objective; +inf when any sample violates sigma*p > 0.
double convex_value(const ScaledBasis& basis, std::span<const double> theta_s, int sigma) {
    const std::size_t n = basis.samples();
    const std::size_t nblocks = (n + kReductionBlock - 1) / kReductionBlock;
    std::vector<double> partial(nblocks, 0.0);
    parallel_for(nblocks, [&](std::size_t blk) {
        const std::size_t lo = blk * kReductionBlock;
        const std::size_t hi = std::min(n, lo + kReductionBlock);
        double s = 0.0;
        for (std::size_t i = lo; i < hi; ++i) {
            const double p = 1.0 + dot(theta_s, basis.rows.row(i));
            const double sp = sigma * p;
            if (sp <= 0.0) {
                s = kInfinity;
                break;
            }
            s += -2.0 * basis.sample_w[i] * std::log(sp);
        }
        partial[blk] = s;
    });
    double objective = 0.0;
    for (double v : partial) objective += v;
    if (!std::isfinite(objective)) return kInfinity;
    return objective + dot(theta_s, theta_s);
}

double convex_value_and_gradient(const ScaledBasis& basis, std::span<const double> theta_s,
                                 int sigma, std::span<double> grad_out) {
    const std::size_t n = basis.samples();
    const std::size_t m = basis.terms();
    const std::size_t nblocks = (n + kReductionBlock - 1) / kReductionBlock;
    std::vector<double> partial(nblocks, 0.0);
    std::vector<double> partial_grad(nblocks * m, 0.0);
    parallel_for(nblocks, [&](std::size_t blk) {
        const std::size_t lo = blk * kReductionBlock;
        const std::size_t hi = std::min(n, lo + kReductionBlock);
        double s = 0.0;
        std::span<double> acc(partial_grad.data() + blk * m, m);
        for (std::size_t i = lo; i < hi; ++i) {
            std::span<const double> row = basis.rows.row(i);
            const double p = 1.0 + dot(theta_s, row);
            if (sigma * p <= 0.0) {
                s = kInfinity;
                break;
            }
            s += -2.0 * basis.sample_w[i] * std::log(sigma * p);
            axpy(-2.0 * basis.sample_w[i] / p, row, acc);
        }
        partial[blk] = s;
    });
    double objective = 0.0;
    for (double v : partial) objective += v;
    std::fill(grad_out.begin(), grad_out.end(), 0.0);
    if (!std::isfinite(objective)) return kInfinity;
    for (std::size_t blk = 0; blk < nblocks; ++blk) {
        const double* acc = partial_grad.data() + blk * m;
        for (std::size_t k = 0; k < m; ++k) grad_out[k] += acc[k];
    }
    for (std::size_t k = 0; k < m; ++k) grad_out[k] += 2.0 * theta_s[k];
    return objective + dot(theta_s, theta_s);
}

struct ConvexProblem {
    const ScaledBasis& basis;
    int sigma;

    double value(std::span<const double> x) const { return convex_value(basis, x, sigma); }
    double value_and_gradient(std::span<const double> x, std::span<double> g) const {
        return convex_value_and_gradient(basis, x, sigma, g);
    }
};

struct NonlinearProblem {
    const ScaledBasis& basis;
    double guard;

    // Candidates whose polynomial value enters the guard band are rejected by
    // the line search; the gradient stays defined at accepted iterates.
    double value(std::span<const double> x) const {
        const NonlinearEval eval = nonlinear_value(basis, x, guard);
        if (eval.min_abs_p <= guard) return kInfinity;
        return eval.objective;
    }
    double value_and_gradient(std::span<const double> x, std::span<double> g) const {
        return nonlinear_value_and_gradient(basis, x, guard, g);
    }
};

bool all_samples_negative(const ScaledBasis& basis, std::span<const double> theta_s) {
    for (std::size_t i = 0; i < basis.samples(); ++i) {
        if (1.0 + dot(theta_s, basis.rows.row(i)) >= 0.0) return false;
    }
    return true;
}

// Smooth feasibility search for the negative branch: minimize
// log sum_i exp(1 + Theta^T H(z_i)). The objective is unbounded below
// exactly when some Theta makes every constraint negative, so reaching a
// negative value certifies strict feasibility.
struct LogSumExpProblem {
    const ScaledBasis& basis;

    double value(std::span<const double> x) const { return eval(x, nullptr); }
    double value_and_gradient(std::span<const double> x, std::span<double> g) const {
        return eval(x, &g);
    }

    double eval(std::span<const double> x, std::span<double>* grad) const {
        const std::size_t n = basis.samples();
        double peak = -kInfinity;
        for (std::size_t i = 0; i < n; ++i) {
            peak = std::max(peak, 1.0 + dot(x, basis.rows.row(i)));
        }
        double denom = 0.0;
        if (grad) std::fill(grad->begin(), grad->end(), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const double e = std::exp(1.0 + dot(x, basis.rows.row(i)) - peak);
            denom += e;
            if (grad) axpy(e, basis.rows.row(i), *grad);
        }
        if (grad) {
            for (double& v : *grad) v /= denom;
        }
        return peak + std::log(denom);
    }
};

std::optional<std::vector<double>> negative_branch_start(const ScaledBasis& basis) {
    const std::size_t m = basis.terms();
    // Probe direction -2 H(z_1)/|H(z_1)|^2, doubled until every sample
    // satisfies 1 + Theta^T H(z_i) < 0 (at most 20 scalings).
    std::vector<double> h(m);
    double norm_sq = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
        h[k] = basis.rows(0, k) * basis.sqrt_w[k];
        norm_sq += h[k] * h[k];
    }
    if (!(norm_sq > 0.0)) return std::nullopt;
    std::vector<double> theta_s(m);
    for (std::size_t k = 0; k < m; ++k) {
        theta_s[k] = -2.0 * h[k] / norm_sq * basis.sqrt_w[k];
    }
    for (int attempt = 0; attempt < 20; ++attempt) {
        if (all_samples_negative(basis, theta_s)) return theta_s;
        for (double& v : theta_s) v *= 2.0;
    }

    // The single-direction probe missed; fall back to the smooth phase-I
    // search before declaring the branch infeasible.
    LogSumExpProblem phase1{basis};
    detail::LbfgsOptions options;
    options.gradient_tolerance = 1e-7;
    options.max_iterations = 400;
    options.stop_below = -2.0;  // certifies max_i(1 + Theta^T H) < -2
    detail::LbfgsResult found =
        detail::lbfgs_minimize(std::vector<double>(m, 0.0), phase1, options);
    if (all_samples_negative(basis, found.x)) return found.x;
    return std::nullopt;
}

std::optional<ConvexFitResult> convex_fit_impl(const ScaledBasis& basis, Branch branch,
                                               const FitConfig& config) {
    std::vector<double> start(basis.terms(), 0.0);
    int sigma = 1;
    if (branch == Branch::negative) {
        auto probe = negative_branch_start(basis);
        if (!probe) return std::nullopt;
        start = std::move(*probe);
        sigma = -1;
    }
    ConvexProblem problem{basis, sigma};
    detail::LbfgsOptions options;
    options.gradient_tolerance = config.convex_tolerance;
    options.max_iterations = config.max_iterations;
    detail::LbfgsResult solved = detail::lbfgs_minimize(std::move(start), problem, options);
    ConvexFitResult result;
    result.theta = std::move(solved.x);  // still scaled; callers unscale
    result.objective = solved.objective;
    result.iterations = solved.iterations;
    return result;
}

NonlinearFitResult nonlinear_fit_impl(const ScaledBasis& basis,
                                      std::vector<double> initial_scaled,
                                      const FitConfig& config) {
    NonlinearProblem problem{basis, config.guard_epsilon};
    detail::LbfgsOptions options;
    options.gradient_tolerance = config.nonlinear_tolerance;
    options.max_iterations = config.max_iterations;
    detail::LbfgsResult solved = detail::lbfgs_minimize(std::move(initial_scaled), problem, options);
    NonlinearFitResult result;
    result.theta = std::move(solved.x);  // scaled
    result.objective = solved.objective;
    result.iterations = solved.iterations;
    return result;
}

}  // namespace

// ---------------------------------------------------------------------------
// Whitening

std::vector<double> uniform_weights(std::size_t n) {
    return std::vector<double>(n, 1.0 / static_cast<double>(n));
}

std::pair<Matrix, WhiteningTransform> whiten_samples(const Matrix& samples,
                                                     std::span<const double> weights) {
    const std::size_t n = samples.rows();
    const std::size_t d = samples.cols();
    if (d == 0) throw UsageError("whiten_samples: empty samples");
    if (n <= d) throw UsageError("whiten_samples: need more samples than dimensions");
    if (weights.size() != n) throw UsageError("whiten_samples: weight count mismatch");
    double wsum = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0)) throw UsageError("whiten_samples: weights must be nonnegative");
        wsum += w;
    }
    if (std::abs(wsum - 1.0) > 1e-9) {
        throw UsageError("whiten_samples: weights must sum to 1 (got " + std::to_string(wsum) +
                         ")");
    }

    std::vector<double> mean(d, 0.0);
    blocked_sum_vec(n, d, mean, [&](std::size_t i, std::span<double> acc) {
        axpy(weights[i], samples.row(i), acc);
    });

    // Weighted population covariance (divide by total weight, which is 1).
    std::vector<double> cov_flat(d * d, 0.0);
    blocked_sum_vec(n, d * d, cov_flat, [&](std::size_t i, std::span<double> acc) {
        std::span<const double> x = samples.row(i);
        for (std::size_t r = 0; r < d; ++r) {
            const double dr = weights[i] * (x[r] - mean[r]);
            for (std::size_t c = 0; c <= r; ++c) {
                acc[r * d + c] += dr * (x[c] - mean[c]);
            }
        }
    });
    Matrix cov(d, d);
    for (std::size_t r = 0; r < d; ++r) {
        for (std::size_t c = 0; c <= r; ++c) {
            cov(r, c) = cov_flat[r * d + c];
            cov(c, r) = cov_flat[r * d + c];
        }
    }

    Matrix factor = cholesky_lower(cov);  // throws DegenerateEnsembleError
    WhiteningTransform transform = WhiteningTransform::from_factor(mean, std::move(factor));

    Matrix whitened(n, d);
    const Matrix& lower = transform.factor;
    parallel_for(n, [&](std::size_t i) {
        std::span<const double> x = samples.row(i);
        std::span<double> z = whitened.row(i);
        for (std::size_t r = 0; r < d; ++r) {
            double s = x[r] - mean[r];
            for (std::size_t k = 0; k < r; ++k) s -= lower(r, k) * z[k];
            z[r] = s / lower(r, r);
        }
    });
    return {std::move(whitened), std::move(transform)};
}

std::pair<Matrix, WhiteningTransform> whiten_samples(const Matrix& samples) {
    const std::vector<double> w = uniform_weights(samples.rows());
    return whiten_samples(samples, w);
}

// ---------------------------------------------------------------------------
// Objective and gradient (public, unscaled coefficients)

double mle_objective(std::span<const double> theta, const Matrix& whitened,
                     std::span<const double> weights, const MultiIndexSet& set,
                     double guard_epsilon) {
    check_problem_sizes(theta, whitened, weights, set);
    const std::size_t n = whitened.rows();
    const std::size_t m = set.size();
    const std::size_t scratch =
        static_cast<std::size_t>(set.dimension()) * (static_cast<std::size_t>(set.order()) + 1);
    const std::size_t nblocks = (n + kReductionBlock - 1) / kReductionBlock;
    std::vector<double> partial(nblocks, 0.0);
    parallel_for(nblocks, [&](std::size_t blk) {
        std::vector<double> tables(scratch), basis(m);
        const std::size_t lo = blk * kReductionBlock;
        const std::size_t hi = std::min(n, lo + kReductionBlock);
        double s = 0.0;
        for (std::size_t i = lo; i < hi; ++i) {
            basis_row(set, whitened.row(i), tables, basis);
            const double p = 1.0 + dot(theta, basis);
            s += -2.0 * weights[i] * std::log(std::max(std::abs(p), guard_epsilon));
        }
        partial[blk] = s;
    });
    double objective = 0.0;
    for (double v : partial) objective += v;
    return objective + std::log1p(theta_quadratic(theta, set));
}

std::vector<double> mle_gradient(std::span<const double> theta, const Matrix& whitened,
                                 std::span<const double> weights, const MultiIndexSet& set,
                                 double guard_epsilon) {
    check_problem_sizes(theta, whitened, weights, set);
    const std::size_t n = whitened.rows();
    const std::size_t m = set.size();
    const std::size_t scratch =
        static_cast<std::size_t>(set.dimension()) * (static_cast<std::size_t>(set.order()) + 1);
    const std::size_t nblocks = (n + kReductionBlock - 1) / kReductionBlock;
    std::vector<double> partial_grad(nblocks * m, 0.0);
    std::vector<std::size_t> bad(nblocks, n);  // first guard-band sample per block
    parallel_for(nblocks, [&](std::size_t blk) {
        std::vector<double> tables(scratch), basis(m);
        const std::size_t lo = blk * kReductionBlock;
        const std::size_t hi = std::min(n, lo + kReductionBlock);
        std::span<double> acc(partial_grad.data() + blk * m, m);
        for (std::size_t i = lo; i < hi; ++i) {
            basis_row(set, whitened.row(i), tables, basis);
            const double p = 1.0 + dot(theta, basis);
            if (std::abs(p) <= guard_epsilon) {
                bad[blk] = i;
                return;
            }
            axpy(-2.0 * weights[i] / p, basis, acc);
        }
    });
    for (std::size_t blk = 0; blk < nblocks; ++blk) {
        if (bad[blk] != n) {
            throw NumericError("mle_gradient: sample " + std::to_string(bad[blk]) +
                               " lies inside the guard band; the gradient is undefined there");
        }
    }
    std::vector<double> grad(m, 0.0);
    for (std::size_t blk = 0; blk < nblocks; ++blk) {
        const double* acc = partial_grad.data() + blk * m;
        for (std::size_t k = 0; k < m; ++k) grad[k] += acc[k];
    }
    const double q = theta_quadratic(theta, set);
    for (std::size_t k = 0; k < m; ++k) {
        grad[k] += 2.0 * static_cast<double>(set.weight(k)) * theta[k] / (1.0 + q);
    }
    return grad;
}

double mle_objective_serial(std::span<const double> theta, const Matrix& whitened,
                            std::span<const double> weights, const MultiIndexSet& set,
                            double guard_epsilon) {
    check_problem_sizes(theta, whitened, weights, set);
    double objective = 0.0;
    std::vector<double> basis(set.size());
    for (std::size_t i = 0; i < whitened.rows(); ++i) {
        hermite_basis(set, whitened.row(i), basis);
        const double p = 1.0 + dot(theta, basis);
        objective += -2.0 * weights[i] * std::log(std::max(std::abs(p), guard_epsilon));
    }
    return objective + std::log1p(theta_quadratic(theta, set));
}

std::vector<double> mle_gradient_serial(std::span<const double> theta, const Matrix& whitened,
                                        std::span<const double> weights, const MultiIndexSet& set,
                                        double guard_epsilon) {
    check_problem_sizes(theta, whitened, weights, set);
    std::vector<double> grad(set.size(), 0.0);
    std::vector<double> basis(set.size());
    for (std::size_t i = 0; i < whitened.rows(); ++i) {
        hermite_basis(set, whitened.row(i), basis);
        const double p = 1.0 + dot(theta, basis);
        if (std::abs(p) <= guard_epsilon) {
            throw NumericError("mle_gradient: sample " + std::to_string(i) +
                               " lies inside the guard band; the gradient is undefined there");
        }
        axpy(-2.0 * weights[i] / p, basis, grad);
    }
    const double q = theta_quadratic(theta, set);
    for (std::size_t k = 0; k < grad.size(); ++k) {
        grad[k] += 2.0 * static_cast<double>(set.weight(k)) * theta[k] / (1.0 + q);
    }
    return grad;
}

// ---------------------------------------------------------------------------
// Fitting stages

std::optional<ConvexFitResult> convex_relaxed_fit(const Matrix& whitened,
                                                  std::span<const double> weights,
                                                  const MultiIndexSet& set, Branch branch,
                                                  const FitConfig& config) {
    const ScaledBasis basis = build_scaled_basis(set, whitened, weights);
    auto result = convex_fit_impl(basis, branch, config);
    if (result) result->theta = unscale_theta(result->theta, basis);
    return result;
}

NonlinearFitResult nonlinear_fit(const Matrix& whitened, std::span<const double> weights,
                                 const MultiIndexSet& set, std::span<const double> initial_theta,
                                 const FitConfig& config) {
    for (double v : initial_theta) {
        if (!std::isfinite(v)) throw UsageError("nonlinear_fit: initial theta must be finite");
    }
    if (initial_theta.size() != set.size()) {
        throw UsageError("nonlinear_fit: initial theta length mismatch");
    }
    const ScaledBasis basis = build_scaled_basis(set, whitened, weights);
    NonlinearFitResult result =
        nonlinear_fit_impl(basis, scale_theta(initial_theta, basis), config);
    result.theta = unscale_theta(result.theta, basis);
    if (!std::isfinite(result.objective)) {
        throw NumericError("nonlinear_fit: non-finite objective encountered");
    }
    return result;
}

std::pair<SnpDensity, FitReport> fit_snp(const Matrix& samples, std::span<const double> weights,
                                         const FitConfig& config) {
    auto [whitened, transform] = whiten_samples(samples, weights);
    const MultiIndexSet set = build_index_set(static_cast<int>(samples.cols()), config.order);

    FitReport report;
    if (samples.rows() < set.size()) {
        report.warnings.push_back("sample count " + std::to_string(samples.rows()) +
                                  " is below the coefficient count " +
                                  std::to_string(set.size()) +
                                  "; the fit is underdetermined");
    }

    const ScaledBasis basis = build_scaled_basis(set, whitened, weights);

    auto convex_pos = convex_fit_impl(basis, Branch::positive, config);
    NonlinearFitResult nl_pos = nonlinear_fit_impl(basis, convex_pos->theta, config);
    report.convex_objective_pos = convex_pos->objective;
    report.nonlinear_objective_pos = nl_pos.objective;
    report.iterations.convex_pos = convex_pos->iterations;
    report.iterations.nonlinear_pos = nl_pos.iterations;

    std::optional<NonlinearFitResult> nl_neg;
    if (config.branch_policy == BranchPolicy::both) {
        auto convex_neg = convex_fit_impl(basis, Branch::negative, config);
        if (convex_neg) {
            nl_neg = nonlinear_fit_impl(basis, convex_neg->theta, config);
            report.convex_objective_neg = convex_neg->objective;
            report.nonlinear_objective_neg = nl_neg->objective;
            report.iterations.convex_neg = convex_neg->iterations;
            report.iterations.nonlinear_neg = nl_neg->iterations;
        } else {
            report.warnings.push_back(
                "negative branch infeasible: no coefficient vector keeps the polynomial "
                "negative at every sample");
        }
    }

    // Smaller final objective wins; ties go to the positive branch.
    Branch chosen = Branch::positive;
    if (nl_neg && nl_neg->objective < nl_pos.objective - 1e-12) {
        chosen = Branch::negative;
    }
    report.chosen_branch = chosen;
    const NonlinearFitResult& winner = (chosen == Branch::positive) ? nl_pos : *nl_neg;
    report.theta = unscale_theta(winner.theta, basis);

    SnpDensity density(set, report.theta, std::move(transform));
    return {std::move(density), std::move(report)};
}

std::pair<SnpDensity, FitReport> fit_snp(const Matrix& samples, const FitConfig& config) {
    const std::vector<double> w = uniform_weights(samples.rows());
    return fit_snp(samples, w, config);
}

const char* branch_name(Branch branch) {
    return branch == Branch::positive ? "positive" : "negative";
}

// ---------------------------------------------------------------------------
// Report files

void save_fit_report(const FitReport& report, const std::filesystem::path& path) {
    nlohmann::ordered_json doc;
    doc["convex_objective_pos"] = report.convex_objective_pos;
    doc["convex_objective_neg"] =
        report.convex_objective_neg ? nlohmann::ordered_json(*report.convex_objective_neg)
                                    : nlohmann::ordered_json(nullptr);
    doc["nonlinear_objective_pos"] = report.nonlinear_objective_pos;
    doc["nonlinear_objective_neg"] =
        report.nonlinear_objective_neg ? nlohmann::ordered_json(*report.nonlinear_objective_neg)
                                       : nlohmann::ordered_json(nullptr);
    doc["chosen_branch"] = branch_name(report.chosen_branch);
    nlohmann::ordered_json iters;
    iters["convex_pos"] = report.iterations.convex_pos;
    iters["convex_neg"] = report.iterations.convex_neg
                              ? nlohmann::ordered_json(*report.iterations.convex_neg)
                              : nlohmann::ordered_json(nullptr);
    iters["nonlinear_pos"] = report.iterations.nonlinear_pos;
    iters["nonlinear_neg"] = report.iterations.nonlinear_neg
                                 ? nlohmann::ordered_json(*report.iterations.nonlinear_neg)
                                 : nlohmann::ordered_json(nullptr);
    doc["iterations"] = std::move(iters);
    doc["theta"] = report.theta;
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    out << doc.dump(2) << "\n";
    if (!out) throw IoError("write failed: " + path.string());
}

FitReport load_fit_report(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open: " + path.string());
    nlohmann::json doc;
    try {
        in >> doc;
        FitReport report;
        report.convex_objective_pos = doc.at("convex_objective_pos").get<double>();
        if (!doc.at("convex_objective_neg").is_null()) {
            report.convex_objective_neg = doc.at("convex_objective_neg").get<double>();
        }
        report.nonlinear_objective_pos = doc.at("nonlinear_objective_pos").get<double>();
        if (!doc.at("nonlinear_objective_neg").is_null()) {
            report.nonlinear_objective_neg = doc.at("nonlinear_objective_neg").get<double>();
        }
        const std::string branch = doc.at("chosen_branch").get<std::string>();
        if (branch == "positive") {
            report.chosen_branch = Branch::positive;
        } else if (branch == "negative") {
            report.chosen_branch = Branch::negative;
        } else {
            throw IoError("fit report " + path.string() + ": unknown branch '" + branch + "'");
        }
        const auto& iters = doc.at("iterations");
        report.iterations.convex_pos = iters.at("convex_pos").get<int>();
        if (!iters.at("convex_neg").is_null()) {
            report.iterations.convex_neg = iters.at("convex_neg").get<int>();
        }
        report.iterations.nonlinear_pos = iters.at("nonlinear_pos").get<int>();
        if (!iters.at("nonlinear_neg").is_null()) {
            report.iterations.nonlinear_neg = iters.at("nonlinear_neg").get<int>();
        }
        report.theta = doc.at("theta").get<std::vector<double>>();
        return report;
    } catch (const nlohmann::json::exception& e) {
        throw IoError("invalid fit report " + path.string() + ": " + e.what());
    }
}

}  // namespace snp
