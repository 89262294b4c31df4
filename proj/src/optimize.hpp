#pragma once

#include <cmath>
#include <cstddef>
#include <deque>
#include <limits>
#include <span>
#include <vector>

#include "snp/linalg.hpp"

namespace snp::detail {

struct LbfgsOptions {
    double gradient_tolerance = 1e-8;
    int max_iterations = 500;
    int memory = 10;
    double armijo_c1 = 1e-4;
    double backtrack_factor = 0.5;
    int max_backtracks = 60;
    // Early exit once the objective drops below this (for feasibility
    // searches whose objective is unbounded below on success).
    double stop_below = -std::numeric_limits<double>::infinity();
};

struct LbfgsResult {
    std::vector<double> x;
    double objective = 0.0;
    int iterations = 0;
    bool converged = false;
};

// Quasi-Newton descent with curvature-pair memory (two-loop recursion) and
// Armijo backtracking. The problem must provide:
//   double value(span x)                       -- may return +inf to reject x
//   double value_and_gradient(span x, span g)  -- finite at accepted iterates
// Line-search candidates with non-finite value are backtracked past; every
// accepted step strictly decreases the objective.
template <class Problem>
LbfgsResult lbfgs_minimize(std::vector<double> x0, Problem& problem, const LbfgsOptions& opt) {
    const std::size_t n = x0.size();
    LbfgsResult result;
    result.x = std::move(x0);

    std::vector<double> grad(n);
    double fx = problem.value_and_gradient(result.x, grad);

    struct Pair {
        std::vector<double> s, y;
        double rho;
    };
    std::deque<Pair> pairs;

    std::vector<double> direction(n), candidate(n), grad_new(n), alpha_buf;

    for (int iter = 0; iter < opt.max_iterations; ++iter) {
        if (fx < opt.stop_below) {
            result.converged = true;
            break;
        }
        const double gnorm = norm2(grad);
        if (gnorm <= opt.gradient_tolerance) {
            result.converged = true;
            break;
        }

        // direction = -H * grad via the two-loop recursion
        direction.assign(grad.begin(), grad.end());
        alpha_buf.assign(pairs.size(), 0.0);
        for (std::size_t k = pairs.size(); k-- > 0;) {
            const Pair& p = pairs[k];
            const double a = p.rho * dot(p.s, direction);
            alpha_buf[k] = a;
            axpy(-a, p.y, direction);
        }
        if (!pairs.empty()) {
            const Pair& last = pairs.back();
            const double gamma = dot(last.s, last.y) / dot(last.y, last.y);
            for (double& v : direction) v *= gamma;
        }
        for (std::size_t k = 0; k < pairs.size(); ++k) {
            const Pair& p = pairs[k];
            const double b = p.rho * dot(p.y, direction);
            axpy(alpha_buf[k] - b, p.s, direction);
        }
        for (double& v : direction) v = -v;

        double slope = dot(grad, direction);
        if (!(slope < 0.0)) {
            // curvature memory gave a non-descent direction; restart steepest
            pairs.clear();
            for (std::size_t i = 0; i < n; ++i) direction[i] = -grad[i];
            slope = -gnorm * gnorm;
        }

        double step = 1.0;
        double f_candidate = std::numeric_limits<double>::infinity();
        bool accepted = false;
        for (int bt = 0; bt < opt.max_backtracks; ++bt) {
            for (std::size_t i = 0; i < n; ++i) candidate[i] = result.x[i] + step * direction[i];
            f_candidate = problem.value(candidate);
            if (std::isfinite(f_candidate) && f_candidate <= fx + opt.armijo_c1 * step * slope) {
                accepted = true;
                break;
            }
            step *= opt.backtrack_factor;
        }
        if (!accepted) break;

        const double f_new = problem.value_and_gradient(candidate, grad_new);

        Pair pair;
        pair.s.resize(n);
        pair.y.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            pair.s[i] = candidate[i] - result.x[i];
            pair.y[i] = grad_new[i] - grad[i];
        }
        const double sy = dot(pair.s, pair.y);
        if (sy > 1e-12 * norm2(pair.s) * norm2(pair.y)) {
            pair.rho = 1.0 / sy;
            pairs.push_back(std::move(pair));
            if (static_cast<int>(pairs.size()) > opt.memory) pairs.pop_front();
        }

        result.x.swap(candidate);
        grad.swap(grad_new);
        fx = f_new;
        result.iterations = iter + 1;
    }

    result.objective = fx;
    if (!result.converged) {
        result.converged = norm2(grad) <= opt.gradient_tolerance;
    }
    return result;
}

}  // namespace snp::detail
