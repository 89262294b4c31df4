#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "snp/errors.hpp"
#include "snp/linalg.hpp"
#include "snp/parallel.hpp"

namespace snp {

struct LorenzParams {
    double s = 10.0;
    double rho = 28.0;
    double beta = 8.0 / 3.0;
};

inline void lorenz_rhs(const LorenzParams& params, std::span<const double> state,
                       std::span<double> out) {
    out[0] = params.s * (state[1] - state[0]);
    out[1] = state[0] * (params.rho - state[2]) - state[1];
    out[2] = state[0] * state[1] - params.beta * state[2];
}

/// Callable wrapper so the Lorenz field can be passed to the templated
/// integrator directly.
struct LorenzField {
    LorenzParams params;
    void operator()(std::span<const double> state, std::span<double> out) const {
        lorenz_rhs(params, state, out);
    }
};

struct GaussianInitial {
    std::vector<double> mean;
    Matrix covariance;  // symmetric positive definite
};

/// Weighted point cloud at a fixed time, with its RNG seed provenance.
struct SampleEnsemble {
    Matrix points;  // N x d
    std::vector<double> weights;
    std::uint64_t seed = 0;
    double time = 0.0;

    std::size_t size() const { return points.rows(); }
    int dimension() const { return static_cast<int>(points.cols()); }
};

struct Rk4Workspace {
    std::vector<double> k1, k2, k3, k4, stage;
    void resize(std::size_t d) {
        k1.resize(d);
        k2.resize(d);
        k3.resize(d);
        k4.resize(d);
        stage.resize(d);
    }
};

namespace detail {
template <class Rhs>
void rk4_step(std::span<double> state, Rhs&& rhs, double h, Rk4Workspace& ws) {
    const std::size_t d = state.size();
    rhs(std::span<const double>(state), std::span<double>(ws.k1));
    for (std::size_t i = 0; i < d; ++i) ws.stage[i] = state[i] + 0.5 * h * ws.k1[i];
    rhs(std::span<const double>(ws.stage), std::span<double>(ws.k2));
    for (std::size_t i = 0; i < d; ++i) ws.stage[i] = state[i] + 0.5 * h * ws.k2[i];
    rhs(std::span<const double>(ws.stage), std::span<double>(ws.k3));
    for (std::size_t i = 0; i < d; ++i) ws.stage[i] = state[i] + h * ws.k3[i];
    rhs(std::span<const double>(ws.stage), std::span<double>(ws.k4));
    for (std::size_t i = 0; i < d; ++i) {
        state[i] += h / 6.0 * (ws.k1[i] + 2.0 * ws.k2[i] + 2.0 * ws.k3[i] + ws.k4[i]);
    }
}

inline long rk4_step_count(double duration, double step) {
    if (duration == 0.0) return 0;
    return static_cast<long>(std::ceil(duration / step - 1e-9));
}
}  // namespace detail

/// Classical fourth-order fixed-step integration from t=0 to t=T; the final
/// step is shortened to land exactly on T. Throws DivergenceError when the
/// state leaves the representable range.
template <class Rhs>
void propagate(std::span<double> state, Rhs&& rhs, double duration, double step,
               Rk4Workspace& ws) {
    if (duration < 0.0) throw UsageError("propagate: duration must be nonnegative");
    if (!(step > 0.0)) throw UsageError("propagate: step must be positive");
    ws.resize(state.size());
    const long n = detail::rk4_step_count(duration, step);
    for (long k = 0; k < n; ++k) {
        const double h = (k + 1 == n) ? duration - static_cast<double>(n - 1) * step : step;
        detail::rk4_step(state, rhs, h, ws);
        for (double v : state) {
            if (!std::isfinite(v)) {
                const double t_fail = (k + 1 == n) ? duration : static_cast<double>(k + 1) * step;
                throw DivergenceError(
                    "propagate: state became non-finite at t=" + std::to_string(t_fail), t_fail);
            }
        }
    }
}

template <class Rhs>
std::vector<double> propagate(std::span<const double> state, Rhs&& rhs, double duration,
                              double step) {
    std::vector<double> out(state.begin(), state.end());
    Rk4Workspace ws;
    propagate(std::span<double>(out), rhs, duration, step, ws);
    return out;
}

/// Per-point propagation of a whole ensemble; weights, seed, and point order
/// carry through, output time advances by the duration. Per-point divergences
/// are aggregated and reported together.
template <class Rhs>
SampleEnsemble propagate_ensemble(const SampleEnsemble& ensemble, Rhs&& rhs, double duration,
                                  double step) {
    if (duration < 0.0) throw UsageError("propagate_ensemble: duration must be nonnegative");
    if (!(step > 0.0)) throw UsageError("propagate_ensemble: step must be positive");
    SampleEnsemble out = ensemble;
    out.time = ensemble.time + duration;
    const std::size_t n = out.size();
    std::vector<double> fail_time(n, -1.0);
    const std::size_t nblocks = (n + kReductionBlock - 1) / kReductionBlock;
    parallel_for(nblocks, [&](std::size_t blk) {
        Rk4Workspace ws;
        const std::size_t lo = blk * kReductionBlock;
        const std::size_t hi = std::min(n, lo + kReductionBlock);
        for (std::size_t i = lo; i < hi; ++i) {
            try {
                propagate(out.points.row(i), rhs, duration, step, ws);
            } catch (const DivergenceError& e) {
                fail_time[i] = e.time;
            }
        }
    });
    std::size_t failures = 0;
    std::size_t first = n;
    for (std::size_t i = 0; i < n; ++i) {
        if (fail_time[i] >= 0.0 && failures++ == 0) first = i;
    }
    if (failures > 0) {
        throw DivergenceError("propagate_ensemble: " + std::to_string(failures) +
                                  " of " + std::to_string(n) +
                                  " points diverged; first at index " + std::to_string(first) +
                                  ", t=" + std::to_string(fail_time[first]),
                              fail_time[first]);
    }
    return out;
}

/// Serial reference for the parallel per-point kernel above.
template <class Rhs>
SampleEnsemble propagate_ensemble_serial(const SampleEnsemble& ensemble, Rhs&& rhs,
                                         double duration, double step) {
    SampleEnsemble out = ensemble;
    out.time = ensemble.time + duration;
    Rk4Workspace ws;
    for (std::size_t i = 0; i < out.size(); ++i) {
        propagate(out.points.row(i), rhs, duration, step, ws);
    }
    return out;
}

/// Draw n i.i.d. samples from N(mean, covariance) through the covariance's
/// lower-triangular factor. Point i uses substream (seed, i), so the result
/// is reproducible bit-for-bit at any thread count.
SampleEnsemble sample_gaussian(const GaussianInitial& initial, std::size_t n, std::uint64_t seed);

/// Weight mass of points whose selected coordinates lie inside the closed box.
double mc_box_probability(const SampleEnsemble& ensemble, std::span<const double> lower,
                          std::span<const double> upper, std::span<const int> coords);
double mc_box_probability_serial(const SampleEnsemble& ensemble, std::span<const double> lower,
                                 std::span<const double> upper, std::span<const int> coords);

/// Ensemble CSV round trip; floats are written in shortest round-trip form.
void save_ensemble_csv(const SampleEnsemble& ensemble, const std::filesystem::path& path);
SampleEnsemble load_ensemble_csv(const std::filesystem::path& path);

}  // namespace snp
