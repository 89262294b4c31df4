// Timing harness comparing the OpenMP kernels against their serial
// reference implementations. Build and run:
//   cmake --build build --target snp_bench && ./build/benchmarks/snp_bench

#include <chrono>
#include <cmath>
#include <cstdio>
#include <vector>

#include "snp/density.hpp"
#include "snp/ensemble.hpp"
#include "snp/fit.hpp"
#include "snp/grid.hpp"
#include "snp/parallel.hpp"
#include "snp/rng.hpp"

using namespace snp;

namespace {

double now_seconds() {
    return std::chrono::duration<double>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

template <class F>
double time_best_of(int repeats, F&& f) {
    double best = 1e300;
    for (int r = 0; r < repeats; ++r) {
        const double t0 = now_seconds();
        f();
        best = std::min(best, now_seconds() - t0);
    }
    return best;
}

void report(const char* name, double serial_s, double parallel_s, double max_dev) {
    std::printf("%-28s serial %8.3f ms   parallel %8.3f ms   speedup %5.2fx   max|dev| %.2e\n",
                name, 1e3 * serial_s, 1e3 * parallel_s, serial_s / parallel_s, max_dev);
}

}  // namespace

int main() {
    std::printf("threads: %d\n", max_threads());

    // per-point RK4 propagation of a Lorenz ensemble
    {
        GaussianInitial init;
        init.mean = {1.0, 1.0, 1.0};
        init.covariance = Matrix(3, 3);
        for (int i = 0; i < 3; ++i) init.covariance(i, i) = 25.0;
        const SampleEnsemble ens = sample_gaussian(init, 20000, 1);
        const LorenzField lorenz{};
        SampleEnsemble out_serial, out_parallel;
        const double ts = time_best_of(
            3, [&] { out_serial = propagate_ensemble_serial(ens, lorenz, 1.0, 0.01); });
        const double tp =
            time_best_of(3, [&] { out_parallel = propagate_ensemble(ens, lorenz, 1.0, 0.01); });
        double dev = 0.0;
        for (std::size_t i = 0; i < out_serial.points.data().size(); ++i) {
            dev = std::max(dev, std::abs(out_serial.points.data()[i] -
                                         out_parallel.points.data()[i]));
        }
        report("rk4 ensemble (20k pts)", ts, tp, dev);
    }

    // likelihood objective and gradient over a large sample set
    {
        const MultiIndexSet set = build_index_set(3, 6);
        const std::size_t n = 200000;
        Matrix samples(n, 3);
        parallel_for(n, [&](std::size_t i) {
            SubstreamRng rng(2, i);
            for (int c = 0; c < 3; ++c) samples(i, c) = rng.normal();
        });
        const std::vector<double> w = uniform_weights(n);
        std::vector<double> theta(set.size(), 0.0);
        SubstreamRng rng(3, 0);
        for (double& v : theta) v = 0.02 * rng.normal();

        double obj_serial = 0.0, obj_parallel = 0.0;
        const double ts =
            time_best_of(3, [&] { obj_serial = mle_objective_serial(theta, samples, w, set); });
        const double tp =
            time_best_of(3, [&] { obj_parallel = mle_objective(theta, samples, w, set); });
        report("mle objective (200k x 80)", ts, tp, std::abs(obj_serial - obj_parallel));

        std::vector<double> g_serial, g_parallel;
        const double tgs =
            time_best_of(3, [&] { g_serial = mle_gradient_serial(theta, samples, w, set); });
        const double tgp =
            time_best_of(3, [&] { g_parallel = mle_gradient(theta, samples, w, set); });
        double dev = 0.0;
        for (std::size_t m = 0; m < g_serial.size(); ++m) {
            dev = std::max(dev, std::abs(g_serial[m] - g_parallel[m]));
        }
        report("mle gradient (200k x 80)", tgs, tgp, dev);
    }

    // density and cdf grids
    {
        MultiIndexSet set = build_index_set(2, 6);
        std::vector<double> theta(set.size(), 0.0);
        SubstreamRng rng(4, 0);
        double norm = 0.0;
        for (double& v : theta) {
            v = rng.normal();
            norm += v * v;
        }
        for (double& v : theta) v *= 0.5 / std::sqrt(norm);
        const SnpDensity density(set, theta);

        const GridSpec pdf_grid = parse_grid_spec("-4:4:400,-4:4:400");
        std::vector<double> a, b;
        const double ts = time_best_of(
            3, [&] { a = evaluate_grid_serial(density, pdf_grid, GridQuantity::pdf); });
        const double tp =
            time_best_of(3, [&] { b = evaluate_grid(density, pdf_grid, GridQuantity::pdf); });
        double dev = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) dev = std::max(dev, std::abs(a[i] - b[i]));
        report("pdf grid (400x400)", ts, tp, dev);

        const GridSpec cdf_grid = parse_grid_spec("-4:4:100,-4:4:100");
        const double tcs = time_best_of(
            3, [&] { a = evaluate_grid_serial(density, cdf_grid, GridQuantity::cdf); });
        const double tcp =
            time_best_of(3, [&] { b = evaluate_grid(density, cdf_grid, GridQuantity::cdf); });
        dev = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) dev = std::max(dev, std::abs(a[i] - b[i]));
        report("cdf grid (100x100)", tcs, tcp, dev);
    }

    // box counting over a large cloud
    {
        GaussianInitial init;
        init.mean = {0.0, 0.0, 0.0};
        init.covariance = Matrix(3, 3);
        for (int i = 0; i < 3; ++i) init.covariance(i, i) = 1.0;
        const SampleEnsemble ens = sample_gaussian(init, 4000000, 5);
        const std::vector<double> lo{-1.0, 0.0}, hi{-0.5, 2.0};
        const std::vector<int> coords{0, 1};
        double a = 0.0, b = 0.0;
        const double ts =
            time_best_of(3, [&] { a = mc_box_probability_serial(ens, lo, hi, coords); });
        const double tp = time_best_of(3, [&] { b = mc_box_probability(ens, lo, hi, coords); });
        report("mc box count (4M pts)", ts, tp, std::abs(a - b));
    }

    return 0;
}
