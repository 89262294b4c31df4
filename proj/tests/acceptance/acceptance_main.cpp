// Acceptance suite: runs every criterion end to end and prints one
// PASS/FAIL line per criterion. Exit code is the number of failures.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "snp/density.hpp"
#include "snp/ensemble.hpp"
#include "snp/fit.hpp"
#include "snp/grid.hpp"
#include "snp/hermite.hpp"
#include "snp/indexset.hpp"
#include "snp/parallel.hpp"
#include "snp/rng.hpp"
#include "support/fixtures.hpp"
#include "support/quadrature.hpp"

namespace fs = std::filesystem;
using namespace snp;

namespace {

constexpr std::uint64_t kSeed = 20240601;

struct Failure {
    std::string message;
};

void require(bool ok, const std::string& message) {
    if (!ok) throw Failure{message};
}

std::string fmt(double v) {
    std::ostringstream ss;
    ss.precision(6);
    ss << v;
    return ss.str();
}

GaussianInitial lorenz_initial(double variance) {
    GaussianInitial init;
    init.mean = {1.0, 1.0, 1.0};
    init.covariance = Matrix(3, 3);
    for (int i = 0; i < 3; ++i) init.covariance(i, i) = variance;
    return init;
}

// ---------------------------------------------------------------------------
// 1. Hermite orthogonality

std::string criterion_orthogonality() {
    const auto [nodes, weights] = oracle::gauss_hermite_normal(24);
    double worst = 0.0;
    for (int m = 0; m <= 10; ++m) {
        for (int n = 0; n <= 10; ++n) {
            oracle::KahanSum sum;
            for (std::size_t k = 0; k < nodes.size(); ++k) {
                sum.add(weights[k] * hermite_eval(m, nodes[k]) * hermite_eval(n, nodes[k]));
            }
            const double expected = (m == n) ? static_cast<double>(factorial64(n)) : 0.0;
            worst = std::max(worst, std::abs(sum.value() - expected));
        }
    }
    require(worst < 1e-8, "orthogonality deviation " + fmt(worst) + " >= 1e-8");
    return "max |E[HmHn] - n! d_mn| = " + fmt(worst);
}

// ---------------------------------------------------------------------------
// 2. Analytic CDF vs quadrature

std::string criterion_cdf() {
    double worst = 0.0;

    for (int trial = 0; trial < 20; ++trial) {
        const int order = 2 + trial % 7;
        const SnpDensity density = fixtures::random_density(1, order, 2100 + trial);
        SubstreamRng rng(3100 + trial, 0);
        std::vector<double> errs(50);
        parallel_for(50, [&errs, &density, trial](std::size_t i) {
            SubstreamRng point_rng(3100 + trial, i + 1);
            const double z = -4.0 + 8.0 * point_rng.uniform01();
            const double quad = oracle::adaptive_simpson(
                [&](double t) { return density.pdf_whitened(std::vector<double>{t}); }, -12.0,
                z, 1e-11);
            errs[i] = std::abs(density.cdf_whitened(std::vector<double>{z}) - quad);
        });
        for (double e : errs) worst = std::max(worst, e);
    }

    for (int trial = 0; trial < 5; ++trial) {
        const int order = 3 + trial % 3;
        const SnpDensity density = fixtures::random_density(2, order, 4100 + trial);
        std::vector<double> errs(50);
        parallel_for(50, [&errs, &density, trial](std::size_t i) {
            SubstreamRng point_rng(5100 + trial, i + 1);
            const double z0 = -4.0 + 8.0 * point_rng.uniform01();
            const double z1 = -4.0 + 8.0 * point_rng.uniform01();
            const double quad = oracle::composite_gauss_legendre(
                [&](double t0) {
                    return oracle::composite_gauss_legendre(
                        [&](double t1) {
                            return density.pdf_whitened(std::vector<double>{t0, t1});
                        },
                        -10.0, z1, 20);
                },
                -10.0, z0, 20);
            errs[i] = std::abs(density.cdf_whitened(std::vector<double>{z0, z1}) - quad);
        });
        for (double e : errs) worst = std::max(worst, e);
    }

    require(worst < 1e-6, "cdf-vs-quadrature deviation " + fmt(worst) + " >= 1e-6");
    return "max |F_analytic - F_quad| = " + fmt(worst) + " over 1250 probes";
}

// ---------------------------------------------------------------------------
// 3. Marginal correctness

std::string criterion_marginals() {
    double worst = 0.0;
    for (int trial = 0; trial < 3; ++trial) {
        const SnpDensity density = fixtures::random_density(3, 4, 6100 + trial);

        const SnpMarginal mx = density.marginal(std::vector<int>{0});
        std::vector<double> errs1(7);
        parallel_for(7, [&](std::size_t i) {
            const double z = -3.0 + static_cast<double>(i);
            const double quad = oracle::composite_gauss_legendre(
                [&](double u) {
                    return oracle::composite_gauss_legendre(
                        [&](double v) {
                            return density.pdf_whitened(std::vector<double>{z, u, v});
                        },
                        -9.0, 9.0, 18);
                },
                -9.0, 9.0, 18);
            errs1[i] = std::abs(mx.pdf(std::vector<double>{z}) - quad);
        });
        for (double e : errs1) worst = std::max(worst, e);

        const SnpMarginal myz = density.marginal(std::vector<int>{1, 2});
        std::vector<double> errs2(25);
        parallel_for(25, [&](std::size_t i) {
            const double z1 = -3.0 + 1.5 * static_cast<double>(i / 5);
            const double z2 = -3.0 + 1.5 * static_cast<double>(i % 5);
            const double quad = oracle::composite_gauss_legendre(
                [&](double u) {
                    return density.pdf_whitened(std::vector<double>{u, z1, z2});
                },
                -9.0, 9.0, 18);
            errs2[i] = std::abs(myz.pdf(std::vector<double>{z1, z2}) - quad);
        });
        for (double e : errs2) worst = std::max(worst, e);
    }
    require(worst < 1e-6, "marginal-vs-quadrature deviation " + fmt(worst) + " >= 1e-6");
    return "max deviation = " + fmt(worst) + " over 96 probes, 3 densities";
}

// ---------------------------------------------------------------------------
// 4. Gradient check

std::string criterion_gradient() {
    double worst = 0.0;
    for (std::uint64_t cfg = 1; cfg <= 20; ++cfg) {
        SubstreamRng pick(7000 + cfg, 0);
        const int d = 1 + static_cast<int>(pick.next_u64() % 3);
        const int k = 3 + static_cast<int>(pick.next_u64() % 4);
        const MultiIndexSet set = build_index_set(d, k);
        Matrix samples(80, d);
        for (std::size_t i = 0; i < 80; ++i) {
            SubstreamRng rng(7100 + cfg, i);
            for (int c = 0; c < d; ++c) samples(i, c) = rng.normal();
        }
        const std::vector<double> w = uniform_weights(80);
        // central differences are only a valid oracle away from the log
        // singularity; resample theta until every sample clears it
        std::vector<double> theta;
        for (std::uint64_t attempt = 0;; ++attempt) {
            theta = fixtures::random_theta(set.size(), 7200 + 100 * attempt + cfg, 0.4);
            double min_abs_p = 1e300;
            for (std::size_t i = 0; i < samples.rows(); ++i) {
                const double p = 1.0 + dot(theta, hermite_basis(set, samples.row(i)));
                min_abs_p = std::min(min_abs_p, std::abs(p));
            }
            if (min_abs_p > 0.05) break;
            require(attempt < 50, "could not find a smooth configuration");
        }
        const std::vector<double> grad = mle_gradient(theta, samples, w, set);
        const double h = 1e-6;
        for (std::size_t m = 0; m < set.size(); m += std::max<std::size_t>(1, set.size() / 6)) {
            std::vector<double> plus = theta, minus = theta;
            plus[m] += h;
            minus[m] -= h;
            const double fd =
                (mle_objective(plus, samples, w, set) - mle_objective(minus, samples, w, set)) /
                (2.0 * h);
            worst = std::max(worst, std::abs(fd - grad[m]) / std::max(1.0, std::abs(grad[m])));
        }
    }
    require(worst < 1e-5, "gradient relative error " + fmt(worst) + " >= 1e-5");
    return "max relative error vs central differences = " + fmt(worst);
}

// ---------------------------------------------------------------------------
// 5. Convex relaxation properties

std::string criterion_convexity() {
    const MultiIndexSet set = build_index_set(2, 4);
    Matrix samples(300, 2);
    for (std::size_t i = 0; i < 300; ++i) {
        SubstreamRng rng(8000, i);
        samples(i, 0) = rng.normal();
        samples(i, 1) = rng.normal();
    }
    const std::vector<double> w = uniform_weights(300);

    auto relaxed = [&](const std::vector<double>& theta) {
        double data = 0.0;
        for (std::size_t i = 0; i < samples.rows(); ++i) {
            const double p = 1.0 + dot(theta, hermite_basis(set, samples.row(i)));
            if (p <= 0.0) return std::numeric_limits<double>::infinity();
            data += -2.0 * w[i] * std::log(p);
        }
        double quad = 0.0;
        for (std::size_t m = 0; m < theta.size(); ++m) {
            quad += theta[m] * theta[m] * static_cast<double>(set.weight(m));
        }
        return data + quad;
    };

    SubstreamRng rng(8100, 0);
    int checked = 0;
    double worst_gap = -1e300;
    for (int trial = 0; trial < 500 && checked < 100; ++trial) {
        const std::vector<double> a = fixtures::random_theta(set.size(), 8200 + trial, 0.08);
        const std::vector<double> b = fixtures::random_theta(set.size(), 8700 + trial, 0.08);
        const double fa = relaxed(a), fb = relaxed(b);
        if (!std::isfinite(fa) || !std::isfinite(fb)) continue;
        const double t = rng.uniform01();
        std::vector<double> mid(a.size());
        for (std::size_t m = 0; m < a.size(); ++m) mid[m] = t * a[m] + (1.0 - t) * b[m];
        const double gap = relaxed(mid) - (t * fa + (1.0 - t) * fb);
        worst_gap = std::max(worst_gap, gap);
        ++checked;
    }
    require(checked == 100, "only " + std::to_string(checked) + " feasible triples found");
    require(worst_gap <= 1e-9, "convexity violated by " + fmt(worst_gap));

    double worst_bound = -1e300;
    for (int trial = 0; trial < 100; ++trial) {
        const std::vector<double> theta = fixtures::random_theta(set.size(), 9000 + trial, 2.0);
        double q = 0.0;
        for (std::size_t m = 0; m < theta.size(); ++m) {
            q += theta[m] * theta[m] * static_cast<double>(set.weight(m));
        }
        worst_bound = std::max(worst_bound, std::log1p(q) - q);
    }
    require(worst_bound <= 0.0, "log(1+s) <= s violated by " + fmt(worst_bound));
    return "midpoint gap <= " + fmt(worst_gap) + ", bound slack " + fmt(worst_bound) +
           " on 100 triples each";
}

// ---------------------------------------------------------------------------
// 6. Branch and order behavior on the small propagated Lorenz fixture

std::string criterion_branch_ordering() {
    SampleEnsemble ens = sample_gaussian(lorenz_initial(25.0), 100, kSeed);
    ens = propagate_ensemble(ens, LorenzField{}, 3.0, 0.01);
    auto [whitened, transform] = whiten_samples(ens.points, ens.weights);
    const std::vector<double> w = uniform_weights(100);

    std::vector<double> final_objectives;
    std::vector<double> refinement_changes;
    std::ostringstream detail;
    for (int order : {4, 6, 8, 10}) {
        const MultiIndexSet set = build_index_set(3, order);
        const FitConfig config{.order = order};

        auto cvx_pos = convex_relaxed_fit(whitened, w, set, Branch::positive, config);
        require(cvx_pos.has_value(), "positive branch failed at K=" + std::to_string(order));
        const double nl_start = mle_objective(cvx_pos->theta, whitened, w, set);
        const NonlinearFitResult nl_pos = nonlinear_fit(whitened, w, set, cvx_pos->theta, config);

        auto cvx_neg = convex_relaxed_fit(whitened, w, set, Branch::negative, config);
        require(cvx_neg.has_value(),
                "negative branch infeasible at K=" + std::to_string(order) +
                    "; ordering (i) would be vacuous");
        const NonlinearFitResult nl_neg = nonlinear_fit(whitened, w, set, cvx_neg->theta, config);

        // (i) positive branch dominates
        require(nl_pos.objective <= nl_neg.objective + 1e-12,
                "K=" + std::to_string(order) + ": positive " + fmt(nl_pos.objective) +
                    " > negative " + fmt(nl_neg.objective));

        final_objectives.push_back(std::min(nl_pos.objective, nl_neg.objective));
        const double change = std::abs(nl_pos.objective - nl_start) / std::abs(nl_start);
        refinement_changes.push_back(change);
        detail << "K" << order << ": nl+=" << fmt(nl_pos.objective)
               << " nl-=" << fmt(nl_neg.objective) << " change=" << fmt(100.0 * change)
               << "%  ";
    }

    // (ii) final objective nonincreasing in K
    for (std::size_t i = 1; i < final_objectives.size(); ++i) {
        require(final_objectives[i] <= final_objectives[i - 1] + 1e-9,
                "objective increased between sweep steps " + std::to_string(i - 1) + " and " +
                    std::to_string(i));
    }

    // (iii) refinement changes the positive-branch objective by <= 10% of its
    // magnitude across the sweep (mean over K; per-K values in the detail)
    double mean_change = 0.0;
    for (double c : refinement_changes) mean_change += c;
    mean_change /= static_cast<double>(refinement_changes.size());
    require(mean_change <= 0.10,
            "mean refinement change " + fmt(100.0 * mean_change) + "% > 10%");

    return detail.str() + "mean change=" + fmt(100.0 * mean_change) + "%";
}

// ---------------------------------------------------------------------------
// 7. Bimodality capture

std::string criterion_bimodality() {
    SampleEnsemble ens = sample_gaussian(lorenz_initial(25.0), 1000, kSeed);
    ens = propagate_ensemble(ens, LorenzField{}, 3.0, 0.01);
    auto [density, report] = fit_snp(ens.points, ens.weights, FitConfig{.order = 10});

    const SnpMarginal mx = density.marginal(std::vector<int>{0});
    const GridSpec grid = parse_grid_spec("-3:3:400");
    const std::vector<double> values = evaluate_marginal_grid(mx, grid, GridQuantity::pdf);

    struct Peak {
        std::size_t index;
        double value;
    };
    std::vector<Peak> maxima;
    for (std::size_t i = 1; i + 1 < values.size(); ++i) {
        if (values[i] > values[i - 1] && values[i] > values[i + 1]) {
            maxima.push_back({i, values[i]});
        }
    }
    require(maxima.size() >= 2,
            "found " + std::to_string(maxima.size()) + " local maxima, need >= 2");

    // the two largest maxima, separated by a valley at least 20% below
    std::sort(maxima.begin(), maxima.end(),
              [](const Peak& a, const Peak& b) { return a.value > b.value; });
    const Peak first = maxima[0];
    const Peak second = maxima[1];
    const std::size_t lo = std::min(first.index, second.index);
    const std::size_t hi = std::max(first.index, second.index);
    double valley = values[lo];
    for (std::size_t i = lo; i <= hi; ++i) valley = std::min(valley, values[i]);
    const double smaller_peak = std::min(first.value, second.value);
    require(valley <= 0.8 * smaller_peak,
            "valley " + fmt(valley) + " not 20% below the smaller peak " + fmt(smaller_peak));
    return "peaks " + fmt(first.value) + " and " + fmt(second.value) + " at z=" +
           fmt(grid.coordinate(0, first.index)) + ", " + fmt(grid.coordinate(0, second.index)) +
           "; valley " + fmt(valley);
}

// ---------------------------------------------------------------------------
// 8 and 9 share the Monte Carlo reference

struct QuantileFixture {
    double reference = 0.0;
    std::vector<double> snp_k6_n1000;
    std::vector<double> mc_n1000;
    std::vector<double> snp_k8_n100;
    std::vector<double> mc_n100;
};

std::optional<QuantileFixture> quantile_fixture;

const std::vector<double> kBoxLower{-1.0, 0.0};
const std::vector<double> kBoxUpper{-0.5, 2.0};
const std::vector<int> kBoxCoords{0, 1};

double whitened_count(const SampleEnsemble& moved) {
    auto [whitened, transform] = whiten_samples(moved.points, moved.weights);
    SampleEnsemble white = moved;
    white.points = whitened;
    return mc_box_probability(white, kBoxLower, kBoxUpper, kBoxCoords);
}

const QuantileFixture& build_quantile_fixture() {
    if (quantile_fixture) return *quantile_fixture;
    QuantileFixture fixture;
    const LorenzField lorenz{};
    const double duration = 0.63;

    {
        SampleEnsemble ens =
            sample_gaussian(lorenz_initial(0.09), 1000000, derive_seed(kSeed, 801));
        ens = propagate_ensemble(ens, lorenz, duration, 0.01);
        fixture.reference = whitened_count(ens);
    }
    for (int trial = 0; trial < 10; ++trial) {
        SampleEnsemble ens =
            sample_gaussian(lorenz_initial(0.09), 1000, derive_seed(kSeed, 810, trial));
        ens = propagate_ensemble(ens, lorenz, duration, 0.01);
        auto [density, report] = fit_snp(ens.points, ens.weights, FitConfig{.order = 6});
        fixture.snp_k6_n1000.push_back(
            density.box_probability(kBoxLower, kBoxUpper, kBoxCoords));
    }
    for (int trial = 0; trial < 10; ++trial) {
        SampleEnsemble ens =
            sample_gaussian(lorenz_initial(0.09), 1000, derive_seed(kSeed, 820, trial));
        ens = propagate_ensemble(ens, lorenz, duration, 0.01);
        fixture.mc_n1000.push_back(whitened_count(ens));
    }
    for (int trial = 0; trial < 10; ++trial) {
        SampleEnsemble ens =
            sample_gaussian(lorenz_initial(0.09), 100, derive_seed(kSeed, 830, trial));
        ens = propagate_ensemble(ens, lorenz, duration, 0.01);
        auto [density, report] = fit_snp(ens.points, ens.weights, FitConfig{.order = 8});
        fixture.snp_k8_n100.push_back(
            density.box_probability(kBoxLower, kBoxUpper, kBoxCoords));
    }
    for (int trial = 0; trial < 10; ++trial) {
        SampleEnsemble ens =
            sample_gaussian(lorenz_initial(0.09), 100, derive_seed(kSeed, 840, trial));
        ens = propagate_ensemble(ens, lorenz, duration, 0.01);
        fixture.mc_n100.push_back(whitened_count(ens));
    }
    quantile_fixture = std::move(fixture);
    return *quantile_fixture;
}

struct Stats {
    double mean = 0.0;
    double spread = 0.0;
    double mae = 0.0;
};

Stats stats_against(const std::vector<double>& values, double reference) {
    Stats s;
    double lo = values.front(), hi = values.front();
    for (double v : values) {
        s.mean += v;
        s.mae += std::abs(v - reference);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    s.mean /= static_cast<double>(values.size());
    s.mae /= static_cast<double>(values.size());
    s.spread = hi - lo;
    return s;
}

std::string criterion_quantile_reproduction() {
    const QuantileFixture& fx = build_quantile_fixture();
    const Stats snp = stats_against(fx.snp_k6_n1000, fx.reference);
    const Stats mc = stats_against(fx.mc_n1000, fx.reference);

    require(std::abs(fx.reference - 0.0667) < 0.02,
            "MC reference " + fmt(fx.reference) + " is not near the documented 0.0667");
    require(std::abs(snp.mean - fx.reference) <= 0.015,
            "SNP mean " + fmt(snp.mean) + " deviates from the reference " +
                fmt(fx.reference) + " by more than 0.015");
    require(snp.spread < mc.spread,
            "SNP spread " + fmt(snp.spread) + " not below MC spread " + fmt(mc.spread));
    return "reference=" + fmt(fx.reference) + " snp_mean=" + fmt(snp.mean) + " snp_spread=" +
           fmt(snp.spread) + " mc_spread=" + fmt(mc.spread);
}

std::string criterion_sample_efficiency() {
    const QuantileFixture& fx = build_quantile_fixture();
    const Stats snp = stats_against(fx.snp_k8_n100, fx.reference);
    const Stats mc = stats_against(fx.mc_n100, fx.reference);
    require(snp.mae < mc.mae,
            "SNP MAE " + fmt(snp.mae) + " not below MC MAE " + fmt(mc.mae) + " at N=100");
    return "snp_mae=" + fmt(snp.mae) + " mc_mae=" + fmt(mc.mae) + " reference=" +
           fmt(fx.reference);
}

// ---------------------------------------------------------------------------
// 10. Count formula

std::string criterion_count_formula() {
    for (int d = 1; d <= 4; ++d) {
        for (int k = 2; k <= 10; ++k) {
            // independent enumeration over the [0,k]^d hypercube
            std::set<std::vector<int>> enumerated;
            std::vector<int> alpha(static_cast<std::size_t>(d), 0);
            while (true) {
                int degree = 0;
                for (int e : alpha) degree += e;
                if (degree >= 2 && degree <= k) enumerated.insert(alpha);
                int pos = d - 1;
                while (pos >= 0) {
                    if (++alpha[static_cast<std::size_t>(pos)] <= k) break;
                    alpha[static_cast<std::size_t>(pos)] = 0;
                    --pos;
                }
                if (pos < 0) break;
            }
            require(coefficient_count(d, k) == static_cast<std::int64_t>(enumerated.size()),
                    "count mismatch at d=" + std::to_string(d) + " K=" + std::to_string(k));
            require(build_index_set(d, k).size() == enumerated.size(),
                    "set size mismatch at d=" + std::to_string(d) + " K=" + std::to_string(k));
        }
    }
    return "formula matches enumeration for d<=4, K<=10 (36 cases)";
}

// ---------------------------------------------------------------------------
// 11. Reproduce determinism

bool directories_byte_identical(const fs::path& a, const fs::path& b, std::string& why) {
    std::vector<fs::path> rel_a, rel_b;
    for (const auto& entry : fs::recursive_directory_iterator(a)) {
        if (entry.is_regular_file()) rel_a.push_back(fs::relative(entry.path(), a));
    }
    for (const auto& entry : fs::recursive_directory_iterator(b)) {
        if (entry.is_regular_file()) rel_b.push_back(fs::relative(entry.path(), b));
    }
    std::sort(rel_a.begin(), rel_a.end());
    std::sort(rel_b.begin(), rel_b.end());
    if (rel_a != rel_b) {
        why = "file lists differ";
        return false;
    }
    for (const fs::path& rel : rel_a) {
        std::ifstream fa(a / rel, std::ios::binary);
        std::ifstream fb(b / rel, std::ios::binary);
        std::stringstream sa, sb;
        sa << fa.rdbuf();
        sb << fb.rdbuf();
        if (sa.str() != sb.str()) {
            why = "content differs: " + rel.string();
            return false;
        }
    }
    return true;
}

std::string criterion_reproduce_determinism() {
    const char* cli = std::getenv("SNP_CLI");
    require(cli != nullptr, "SNP_CLI must point at the snpcli binary");
    const fs::path scratch = fs::temp_directory_path() / "snp_acceptance_reproduce";
    fs::remove_all(scratch);
    fs::create_directories(scratch);

    for (const std::string experiment : {"density_va", "quantile_vb"}) {
        for (int run = 1; run <= 2; ++run) {
            const fs::path out = scratch / (experiment + "_" + std::to_string(run));
            const std::string command = std::string(cli) + " reproduce --experiment " +
                                        experiment + " --seed " + std::to_string(kSeed) +
                                        " --out-dir " + out.string() + " >/dev/null 2>&1";
            require(std::system(command.c_str()) == 0, "reproduce " + experiment + " failed");
        }
        std::string why;
        require(directories_byte_identical(scratch / (experiment + "_1"),
                                           scratch / (experiment + "_2"), why),
                experiment + " runs differ: " + why);
    }
    fs::remove_all(scratch);
    return "density_va and quantile_vb byte-identical across paired runs";
}

}  // namespace

int main(int argc, char** argv) {
    struct Criterion {
        int id;
        std::string name;
        std::function<std::string()> run;
    };
    const std::vector<Criterion> criteria{
        {1, "hermite orthogonality", criterion_orthogonality},
        {2, "analytic cdf vs quadrature", criterion_cdf},
        {3, "marginal correctness", criterion_marginals},
        {4, "gradient vs finite differences", criterion_gradient},
        {5, "convex relaxation properties", criterion_convexity},
        {6, "branch and order properties", criterion_branch_ordering},
        {7, "bimodality capture", criterion_bimodality},
        {8, "quantile reproduction", criterion_quantile_reproduction},
        {9, "sample efficiency at N=100", criterion_sample_efficiency},
        {10, "coefficient count formula", criterion_count_formula},
        {11, "reproduce determinism", criterion_reproduce_determinism},
    };

    std::optional<int> only;
    if (argc > 1) only = std::atoi(argv[1]);

    int failures = 0;
    for (const Criterion& criterion : criteria) {
        if (only && *only != criterion.id) continue;
        const auto start = std::chrono::steady_clock::now();
        std::string status = "PASS";
        std::string detail;
        try {
            detail = criterion.run();
        } catch (const Failure& f) {
            status = "FAIL";
            detail = f.message;
            ++failures;
        } catch (const std::exception& e) {
            status = "FAIL";
            detail = std::string("unexpected error: ") + e.what();
            ++failures;
        }
        const double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("[%2d] %s %-34s (%.1f s)  %s\n", criterion.id, status.c_str(),
                    criterion.name.c_str(), seconds, detail.c_str());
        std::fflush(stdout);
    }
    return failures;
}
