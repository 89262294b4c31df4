#include <algorithm>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "common.hpp"
#include "snp/density.hpp"
#include "snp/ensemble.hpp"
#include "snp/errors.hpp"
#include "snp/fit.hpp"
#include "snp/grid.hpp"
#include "snp/rng.hpp"

namespace fs = std::filesystem;

namespace snpcli {

namespace {

snp::GaussianInitial lorenz_initial(double variance) {
    snp::GaussianInitial init;
    init.mean = {1.0, 1.0, 1.0};
    init.covariance = snp::Matrix(3, 3);
    for (int i = 0; i < 3; ++i) init.covariance(i, i) = variance;
    return init;
}

std::string zero_pad(int value, int width) {
    std::string s = std::to_string(value);
    while (static_cast<int>(s.size()) < width) s.insert(s.begin(), '0');
    return s;
}

Json branch_objectives(const snp::FitReport& report) {
    Json row;
    row["convex_objective_pos"] = report.convex_objective_pos;
    row["convex_objective_neg"] = report.convex_objective_neg
                                      ? Json(*report.convex_objective_neg)
                                      : Json(nullptr);
    row["nonlinear_objective_pos"] = report.nonlinear_objective_pos;
    row["nonlinear_objective_neg"] = report.nonlinear_objective_neg
                                         ? Json(*report.nonlinear_objective_neg)
                                         : Json(nullptr);
    row["chosen_branch"] = snp::branch_name(report.chosen_branch);
    return row;
}

struct TrialStats {
    std::vector<double> values;
    double mean = 0.0;
    double spread = 0.0;  // max - min

    void finish() {
        double lo = values.front(), hi = values.front(), sum = 0.0;
        for (double v : values) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
            sum += v;
        }
        mean = sum / static_cast<double>(values.size());
        spread = hi - lo;
    }
};

int reproduce_density_va(const ReproduceOptions& options) {
    const fs::path dir = options.out_dir;
    fs::create_directories(dir);
    const snp::LorenzField lorenz{};
    const double duration = 3.0;

    Json summary;
    summary["experiment"] = "density_va";
    Json params;
    params["mean"] = std::vector<double>{1.0, 1.0, 1.0};
    params["cov_diag"] = std::vector<double>{25.0, 25.0, 25.0};
    params["tfinal"] = duration;
    params["step"] = options.step;
    params["seed"] = options.seed;
    summary["parameters"] = params;

    // Desk-scale objective table: 100 samples, both branches, K sweep.
    snp::SampleEnsemble desk = snp::sample_gaussian(lorenz_initial(25.0), 100,
                                                    snp::derive_seed(options.seed, 101));
    snp::save_ensemble_csv(desk, dir / "ensemble_n100_t0.csv");
    desk = snp::propagate_ensemble(desk, lorenz, duration, options.step);
    snp::save_ensemble_csv(desk, dir / "ensemble_n100_t3.csv");

    Json desk_rows = Json::array();
    for (int order : {4, 6, 8, 10}) {
        snp::FitConfig config;
        config.order = order;
        auto [density, report] = snp::fit_snp(desk.points, desk.weights, config);
        const std::string tag = "n100_K" + std::to_string(order);
        snp::save_density(density, dir / ("fit_" + tag + ".density.json"));
        snp::save_fit_report(report, dir / ("fit_" + tag + ".report.json"));
        Json row = branch_objectives(report);
        row["order"] = order;
        desk_rows.push_back(std::move(row));
    }
    summary["desk_scale"] = std::move(desk_rows);

    // Larger fit for the marginal contour exports: 1000 samples, K = 10.
    snp::SampleEnsemble large = snp::sample_gaussian(lorenz_initial(25.0), 1000,
                                                     snp::derive_seed(options.seed, 102));
    snp::save_ensemble_csv(large, dir / "ensemble_n1000_t0.csv");
    large = snp::propagate_ensemble(large, lorenz, duration, options.step);
    snp::save_ensemble_csv(large, dir / "ensemble_n1000_t3.csv");

    snp::FitConfig big_config;
    big_config.order = 10;
    auto [density, report] = snp::fit_snp(large.points, large.weights, big_config);
    snp::save_density(density, dir / "fit_n1000_K10.density.json");
    snp::save_fit_report(report, dir / "fit_n1000_K10.report.json");

    const snp::GridSpec grid_x = snp::parse_grid_spec("-4:4:400");
    const snp::GridSpec grid_2d = snp::parse_grid_spec("-4:4:160,-4:4:160");
    const snp::SnpMarginal mx = density.marginal(std::vector<int>{0});
    write_grid_csv(dir / "marginal_x.csv", grid_x, {"z0"}, "pdf",
                   snp::evaluate_marginal_grid(mx, grid_x, snp::GridQuantity::pdf));
    const snp::SnpMarginal mxy = density.marginal(std::vector<int>{0, 1});
    write_grid_csv(dir / "marginal_xy.csv", grid_2d, {"z0", "z1"}, "pdf",
                   snp::evaluate_marginal_grid(mxy, grid_2d, snp::GridQuantity::pdf));
    const snp::SnpMarginal mxz = density.marginal(std::vector<int>{0, 2});
    write_grid_csv(dir / "marginal_xz.csv", grid_2d, {"z0", "z2"}, "pdf",
                   snp::evaluate_marginal_grid(mxz, grid_2d, snp::GridQuantity::pdf));

    Json large_fit = branch_objectives(report);
    large_fit["order"] = 10;
    large_fit["samples"] = 1000;
    large_fit["files"] = Json::array({"fit_n1000_K10.density.json",
                                      "fit_n1000_K10.report.json", "marginal_x.csv",
                                      "marginal_xy.csv", "marginal_xz.csv"});
    summary["large_fit"] = std::move(large_fit);
    write_json_file(summary, dir / "summary.json");

    Json manifest_params = params;
    manifest_params["experiment"] = "density_va";
    write_manifest(dir / "manifest.json", "reproduce", std::move(manifest_params), {},
                   {"summary.json"});
    if (options.json_output) {
        Json out;
        out["summary"] = (dir / "summary.json").string();
        std::cout << out.dump() << "\n";
    } else {
        std::cout << "density_va artifacts in " << dir.string() << "\n";
    }
    return kExitOk;
}

int reproduce_quantile_vb(const ReproduceOptions& options) {
    const fs::path dir = options.out_dir;
    fs::create_directories(dir);
    const snp::LorenzField lorenz{};
    const double duration = 0.63;
    const std::vector<double> box_lower{-1.0, 0.0};
    const std::vector<double> box_upper{-0.5, 2.0};
    const std::vector<int> box_coords{0, 1};

    Json summary;
    summary["experiment"] = "quantile_vb";
    Json params;
    params["mean"] = std::vector<double>{1.0, 1.0, 1.0};
    params["cov_diag"] = std::vector<double>{0.09, 0.09, 0.09};
    params["tfinal"] = duration;
    params["step"] = options.step;
    params["seed"] = options.seed;
    params["trials"] = options.trials;
    summary["parameters"] = params;
    Json box;
    box["lower"] = box_lower;
    box["upper"] = box_upper;
    box["coords"] = box_coords;
    summary["box"] = std::move(box);

    // SNP trials: fresh ensembles each time, analytic box probability.
    Json snp_rows = Json::array();
    for (int order : {6, 8}) {
        for (std::size_t n_s : {std::size_t{100}, std::size_t{1000}}) {
            TrialStats stats;
            for (int trial = 0; trial < options.trials; ++trial) {
                const std::uint64_t seed = snp::derive_seed(
                    options.seed, 1000000ull + static_cast<std::uint64_t>(order) * 10000 + n_s,
                    static_cast<std::uint64_t>(trial));
                snp::SampleEnsemble ens = snp::sample_gaussian(lorenz_initial(0.09), n_s, seed);
                ens = snp::propagate_ensemble(ens, lorenz, duration, options.step);
                snp::FitConfig config;
                config.order = order;
                auto [density, report] = snp::fit_snp(ens.points, ens.weights, config);
                const std::string tag = "snp_K" + std::to_string(order) + "_n" +
                                        std::to_string(n_s) + "_trial" + zero_pad(trial, 2);
                snp::save_density(density, dir / (tag + ".density.json"));
                snp::save_fit_report(report, dir / (tag + ".report.json"));
                stats.values.push_back(
                    density.box_probability(box_lower, box_upper, box_coords));
            }
            stats.finish();
            Json row;
            row["order"] = order;
            row["samples"] = n_s;
            row["probabilities"] = stats.values;
            row["mean"] = stats.mean;
            row["spread"] = stats.spread;
            snp_rows.push_back(std::move(row));
        }
    }
    summary["snp"] = std::move(snp_rows);

    // Raw-MC baselines: count in the trial's own whitened coordinates.
    Json mc_rows = Json::array();
    for (std::size_t n_s : {std::size_t{100}, std::size_t{10000}, std::size_t{1000000}}) {
        TrialStats stats;
        for (int trial = 0; trial < options.trials; ++trial) {
            const std::uint64_t seed =
                snp::derive_seed(options.seed, 2000000ull + n_s,
                                 static_cast<std::uint64_t>(trial));
            snp::SampleEnsemble ens = snp::sample_gaussian(lorenz_initial(0.09), n_s, seed);
            ens = snp::propagate_ensemble(ens, lorenz, duration, options.step);
            auto [whitened, transform] = snp::whiten_samples(ens.points, ens.weights);
            snp::SampleEnsemble white = ens;
            white.points = std::move(whitened);
            stats.values.push_back(
                snp::mc_box_probability(white, box_lower, box_upper, box_coords));
        }
        stats.finish();
        Json row;
        row["samples"] = n_s;
        row["probabilities"] = stats.values;
        row["mean"] = stats.mean;
        row["spread"] = stats.spread;
        mc_rows.push_back(std::move(row));
    }
    summary["mc"] = std::move(mc_rows);
    write_json_file(summary, dir / "summary.json");

    Json manifest_params = params;
    manifest_params["experiment"] = "quantile_vb";
    write_manifest(dir / "manifest.json", "reproduce", std::move(manifest_params), {},
                   {"summary.json"});
    if (options.json_output) {
        Json out;
        out["summary"] = (dir / "summary.json").string();
        std::cout << out.dump() << "\n";
    } else {
        std::cout << "quantile_vb artifacts in " << dir.string() << "\n";
    }
    return kExitOk;
}

}  // namespace

int run_reproduce(const ReproduceOptions& options) {
    if (options.experiment == "density_va") return reproduce_density_va(options);
    if (options.experiment == "quantile_vb") return reproduce_quantile_vb(options);
    throw snp::UsageError("unknown experiment '" + options.experiment +
                          "' (available: density_va, quantile_vb)");
}

}  // namespace snpcli
