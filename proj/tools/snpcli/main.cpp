#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "common.hpp"
#include "snp/density.hpp"
#include "snp/ensemble.hpp"
#include "snp/errors.hpp"
#include "snp/fit.hpp"
#include "snp/grid.hpp"
#include "snp/textio.hpp"
#include "snp/version.hpp"

namespace fs = std::filesystem;
using snpcli::Json;

namespace {

struct SampleArgs {
    std::string mean;
    std::string cov_diag;
    std::string cov_file;
    std::uint64_t n = 0;
    std::uint64_t seed = 0;
    std::string out;
    bool json = false;
};

int cmd_sample(const SampleArgs& args) {
    snp::GaussianInitial init;
    init.mean = snpcli::parse_double_list(args.mean, "--mean");
    init.covariance = snpcli::load_covariance(args.cov_diag, args.cov_file, init.mean.size());
    const snp::SampleEnsemble ens = snp::sample_gaussian(init, args.n, args.seed);
    snp::save_ensemble_csv(ens, args.out);

    Json params;
    params["mean"] = init.mean;
    params["covariance"] = init.covariance.data();
    params["n"] = args.n;
    params["seed"] = args.seed;
    snpcli::write_manifest(args.out + ".manifest.json", "sample", std::move(params), {},
                           {args.out});
    if (args.json) {
        Json summary;
        summary["samples"] = ens.size();
        summary["dimension"] = ens.dimension();
        summary["out"] = args.out;
        std::cout << summary.dump() << "\n";
    } else {
        std::cout << "wrote " << ens.size() << " samples (d=" << ens.dimension() << ") to "
                  << args.out << "\n";
    }
    return snpcli::kExitOk;
}

struct PropagateArgs {
    std::string in;
    std::string system = "lorenz";
    double lorenz_s = 10.0;
    double lorenz_rho = 28.0;
    double lorenz_beta = 8.0 / 3.0;
    double tfinal = 0.0;
    double step = 0.01;
    std::string out;
    bool json = false;
};

int cmd_propagate(const PropagateArgs& args) {
    if (args.system != "lorenz") {
        throw snp::UsageError("unknown system '" + args.system + "' (available: lorenz)");
    }
    const snp::SampleEnsemble input = snp::load_ensemble_csv(args.in);
    if (input.dimension() != 3) {
        throw snp::UsageError("the lorenz system needs 3 coordinates, file has " +
                              std::to_string(input.dimension()));
    }
    const snp::LorenzField field{{args.lorenz_s, args.lorenz_rho, args.lorenz_beta}};
    const snp::SampleEnsemble moved =
        snp::propagate_ensemble(input, field, args.tfinal, args.step);
    snp::save_ensemble_csv(moved, args.out);

    Json params;
    params["system"] = args.system;
    params["s"] = args.lorenz_s;
    params["rho"] = args.lorenz_rho;
    params["beta"] = args.lorenz_beta;
    params["tfinal"] = args.tfinal;
    params["step"] = args.step;
    snpcli::write_manifest(args.out + ".manifest.json", "propagate", std::move(params),
                           {args.in}, {args.out});
    if (args.json) {
        Json summary;
        summary["samples"] = moved.size();
        summary["time"] = moved.time;
        summary["out"] = args.out;
        std::cout << summary.dump() << "\n";
    } else {
        std::cout << "propagated " << moved.size() << " samples to t="
                  << snp::format_double(moved.time) << ", wrote " << args.out << "\n";
    }
    return snpcli::kExitOk;
}

struct FitArgs {
    std::string in;
    int order = 0;
    std::string branch_policy = "both";
    double guard_epsilon = 1e-12;
    double convex_tolerance = 1e-8;
    double nonlinear_tolerance = 1e-9;
    int max_iterations = 500;
    std::string out_density;
    std::string out_report;
    bool json = false;
};

int cmd_fit(const FitArgs& args) {
    snp::FitConfig config;
    config.order = args.order;
    config.guard_epsilon = args.guard_epsilon;
    config.convex_tolerance = args.convex_tolerance;
    config.nonlinear_tolerance = args.nonlinear_tolerance;
    config.max_iterations = args.max_iterations;
    if (args.branch_policy == "both") {
        config.branch_policy = snp::BranchPolicy::both;
    } else if (args.branch_policy == "positive_only") {
        config.branch_policy = snp::BranchPolicy::positive_only;
    } else {
        throw snp::UsageError("--branch-policy must be 'both' or 'positive_only'");
    }

    const snp::SampleEnsemble ens = snp::load_ensemble_csv(args.in);
    auto [density, report] = snp::fit_snp(ens.points, ens.weights, config);
    for (const std::string& warning : report.warnings) {
        std::cerr << "warning: " << warning << "\n";
    }
    snp::save_density(density, args.out_density);
    snp::save_fit_report(report, args.out_report);

    Json params;
    params["order"] = args.order;
    params["branch_policy"] = args.branch_policy;
    params["guard_epsilon"] = args.guard_epsilon;
    params["convex_tolerance"] = args.convex_tolerance;
    params["nonlinear_tolerance"] = args.nonlinear_tolerance;
    params["max_iterations"] = args.max_iterations;
    snpcli::write_manifest(args.out_density + ".manifest.json", "fit", std::move(params),
                           {args.in}, {args.out_density, args.out_report});
    if (args.json) {
        Json summary;
        summary["chosen_branch"] = snp::branch_name(report.chosen_branch);
        summary["nonlinear_objective_pos"] = report.nonlinear_objective_pos;
        summary["out_density"] = args.out_density;
        summary["out_report"] = args.out_report;
        std::cout << summary.dump() << "\n";
    } else {
        std::cout << "fit K=" << args.order << " chose the "
                  << snp::branch_name(report.chosen_branch) << " branch, objective "
                  << snp::format_double(report.nonlinear_objective_pos) << "; wrote "
                  << args.out_density << " and " << args.out_report << "\n";
    }
    return snpcli::kExitOk;
}

struct EvalArgs {
    std::string density;
    std::string mode = "pdf";
    std::string keep;
    std::string grid;
    std::string space = "whitened";
    std::string out;
    bool json = false;
};

int cmd_eval(const EvalArgs& args) {
    const snp::SnpDensity density = snp::load_density(args.density);
    const snp::GridSpec grid = snp::parse_grid_spec(args.grid);
    const bool raw = args.space == "raw";
    if (!raw && args.space != "whitened") {
        throw snp::UsageError("--space must be 'whitened' or 'raw'");
    }

    std::vector<double> values;
    std::vector<std::string> axis_names;
    const std::string value_name = args.mode;
    if (args.mode == "pdf" || args.mode == "cdf") {
        const snp::GridQuantity quantity =
            args.mode == "pdf" ? snp::GridQuantity::pdf : snp::GridQuantity::cdf;
        values = snp::evaluate_grid(density, grid, quantity, raw);
        for (int c = 0; c < density.dimension(); ++c) {
            axis_names.push_back((raw ? "x" : "z") + std::to_string(c));
        }
    } else if (args.mode == "marginal") {
        if (raw) throw snp::UsageError("marginals are defined in whitened coordinates");
        if (args.keep.empty()) throw snp::UsageError("--mode marginal needs --keep");
        const std::vector<int> keep = snpcli::parse_int_list(args.keep, "--keep");
        const snp::SnpMarginal marginal = density.marginal(keep);
        values = snp::evaluate_marginal_grid(marginal, grid, snp::GridQuantity::pdf);
        for (int c : keep) axis_names.push_back("z" + std::to_string(c));
    } else {
        throw snp::UsageError("--mode must be pdf, cdf, or marginal");
    }
    snpcli::write_grid_csv(args.out, grid, axis_names, value_name, values);

    Json params;
    params["mode"] = args.mode;
    params["keep"] = args.keep;
    params["grid"] = args.grid;
    params["space"] = args.space;
    snpcli::write_manifest(args.out + ".manifest.json", "eval", std::move(params),
                           {args.density}, {args.out});
    if (args.json) {
        Json summary;
        summary["points"] = values.size();
        summary["out"] = args.out;
        std::cout << summary.dump() << "\n";
    } else {
        std::cout << "evaluated " << values.size() << " grid points, wrote " << args.out << "\n";
    }
    return snpcli::kExitOk;
}

struct BoxprobArgs {
    std::string density;
    std::string ensemble;
    std::string box;
    std::string coords;
    std::string out;
    bool json = false;
};

int cmd_boxprob(const BoxprobArgs& args) {
    if (args.density.empty() == args.ensemble.empty()) {
        throw snp::UsageError("give exactly one of --density or --ensemble");
    }
    const snpcli::BoxSpec box = snpcli::parse_box_spec(args.box);
    std::vector<int> coords;
    if (args.coords.empty()) {
        for (std::size_t c = 0; c < box.lower.size(); ++c) {
            coords.push_back(static_cast<int>(c));
        }
    } else {
        coords = snpcli::parse_int_list(args.coords, "--coords");
    }

    std::string method;
    std::string source;
    double probability = 0.0;
    if (!args.density.empty()) {
        const snp::SnpDensity density = snp::load_density(args.density);
        probability = density.box_probability(box.lower, box.upper, coords);
        method = "snp_cdf";
        source = args.density;
    } else {
        const snp::SampleEnsemble ens = snp::load_ensemble_csv(args.ensemble);
        probability = snp::mc_box_probability(ens, box.lower, box.upper, coords);
        method = "mc_counting";
        source = args.ensemble;
    }

    Json result;
    result["method"] = method;
    result["probability"] = probability;
    result["lower"] = box.lower;
    result["upper"] = box.upper;
    result["coords"] = coords;
    result["source"] = source;
    snpcli::write_json_file(result, args.out);

    Json params;
    params["box"] = args.box;
    params["coords"] = coords;
    snpcli::write_manifest(args.out + ".manifest.json", "boxprob", std::move(params), {source},
                           {args.out});
    if (args.json) {
        std::cout << result.dump() << "\n";
    } else {
        std::cout << "[" << method << "] probability = " << snp::format_double(probability)
                  << "\n";
    }
    return snpcli::kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Seminonparametric (Gallant-Nychka) density estimation for propagated"
                 " Monte Carlo ensembles"};
    app.set_version_flag("--version", snp::kVersion);
    app.require_subcommand(1);

    SampleArgs sample_args;
    CLI::App* sample = app.add_subcommand("sample", "Draw a Gaussian initial ensemble");
    sample->add_option("--mean", sample_args.mean, "Comma-separated mean vector")->required();
    sample->add_option("--cov-diag", sample_args.cov_diag, "Comma-separated covariance diagonal");
    sample->add_option("--cov-file", sample_args.cov_file,
                       "Whitespace-separated d x d covariance matrix file");
    sample->add_option("--n", sample_args.n, "Number of samples")->required()
        ->check(CLI::PositiveNumber);
    sample->add_option("--seed", sample_args.seed, "RNG seed");
    sample->add_option("--out", sample_args.out, "Output ensemble CSV")->required();
    sample->add_flag("--json", sample_args.json, "Machine-readable summary on stdout");

    PropagateArgs prop_args;
    CLI::App* propagate = app.add_subcommand("propagate", "Push an ensemble through dynamics");
    propagate->add_option("--in", prop_args.in, "Input ensemble CSV")->required();
    propagate->add_option("--system", prop_args.system, "Dynamical system (lorenz)");
    propagate->add_option("--lorenz-s", prop_args.lorenz_s, "Lorenz s parameter");
    propagate->add_option("--lorenz-rho", prop_args.lorenz_rho, "Lorenz rho parameter");
    propagate->add_option("--lorenz-beta", prop_args.lorenz_beta, "Lorenz beta parameter");
    propagate->add_option("--tfinal", prop_args.tfinal, "Propagation duration")->required();
    propagate->add_option("--step", prop_args.step, "Integration step");
    propagate->add_option("--out", prop_args.out, "Output ensemble CSV")->required();
    propagate->add_flag("--json", prop_args.json, "Machine-readable summary on stdout");

    FitArgs fit_args;
    CLI::App* fit = app.add_subcommand("fit", "Fit an SNP density to an ensemble");
    fit->add_option("--in", fit_args.in, "Input ensemble CSV")->required();
    fit->add_option("-K,--order", fit_args.order, "Polynomial order")->required();
    fit->add_option("--branch-policy", fit_args.branch_policy, "both | positive_only");
    fit->add_option("--guard-epsilon", fit_args.guard_epsilon, "log-guard floor");
    fit->add_option("--convex-tolerance", fit_args.convex_tolerance,
                    "Relaxed-stage gradient tolerance");
    fit->add_option("--nonlinear-tolerance", fit_args.nonlinear_tolerance,
                    "Refinement gradient tolerance");
    fit->add_option("--max-iterations", fit_args.max_iterations, "Iteration cap per stage");
    fit->add_option("--out-density", fit_args.out_density, "Output density JSON")->required();
    fit->add_option("--out-report", fit_args.out_report, "Output fit report JSON")->required();
    fit->add_flag("--json", fit_args.json, "Machine-readable summary on stdout");

    EvalArgs eval_args;
    CLI::App* eval = app.add_subcommand("eval", "Evaluate a fitted density on a grid");
    eval->add_option("--density", eval_args.density, "Density JSON")->required();
    eval->add_option("--mode", eval_args.mode, "pdf | cdf | marginal");
    eval->add_option("--keep", eval_args.keep, "Kept coordinates for marginal mode (0-based)");
    eval->add_option("--grid", eval_args.grid, "Per-axis min:max:count, comma-separated")
        ->required();
    eval->add_option("--space", eval_args.space, "whitened | raw (pdf only)");
    eval->add_option("--out", eval_args.out, "Output grid CSV")->required();
    eval->add_flag("--json", eval_args.json, "Machine-readable summary on stdout");

    BoxprobArgs box_args;
    CLI::App* boxprob = app.add_subcommand(
        "boxprob", "Probability of an axis-aligned box (analytic CDF or MC counting)");
    boxprob->add_option("--density", box_args.density, "Density JSON (analytic CDF route)");
    boxprob->add_option("--ensemble", box_args.ensemble, "Ensemble CSV (counting route)");
    boxprob->add_option("--box", box_args.box, "Per-axis lo:hi, comma-separated")->required();
    boxprob->add_option("--coords", box_args.coords,
                        "Coordinate index per box axis (default 0,1,...)");
    boxprob->add_option("--out", box_args.out, "Output result JSON")->required();
    boxprob->add_flag("--json", box_args.json, "Machine-readable summary on stdout");

    snpcli::ReproduceOptions rep_args;
    std::string rep_out_dir;
    CLI::App* reproduce =
        app.add_subcommand("reproduce", "Run a packaged experiment end to end");
    reproduce->add_option("--experiment", rep_args.experiment, "density_va | quantile_vb")
        ->required();
    reproduce->add_option("--seed", rep_args.seed, "Base RNG seed");
    reproduce->add_option("--out-dir", rep_out_dir, "Output directory")->required();
    reproduce->add_option("--trials", rep_args.trials, "Trials per configuration")
        ->check(CLI::PositiveNumber);
    reproduce->add_option("--step", rep_args.step, "Integration step");
    reproduce->add_flag("--json", rep_args.json_output, "Machine-readable summary on stdout");

    try {
        app.parse(argc, argv);
        if (sample->parsed()) return cmd_sample(sample_args);
        if (propagate->parsed()) return cmd_propagate(prop_args);
        if (fit->parsed()) return cmd_fit(fit_args);
        if (eval->parsed()) return cmd_eval(eval_args);
        if (boxprob->parsed()) return cmd_boxprob(box_args);
        if (reproduce->parsed()) {
            rep_args.out_dir = rep_out_dir;
            return snpcli::run_reproduce(rep_args);
        }
        return snpcli::kExitUsage;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : snpcli::kExitUsage;
    } catch (const snp::UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return snpcli::kExitUsage;
    } catch (const snp::NumericError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return snpcli::kExitNumeric;
    } catch (const snp::IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return snpcli::kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
