#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "snp/density.hpp"
#include "snp/indexset.hpp"
#include "snp/linalg.hpp"

namespace snp {

enum class Branch { positive, negative };
enum class BranchPolicy { both, positive_only };

struct FitConfig {
    int order = 2;
    double guard_epsilon = 1e-12;      // floor inside log| . |
    double convex_tolerance = 1e-8;    // gradient-norm stop, relaxed stage
    double nonlinear_tolerance = 1e-9; // gradient-norm stop, refinement stage
    int max_iterations = 500;
    BranchPolicy branch_policy = BranchPolicy::both;
};

struct StageIterations {
    int convex_pos = 0;
    std::optional<int> convex_neg;
    int nonlinear_pos = 0;
    std::optional<int> nonlinear_neg;
};

struct FitReport {
    double convex_objective_pos = 0.0;
    std::optional<double> convex_objective_neg;
    double nonlinear_objective_pos = 0.0;
    std::optional<double> nonlinear_objective_neg;
    Branch chosen_branch = Branch::positive;
    StageIterations iterations;
    std::vector<double> theta;

    // Diagnostics for the caller; not part of the serialized report.
    std::vector<std::string> warnings;
};

/// Weighted mean/covariance whitening: z_i = L^{-1}(x_i - mean) with the
/// weighted population covariance factored as L L^T. Weights must be
/// nonnegative and sum to 1.
std::pair<Matrix, WhiteningTransform> whiten_samples(const Matrix& samples,
                                                     std::span<const double> weights);

/// Uniform-weight convenience overload.
std::pair<Matrix, WhiteningTransform> whiten_samples(const Matrix& samples);

std::vector<double> uniform_weights(std::size_t n);

/// Monte-Carlo maximum-likelihood objective
///   -sum_i 2 w_i log(max(|1 + Theta^T H(z_i)|, guard)) + log(1 + Theta^T Q Theta).
/// The constant sum_i w_i log phi(z_i) is omitted.
double mle_objective(std::span<const double> theta, const Matrix& whitened,
                     std::span<const double> weights, const MultiIndexSet& set,
                     double guard_epsilon = 1e-12);

/// Analytic gradient of mle_objective. Throws NumericError naming the first
/// sample whose polynomial value lies inside the guard band.
std::vector<double> mle_gradient(std::span<const double> theta, const Matrix& whitened,
                                 std::span<const double> weights, const MultiIndexSet& set,
                                 double guard_epsilon = 1e-12);

/// Serial reference implementations (plain per-sample loops); kept for
/// testing and benchmarking the parallel kernels against.
double mle_objective_serial(std::span<const double> theta, const Matrix& whitened,
                            std::span<const double> weights, const MultiIndexSet& set,
                            double guard_epsilon = 1e-12);
std::vector<double> mle_gradient_serial(std::span<const double> theta, const Matrix& whitened,
                                        std::span<const double> weights,
                                        const MultiIndexSet& set, double guard_epsilon = 1e-12);

struct ConvexFitResult {
    std::vector<double> theta;
    double objective = 0.0;
    int iterations = 0;
};

/// Minimize the relaxed convex objective
///   -sum_i 2 w_i log(sigma (1 + Theta^T H(z_i))) + Theta^T Q Theta
/// over the open set sigma (1 + Theta^T H(z_i)) > 0 for all i. The log terms
/// act as an intrinsic barrier under backtracking. Returns nullopt when the
/// negative branch has no feasible start.
std::optional<ConvexFitResult> convex_relaxed_fit(const Matrix& whitened,
                                                  std::span<const double> weights,
                                                  const MultiIndexSet& set, Branch branch,
                                                  const FitConfig& config = {});

struct NonlinearFitResult {
    std::vector<double> theta;
    double objective = 0.0;
    int iterations = 0;
};

/// Quasi-Newton refinement of mle_objective from initial_theta; the returned
/// objective never exceeds the starting one.
NonlinearFitResult nonlinear_fit(const Matrix& whitened, std::span<const double> weights,
                                 const MultiIndexSet& set, std::span<const double> initial_theta,
                                 const FitConfig& config = {});

/// Full pipeline: whiten, solve the relaxed branch problems, refine each with
/// the nonlinear stage, pick the branch with the smaller final objective.
std::pair<SnpDensity, FitReport> fit_snp(const Matrix& samples, std::span<const double> weights,
                                         const FitConfig& config);
std::pair<SnpDensity, FitReport> fit_snp(const Matrix& samples, const FitConfig& config);

const char* branch_name(Branch branch);

void save_fit_report(const FitReport& report, const std::filesystem::path& path);
FitReport load_fit_report(const std::filesystem::path& path);

}  // namespace snp
