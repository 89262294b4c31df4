#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "snp/indexset.hpp"
#include "snp/linalg.hpp"

namespace snp {

/// Affine map between raw states x and whitened coordinates z:
/// z = L^{-1}(x - mean), x = L z + mean, with the sample covariance = L L^T.
struct WhiteningTransform {
    std::vector<double> mean;
    Matrix factor;          // L, lower triangular
    Matrix inverse_factor;  // L^{-1}
    double log_abs_det_inverse = 0.0;

    int dimension() const { return static_cast<int>(mean.size()); }

    std::vector<double> whiten(std::span<const double> x) const;
    std::vector<double> unwhiten(std::span<const double> z) const;

    bool factor_is_diagonal() const;

    static WhiteningTransform identity(int dimension);
    /// Build from a lower-triangular factor; fills the inverse and log-det.
    static WhiteningTransform from_factor(std::vector<double> mean, Matrix factor);
};

/// One term of a marginal expansion, restricted to the kept coordinates.
struct MarginalLinearTerm {
    std::vector<int> orders;
    double coefficient;
};

struct MarginalQuadTerm {
    std::vector<int> orders_a;
    std::vector<int> orders_b;
    double weight;
};

/// Analytic marginal of an SnpDensity over a subset of whitened coordinates.
/// Evaluable as a density in its own right; also carries an analytic CDF.
class SnpMarginal {
public:
    int dimension() const { return static_cast<int>(keep_.size()); }
    int order() const { return order_; }
    const std::vector<int>& kept_coordinates() const { return keep_; }

    double pdf(std::span<const double> z) const;
    double cdf(std::span<const double> z) const;
    double box_probability(std::span<const double> lower, std::span<const double> upper) const;

private:
    friend class SnpDensity;
    SnpMarginal() = default;

    std::vector<int> keep_;
    int order_ = 0;
    double normalization_ = 1.0;
    std::vector<MarginalLinearTerm> linear_;
    std::vector<MarginalQuadTerm> quadratic_;
};

/// A fitted Gallant-Nychka density phi(z) P(z)^2 / S over whitened
/// coordinates, optionally paired with the whitening transform that maps raw
/// states into those coordinates. Immutable; evaluations are thread-safe.
class SnpDensity {
public:
    SnpDensity(MultiIndexSet index_set, std::vector<double> theta,
               std::optional<WhiteningTransform> whitening = std::nullopt);

    int dimension() const { return index_set_.dimension(); }
    int order() const { return index_set_.order(); }
    const MultiIndexSet& index_set() const { return index_set_; }
    const std::vector<double>& theta() const { return theta_; }
    double normalization() const { return normalization_; }
    const std::optional<WhiteningTransform>& whitening() const { return whitening_; }

    /// P(z; Theta) = 1 + sum_alpha c_alpha prod_j H_{alpha_j}(z_j).
    double polynomial_value(std::span<const double> z) const;

    /// phi_d(z) P(z)^2 / S; nonnegative everywhere.
    double pdf_whitened(std::span<const double> z) const;

    /// Raw-coordinate density through the whitening map (requires whitening).
    double pdf(std::span<const double> x) const;

    /// Analytic CDF over whitened coordinates.
    double cdf_whitened(std::span<const double> z) const;

    /// Analytic marginal over the kept coordinates (0-based, in given order).
    SnpMarginal marginal(std::span<const int> keep) const;

    /// Probability of the axis-aligned box in whitened coordinates, by signed
    /// inclusion-exclusion over CDF corners. coords selects the box axes;
    /// when it is a strict subset the analytic marginal is used.
    double box_probability(std::span<const double> lower, std::span<const double> upper,
                           std::span<const int> coords) const;

    /// Same for a raw-coordinate box; valid only when the whitening factor is
    /// diagonal (a raw box maps to a whitened box). Throws otherwise.
    double box_probability_raw(std::span<const double> lower, std::span<const double> upper,
                               std::span<const int> coords) const;

private:
    MultiIndexSet index_set_;
    std::vector<double> theta_;
    double normalization_ = 1.0;
    std::optional<WhiteningTransform> whitening_;
};

/// Multivariate Hermite basis vector: out[m] = prod_j H_{alpha^(m)_j}(z_j).
void hermite_basis(const MultiIndexSet& set, std::span<const double> z, std::span<double> out);
std::vector<double> hermite_basis(const MultiIndexSet& set, std::span<const double> z);

/// Density file round trip (JSON). Loading recomputes the normalization and
/// rejects files whose stored value disagrees by more than 1e-9.
void save_density(const SnpDensity& density, const std::filesystem::path& path);
SnpDensity load_density(const std::filesystem::path& path);

/// CDF arguments beyond this magnitude are clamped; phi and Phi saturate in
/// double precision well before it.
inline constexpr double kCdfClamp = 40.0;

}  // namespace snp
