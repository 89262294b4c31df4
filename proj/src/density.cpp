#include "snp/density.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <string>

#include <json.hpp>

#include "snp/errors.hpp"
#include "snp/hermite.hpp"

namespace snp {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112353;

double clamp_cdf_arg(double z) { return std::clamp(z, -kCdfClamp, kCdfClamp); }

// Standard d-variate normal density.
double normal_pdf_multi(std::span<const double> z) {
    double q = 0.0;
    for (double v : z) q += v * v;
    return std::exp(-0.5 * (q + static_cast<double>(z.size()) * kLog2Pi));
}

// Hermite tables for every coordinate, row c = H_0..H_max(z_c).
Matrix coordinate_tables(std::span<const double> z, int max_order) {
    Matrix tables(z.size(), static_cast<std::size_t>(max_order) + 1);
    for (std::size_t c = 0; c < z.size(); ++c) {
        hermite_eval_all(max_order, z[c], tables.row(c));
    }
    return tables;
}

// J_{p,q}(x) for all p,q <= order, built from one G table per coordinate.
// Returned matrix is (order+1) x (order+1).
Matrix crossed_integral_table(double x, int order) {
    if (order > kMaxLinearizationOrder) {
        throw UsageError("analytic CDF: order above " +
                         std::to_string(kMaxLinearizationOrder) +
                         " is not supported (exact product coefficients overflow)");
    }
    std::vector<double> g(static_cast<std::size_t>(2 * order) + 1);
    gaussian_lower_integral_all(2 * order, x, g);
    Matrix j(static_cast<std::size_t>(order) + 1, static_cast<std::size_t>(order) + 1);
    for (int p = 0; p <= order; ++p) {
        for (int q = 0; q <= p; ++q) {
            const double v = crossed_lower_integral(p, q, g);
            j(p, q) = v;
            j(q, p) = v;
        }
    }
    return j;
}

void check_box_arguments(int dimension, std::span<const double> lower,
                         std::span<const double> upper, std::span<const int> coords) {
    if (coords.empty()) throw UsageError("box_probability: empty coordinate list");
    if (lower.size() != coords.size() || upper.size() != coords.size()) {
        throw UsageError("box_probability: bounds and coordinate list sizes differ");
    }
    std::vector<bool> seen(static_cast<std::size_t>(dimension), false);
    for (int c : coords) {
        if (c < 0 || c >= dimension) {
            throw UsageError("box_probability: coordinate " + std::to_string(c) +
                             " out of range for dimension " + std::to_string(dimension));
        }
        if (seen[static_cast<std::size_t>(c)]) {
            throw UsageError("box_probability: repeated coordinate " + std::to_string(c));
        }
        seen[static_cast<std::size_t>(c)] = true;
    }
    for (std::size_t j = 0; j < coords.size(); ++j) {
        if (!(lower[j] <= upper[j])) {
            throw UsageError("box_probability: inverted bounds on coordinate " +
                             std::to_string(coords[j]));
        }
    }
}

// Signed inclusion-exclusion over the 2^m corners of a box.
template <class CdfFn>
double corner_sum(std::span<const double> lower, std::span<const double> upper, CdfFn&& cdf) {
    const std::size_t m = lower.size();
    std::vector<double> corner(m);
    double total = 0.0;
    for (std::size_t mask = 0; mask < (std::size_t{1} << m); ++mask) {
        int lower_picks = 0;
        for (std::size_t j = 0; j < m; ++j) {
            if (mask & (std::size_t{1} << j)) {
                corner[j] = lower[j];
                ++lower_picks;
            } else {
                corner[j] = upper[j];
            }
        }
        const double sign = (lower_picks % 2 == 0) ? 1.0 : -1.0;
        total += sign * cdf(corner);
    }
    return total;
}

}  // namespace

// ---------------------------------------------------------------------------
// WhiteningTransform

std::vector<double> WhiteningTransform::whiten(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != dimension()) {
        throw UsageError("whiten: point dimension mismatch");
    }
    std::vector<double> shifted(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) shifted[i] = x[i] - mean[i];
    return solve_lower(factor, shifted);
}

std::vector<double> WhiteningTransform::unwhiten(std::span<const double> z) const {
    if (static_cast<int>(z.size()) != dimension()) {
        throw UsageError("unwhiten: point dimension mismatch");
    }
    std::vector<double> x = matvec(factor, z);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += mean[i];
    return x;
}

bool WhiteningTransform::factor_is_diagonal() const {
    for (std::size_t i = 0; i < factor.rows(); ++i) {
        for (std::size_t j = 0; j < factor.cols(); ++j) {
            if (i != j && factor(i, j) != 0.0) return false;
        }
    }
    return true;
}

WhiteningTransform WhiteningTransform::identity(int dimension) {
    Matrix eye(static_cast<std::size_t>(dimension), static_cast<std::size_t>(dimension));
    for (int i = 0; i < dimension; ++i) eye(i, i) = 1.0;
    return from_factor(std::vector<double>(static_cast<std::size_t>(dimension), 0.0), eye);
}

WhiteningTransform WhiteningTransform::from_factor(std::vector<double> mean, Matrix factor) {
    if (factor.rows() != mean.size() || factor.cols() != mean.size()) {
        throw UsageError("whitening: factor shape does not match mean");
    }
    WhiteningTransform t;
    t.mean = std::move(mean);
    t.factor = std::move(factor);
    double log_det = 0.0;
    for (std::size_t i = 0; i < t.factor.rows(); ++i) {
        const double diag = t.factor(i, i);
        if (!(diag > 0.0)) throw UsageError("whitening: factor diagonal must be positive");
        log_det += std::log(diag);
        for (std::size_t j = i + 1; j < t.factor.cols(); ++j) {
            if (t.factor(i, j) != 0.0) {
                throw UsageError("whitening: factor must be lower triangular");
            }
        }
    }
    t.inverse_factor = invert_lower(t.factor);
    t.log_abs_det_inverse = -log_det;
    return t;
}

// ---------------------------------------------------------------------------
// Basis evaluation

void hermite_basis(const MultiIndexSet& set, std::span<const double> z, std::span<double> out) {
    if (static_cast<int>(z.size()) != set.dimension()) {
        throw UsageError("hermite_basis: point dimension mismatch");
    }
    const Matrix tables = coordinate_tables(z, set.order());
    for (std::size_t m = 0; m < set.size(); ++m) {
        const MultiIndex& alpha = set.index(m);
        double prod = 1.0;
        for (std::size_t j = 0; j < alpha.entries.size(); ++j) {
            prod *= tables(j, static_cast<std::size_t>(alpha.entries[j]));
        }
        out[m] = prod;
    }
}

std::vector<double> hermite_basis(const MultiIndexSet& set, std::span<const double> z) {
    std::vector<double> out(set.size());
    hermite_basis(set, z, out);
    return out;
}

// ---------------------------------------------------------------------------
// SnpDensity

SnpDensity::SnpDensity(MultiIndexSet index_set, std::vector<double> theta,
                       std::optional<WhiteningTransform> whitening)
    : index_set_(std::move(index_set)),
      theta_(std::move(theta)),
      whitening_(std::move(whitening)) {
    if (theta_.size() != index_set_.size()) {
        throw UsageError("SnpDensity: theta length " + std::to_string(theta_.size()) +
                         " does not match index set size " + std::to_string(index_set_.size()));
    }
    if (whitening_ && whitening_->dimension() != index_set_.dimension()) {
        throw UsageError("SnpDensity: whitening dimension mismatch");
    }
    double s = 1.0;
    for (std::size_t m = 0; m < theta_.size(); ++m) {
        s += theta_[m] * theta_[m] * static_cast<double>(index_set_.weight(m));
    }
    normalization_ = s;
}

double SnpDensity::polynomial_value(std::span<const double> z) const {
    if (static_cast<int>(z.size()) != dimension()) {
        throw UsageError("polynomial_value: point dimension mismatch");
    }
    const Matrix tables = coordinate_tables(z, order());
    double value = 1.0;
    for (std::size_t m = 0; m < index_set_.size(); ++m) {
        const MultiIndex& alpha = index_set_.index(m);
        double prod = 1.0;
        for (std::size_t j = 0; j < alpha.entries.size(); ++j) {
            prod *= tables(j, static_cast<std::size_t>(alpha.entries[j]));
        }
        value += theta_[m] * prod;
    }
    return value;
}

double SnpDensity::pdf_whitened(std::span<const double> z) const {
    const double p = polynomial_value(z);
    return normal_pdf_multi(z) * p * p / normalization_;
}

double SnpDensity::pdf(std::span<const double> x) const {
    if (!whitening_) {
        throw UsageError("pdf: density has no whitening transform; use pdf_whitened");
    }
    const std::vector<double> z = whitening_->whiten(x);
    return pdf_whitened(z) * std::exp(whitening_->log_abs_det_inverse);
}

double SnpDensity::cdf_whitened(std::span<const double> z) const {
    const int d = dimension();
    if (static_cast<int>(z.size()) != d) {
        throw UsageError("cdf_whitened: point dimension mismatch");
    }
    const int K = order();
    const std::size_t M = index_set_.size();

    // Per-coordinate G and J tables, memoized for this evaluation.
    std::vector<double> g_zero(static_cast<std::size_t>(d));  // Phi(z_c)
    Matrix g(static_cast<std::size_t>(d), static_cast<std::size_t>(K) + 1);
    std::vector<Matrix> j(static_cast<std::size_t>(d));
    for (int c = 0; c < d; ++c) {
        const double zc = clamp_cdf_arg(z[c]);
        gaussian_lower_integral_all(K, zc, g.row(c));
        g_zero[c] = g(c, 0);
        j[static_cast<std::size_t>(c)] = crossed_integral_table(zc, K);
    }

    double i0 = 1.0;
    for (int c = 0; c < d; ++c) i0 *= g_zero[c];

    double i1 = 0.0;
    for (std::size_t m = 0; m < M; ++m) {
        const MultiIndex& alpha = index_set_.index(m);
        double prod = 1.0;
        for (int c = 0; c < d; ++c) {
            prod *= g(c, static_cast<std::size_t>(alpha.entries[c]));
        }
        i1 += theta_[m] * prod;
    }
    i1 *= 2.0;

    double i2 = 0.0;
    for (std::size_t a = 0; a < M; ++a) {
        const MultiIndex& alpha = index_set_.index(a);
        double inner = 0.0;
        for (std::size_t b = 0; b < M; ++b) {
            const MultiIndex& beta = index_set_.index(b);
            double prod = theta_[b];
            for (int c = 0; c < d; ++c) {
                prod *= j[static_cast<std::size_t>(c)](
                    static_cast<std::size_t>(alpha.entries[c]),
                    static_cast<std::size_t>(beta.entries[c]));
            }
            inner += prod;
        }
        i2 += theta_[a] * inner;
    }

    return (i0 + i1 + i2) / normalization_;
}

SnpMarginal SnpDensity::marginal(std::span<const int> keep) const {
    const int d = dimension();
    if (keep.empty()) throw UsageError("marginal: kept coordinate set must be nonempty");
    std::vector<bool> kept(static_cast<std::size_t>(d), false);
    for (int c : keep) {
        if (c < 0 || c >= d) {
            throw UsageError("marginal: coordinate " + std::to_string(c) +
                             " out of range for dimension " + std::to_string(d));
        }
        if (kept[static_cast<std::size_t>(c)]) {
            throw UsageError("marginal: repeated coordinate " + std::to_string(c));
        }
        kept[static_cast<std::size_t>(c)] = true;
    }

    std::vector<int> dropped;
    for (int c = 0; c < d; ++c) {
        if (!kept[static_cast<std::size_t>(c)]) dropped.push_back(c);
    }

    SnpMarginal marg;
    marg.keep_.assign(keep.begin(), keep.end());
    marg.order_ = order();
    marg.normalization_ = normalization_;

    const std::size_t M = index_set_.size();
    auto restrict_orders = [&](const MultiIndex& alpha) {
        std::vector<int> orders(keep.size());
        for (std::size_t j = 0; j < keep.size(); ++j) {
            orders[j] = alpha.entries[static_cast<std::size_t>(keep[j])];
        }
        return orders;
    };

    // Linear terms survive when every dropped order is zero.
    for (std::size_t m = 0; m < M; ++m) {
        const MultiIndex& alpha = index_set_.index(m);
        bool survives = true;
        for (int c : dropped) {
            if (alpha.entries[static_cast<std::size_t>(c)] != 0) {
                survives = false;
                break;
            }
        }
        if (survives) {
            marg.linear_.push_back({restrict_orders(alpha), theta_[m]});
        }
    }

    // Quadratic terms survive when the pair agrees on every dropped order;
    // the dropped coordinates contribute prod alpha_j! by orthogonality.
    for (std::size_t a = 0; a < M; ++a) {
        const MultiIndex& alpha = index_set_.index(a);
        for (std::size_t b = 0; b < M; ++b) {
            const MultiIndex& beta = index_set_.index(b);
            bool match = true;
            for (int c : dropped) {
                if (alpha.entries[static_cast<std::size_t>(c)] !=
                    beta.entries[static_cast<std::size_t>(c)]) {
                    match = false;
                    break;
                }
            }
            if (!match) continue;
            double w = theta_[a] * theta_[b];
            for (int c : dropped) {
                w *= static_cast<double>(
                    factorial64(alpha.entries[static_cast<std::size_t>(c)]));
            }
            marg.quadratic_.push_back({restrict_orders(alpha), restrict_orders(beta), w});
        }
    }
    return marg;
}

double SnpDensity::box_probability(std::span<const double> lower, std::span<const double> upper,
                                   std::span<const int> coords) const {
    check_box_arguments(dimension(), lower, upper, coords);
    bool is_full_identity = coords.size() == static_cast<std::size_t>(dimension());
    if (is_full_identity) {
        for (std::size_t j = 0; j < coords.size(); ++j) {
            if (coords[j] != static_cast<int>(j)) {
                is_full_identity = false;
                break;
            }
        }
    }
    if (is_full_identity) {
        return corner_sum(lower, upper,
                          [&](std::span<const double> corner) { return cdf_whitened(corner); });
    }
    const SnpMarginal marg = marginal(coords);
    return marg.box_probability(lower, upper);
}

double SnpDensity::box_probability_raw(std::span<const double> lower,
                                       std::span<const double> upper,
                                       std::span<const int> coords) const {
    if (!whitening_) {
        throw UsageError("box_probability_raw: density has no whitening transform");
    }
    if (!whitening_->factor_is_diagonal()) {
        throw NumericError(
            "box_probability_raw: unsupported geometry; a raw axis-aligned box maps to a "
            "parallelepiped unless the whitening factor is diagonal");
    }
    check_box_arguments(dimension(), lower, upper, coords);
    std::vector<double> lo(lower.size()), hi(upper.size());
    for (std::size_t j = 0; j < coords.size(); ++j) {
        const std::size_t c = static_cast<std::size_t>(coords[j]);
        const double scale = whitening_->factor(c, c);  // positive
        lo[j] = (lower[j] - whitening_->mean[c]) / scale;
        hi[j] = (upper[j] - whitening_->mean[c]) / scale;
    }
    return box_probability(lo, hi, coords);
}

// ---------------------------------------------------------------------------
// SnpMarginal

double SnpMarginal::pdf(std::span<const double> z) const {
    if (z.size() != keep_.size()) throw UsageError("marginal pdf: point dimension mismatch");
    const Matrix tables = coordinate_tables(z, order_);
    auto product = [&](const std::vector<int>& orders) {
        double prod = 1.0;
        for (std::size_t j = 0; j < orders.size(); ++j) {
            prod *= tables(j, static_cast<std::size_t>(orders[j]));
        }
        return prod;
    };
    double e = 1.0;
    for (const MarginalLinearTerm& term : linear_) {
        e += 2.0 * term.coefficient * product(term.orders);
    }
    for (const MarginalQuadTerm& term : quadratic_) {
        e += term.weight * product(term.orders_a) * product(term.orders_b);
    }
    return normal_pdf_multi(z) * e / normalization_;
}

double SnpMarginal::cdf(std::span<const double> z) const {
    if (z.size() != keep_.size()) throw UsageError("marginal cdf: point dimension mismatch");
    const std::size_t m = keep_.size();
    Matrix g(m, static_cast<std::size_t>(order_) + 1);
    std::vector<Matrix> j(m);
    for (std::size_t c = 0; c < m; ++c) {
        const double zc = clamp_cdf_arg(z[c]);
        gaussian_lower_integral_all(order_, zc, g.row(c));
        j[c] = crossed_integral_table(zc, order_);
    }

    double total = 1.0;
    for (std::size_t c = 0; c < m; ++c) total *= g(c, 0);

    for (const MarginalLinearTerm& term : linear_) {
        double prod = 1.0;
        for (std::size_t c = 0; c < m; ++c) {
            prod *= g(c, static_cast<std::size_t>(term.orders[c]));
        }
        total += 2.0 * term.coefficient * prod;
    }
    for (const MarginalQuadTerm& term : quadratic_) {
        double prod = term.weight;
        for (std::size_t c = 0; c < m; ++c) {
            prod *= j[c](static_cast<std::size_t>(term.orders_a[c]),
                         static_cast<std::size_t>(term.orders_b[c]));
        }
        total += prod;
    }
    return total / normalization_;
}

double SnpMarginal::box_probability(std::span<const double> lower,
                                    std::span<const double> upper) const {
    if (lower.size() != keep_.size() || upper.size() != keep_.size()) {
        throw UsageError("marginal box_probability: bounds dimension mismatch");
    }
    for (std::size_t c = 0; c < keep_.size(); ++c) {
        if (!(lower[c] <= upper[c])) {
            throw UsageError("marginal box_probability: inverted bounds on axis " +
                             std::to_string(c));
        }
    }
    return corner_sum(lower, upper, [&](std::span<const double> corner) { return cdf(corner); });
}

// ---------------------------------------------------------------------------
// Density files

void save_density(const SnpDensity& density, const std::filesystem::path& path) {
    nlohmann::ordered_json doc;
    doc["dimension"] = density.dimension();
    doc["order"] = density.order();
    nlohmann::ordered_json indices = nlohmann::ordered_json::array();
    for (const MultiIndex& alpha : density.index_set().indices()) {
        indices.push_back(alpha.entries);
    }
    doc["indices"] = std::move(indices);
    doc["theta"] = density.theta();
    doc["normalization"] = density.normalization();
    if (density.whitening()) {
        const WhiteningTransform& w = *density.whitening();
        nlohmann::ordered_json wj;
        wj["mean"] = w.mean;
        wj["factor"] = w.factor.data();  // row-major d*d
        doc["whitening"] = std::move(wj);
    } else {
        doc["whitening"] = nullptr;
    }
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    out << doc.dump(2) << "\n";
    if (!out) throw IoError("write failed: " + path.string());
}

SnpDensity load_density(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open: " + path.string());
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw IoError("invalid density file " + path.string() + ": " + e.what());
    }
    try {
        const int d = doc.at("dimension").get<int>();
        const int order = doc.at("order").get<int>();
        std::vector<MultiIndex> indices;
        for (const auto& entry : doc.at("indices")) {
            indices.push_back(MultiIndex{entry.get<std::vector<int>>()});
        }
        MultiIndexSet set(d, order, std::move(indices));
        std::vector<double> theta = doc.at("theta").get<std::vector<double>>();

        std::optional<WhiteningTransform> whitening;
        if (!doc.at("whitening").is_null()) {
            const auto& wj = doc.at("whitening");
            std::vector<double> mean = wj.at("mean").get<std::vector<double>>();
            std::vector<double> flat = wj.at("factor").get<std::vector<double>>();
            if (flat.size() != mean.size() * mean.size()) {
                throw IoError("density file " + path.string() +
                              ": whitening factor has wrong element count");
            }
            Matrix factor(mean.size(), mean.size());
            factor.data() = std::move(flat);
            whitening = WhiteningTransform::from_factor(std::move(mean), std::move(factor));
        }

        SnpDensity density(std::move(set), std::move(theta), std::move(whitening));
        const double stored = doc.at("normalization").get<double>();
        if (std::abs(stored - density.normalization()) > 1e-9) {
            throw IoError("density file " + path.string() +
                          ": stored normalization disagrees with the recomputed value by " +
                          std::to_string(std::abs(stored - density.normalization())));
        }
        return density;
    } catch (const nlohmann::json::exception& e) {
        throw IoError("invalid density file " + path.string() + ": " + e.what());
    }
}

}  // namespace snp
