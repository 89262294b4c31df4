#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <vector>

#include "snp/density.hpp"
#include "snp/errors.hpp"
#include "snp/fit.hpp"
#include "snp/hermite.hpp"
#include "snp/rng.hpp"
#include "support/fixtures.hpp"
#include "support/quadrature.hpp"

using namespace snp;

namespace {

SnpDensity single_coefficient_density(int d, int k, const std::vector<int>& index, double value) {
    MultiIndexSet set = build_index_set(d, k);
    std::vector<double> theta(set.size(), 0.0);
    for (std::size_t m = 0; m < set.size(); ++m) {
        if (set.index(m).entries == index) theta[m] = value;
    }
    return SnpDensity(std::move(set), std::move(theta));
}

}  // namespace

TEST_CASE("polynomial_value basics") {
    const SnpDensity zero(build_index_set(2, 4), std::vector<double>(12, 0.0));
    CHECK(zero.polynomial_value(std::vector<double>{0.3, -1.1}) == 1.0);

    const SnpDensity c2 = single_coefficient_density(1, 2, {2}, 0.5);
    CHECK(c2.polynomial_value(std::vector<double>{0.0}) == doctest::Approx(0.5).epsilon(1e-15));

    const SnpDensity c11 = single_coefficient_density(2, 2, {1, 1}, 1.0);
    CHECK(c11.polynomial_value(std::vector<double>{1.0, 1.0}) ==
          doctest::Approx(2.0).epsilon(1e-15));

    CHECK_THROWS_AS(c2.polynomial_value(std::vector<double>{1.0, 2.0}), UsageError);
}

TEST_CASE("pdf_whitened values") {
    const SnpDensity zero1(build_index_set(1, 2), std::vector<double>{0.0});
    CHECK(zero1.pdf_whitened(std::vector<double>{0.0}) ==
          doctest::Approx(0.3989422804).epsilon(1e-9));

    const SnpDensity zero3(build_index_set(3, 2), std::vector<double>(6, 0.0));
    CHECK(zero3.pdf_whitened(std::vector<double>{0.0, 0.0, 0.0}) ==
          doctest::Approx(0.0634936359).epsilon(1e-9));

    const SnpDensity c2 = single_coefficient_density(1, 2, {2}, 0.5);
    CHECK(c2.normalization() == doctest::Approx(1.5).epsilon(1e-15));
    CHECK(c2.pdf_whitened(std::vector<double>{0.0}) ==
          doctest::Approx(0.0664903801).epsilon(1e-8));
}

TEST_CASE("pdf_whitened is nonnegative everywhere") {
    const SnpDensity density = fixtures::random_density(3, 5, 99, 3.0);
    SubstreamRng rng(5150, 0);
    for (int i = 0; i < 100000; ++i) {
        const std::vector<double> z{4.0 * rng.normal(), 4.0 * rng.normal(), 4.0 * rng.normal()};
        CHECK(density.pdf_whitened(z) >= 0.0);
    }
}

TEST_CASE("whitened density integrates to one") {
    for (std::uint64_t seed : {11u, 12u, 13u}) {
        const SnpDensity d1 = fixtures::random_density(1, 6, seed);
        const double mass1 = oracle::composite_gauss_legendre(
            [&](double z) { return d1.pdf_whitened(std::vector<double>{z}); }, -8.0, 8.0, 32);
        CHECK(mass1 == doctest::Approx(1.0).epsilon(1e-6));
    }
    const SnpDensity d2 = fixtures::random_density(2, 4, 21);
    const double mass2 = oracle::composite_gauss_legendre(
        [&](double x) {
            return oracle::composite_gauss_legendre(
                [&](double y) { return d2.pdf_whitened(std::vector<double>{x, y}); }, -8.0, 8.0,
                24);
        },
        -8.0, 8.0, 24);
    CHECK(mass2 == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("normalization equals the Monte Carlo mean of P^2") {
    const SnpDensity density = fixtures::random_density(2, 4, 31, 0.8);
    const std::size_t n = 1000000;
    SubstreamRng rng(8675309, 0);
    double sum = 0.0, sum_sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const std::vector<double> z{rng.normal(), rng.normal()};
        const double p = density.polynomial_value(z);
        sum += p * p;
        sum_sq += p * p * p * p;
    }
    const double mean = sum / static_cast<double>(n);
    const double var = sum_sq / static_cast<double>(n) - mean * mean;
    const double stderr_mean = std::sqrt(var / static_cast<double>(n));
    CHECK(std::abs(mean - density.normalization()) < 3.0 * stderr_mean);
}

TEST_CASE("raw pdf through the whitening map") {
    // identity whitening: raw equals whitened
    MultiIndexSet set = build_index_set(2, 3);
    std::vector<double> theta = fixtures::random_theta(set.size(), 4, 0.7);
    const SnpDensity ident(set, theta, WhiteningTransform::identity(2));
    const std::vector<double> x{0.35, -0.9};
    CHECK(ident.pdf(x) == doctest::Approx(ident.pdf_whitened(x)).epsilon(1e-15));

    // d=1, L=[2]: Jacobian 1/2
    Matrix l_scale(1, 1);
    l_scale(0, 0) = 2.0;
    const SnpDensity scaled(build_index_set(1, 2), std::vector<double>{0.0},
                            WhiteningTransform::from_factor({0.0}, l_scale));
    CHECK(scaled.pdf(std::vector<double>{0.0}) == doctest::Approx(0.1994711402).epsilon(1e-9));

    // mass check over raw coordinates with a non-trivial transform
    Matrix factor(2, 2);
    factor(0, 0) = 1.3;
    factor(1, 0) = -0.4;
    factor(1, 1) = 0.8;
    const SnpDensity raw(set, theta, WhiteningTransform::from_factor({1.0, -2.0}, factor));
    const double mass = oracle::composite_gauss_legendre(
        [&](double x0) {
            return oracle::composite_gauss_legendre(
                [&](double x1) { return raw.pdf(std::vector<double>{x0, x1}); }, -14.0, 10.0, 24);
        },
        -12.0, 14.0, 24);
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-4));

    const SnpDensity no_whitening(set, theta);
    CHECK_THROWS_AS(no_whitening.pdf(x), UsageError);
}

TEST_CASE("whitening transform round trip") {
    Matrix factor(3, 3);
    factor(0, 0) = 2.0;
    factor(1, 0) = 0.3;
    factor(1, 1) = 1.1;
    factor(2, 0) = -0.2;
    factor(2, 1) = 0.9;
    factor(2, 2) = 0.5;
    const WhiteningTransform t = WhiteningTransform::from_factor({1.0, 2.0, 3.0}, factor);
    SubstreamRng rng(42, 7);
    for (int i = 0; i < 100; ++i) {
        const std::vector<double> x{rng.normal(), rng.normal(), rng.normal()};
        const std::vector<double> back = t.unwhiten(t.whiten(x));
        for (int c = 0; c < 3; ++c) CHECK(std::abs(back[c] - x[c]) < 1e-10);
    }
    CHECK_FALSE(t.factor_is_diagonal());
    CHECK(WhiteningTransform::identity(3).factor_is_diagonal());

    Matrix upper(2, 2);
    upper(0, 0) = 1.0;
    upper(0, 1) = 0.5;
    upper(1, 1) = 1.0;
    CHECK_THROWS_AS(WhiteningTransform::from_factor({0.0, 0.0}, upper), UsageError);
}

TEST_CASE("density file round trip and validation") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "snp_density_test";
    fs::create_directories(dir);

    MultiIndexSet set = build_index_set(3, 4);
    std::vector<double> theta = fixtures::random_theta(set.size(), 17, 0.9);
    Matrix factor(3, 3);
    factor(0, 0) = 1.5;
    factor(1, 0) = 0.2;
    factor(1, 1) = 0.9;
    factor(2, 0) = 0.1;
    factor(2, 1) = -0.3;
    factor(2, 2) = 2.0;
    const SnpDensity density(set, theta, WhiteningTransform::from_factor({1.0, 2.0, 3.0}, factor));

    const fs::path file = dir / "density.json";
    save_density(density, file);
    const SnpDensity loaded = load_density(file);
    CHECK(loaded.theta() == density.theta());
    CHECK(loaded.index_set() == density.index_set());
    CHECK(loaded.normalization() == doctest::Approx(density.normalization()).epsilon(1e-15));
    REQUIRE(loaded.whitening().has_value());
    CHECK(loaded.whitening()->mean == density.whitening()->mean);
    CHECK(loaded.whitening()->factor == density.whitening()->factor);

    // corrupt the stored normalization
    std::ifstream in(file);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    in.close();
    const std::string key = "\"normalization\":";
    const std::size_t pos = text.find(key);
    REQUIRE(pos != std::string::npos);
    const std::size_t val_end = text.find(',', pos);
    std::string corrupted = text.substr(0, pos) + key + " 99.0" + text.substr(val_end);
    const fs::path bad = dir / "bad.json";
    std::ofstream out(bad);
    out << corrupted;
    out.close();
    CHECK_THROWS_AS(load_density(bad), IoError);

    CHECK_THROWS_AS(load_density(dir / "missing.json"), IoError);
    fs::remove_all(dir);
}
