#pragma once

// Deterministic random fixtures shared by the tests.

#include <cmath>
#include <cstdint>
#include <vector>

#include "snp/density.hpp"
#include "snp/indexset.hpp"
#include "snp/rng.hpp"

namespace fixtures {

/// Gaussian-direction coefficient vector rescaled to a uniform norm in
/// (0, max_norm].
inline std::vector<double> random_theta(std::size_t m, std::uint64_t seed, double max_norm) {
    snp::SubstreamRng rng(seed, 0);
    std::vector<double> theta(m);
    double norm_sq = 0.0;
    for (double& v : theta) {
        v = rng.normal();
        norm_sq += v * v;
    }
    const double target = max_norm * rng.uniform01();
    const double scale = target / std::sqrt(norm_sq);
    for (double& v : theta) v *= scale;
    return theta;
}

inline snp::SnpDensity random_density(int d, int k, std::uint64_t seed, double max_norm = 1.0) {
    snp::MultiIndexSet set = snp::build_index_set(d, k);
    std::vector<double> theta = random_theta(set.size(), seed, max_norm);
    return snp::SnpDensity(std::move(set), std::move(theta));
}

}  // namespace fixtures
