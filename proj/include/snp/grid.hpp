#pragma once

#include <span>
#include <string>
#include <vector>

#include "snp/density.hpp"

namespace snp {

struct AxisSpec {
    double min = 0.0;
    double max = 0.0;
    int count = 1;
};

/// Rectangular evaluation grid; flat indexing is row-major with the last
/// axis varying fastest.
struct GridSpec {
    std::vector<AxisSpec> axes;

    std::size_t total_points() const;
    double coordinate(std::size_t axis, std::size_t index) const;
    void point(std::size_t flat, std::span<double> out) const;
};

/// Parse "min:max:count".
AxisSpec parse_axis_spec(const std::string& text);

/// Parse comma-separated axis specs, e.g. "-3:3:100,-3:3:100".
GridSpec parse_grid_spec(const std::string& text);

enum class GridQuantity { pdf, cdf };

/// Evaluate the density over the grid (whitened coordinates, or raw when
/// raw_space is set; the CDF has no raw form). Output order matches flat
/// grid indexing regardless of the execution interleaving.
std::vector<double> evaluate_grid(const SnpDensity& density, const GridSpec& grid,
                                  GridQuantity quantity, bool raw_space = false);
std::vector<double> evaluate_grid_serial(const SnpDensity& density, const GridSpec& grid,
                                         GridQuantity quantity, bool raw_space = false);

std::vector<double> evaluate_marginal_grid(const SnpMarginal& marginal, const GridSpec& grid,
                                           GridQuantity quantity);
std::vector<double> evaluate_marginal_grid_serial(const SnpMarginal& marginal,
                                                  const GridSpec& grid, GridQuantity quantity);

}  // namespace snp
