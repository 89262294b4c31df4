#include "snp/grid.hpp"

#include <string>

#include "snp/errors.hpp"
#include "snp/parallel.hpp"
#include "snp/textio.hpp"

namespace snp {

std::size_t GridSpec::total_points() const {
    std::size_t total = 1;
    for (const AxisSpec& axis : axes) total *= static_cast<std::size_t>(axis.count);
    return total;
}

double GridSpec::coordinate(std::size_t axis, std::size_t index) const {
    const AxisSpec& a = axes[axis];
    if (a.count == 1) return a.min;
    return a.min + (a.max - a.min) * static_cast<double>(index) /
                       static_cast<double>(a.count - 1);
}

void GridSpec::point(std::size_t flat, std::span<double> out) const {
    for (std::size_t axis = axes.size(); axis-- > 0;) {
        const std::size_t count = static_cast<std::size_t>(axes[axis].count);
        out[axis] = coordinate(axis, flat % count);
        flat /= count;
    }
}

AxisSpec parse_axis_spec(const std::string& text) {
    const std::size_t c1 = text.find(':');
    const std::size_t c2 = c1 == std::string::npos ? std::string::npos : text.find(':', c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos) {
        throw UsageError("grid axis '" + text + "' is not of the form min:max:count");
    }
    AxisSpec axis;
    try {
        axis.min = parse_double(text.substr(0, c1), "grid axis");
        axis.max = parse_double(text.substr(c1 + 1, c2 - c1 - 1), "grid axis");
    } catch (const IoError& e) {
        throw UsageError(e.what());
    }
    const std::string count_text = text.substr(c2 + 1);
    try {
        axis.count = std::stoi(count_text);
    } catch (const std::exception&) {
        throw UsageError("grid axis '" + text + "': bad count '" + count_text + "'");
    }
    if (axis.count < 1) throw UsageError("grid axis '" + text + "': count must be >= 1");
    if (axis.count > 1 && !(axis.min < axis.max)) {
        throw UsageError("grid axis '" + text + "': min must be below max");
    }
    return axis;
}

GridSpec parse_grid_spec(const std::string& text) {
    GridSpec grid;
    std::size_t start = 0;
    while (start <= text.size()) {
        const std::size_t comma = text.find(',', start);
        const std::string piece =
            comma == std::string::npos ? text.substr(start) : text.substr(start, comma - start);
        grid.axes.push_back(parse_axis_spec(piece));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    if (grid.axes.empty()) throw UsageError("empty grid spec");
    return grid;
}

namespace {

template <class Eval>
std::vector<double> run_grid(const GridSpec& grid, std::size_t dims, bool parallel, Eval&& eval) {
    const std::size_t total = grid.total_points();
    std::vector<double> values(total);
    auto body = [&](std::size_t flat) {
        std::vector<double> z(dims);
        grid.point(flat, z);
        values[flat] = eval(z);
    };
    if (parallel) {
        parallel_for(total, body);
    } else {
        for (std::size_t flat = 0; flat < total; ++flat) body(flat);
    }
    return values;
}

std::vector<double> grid_impl(const SnpDensity& density, const GridSpec& grid,
                              GridQuantity quantity, bool raw_space, bool parallel) {
    if (grid.axes.size() != static_cast<std::size_t>(density.dimension())) {
        throw UsageError("grid dimension does not match the density");
    }
    if (raw_space && quantity == GridQuantity::cdf) {
        throw UsageError("the analytic CDF is defined in whitened coordinates only");
    }
    return run_grid(grid, grid.axes.size(), parallel, [&](std::span<const double> z) {
        if (raw_space) return density.pdf(z);
        return quantity == GridQuantity::pdf ? density.pdf_whitened(z) : density.cdf_whitened(z);
    });
}

std::vector<double> marginal_grid_impl(const SnpMarginal& marginal, const GridSpec& grid,
                                       GridQuantity quantity, bool parallel) {
    if (grid.axes.size() != static_cast<std::size_t>(marginal.dimension())) {
        throw UsageError("grid dimension does not match the marginal");
    }
    return run_grid(grid, grid.axes.size(), parallel, [&](std::span<const double> z) {
        return quantity == GridQuantity::pdf ? marginal.pdf(z) : marginal.cdf(z);
    });
}

}  // namespace

std::vector<double> evaluate_grid(const SnpDensity& density, const GridSpec& grid,
                                  GridQuantity quantity, bool raw_space) {
    return grid_impl(density, grid, quantity, raw_space, true);
}

std::vector<double> evaluate_grid_serial(const SnpDensity& density, const GridSpec& grid,
                                         GridQuantity quantity, bool raw_space) {
    return grid_impl(density, grid, quantity, raw_space, false);
}

std::vector<double> evaluate_marginal_grid(const SnpMarginal& marginal, const GridSpec& grid,
                                           GridQuantity quantity) {
    return marginal_grid_impl(marginal, grid, quantity, true);
}

std::vector<double> evaluate_marginal_grid_serial(const SnpMarginal& marginal,
                                                  const GridSpec& grid, GridQuantity quantity) {
    return marginal_grid_impl(marginal, grid, quantity, false);
}

}  // namespace snp
