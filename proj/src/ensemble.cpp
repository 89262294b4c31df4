#include "snp/ensemble.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include "snp/rng.hpp"
#include "snp/textio.hpp"

namespace snp {

namespace {

void check_box(const SampleEnsemble& ensemble, std::span<const double> lower,
               std::span<const double> upper, std::span<const int> coords) {
    if (coords.empty()) throw UsageError("mc_box_probability: empty coordinate list");
    if (lower.size() != coords.size() || upper.size() != coords.size()) {
        throw UsageError("mc_box_probability: bounds and coordinate list sizes differ");
    }
    for (int c : coords) {
        if (c < 0 || c >= ensemble.dimension()) {
            throw UsageError("mc_box_probability: coordinate " + std::to_string(c) +
                             " out of range");
        }
    }
    for (std::size_t j = 0; j < coords.size(); ++j) {
        if (!(lower[j] <= upper[j])) {
            throw UsageError("mc_box_probability: inverted bounds on coordinate " +
                             std::to_string(coords[j]));
        }
    }
}

bool point_in_box(std::span<const double> point, std::span<const double> lower,
                  std::span<const double> upper, std::span<const int> coords) {
    for (std::size_t j = 0; j < coords.size(); ++j) {
        const double v = point[static_cast<std::size_t>(coords[j])];
        if (v < lower[j] || v > upper[j]) return false;
    }
    return true;
}

}  // namespace

SampleEnsemble sample_gaussian(const GaussianInitial& initial, std::size_t n,
                               std::uint64_t seed) {
    if (n == 0) throw UsageError("sample_gaussian: need at least one sample");
    const std::size_t d = initial.mean.size();
    if (initial.covariance.rows() != d || initial.covariance.cols() != d) {
        throw UsageError("sample_gaussian: covariance shape does not match mean");
    }
    const Matrix factor = cholesky_lower(initial.covariance);

    SampleEnsemble ensemble;
    ensemble.points = Matrix(n, d);
    ensemble.weights.assign(n, 1.0 / static_cast<double>(n));
    ensemble.seed = seed;
    ensemble.time = 0.0;
    parallel_for(n, [&](std::size_t i) {
        SubstreamRng rng(seed, i);
        std::span<double> row = ensemble.points.row(i);
        // row first holds the standard normal draw, then mean + L * draw.
        for (std::size_t c = 0; c < d; ++c) row[c] = rng.normal();
        for (std::size_t r = d; r-- > 0;) {
            double s = 0.0;
            for (std::size_t c = 0; c <= r; ++c) s += factor(r, c) * row[c];
            row[r] = initial.mean[r] + s;
        }
    });
    return ensemble;
}

double mc_box_probability(const SampleEnsemble& ensemble, std::span<const double> lower,
                          std::span<const double> upper, std::span<const int> coords) {
    check_box(ensemble, lower, upper, coords);
    return blocked_sum(ensemble.size(), [&](std::size_t i) {
        return point_in_box(ensemble.points.row(i), lower, upper, coords)
                   ? ensemble.weights[i]
                   : 0.0;
    });
}

double mc_box_probability_serial(const SampleEnsemble& ensemble, std::span<const double> lower,
                                 std::span<const double> upper, std::span<const int> coords) {
    check_box(ensemble, lower, upper, coords);
    double total = 0.0;
    for (std::size_t i = 0; i < ensemble.size(); ++i) {
        if (point_in_box(ensemble.points.row(i), lower, upper, coords)) {
            total += ensemble.weights[i];
        }
    }
    return total;
}

void save_ensemble_csv(const SampleEnsemble& ensemble, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    const std::size_t n = ensemble.size();
    const std::size_t d = static_cast<std::size_t>(ensemble.dimension());

    bool uniform = true;
    const double u = n > 0 ? 1.0 / static_cast<double>(n) : 0.0;
    for (double w : ensemble.weights) {
        if (w != u) {
            uniform = false;
            break;
        }
    }

    out << "# t=" << format_double(ensemble.time) << "\n";
    out << "# seed=" << ensemble.seed << "\n";
    for (std::size_t c = 0; c < d; ++c) {
        if (c) out << ",";
        out << "x" << c;
    }
    if (!uniform) out << ",weight";
    out << "\n";
    for (std::size_t i = 0; i < n; ++i) {
        std::span<const double> row = ensemble.points.row(i);
        for (std::size_t c = 0; c < d; ++c) {
            if (c) out << ",";
            out << format_double(row[c]);
        }
        if (!uniform) out << "," << format_double(ensemble.weights[i]);
        out << "\n";
    }
    if (!out) throw IoError("write failed: " + path.string());
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return fields;
}

}  // namespace

SampleEnsemble load_ensemble_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open: " + path.string());
    const std::string where = path.string();

    SampleEnsemble ensemble;
    std::string line;
    int line_no = 0;
    bool have_time = false, have_seed = false;

    // Comment rows carry the time and seed provenance.
    std::vector<std::string> columns;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::string body = line.substr(1);
            const std::size_t eq = body.find('=');
            if (eq == std::string::npos) continue;
            std::string key = body.substr(0, eq);
            std::string value = body.substr(eq + 1);
            key.erase(0, key.find_first_not_of(" \t"));
            key.erase(key.find_last_not_of(" \t") + 1);
            if (key == "t") {
                ensemble.time = parse_double(value, where + ":" + std::to_string(line_no));
                have_time = true;
            } else if (key == "seed") {
                std::uint64_t seed = 0;
                const char* b = value.data();
                const char* e = b + value.size();
                const auto res = std::from_chars(b, e, seed);
                if (res.ec != std::errc{} || res.ptr != e) {
                    throw IoError(where + ":" + std::to_string(line_no) + ": bad seed '" +
                                  value + "'");
                }
                ensemble.seed = seed;
                have_seed = true;
            }
            continue;
        }
        columns = split_csv(line);
        break;
    }
    if (!have_time || !have_seed) {
        throw IoError(where + ": missing '# t=' or '# seed=' header rows");
    }
    if (columns.empty()) throw IoError(where + ": missing column header row");

    bool has_weight = false;
    std::size_t d = columns.size();
    if (columns.back() == "weight") {
        has_weight = true;
        d -= 1;
    }
    if (d == 0) throw IoError(where + ": no coordinate columns");
    for (std::size_t c = 0; c < d; ++c) {
        if (columns[c] != "x" + std::to_string(c)) {
            throw IoError(where + ": unexpected column '" + columns[c] + "' (expected x" +
                          std::to_string(c) + ")");
        }
    }

    std::vector<double> flat;
    std::vector<double> weights;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const std::vector<std::string> fields = split_csv(line);
        if (fields.size() != columns.size()) {
            std::string missing = fields.size() < columns.size()
                                      ? columns[fields.size()]
                                      : "(extra fields)";
            throw IoError(where + ":" + std::to_string(line_no) + ": expected " +
                          std::to_string(columns.size()) + " fields, got " +
                          std::to_string(fields.size()) + "; missing column '" + missing + "'");
        }
        const std::string ctx = where + ":" + std::to_string(line_no);
        for (std::size_t c = 0; c < d; ++c) flat.push_back(parse_double(fields[c], ctx));
        if (has_weight) weights.push_back(parse_double(fields[d], ctx));
        ++n;
    }
    if (n == 0) throw IoError(where + ": no data rows");

    ensemble.points = Matrix(n, d);
    ensemble.points.data() = std::move(flat);
    if (has_weight) {
        double sum = 0.0;
        for (double w : weights) {
            if (w < 0.0) throw IoError(where + ": negative weight");
            sum += w;
        }
        if (std::abs(sum - 1.0) > 1e-9) {
            throw IoError(where + ": weights sum to " + std::to_string(sum) + ", expected 1");
        }
        ensemble.weights = std::move(weights);
    } else {
        ensemble.weights.assign(n, 1.0 / static_cast<double>(n));
    }
    return ensemble;
}

}  // namespace snp
