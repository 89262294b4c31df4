#include "common.hpp"

#include <fstream>
#include <sstream>

#include "snp/version.hpp"

namespace snpcli {

namespace {

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = text.find(sep, start);
        if (pos == std::string::npos) {
            out.push_back(text.substr(start));
            return out;
        }
        out.push_back(text.substr(start, pos - start));
        start = pos + 1;
    }
}

}  // namespace

std::vector<double> parse_double_list(const std::string& text, const std::string& what) {
    std::vector<double> out;
    for (const std::string& piece : split(text, ',')) {
        try {
            out.push_back(snp::parse_double(piece, what));
        } catch (const snp::IoError& e) {
            throw snp::UsageError(e.what());
        }
    }
    return out;
}

std::vector<int> parse_int_list(const std::string& text, const std::string& what) {
    std::vector<int> out;
    for (const std::string& piece : split(text, ',')) {
        try {
            std::size_t used = 0;
            const int v = std::stoi(piece, &used);
            if (used != piece.size()) throw std::invalid_argument(piece);
            out.push_back(v);
        } catch (const std::exception&) {
            throw snp::UsageError(what + ": cannot parse '" + piece + "' as an integer");
        }
    }
    return out;
}

BoxSpec parse_box_spec(const std::string& text) {
    BoxSpec box;
    for (const std::string& piece : split(text, ',')) {
        const std::size_t colon = piece.find(':');
        if (colon == std::string::npos) {
            throw snp::UsageError("box axis '" + piece + "' is not of the form lo:hi");
        }
        try {
            box.lower.push_back(snp::parse_double(piece.substr(0, colon), "box"));
            box.upper.push_back(snp::parse_double(piece.substr(colon + 1), "box"));
        } catch (const snp::IoError& e) {
            throw snp::UsageError(e.what());
        }
    }
    return box;
}

snp::Matrix load_covariance(const std::string& diag_arg, const std::string& file_arg,
                            std::size_t expected_dim) {
    if (!diag_arg.empty() && !file_arg.empty()) {
        throw snp::UsageError("give either --cov-diag or --cov-file, not both");
    }
    if (!diag_arg.empty()) {
        const std::vector<double> diag = parse_double_list(diag_arg, "--cov-diag");
        if (diag.size() != expected_dim) {
            throw snp::UsageError("--cov-diag has " + std::to_string(diag.size()) +
                                  " entries for dimension " + std::to_string(expected_dim));
        }
        snp::Matrix cov(expected_dim, expected_dim);
        for (std::size_t i = 0; i < expected_dim; ++i) cov(i, i) = diag[i];
        return cov;
    }
    if (file_arg.empty()) {
        throw snp::UsageError("a covariance is required: --cov-diag or --cov-file");
    }
    std::ifstream in(file_arg);
    if (!in) throw snp::IoError("cannot open covariance file: " + file_arg);
    std::vector<double> entries;
    double v = 0.0;
    while (in >> v) entries.push_back(v);
    if (entries.size() != expected_dim * expected_dim) {
        throw snp::IoError("covariance file " + file_arg + " holds " +
                           std::to_string(entries.size()) + " numbers, expected " +
                           std::to_string(expected_dim * expected_dim));
    }
    snp::Matrix cov(expected_dim, expected_dim);
    cov.data() = std::move(entries);
    return cov;
}

void write_json_file(const Json& doc, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw snp::IoError("cannot open for writing: " + path.string());
    out << doc.dump(2) << "\n";
    if (!out) throw snp::IoError("write failed: " + path.string());
}

void write_manifest(const std::filesystem::path& path, const std::string& subcommand,
                    Json parameters, const std::vector<std::string>& inputs,
                    const std::vector<std::string>& outputs) {
    Json doc;
    doc["tool"] = "snpcli";
    doc["version"] = snp::kVersion;
    doc["subcommand"] = subcommand;
    doc["parameters"] = std::move(parameters);
    doc["inputs"] = inputs;
    doc["outputs"] = outputs;
    write_json_file(doc, path);
}

void write_grid_csv(const std::filesystem::path& path, const snp::GridSpec& grid,
                    const std::vector<std::string>& axis_names, const std::string& value_name,
                    const std::vector<double>& values) {
    std::ofstream out(path);
    if (!out) throw snp::IoError("cannot open for writing: " + path.string());
    for (const std::string& name : axis_names) out << name << ",";
    out << value_name << "\n";
    std::vector<double> point(grid.axes.size());
    for (std::size_t flat = 0; flat < values.size(); ++flat) {
        grid.point(flat, point);
        for (double c : point) out << snp::format_double(c) << ",";
        out << snp::format_double(values[flat]) << "\n";
    }
    if (!out) throw snp::IoError("write failed: " + path.string());
}

}  // namespace snpcli
