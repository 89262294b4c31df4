#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "snp/errors.hpp"
#include "snp/grid.hpp"
#include "snp/linalg.hpp"
#include "snp/textio.hpp"

namespace snpcli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitNumeric = 3;
inline constexpr int kExitIo = 4;

using Json = nlohmann::ordered_json;

std::vector<double> parse_double_list(const std::string& text, const std::string& what);
std::vector<int> parse_int_list(const std::string& text, const std::string& what);

/// "lo:hi,lo:hi,..." -> per-axis bounds.
struct BoxSpec {
    std::vector<double> lower;
    std::vector<double> upper;
};
BoxSpec parse_box_spec(const std::string& text);

/// Diagonal entries or a whitespace-separated square matrix file.
snp::Matrix load_covariance(const std::string& diag_arg, const std::string& file_arg,
                            std::size_t expected_dim);

/// Every subcommand writes one of these alongside its primary output.
void write_manifest(const std::filesystem::path& path, const std::string& subcommand,
                    Json parameters, const std::vector<std::string>& inputs,
                    const std::vector<std::string>& outputs);

void write_json_file(const Json& doc, const std::filesystem::path& path);

/// Grid CSV: one column per axis plus the value column, row-major.
void write_grid_csv(const std::filesystem::path& path, const snp::GridSpec& grid,
                    const std::vector<std::string>& axis_names, const std::string& value_name,
                    const std::vector<double>& values);

struct ReproduceOptions {
    std::string experiment;
    std::uint64_t seed = 20240601;
    std::filesystem::path out_dir;
    int trials = 10;
    double step = 0.01;
    bool json_output = false;
};

int run_reproduce(const ReproduceOptions& options);

}  // namespace snpcli
