#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "snp/ensemble.hpp"

namespace fs = std::filesystem;

namespace {

std::string cli_path() {
    const char* env = std::getenv("SNP_CLI");
    REQUIRE_MESSAGE(env != nullptr, "SNP_CLI must point at the snpcli binary");
    return env;
}

int run(const std::string& args) {
    const std::string command = cli_path() + " " + args + " >/dev/null 2>&1";
    const int status = std::system(command.c_str());
    return WEXITSTATUS(status);
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / "snp_cli_test";
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string operator/(const std::string& name) const { return (path / name).string(); }
};

}  // namespace

TEST_CASE("sample writes deterministic ensembles and manifests") {
    TempDir dir;
    const std::string a = dir / "a.csv";
    const std::string b = dir / "b.csv";

    // near-zero covariance: the single row equals the mean
    CHECK(run("sample --mean 2,3 --cov-diag 1e-20,1e-20 --n 1 --seed 5 --out " + a) == 0);
    const snp::SampleEnsemble one = snp::load_ensemble_csv(a);
    CHECK(one.size() == 1);
    CHECK(one.points(0, 0) == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(one.points(0, 1) == doctest::Approx(3.0).epsilon(1e-9));

    CHECK(run("sample --mean 1,1,1 --cov-diag 4,4,4 --n 1000 --seed 9 --out " + a) == 0);
    CHECK(run("sample --mean 1,1,1 --cov-diag 4,4,4 --n 1000 --seed 9 --out " + b) == 0);
    CHECK(slurp(a) == slurp(b));  // same args, byte-identical output
    const snp::SampleEnsemble ens = snp::load_ensemble_csv(a);
    CHECK(ens.size() == 1000);
    CHECK(ens.dimension() == 3);
    CHECK(fs::exists(a + ".manifest.json"));

    const auto manifest = nlohmann::json::parse(slurp(a + ".manifest.json"));
    CHECK(manifest.at("subcommand") == "sample");
    CHECK(manifest.at("parameters").at("seed") == 9);
}

TEST_CASE("propagate with tfinal zero preserves the point set") {
    TempDir dir;
    const std::string init = dir / "init.csv";
    const std::string out = dir / "out.csv";
    REQUIRE(run("sample --mean 1,1,1 --cov-diag 1,1,1 --n 64 --seed 3 --out " + init) == 0);
    CHECK(run("propagate --in " + init + " --tfinal 0 --step 0.01 --out " + out) == 0);
    const snp::SampleEnsemble a = snp::load_ensemble_csv(init);
    const snp::SampleEnsemble b = snp::load_ensemble_csv(out);
    CHECK(a.points == b.points);
}

TEST_CASE("fit, eval, and boxprob round trip through files") {
    TempDir dir;
    const std::string init = dir / "init.csv";
    const std::string t3 = dir / "t3.csv";
    const std::string density = dir / "density.json";
    const std::string report = dir / "report.json";
    REQUIRE(run("sample --mean 1,1,1 --cov-diag 25,25,25 --n 200 --seed 11 --out " + init) == 0);
    REQUIRE(run("propagate --in " + init + " --tfinal 3 --step 0.01 --out " + t3) == 0);
    REQUIRE(run("fit --in " + t3 + " -K 4 --out-density " + density + " --out-report " +
                report) == 0);
    CHECK(fs::exists(density));
    CHECK(fs::exists(report));

    const std::string grid = dir / "grid.csv";
    CHECK(run("eval --density " + density + " --mode pdf --grid -3:3:5,-3:3:5,-3:3:5 --out " +
              grid) == 0);
    // header + 125 rows
    std::ifstream in(grid);
    std::string line;
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == 126);

    const std::string bp = dir / "bp.json";
    CHECK(run("boxprob --density " + density + " --box -50:50,-50:50,-50:50 --out " + bp) == 0);
    const auto result = nlohmann::json::parse(slurp(bp));
    CHECK(result.at("method") == "snp_cdf");
    CHECK(std::abs(result.at("probability").get<double>() - 1.0) < 1e-9);

    const std::string bp2 = dir / "bp2.json";
    CHECK(run("boxprob --ensemble " + t3 + " --box -100:100,-100:100,-100:100 --out " + bp2) ==
          0);
    const auto counting = nlohmann::json::parse(slurp(bp2));
    CHECK(counting.at("method") == "mc_counting");
    CHECK(std::abs(counting.at("probability").get<double>() - 1.0) < 1e-9);
}

TEST_CASE("exit codes distinguish usage, numeric, and io failures") {
    TempDir dir;
    CHECK(run("no-such-command") == 2);
    CHECK(run("sample --mean 1,1 --cov-diag 1,1 --n 0 --out " + (dir / "x.csv")) == 2);
    CHECK(run("sample --mean 1,1 --cov-diag 1,-1 --n 10 --out " + (dir / "x.csv")) == 3);
    CHECK(run("fit --in " + (dir / "missing.csv") + " -K 4 --out-density " + (dir / "d.json") +
              " --out-report " + (dir / "r.json")) == 4);

    // a parse error names the line and column
    const std::string broken = dir / "broken.csv";
    {
        std::ofstream out(broken);
        out << "# t=0\n# seed=1\nx0,x1,x2\n1.0,2.0\n";
    }
    CHECK(run("propagate --in " + broken + " --tfinal 1 --out " + (dir / "o.csv")) == 4);
}
