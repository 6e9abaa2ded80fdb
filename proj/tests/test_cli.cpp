#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <cstdlib>
#include <sys/wait.h>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "nkl/cli.hpp"

using namespace nkl;
using nkl::cli::JobSpec;

namespace {

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::filesystem::path temp_file(const std::string& name) {
    return std::filesystem::temp_directory_path() / ("nkl_test_" + name);
}

} // namespace

TEST_CASE("grid spec parsing") {
    const auto g2 = nkl::cli::parse_grid("-1:1:5:-2:2:9");
    REQUIRE(g2.two_dim);
    REQUIRE(g2.nx == 5);
    REQUIRE(g2.ny == 9);
    REQUIRE(g2.ymin == -2.0);
    const auto g1 = nkl::cli::parse_grid("0:4:3");
    REQUIRE(!g1.two_dim);
    REQUIRE(g1.xs() == std::vector<double>{0.0, 2.0, 4.0});
    REQUIRE_THROWS_AS(nkl::cli::parse_grid("1:2"), nkl::cli::ValidationError);
}

TEST_CASE("density job emits byte-identical JSON on repeat runs") {
    JobSpec job;
    job.command = nkl::cli::Command::Density;
    job.n = 8;
    job.t = 0.3;
    job.grid = nkl::cli::parse_grid("-1.5:1.5:7:-1:1:5");
    job.grid_given = true;
    const auto path_a = temp_file("density_a.json");
    const auto path_b = temp_file("density_b.json");
    job.out_path = path_a.string();
    REQUIRE(nkl::cli::run(job) == 0);
    job.out_path = path_b.string();
    REQUIRE(nkl::cli::run(job) == 0);
    const std::string a = slurp(path_a);
    REQUIRE(!a.empty());
    REQUIRE(a == slurp(path_b));
    REQUIRE(a.find("\"version\"") != std::string::npos);
    REQUIRE(a.find("\"rng\"") != std::string::npos);
}

TEST_CASE("density sanity at the origin for n = 1, t = 0") {
    JobSpec job;
    job.command = nkl::cli::Command::Density;
    job.n = 1;
    job.t = 0.0;
    job.grid = nkl::cli::parse_grid("0:0:1:0:0:1");
    job.grid_given = true;
    const auto path = temp_file("density_origin.json");
    job.out_path = path.string();
    REQUIRE(nkl::cli::run(job) == 0);
    const auto doc = nlohmann::json::parse(slurp(path));
    const double value = doc["rows"][0][2].get<double>();
    REQUIRE(value == Catch::Approx(1.0 / M_PI).epsilon(1e-12));
}

TEST_CASE("CSV round-trips at full precision") {
    JobSpec job;
    job.command = nkl::cli::Command::Density;
    job.n = 4;
    job.t = 0.2;
    job.format = nkl::cli::Format::CsvFile;
    job.grid = nkl::cli::parse_grid("-1:1:5:-1:1:3");
    job.grid_given = true;
    const auto path = temp_file("density.csv");
    job.out_path = path.string();
    REQUIRE(nkl::cli::run(job) == 0);

    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    REQUIRE(header == "x,y,density_per_area");
    const CanonicalModel model(4, 0.2);
    std::string line;
    int rows = 0;
    while (std::getline(in, line)) {
        std::stringstream ss(line);
        std::string xs, ys, vs;
        std::getline(ss, xs, ',');
        std::getline(ss, ys, ',');
        std::getline(ss, vs, ',');
        const double x = std::stod(xs);
        const double y = std::stod(ys);
        const double v = std::stod(vs);
        REQUIRE(v == density(model, {x, y})); // 17 significant digits survive
        ++rows;
    }
    REQUIRE(rows == 15);
}

TEST_CASE("figure erfc-profile columns") {
    JobSpec job;
    job.command = nkl::cli::Command::Figure;
    job.figure_name = "erfc-profile";
    job.n = 100;
    job.t = 0.3;
    job.format = nkl::cli::Format::CsvFile;
    const auto path = temp_file("erfc.csv");
    job.out_path = path.string();
    REQUIRE(nkl::cli::run(job) == 0);
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    REQUIRE(header == "a,density_scaled_2pi_rho,erfc_sqrt2_a");
    std::string line;
    int rows = 0;
    while (std::getline(in, line)) {
        std::stringstream ss(line);
        std::string a, dens, ref;
        std::getline(ss, a, ',');
        std::getline(ss, dens, ',');
        std::getline(ss, ref, ',');
        REQUIRE(std::stod(ref) ==
                Catch::Approx(std::erfc(std::sqrt(2.0) * std::stod(a))).epsilon(1e-12));
        REQUIRE(std::stod(dens) == Catch::Approx(std::stod(ref)).margin(0.15));
        ++rows;
    }
    REQUIRE(rows == 21);
}

TEST_CASE("remaining figure targets produce data") {
    for (const std::string name : {"f-real-line", "g-pm", "gw-phase"}) {
        JobSpec job;
        job.command = nkl::cli::Command::Figure;
        job.figure_name = name;
        job.t = std::sqrt(5.0) - 2.0;
        job.format = nkl::cli::Format::CsvFile;
        const auto path = temp_file("fig_" + name + ".csv");
        job.out_path = path.string();
        REQUIRE(nkl::cli::run(job) == 0);
        std::ifstream in(path);
        std::string header;
        std::getline(in, header);
        REQUIRE(!header.empty());
        int rows = 0;
        std::string line;
        while (std::getline(in, line)) ++rows;
        REQUIRE(rows >= 100);
    }
}

TEST_CASE("verify succeeds on a healthy model and honors overrides") {
    JobSpec job;
    job.command = nkl::cli::Command::Verify;
    job.n = 12;
    job.t = 0.3;
    job.seed = 7;
    REQUIRE(nkl::cli::run(job) == 0);
    // an absurd tolerance forces exit code 3 with a machine-readable report
    job.tolerances["identity"] = 1e-30;
    const auto path = temp_file("verify_report.json");
    job.out_path = path.string();
    REQUIRE(nkl::cli::run(job) == 3);
    const auto doc = nlohmann::json::parse(slurp(path));
    bool found_failure = false;
    for (const auto& suite : doc["metadata"]["suites"])
        if (!suite["pass"].get<bool>()) found_failure = true;
    REQUIRE(found_failure);
}

TEST_CASE("validation errors exit with status 2") {
    JobSpec job;
    job.command = nkl::cli::Command::Density;
    // no model parameters at all
    REQUIRE(nkl::cli::run(job) == 2);
    job.n = 4;
    job.t = 0.3;
    job.t0 = 1.0; // both parameter sets at once
    REQUIRE(nkl::cli::run(job) == 2);
}

TEST_CASE("sample job is reproducible and carries RNG metadata") {
    JobSpec job;
    job.command = nkl::cli::Command::Sample;
    job.n = 6;
    job.t = 0.2;
    job.seed = 99;
    job.sweeps = 500;
    job.burnin = 100;
    job.stride = 100;
    const auto path_a = temp_file("sample_a.json");
    const auto path_b = temp_file("sample_b.json");
    job.out_path = path_a.string();
    REQUIRE(nkl::cli::run(job) == 0);
    job.out_path = path_b.string();
    REQUIRE(nkl::cli::run(job) == 0);
    REQUIRE(slurp(path_a) == slurp(path_b));
    const auto doc = nlohmann::json::parse(slurp(path_a));
    REQUIRE(doc["metadata"]["rng"]["algorithm"].get<std::string>() ==
            "mt19937_64 + Box-Muller");
    REQUIRE(doc["metadata"]["rng"]["seed"].get<std::uint64_t>() == 99);
}

TEST_CASE("general potential density through the CLI path") {
    JobSpec job;
    job.command = nkl::cli::Command::Density;
    job.n = 6;
    job.t0 = 2.0;
    job.t1 = {0.3, 0.1};
    job.t2 = {0.0, 0.15};
    job.grid = nkl::cli::parse_grid("0:0:1:0:0:1");
    job.grid_given = true;
    const auto path = temp_file("density_general.json");
    job.out_path = path.string();
    REQUIRE(nkl::cli::run(job) == 0);
    const auto doc = nlohmann::json::parse(slurp(path));
    const double v = doc["rows"][0][2].get<double>();
    REQUIRE(v == Catch::Approx(density(GeneralPotential(2.0, {0.3, 0.1}, {0.0, 0.15}), 6,
                                       {0.0, 0.0}))
                     .epsilon(1e-14));
}

TEST_CASE("installed binary runs end to end") {
    const char* exe = std::getenv("NKL_CLI_PATH");
    if (exe == nullptr) {
        SUCCEED("NKL_CLI_PATH not set; binary smoke test skipped");
        return;
    }
    const auto out = temp_file("cli_binary.json");
    std::stringstream cmd;
    cmd << '"' << exe << '"' << " density --n 4 --t 0.3 --grid -1:1:3:-1:1:3 --out " << out;
    REQUIRE(std::system(cmd.str().c_str()) == 0);
    REQUIRE(!slurp(out).empty());
    // usage error -> exit 2
    std::stringstream bad;
    bad << '"' << exe << '"' << " density --t 0.3 2>/dev/null";
    const int status = std::system(bad.str().c_str());
    REQUIRE(WEXITSTATUS(status) == 2);
}
