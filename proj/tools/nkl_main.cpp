#include <CLI11.hpp>

#include "nkl/cli.hpp"

namespace {

using nkl::cli::JobSpec;

void add_model_flags(CLI::App* cmd, double& t, double& t0, double& t1re,
                     double& t1im, double& t2re, double& t2im, long& n) {
    cmd->add_option("--n", n, "matrix dimension");
    cmd->add_option("--t", t, "canonical quadratic coupling in [0,1)");
    cmd->add_option("--t0", t0, "general potential scale t0 > 0");
    cmd->add_option("--t1-re", t1re, "Re t1");
    cmd->add_option("--t1-im", t1im, "Im t1");
    cmd->add_option("--t2-re", t2re, "Re t2");
    cmd->add_option("--t2-im", t2im, "Im t2");
}

void add_io_flags(CLI::App* cmd, JobSpec& job, std::string& grid, std::string& format) {
    cmd->add_option("--grid", grid, "grid spec xmin:xmax:nx[:ymin:ymax:ny]");
    cmd->add_option("--out", job.out_path, "output path (stdout when omitted)");
    cmd->add_option("--format", format, "json|csv")->check(CLI::IsMember({"json", "csv"}));
    cmd->add_option("--seed", job.seed, "RNG seed");
}

std::vector<nkl::Complex> parse_points(const std::string& text) {
    std::vector<nkl::Complex> pts;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ';')) {
        const auto comma = tok.find(',');
        if (comma == std::string::npos) throw nkl::cli::ValidationError("points must be re,im;re,im;...");
        pts.emplace_back(std::stod(tok.substr(0, comma)), std::stod(tok.substr(comma + 1)));
    }
    return pts;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Gaussian normal random matrix model: kernels, densities, correlations"};
    app.require_subcommand(1);

    JobSpec job;
    long n = 0;
    double t = std::numeric_limits<double>::quiet_NaN();
    double t0 = std::numeric_limits<double>::quiet_NaN();
    double t1re = 0, t1im = 0, t2re = 0, t2im = 0;
    std::string grid, format = "json", points, wspec;
    std::vector<std::pair<std::string, double>> tol_overrides;

    auto finalize = [&](nkl::cli::Command cmd) {
        job.command = cmd;
        if (n > 0) job.n = n;
        if (!std::isnan(t)) job.t = t;
        if (!std::isnan(t0)) {
            job.t0 = t0;
            job.t1 = {t1re, t1im};
            job.t2 = {t2re, t2im};
        }
        if (!grid.empty()) {
            job.grid = nkl::cli::parse_grid(grid);
            job.grid_given = true;
        }
        if (format == "csv") job.format = nkl::cli::Format::CsvFile;
        if (!points.empty()) job.points = parse_points(points);
        if (!wspec.empty()) {
            const auto comma = wspec.find(',');
            if (comma == std::string::npos)
                throw nkl::cli::ValidationError("--w must be re,im");
            job.kernel_w = {std::stod(wspec.substr(0, comma)), std::stod(wspec.substr(comma + 1))};
        }
        for (const auto& [key, value] : tol_overrides) job.tolerances[key] = value;
        return nkl::cli::run(job);
    };

    auto* density = app.add_subcommand("density", "finite-n eigenvalue density on a grid");
    add_model_flags(density, t, t0, t1re, t1im, t2re, t2im, n);
    add_io_flags(density, job, grid, format);

    auto* kernel = app.add_subcommand("kernel", "normalized kernel against a fixed first argument");
    add_model_flags(kernel, t, t0, t1re, t1im, t2re, t2im, n);
    add_io_flags(kernel, job, grid, format);
    kernel->add_option("--w", wspec, "first kernel argument, re,im");

    auto* corr = app.add_subcommand("correlation", "kernel Gram matrix and determinant");
    add_model_flags(corr, t, t0, t1re, t1im, t2re, t2im, n);
    add_io_flags(corr, job, grid, format);
    corr->add_option("--points", points, "configuration re,im;re,im;...");

    auto* limits = app.add_subcommand("limits", "limiting density/kernel profiles");
    add_model_flags(limits, t, t0, t1re, t1im, t2re, t2im, n);
    add_io_flags(limits, job, grid, format);
    limits->add_option("--regime", job.regime, "inside|outside|edge");
    limits->add_option("--points", points, "offsets for the limit correlation");

    auto* verify = app.add_subcommand("verify", "run the identity residual suites");
    add_model_flags(verify, t, t0, t1re, t1im, t2re, t2im, n);
    add_io_flags(verify, job, grid, format);
    for (const char* name : {"identity", "recursion", "closed-form", "derivative", "boundary"}) {
        verify->add_option_function<double>(
            std::string("--tol-") + name,
            [&tol_overrides, name](double value) { tol_overrides.emplace_back(name, value); },
            std::string("tolerance override for the ") + name + " suite");
    }

    auto* sample = app.add_subcommand("sample", "Metropolis eigenvalue gas");
    add_model_flags(sample, t, t0, t1re, t1im, t2re, t2im, n);
    add_io_flags(sample, job, grid, format);
    sample->add_option("--sweeps", job.sweeps, "total sweeps");
    sample->add_option("--burnin", job.burnin, "burn-in sweeps");
    sample->add_option("--stride", job.stride, "sweeps between snapshots");
    sample->add_option("--step", job.step, "proposal stddev (default 1/sqrt(n))");

    auto* figure = app.add_subcommand("figure", "plot data for the standard figures");
    figure->add_option("name", job.figure_name,
                       "f-real-line|g-pm|erfc-profile|gw-phase")
        ->required();
    add_model_flags(figure, t, t0, t1re, t1im, t2re, t2im, n);
    add_io_flags(figure, job, grid, format);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (density->parsed()) return finalize(nkl::cli::Command::Density);
        if (kernel->parsed()) return finalize(nkl::cli::Command::Kernel);
        if (corr->parsed()) return finalize(nkl::cli::Command::Correlation);
        if (limits->parsed()) return finalize(nkl::cli::Command::Limits);
        if (verify->parsed()) return finalize(nkl::cli::Command::Verify);
        if (sample->parsed()) return finalize(nkl::cli::Command::Sample);
        if (figure->parsed()) return finalize(nkl::cli::Command::Figure);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
