#pragma once

#include <atomic>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "nkl/asymptotics.hpp"
#include "nkl/geometry.hpp"
#include "nkl/kernel.hpp"
#include "nkl/orthopoly.hpp"
#include "nkl/sampler.hpp"

namespace nkl::cli {

inline constexpr const char* kVersion = "0.1.0";

using Json = nlohmann::ordered_json;

enum class Command { Density, Kernel, Correlation, Limits, Verify, Sample, Figure };
enum class Format { JsonFile, CsvFile };

struct GridSpec {
    double xmin = -2.0, xmax = 2.0;
    int nx = 41;
    double ymin = -2.0, ymax = 2.0;
    int ny = 41;
    bool two_dim = true;

    std::vector<double> xs() const { return axis(xmin, xmax, nx); }
    std::vector<double> ys() const { return axis(ymin, ymax, ny); }

    static std::vector<double> axis(double lo, double hi, int count) {
        std::vector<double> v(static_cast<std::size_t>(count));
        for (int i = 0; i < count; ++i)
            v[static_cast<std::size_t>(i)] =
                count == 1 ? lo : lo + (hi - lo) * i / double(count - 1);
        return v;
    }
};

struct JobSpec {
    Command command = Command::Density;
    // Exactly one of the two model parameter sets.
    std::optional<long> n;
    std::optional<double> t;
    std::optional<double> t0;
    Complex t1{0.0, 0.0};
    Complex t2{0.0, 0.0};
    GridSpec grid;
    bool grid_given = false;
    std::string out_path;
    Format format = Format::JsonFile;
    std::uint64_t seed = 1;
    std::map<std::string, double> tolerances;
    // Command extras.
    Complex kernel_w{0.0, 0.0};
    std::vector<Complex> points;
    std::string figure_name;
    std::string regime = "inside";
    long sweeps = 200000;
    long burnin = 10000;
    long stride = 10;
    double step = 0.0;
};

struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline GridSpec parse_grid(const std::string& text) {
    std::vector<double> parts;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ':')) parts.push_back(std::stod(tok));
    GridSpec g;
    if (parts.size() == 3) {
        g.xmin = parts[0];
        g.xmax = parts[1];
        g.nx = static_cast<int>(parts[2]);
        g.two_dim = false;
    } else if (parts.size() == 6) {
        g.xmin = parts[0];
        g.xmax = parts[1];
        g.nx = static_cast<int>(parts[2]);
        g.ymin = parts[3];
        g.ymax = parts[4];
        g.ny = static_cast<int>(parts[5]);
        g.two_dim = true;
    } else {
        throw ValidationError("grid spec must be xmin:xmax:nx or xmin:xmax:nx:ymin:ymax:ny");
    }
    if (g.nx < 1 || (g.two_dim && g.ny < 1)) throw ValidationError("grid resolution must be >= 1");
    return g;
}

inline int thread_budget() {
    if (const char* env = std::getenv("NKL_THREADS")) {
        const int cap = std::atoi(env);
        if (cap >= 1) return cap;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

namespace detail {

inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline Json complex_json(Complex z) { return Json{{"re", z.real()}, {"im", z.imag()}}; }

/// Evaluate f over a row-major grid, fanning rows out across worker
/// threads; assembly stays ordered.
template <typename F>
std::vector<double> map_grid(const GridSpec& grid, int threads, F&& f) {
    const std::vector<double> xs = grid.xs();
    const std::vector<double> ys = grid.two_dim ? grid.ys() : std::vector<double>{0.0};
    std::vector<double> values(xs.size() * ys.size(), 0.0);
    std::atomic<std::size_t> next_row{0};
    auto worker = [&] {
        for (;;) {
            const std::size_t row = next_row.fetch_add(1);
            if (row >= ys.size()) return;
            for (std::size_t i = 0; i < xs.size(); ++i)
                values[row * xs.size() + i] = f(Complex{xs[i], ys[row]});
        }
    };
    const int nthreads = std::min<int>(threads, static_cast<int>(ys.size()));
    if (nthreads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(nthreads));
        for (int i = 0; i < nthreads; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    return values;
}

struct Table {
    std::vector<std::string> columns; // names with units
    std::vector<std::vector<double>> rows;
};

inline void write_output(const JobSpec& job, const Json& metadata, const Table& table) {
    std::ostream* os = &std::cout;
    std::ofstream file;
    if (!job.out_path.empty()) {
        file.open(job.out_path, std::ios::binary);
        if (!file) throw ValidationError("cannot open output path: " + job.out_path);
        os = &file;
    }
    if (job.format == Format::CsvFile) {
        for (std::size_t i = 0; i < table.columns.size(); ++i)
            *os << (i ? "," : "") << table.columns[i];
        *os << "\n";
        for (const auto& row : table.rows) {
            for (std::size_t i = 0; i < row.size(); ++i)
                *os << (i ? "," : "") << fmt17(row[i]);
            *os << "\n";
        }
    } else {
        Json doc;
        doc["metadata"] = metadata;
        doc["columns"] = table.columns;
        Json rows = Json::array();
        for (const auto& row : table.rows) rows.push_back(row);
        doc["rows"] = rows;
        *os << doc.dump(2) << "\n";
    }
}

inline Json base_metadata(const JobSpec& job, const std::string& command) {
    Json params;
    if (job.n) params["n"] = *job.n;
    if (job.t) params["t"] = *job.t;
    if (job.t0) {
        params["t0"] = *job.t0;
        params["t1"] = complex_json(job.t1);
        params["t2"] = complex_json(job.t2);
    }
    Json meta;
    meta["version"] = kVersion;
    meta["command"] = command;
    meta["parameters"] = params;
    meta["rng"] = Json{{"algorithm", "mt19937_64 + Box-Muller"}, {"seed", job.seed}};
    return meta;
}

inline void require_canonical(const JobSpec& job) {
    if (!job.n) throw ValidationError("--n is required");
    if (job.t && job.t0) throw ValidationError("supply either --t or --t0/--t1/--t2, not both");
    if (!job.t && !job.t0) throw ValidationError("supply --t or the general-potential parameters");
}

} // namespace detail

inline double job_density(const JobSpec& job, Complex z) {
    if (job.t0) return density(GeneralPotential(*job.t0, job.t1, job.t2), *job.n, z);
    return density(CanonicalModel(*job.n, *job.t), z);
}

inline Complex job_kernel(const JobSpec& job, Complex w, Complex z) {
    if (job.t0) return normalized_kernel(GeneralPotential(*job.t0, job.t1, job.t2), *job.n, w, z);
    return normalized_kernel(CanonicalModel(*job.n, *job.t), w, z);
}

inline int run_density(const JobSpec& job) {
    detail::require_canonical(job);
    const int threads = thread_budget();
    const std::vector<double> values =
        detail::map_grid(job.grid, threads, [&](Complex z) { return job_density(job, z); });
    detail::Table table;
    table.columns = {"x", "y", "density_per_area"};
    const auto xs = job.grid.xs();
    const auto ys = job.grid.two_dim ? job.grid.ys() : std::vector<double>{0.0};
    for (std::size_t r = 0; r < ys.size(); ++r)
        for (std::size_t i = 0; i < xs.size(); ++i)
            table.rows.push_back({xs[i], ys[r], values[r * xs.size() + i]});
    Json meta = detail::base_metadata(job, "density");
    meta["grid"] = Json{{"x", xs}, {"y", ys}, {"ordering", "row_major"}};
    detail::write_output(job, meta, table);
    return 0;
}

inline int run_kernel(const JobSpec& job) {
    detail::require_canonical(job);
    const int threads = thread_budget();
    std::vector<double> re, im;
    const auto xs = job.grid.xs();
    const auto ys = job.grid.two_dim ? job.grid.ys() : std::vector<double>{0.0};
    re = detail::map_grid(job.grid, threads,
                          [&](Complex z) { return job_kernel(job, job.kernel_w, z).real(); });
    im = detail::map_grid(job.grid, threads,
                          [&](Complex z) { return job_kernel(job, job.kernel_w, z).imag(); });
    detail::Table table;
    table.columns = {"x", "y", "kernel_re", "kernel_im"};
    for (std::size_t r = 0; r < ys.size(); ++r)
        for (std::size_t i = 0; i < xs.size(); ++i)
            table.rows.push_back(
                {xs[i], ys[r], re[r * xs.size() + i], im[r * xs.size() + i]});
    Json meta = detail::base_metadata(job, "kernel");
    meta["w"] = detail::complex_json(job.kernel_w);
    meta["grid"] = Json{{"x", xs}, {"y", ys}, {"ordering", "row_major"}};
    detail::write_output(job, meta, table);
    return 0;
}

inline int run_correlation(const JobSpec& job) {
    detail::require_canonical(job);
    if (!job.t) throw ValidationError("correlation requires the canonical --t model");
    if (job.points.empty()) throw ValidationError("correlation requires --points");
    const CanonicalModel model(*job.n, *job.t);
    const CorrelationMatrix corr = correlation(model, job.points);
    detail::Table table;
    table.columns = {"k", "l", "kernel_re", "kernel_im"};
    const auto m = static_cast<long>(job.points.size());
    for (long k = 0; k < m; ++k)
        for (long l = 0; l < m; ++l)
            table.rows.push_back({double(k), double(l), corr.entries(k, l).real(),
                                  corr.entries(k, l).imag()});
    Json meta = detail::base_metadata(job, "correlation");
    Json pts = Json::array();
    for (Complex p : job.points) pts.push_back(detail::complex_json(p));
    meta["points"] = pts;
    meta["det_rescaled"] = detail::complex_json(corr.det_rescaled);
    meta["det_raw"] = detail::complex_json(corr.det_raw);
    meta["log_abs_det"] = corr.log_abs_det;
    detail::write_output(job, meta, table);
    return 0;
}

inline int run_limits(const JobSpec& job) {
    if (!job.t) throw ValidationError("limits requires --t");
    Regime regime = Regime::Inside;
    if (job.regime == "outside") regime = Regime::Outside;
    else if (job.regime == "edge") regime = Regime::Edge;
    else if (job.regime != "inside") throw ValidationError("regime must be inside|outside|edge");
    detail::Table table;
    table.columns = {"offset_normal", "limit_density_per_area", "limit_kernel_modulus"};
    for (double a : job.grid.xs()) {
        LimitKernelParams p;
        p.regime = regime;
        p.a = {a, 0.0};
        p.b = {0.0, 0.0};
        table.rows.push_back(
            {a, limit_density(regime, {a, 0.0}), std::abs(limit_kernel(p))});
    }
    Json meta = detail::base_metadata(job, "limits");
    meta["regime"] = job.regime;
    if (!job.points.empty())
        meta["limit_correlation"] = limit_correlation(*job.t, regime, job.points);
    detail::write_output(job, meta, table);
    return 0;
}

inline int run_sample(const JobSpec& job) {
    detail::require_canonical(job);
    if (!job.t) throw ValidationError("sample requires the canonical --t model");
    GasConfig cfg;
    cfg.n = static_cast<int>(*job.n);
    cfg.t = *job.t;
    cfg.step = job.step;
    cfg.sweeps = job.sweeps;
    cfg.burnin = job.burnin;
    cfg.snapshot_stride = job.stride;
    cfg.seed = job.seed;
    const CanonicalModel model(*job.n, *job.t);
    const ChainResult chain = run_chain(cfg, model);
    detail::Table table;
    table.columns = {"snapshot", "particle", "x", "y"};
    for (std::size_t s = 0; s < chain.snapshots.size(); ++s)
        for (std::size_t i = 0; i < chain.snapshots[s].positions.size(); ++i)
            table.rows.push_back({double(s), double(i), chain.snapshots[s].positions[i].real(),
                                  chain.snapshots[s].positions[i].imag()});
    Json meta = detail::base_metadata(job, "sample");
    meta["rng"]["algorithm"] = chain.rng_algorithm;
    meta["sweeps"] = job.sweeps;
    meta["burnin"] = job.burnin;
    meta["snapshot_stride"] = job.stride;
    meta["acceptance_rate"] = chain.acceptance_rate;
    meta["tuning_warning"] = chain.tuning_warning;
    if (chain.tuning_warning)
        std::cerr << "warning: acceptance rate " << chain.acceptance_rate
                  << " outside [0.05, 0.95]; adjust --step\n";
    detail::write_output(job, meta, table);
    return 0;
}

inline int run_figure(const JobSpec& job) {
    if (!job.t) throw ValidationError("figure requires --t");
    const double t = *job.t;
    detail::Table table;
    Json meta = detail::base_metadata(job, "figure");
    meta["figure"] = job.figure_name;
    if (job.figure_name == "f-real-line") {
        const double F = focus_distance(t);
        const double lo = job.grid_given ? job.grid.xmin : F + 0.01;
        const double hi = job.grid_given ? job.grid.xmax : 3.0;
        const int count = job.grid_given ? job.grid.nx : 200;
        table.columns = {"x", "f"};
        for (double x : GridSpec::axis(std::max(lo, F + 1e-6), hi, count))
            table.rows.push_back({x, f_value(t, {x, 0.0})});
    } else if (job.figure_name == "g-pm") {
        table.columns = {"phi_rad", "g_plus", "g_minus"};
        const int count = job.grid_given ? job.grid.nx : 361;
        const EllipseGeometry g = EllipseGeometry::from_t(t);
        for (double phi : GridSpec::axis(-M_PI + 1e-9, M_PI, count)) {
            const auto [gp, gm] = g_pm(t, g.boundary_point(phi));
            table.rows.push_back({phi, gp, gm});
        }
    } else if (job.figure_name == "erfc-profile") {
        if (!job.n) throw ValidationError("figure erfc-profile requires --n");
        const CanonicalModel model(*job.n, t);
        const EdgeFrame frame = edge_frame(t, 0.0);
        const double sqrtn = std::sqrt(static_cast<double>(*job.n));
        table.columns = {"a", "density_scaled_2pi_rho", "erfc_sqrt2_a"};
        const double lo = job.grid_given ? job.grid.xmin : -2.0;
        const double hi = job.grid_given ? job.grid.xmax : 2.0;
        const int count = job.grid_given ? job.grid.nx : 21;
        for (double a : GridSpec::axis(lo, hi, count)) {
            const Complex z = frame.z0 + a * std::polar(1.0, frame.psi) / sqrtn;
            table.rows.push_back({a, 2.0 * M_PI * density(model, z),
                                  std::erfc(std::sqrt(2.0) * a)});
        }
    } else if (job.figure_name == "gw-phase") {
        table.columns = {"phi_rad", "arg_minus_gw"};
        const int count = job.grid_given ? job.grid.nx : 361;
        const EllipseGeometry g = EllipseGeometry::from_t(t);
        for (double phi : GridSpec::axis(-M_PI + 1e-9, M_PI, count)) {
            const HCoeffs hc = h_coeffs(t, g.boundary_point(phi));
            table.rows.push_back({phi, std::arg(-hc.gw)});
        }
    } else {
        throw ValidationError("unknown figure: " + job.figure_name +
                              " (expected f-real-line|g-pm|erfc-profile|gw-phase)");
    }
    detail::write_output(job, meta, table);
    return 0;
}

/// Residual verification suites; exit 3 and a machine-readable report on
/// any tolerance breach.
inline int run_verify(const JobSpec& job) {
    detail::require_canonical(job);
    if (!job.t) throw ValidationError("verify requires the canonical --t model");
    const CanonicalModel model(*job.n, *job.t);
    auto tol = [&](const std::string& key, double fallback) {
        const auto it = job.tolerances.find(key);
        return it == job.tolerances.end() ? fallback : it->second;
    };
    std::mt19937_64 rng(job.seed);
    auto rand_point = [&](double radius) {
        const double re = (2.0 * nkl::detail::uniform01(rng) - 1.0) * radius;
        const double im = (2.0 * nkl::detail::uniform01(rng) - 1.0) * radius;
        return Complex{re, im};
    };

    struct Suite {
        std::string name;
        double worst;
        double tolerance;
    };
    std::vector<Suite> suites;

    {
        double worst = 0.0;
        for (int i = 0; i < 50; ++i) {
            const Complex w = rand_point(2.0), z = rand_point(2.0);
            const auto [r1, r2] = identity_residual_sym(model, w, z);
            const auto [r3, r4] = identity_residual_wz(model, w, z);
            worst = std::max({worst, r1, r2, r3, r4});
        }
        suites.push_back({"kernel_identities", worst, tol("identity", 1e-8)});
    }
    {
        double worst = 0.0;
        for (int i = 0; i < 25; ++i) {
            const Complex w = rand_point(2.0), z = rand_point(2.0);
            const long k = 1 + static_cast<long>(nkl::detail::uniform01(rng) * model.n);
            worst = std::max(worst, cd_recursion_residual(model, w, z, std::min(k, model.n)));
        }
        suites.push_back({"recursion_relation", worst, tol("recursion", 1e-9)});
    }
    {
        double worst = 0.0;
        for (int i = 0; i < 25; ++i) {
            const Complex z = rand_point(3.0);
            const long m = std::min<long>(model.n, 64);
            const ScaledComplex rec = poly_sequence(model, z, m)[static_cast<std::size_t>(m)];
            const ScaledComplex closed = poly_closed_form(model, z, m);
            worst = std::max(worst, nkl::detail::residual_between(rec, closed));
        }
        suites.push_back({"closed_form_crosscheck", worst, tol("closed-form", 1e-9)});
    }
    {
        double worst = 0.0;
        for (int i = 0; i < 25; ++i) {
            const auto res = derivative_relation_residual(model, rand_point(2.0),
                                                          std::min<long>(model.n, 50));
            if (!res.absolute) worst = std::max(worst, res.value);
        }
        suites.push_back({"derivative_relation", worst, tol("derivative", 1e-10)});
    }
    if (model.t > 0.0) {
        double worst = 0.0;
        const EllipseGeometry g = EllipseGeometry::from_t(model.t);
        for (int i = 0; i < 100; ++i) {
            const double phi = -M_PI + 2.0 * M_PI * (i + 0.5) / 100.0;
            const Complex z0 = g.boundary_point(phi);
            worst = std::max(worst, std::abs(f_value(model.t, z0)));
            const auto [fx, fy] = f_gradient(model.t, z0);
            worst = std::max({worst, std::abs(fx), std::abs(fy)});
            const HCoeffs hc = h_coeffs(model.t, z0);
            worst = std::max({worst, std::abs(hc.h1), std::abs(std::abs(hc.gw) - 1.0),
                              std::abs(std::abs(2.0 * hc.h2) - 1.0)});
        }
        suites.push_back({"boundary_identities", worst, tol("boundary", 1e-10)});
    }

    bool failed = false;
    Json report = Json::array();
    for (const Suite& s : suites) {
        const bool pass = s.worst <= s.tolerance;
        failed = failed || !pass;
        std::cout << (pass ? "[PASS] " : "[FAIL] ") << s.name << " worst=" << s.worst
                  << " tol=" << s.tolerance << "\n";
        report.push_back(Json{{"suite", s.name},
                              {"worst_residual", s.worst},
                              {"tolerance", s.tolerance},
                              {"pass", pass}});
    }
    Json meta = detail::base_metadata(job, "verify");
    meta["suites"] = report;
    if (!job.out_path.empty()) {
        std::ofstream file(job.out_path, std::ios::binary);
        file << Json{{"metadata", meta}}.dump(2) << "\n";
    }
    return failed ? 3 : 0;
}

/// Dispatch a validated job.  Returns the process exit status.
inline int run(const JobSpec& job) {
    try {
        switch (job.command) {
        case Command::Density: return run_density(job);
        case Command::Kernel: return run_kernel(job);
        case Command::Correlation: return run_correlation(job);
        case Command::Limits: return run_limits(job);
        case Command::Verify: return run_verify(job);
        case Command::Sample: return run_sample(job);
        case Command::Figure: return run_figure(job);
        }
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}

} // namespace nkl::cli
