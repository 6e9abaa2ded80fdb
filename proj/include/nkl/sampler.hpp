#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "nkl/orthopoly.hpp"

namespace nkl {

/// Configuration of one Metropolis chain over the eigenvalue gas.
struct GasConfig {
    int n = 16;
    double t = 0.0;
    double step = 0.0; // proposal stddev; 0 means the 1/sqrt(n) default
    long sweeps = 0;
    long burnin = 0;
    long snapshot_stride = 10; // sweeps between recorded snapshots
    std::uint64_t seed = 1;
    bool log_proposals = false; // record (delta, accepted) per proposal

    void validate() const {
        if (n < 1 || n > 64) throw std::domain_error("GasConfig: need 1 <= n <= 64");
        if (!(t >= 0.0 && t < 1.0)) throw std::domain_error("GasConfig: t must lie in [0,1)");
        if (step < 0.0) throw std::domain_error("GasConfig: step must be positive");
        if (!(sweeps > burnin && burnin >= 0))
            throw std::domain_error("GasConfig: need sweeps > burnin >= 0");
        if (snapshot_stride < 1) throw std::domain_error("GasConfig: stride must be >= 1");
    }

    double effective_step() const { return step > 0.0 ? step : 1.0 / std::sqrt(double(n)); }
};

struct GasState {
    std::vector<Complex> positions;
    double log_weight = 0.0;
};

/// Log joint density of the eigenvalue gas up to the partition constant:
/// sum_{i<j} 2 log|z_i - z_j| - n sum_i V(z_i).  Coincident points give
/// the -infinity sentinel.
inline double log_weight(const std::vector<Complex>& positions, const CanonicalModel& model) {
    double lw = 0.0;
    for (std::size_t i = 0; i < positions.size(); ++i) {
        for (std::size_t j = i + 1; j < positions.size(); ++j) {
            const double d = std::abs(positions[i] - positions[j]);
            if (d == 0.0) return -std::numeric_limits<double>::infinity();
            lw += 2.0 * std::log(d);
        }
        lw -= static_cast<double>(model.n) * model.potential(positions[i]);
    }
    return lw;
}

struct ChainResult {
    std::vector<GasState> snapshots;
    double acceptance_rate = 0.0;
    bool tuning_warning = false;
    std::string rng_algorithm = "mt19937_64 + Box-Muller";
    std::vector<std::pair<double, bool>> proposal_log; // (delta, accepted) when enabled
};

namespace detail {

// Uniform in [0,1) from the top 53 bits; keeps the stream reproducible
// across standard libraries (std::normal_distribution is not pinned).
inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline std::pair<double, double> gaussian_pair(std::mt19937_64& rng) {
    double u1 = uniform01(rng);
    while (u1 == 0.0) u1 = uniform01(rng);
    const double u2 = uniform01(rng);
    const double r = std::sqrt(-2.0 * std::log(u1));
    return {r * std::cos(2.0 * M_PI * u2), r * std::sin(2.0 * M_PI * u2)};
}

} // namespace detail

/// Metropolis chain with single-particle Gaussian proposals; one sweep is n
/// proposals.  Snapshots are taken every `snapshot_stride` sweeps after
/// burn-in.  Deterministic given the seed.
inline ChainResult run_chain(const GasConfig& cfg, const CanonicalModel& model) {
    cfg.validate();
    if (cfg.n != model.n)
        throw std::domain_error("run_chain: config and model dimensions disagree");
    std::mt19937_64 rng(cfg.seed);
    const double step = cfg.effective_step();
    const auto n = static_cast<std::size_t>(cfg.n);

    std::vector<Complex> pos(n);
    for (auto& z : pos) {
        const auto [gx, gy] = detail::gaussian_pair(rng);
        z = {0.5 * gx, 0.5 * gy};
    }
    double lw = log_weight(pos, model);

    ChainResult out;
    long accepted = 0, proposed = 0; // counted post burn-in
    for (long sweep = 0; sweep < cfg.sweeps; ++sweep) {
        const bool measuring = sweep >= cfg.burnin;
        for (std::size_t i = 0; i < n; ++i) {
            const auto [gx, gy] = detail::gaussian_pair(rng);
            const Complex cand = pos[i] + Complex{step * gx, step * gy};
            double delta = -static_cast<double>(model.n) *
                           (model.potential(cand) - model.potential(pos[i]));
            bool coincident = false;
            for (std::size_t j = 0; j < n; ++j) {
                if (j == i) continue;
                const double dn = std::abs(pos[j] - cand);
                if (dn == 0.0) {
                    coincident = true;
                    break;
                }
                delta += 2.0 * (std::log(dn) - std::log(std::abs(pos[j] - pos[i])));
            }
            const bool accept =
                !coincident && (delta >= 0.0 || detail::uniform01(rng) < std::exp(delta));
            if (measuring) {
                ++proposed;
                if (accept) ++accepted;
            }
            if (accept) {
                pos[i] = cand;
                lw += delta;
            }
            if (cfg.log_proposals) out.proposal_log.emplace_back(delta, accept);
        }
        if (sweep >= cfg.burnin && (sweep - cfg.burnin) % cfg.snapshot_stride == 0)
            out.snapshots.push_back(GasState{pos, lw});
    }
    out.acceptance_rate = proposed > 0 ? static_cast<double>(accepted) / proposed : 0.0;
    out.tuning_warning = out.acceptance_rate < 0.05 || out.acceptance_rate > 0.95;
    return out;
}

struct HistogramGrid {
    double xmin = -2.0, xmax = 2.0;
    double ymin = -2.0, ymax = 2.0;
    int nx = 20, ny = 20;

    double cell_area() const { return (xmax - xmin) / nx * ((ymax - ymin) / ny); }
};

/// Normalized 2D histogram of snapshot positions; values are densities
/// (mass per unit area) comparable to rho_n, with total in-grid mass one.
inline std::vector<double> histogram_density(const std::vector<GasState>& snapshots,
                                             const HistogramGrid& grid) {
    if (snapshots.empty()) throw std::domain_error("histogram_density: no snapshots");
    std::vector<double> counts(static_cast<std::size_t>(grid.nx) * grid.ny, 0.0);
    const double dx = (grid.xmax - grid.xmin) / grid.nx;
    const double dy = (grid.ymax - grid.ymin) / grid.ny;
    double total = 0.0;
    for (const GasState& s : snapshots) {
        for (Complex z : s.positions) {
            const int ix = static_cast<int>(std::floor((z.real() - grid.xmin) / dx));
            const int iy = static_cast<int>(std::floor((z.imag() - grid.ymin) / dy));
            if (ix < 0 || ix >= grid.nx || iy < 0 || iy >= grid.ny) continue;
            counts[static_cast<std::size_t>(iy) * grid.nx + ix] += 1.0;
            total += 1.0;
        }
    }
    if (total == 0.0) return counts;
    const double norm = 1.0 / (total * dx * dy);
    for (double& c : counts) c *= norm;
    return counts;
}

} // namespace nkl
