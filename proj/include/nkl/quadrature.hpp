#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

namespace nkl {

/// Gauss-Legendre nodes and weights on [-1, 1], by Newton iteration on the
/// Legendre recurrence.
struct GaussLegendre {
    std::vector<double> nodes;
    std::vector<double> weights;

    explicit GaussLegendre(int n) : nodes(n), weights(n) {
        if (n < 1) throw std::domain_error("GaussLegendre: n must be positive");
        const int half = (n + 1) / 2;
        for (int i = 0; i < half; ++i) {
            double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
            double dp = 0.0;
            for (int iter = 0; iter < 100; ++iter) {
                double p0 = 1.0, p1 = x;
                for (int k = 2; k <= n; ++k) {
                    const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n * (x * p1 - p0) / (x * x - 1.0);
                const double dx = p1 / dp;
                x -= dx;
                if (std::abs(dx) < 1e-15) break;
            }
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            const double w = 2.0 / ((1.0 - x * x) * dp * dp);
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
    }
};

/// Tensor rule on a disk of radius R: Gauss-Legendre in radius (with the
/// Jacobian r folded into the weight) times the periodic trapezoid in
/// angle.
struct DiskRule {
    std::vector<double> r;
    std::vector<double> wr; // includes r dr Jacobian and the radial map
    std::vector<double> theta;
    double wtheta = 0.0;

    DiskRule(double R, int nr, int ntheta) {
        if (!(R > 0.0) || nr < 1 || ntheta < 1) throw std::domain_error("DiskRule: bad parameters");
        GaussLegendre gl(nr);
        r.resize(nr);
        wr.resize(nr);
        for (int i = 0; i < nr; ++i) {
            r[i] = 0.5 * R * (gl.nodes[i] + 1.0);
            wr[i] = 0.5 * R * gl.weights[i] * r[i];
        }
        theta.resize(ntheta);
        for (int j = 0; j < ntheta; ++j) theta[j] = 2.0 * M_PI * j / ntheta;
        wtheta = 2.0 * M_PI / ntheta;
    }

    /// Integrate f(z) d^2z over the disk.
    template <typename F>
    auto integrate(F&& f) const {
        using Value = decltype(f(std::complex<double>{}));
        Value total{};
        for (std::size_t i = 0; i < r.size(); ++i) {
            Value ring{};
            for (double th : theta)
                ring += f(std::complex<double>{r[i] * std::cos(th), r[i] * std::sin(th)});
            total += wr[i] * wtheta * ring;
        }
        return total;
    }
};

struct ConvergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace nkl
