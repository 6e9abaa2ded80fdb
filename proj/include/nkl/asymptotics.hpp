#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "nkl/geometry.hpp"
#include "nkl/scaled_complex.hpp"
#include "nkl/special_functions.hpp"

namespace nkl {

enum class Regime { Inside, Outside, Edge };

/// Boundary point with its ellipse parameter and outward-normal angle.
struct EdgeFrame {
    Complex z0{1.0, 0.0};
    double phi = 0.0;
    double psi = 0.0;
};

inline EdgeFrame edge_frame(double t, double phi) {
    const EllipseGeometry g = EllipseGeometry::from_t(t);
    return {g.boundary_point(phi), phi, normal_angle(t, phi)};
}

/// Large-n exponent f(z) = t Re(z^2) - |z|^2 + Re(U^2) - 2 log|U| + log t + 1.
/// Zero on the droplet boundary, strictly negative elsewhere.  The t = 0
/// limit 2 log|z| - |z|^2 + 1 is handled by its own formula (the log t
/// singularity cancels only analytically).
inline double f_value(double t, Complex z) {
    if (!(t >= 0.0 && t < 1.0)) throw std::domain_error("f_value: t must lie in [0,1)");
    if (t == 0.0) {
        if (z == Complex{0.0, 0.0}) throw CutError("f_value: z = 0 at t = 0");
        return 2.0 * std::log(std::abs(z)) - std::norm(z) + 1.0;
    }
    const double F = focus_distance(t);
    const Complex u = u_map(z, F);
    return t * (z * z).real() - std::norm(z) + (u * u).real() - 2.0 * std::log(std::abs(u)) +
           std::log(t) + 1.0;
}

/// Closed-form gradient (df/dx, df/dy).
inline std::pair<double, double> f_gradient(double t, Complex z) {
    if (!(t >= 0.0 && t < 1.0)) throw std::domain_error("f_gradient: t must lie in [0,1)");
    const double x = z.real();
    const double y = z.imag();
    if (t == 0.0) {
        if (z == Complex{0.0, 0.0}) throw CutError("f_gradient: z = 0 at t = 0");
        const Complex inv = 1.0 / z;
        return {-2.0 * x + 2.0 * inv.real(), -2.0 * y - 2.0 * inv.imag()};
    }
    const double F = focus_distance(t);
    const Complex u = u_map(z, F);
    return {2.0 * x * (t - 1.0) + 4.0 * u.real() / F,
            -2.0 * y * (t + 1.0) - 4.0 * u.imag() / F};
}

/// Closed-form pure second derivatives (d2f/dx2, d2f/dy2).
inline std::pair<double, double> f_hessian_diag(double t, Complex z) {
    if (!(t >= 0.0 && t < 1.0)) throw std::domain_error("f_hessian_diag: t must lie in [0,1)");
    if (t == 0.0) {
        if (z == Complex{0.0, 0.0}) throw CutError("f_hessian_diag: z = 0 at t = 0");
        const Complex invsq = 1.0 / (z * z);
        return {-2.0 - 2.0 * invsq.real(), -2.0 + 2.0 * invsq.real()};
    }
    const double F = focus_distance(t);
    const Complex ratio = u_map(z, F) / t_map(z, F);
    return {2.0 * (t - 1.0) - 4.0 * ratio.real() / F,
            -2.0 * (t + 1.0) + 4.0 * ratio.real() / F};
}

/// Identity prefactors (g+, g-).  On the droplet boundary
/// -sign(x) g+ = sqrt(-d2f/dx2) and sign(y) g- = sqrt(-d2f/dy2).
inline std::pair<double, double> g_pm(double t, Complex z) {
    if (!(t >= 0.0 && t < 1.0)) throw std::domain_error("g_pm: t must lie in [0,1)");
    if (t == 0.0) {
        if (z == Complex{0.0, 0.0}) throw CutError("g_pm: z = 0 at t = 0");
        const Complex inv = 1.0 / z;
        return {-2.0 * inv.real(), -2.0 * inv.imag()};
    }
    const double F = focus_distance(t);
    const Complex u = u_map(z, F);
    const double w2 = std::norm(w_map(z, F));
    const double st = std::sqrt(t);
    return {-0.5 * (1.0 - t) / st * u.real() * w2, -0.5 * (1.0 + t) / st * u.imag() * w2};
}

/// f expressed on the image disk: f(z) = f_U(U_F(z)).
inline double f_U_value(double t, Complex u) {
    if (!(t > 0.0 && t < 1.0)) throw std::domain_error("f_U_value: t must lie in (0,1)");
    const double r = std::abs(u);
    if (!(r > 0.0 && r < 1.0)) throw std::domain_error("f_U_value: need 0 < |u| < 1");
    const Complex j = u + 1.0 / u;
    const double omt2 = 1.0 - t * t;
    return t * t / omt2 * (j * j).real() - t / omt2 * std::norm(j) + (u * u).real() -
           2.0 * std::log(r) + std::log(t) + 1.0;
}

/// Quadratic-expansion coefficients of the pre-kernel exponent around z0,
/// plus the directional prefactors g_w, g_z.
struct HCoeffs {
    Complex h1;    // h_1(z0) = 2 U(z0)/F + t z0 - conj(z0)
    Complex h1bar; // h_1(conj z0)
    Complex h2;    // h_2(z0) = t/2 - U(z0)/(F T(z0))
    Complex h2bar; // h_2(conj z0)
    Complex gw;    // (g+ - i g-)/2
    Complex gz;    // conj(gw)
};

inline HCoeffs h_coeffs(double t, Complex z0) {
    if (!(t > 0.0 && t < 1.0)) throw std::domain_error("h_coeffs: t must lie in (0,1)");
    const double F = focus_distance(t);
    auto h1 = [&](Complex z) { return 2.0 * u_map(z, F) / F + t * z - std::conj(z); };
    auto h2 = [&](Complex z) { return 0.5 * t - u_map(z, F) / (F * t_map(z, F)); };
    HCoeffs out;
    out.h1 = h1(z0);
    out.h1bar = h1(std::conj(z0));
    out.h2 = h2(z0);
    out.h2bar = h2(std::conj(z0));
    const double st = std::sqrt(t);
    out.gw = 0.25 * std::norm(w_map(z0, F)) *
             (st * u_map(z0, F) - u_map(std::conj(z0), F) / st);
    out.gz = std::conj(out.gw);
    return out;
}

/// Monic sqrt(m)-rescaled Hermite polynomial Q_m(z) = 2^{-m} m^{-m/2} H_m(sqrt(m) z),
/// by its own monic recurrence Q_{k+1} = z Q_k - (k/(2m)) Q_{k-1}.
inline ScaledComplex monic_hermite_scaled(long m, Complex z) {
    if (m < 0) throw std::domain_error("monic_hermite_scaled: m must be >= 0");
    ScaledComplex prev = ScaledComplex::zero();
    ScaledComplex cur = ScaledComplex::one();
    for (long k = 0; k < m; ++k) {
        ScaledComplex next = sc_mul(cur, z);
        if (k > 0)
            next = sc_sub(next, sc_scale(prev, static_cast<double>(k) / (2.0 * static_cast<double>(m))));
        prev = cur;
        cur = next;
    }
    return cur;
}

/// Exponential-regime approximant of Q_m off the zero interval:
/// pi_m(z) = (1/2) W(z) e^{(m/2) U(z)^2} (sqrt(2) U(z))^{-m} with the
/// sqrt(2)-focus maps.
inline ScaledComplex pr_outside(long m, Complex z) {
    if (m < 1) throw std::domain_error("pr_outside: m must be >= 1");
    const double F = std::sqrt(2.0);
    const Complex u = u_map(z, F); // throws on the cut [-sqrt(2), sqrt(2)]
    const Complex w = w_map(z, F);
    const double m2 = 0.5 * static_cast<double>(m);
    const Complex u2 = u * u;
    const double log_mag =
        m2 * u2.real() - static_cast<double>(m) * (0.5 * detail::kLn2 + std::log(std::abs(u)));
    const double phase = m2 * u2.imag() - static_cast<double>(m) * std::arg(u);
    return sc_mul(sc_from_log_polar(log_mag, phase), 0.5 * w);
}

/// Oscillatory-regime approximant of Q_m on (-sqrt(2), sqrt(2)); valid a
/// margin delta away from the turning points.
inline double pr_oscillatory(long m, double x, double delta = 0.1) {
    if (m < 1) throw std::domain_error("pr_oscillatory: m must be >= 1");
    if (!(delta > 0.0)) throw std::domain_error("pr_oscillatory: delta must be positive");
    const double s2 = std::sqrt(2.0);
    if (!(std::abs(x) <= s2 - delta))
        throw std::domain_error("pr_oscillatory: x too close to the turning points");
    const double ratio = (s2 - x) / (s2 + x);
    const double quarter = std::pow(ratio, 0.25);
    const double theta =
        0.5 * m * (x * std::sqrt(2.0 - x * x) + 2.0 * std::asin(x / s2) - M_PI);
    const double envelope = std::exp(0.5 * m * (x * x - 1.0 - std::log(2.0)));
    return (quarter * std::cos(theta - 0.25 * M_PI) +
            std::cos(theta + 0.25 * M_PI) / quarter) *
           envelope;
}

/// Real edge coordinate: the erfc argument for a lab-frame offset a at the
/// boundary point with parameter phi.
inline double zeta(double t, Complex a, double phi) {
    if (!(t >= 0.0 && t < 1.0)) throw std::domain_error("zeta: t must lie in [0,1)");
    const double c = std::cos(phi);
    const double s = std::sin(phi);
    const double denom = std::sqrt((1.0 + t) * (1.0 + t) - 4.0 * t * c * c);
    return std::sqrt(2.0) * ((1.0 - t) * c * a.real() + (1.0 + t) * s * a.imag()) / denom;
}

/// Complex pre-kernel edge coordinate
/// zeta(abar, phi) = (abar/sqrt(2)) ((1-t) cos phi + i (1+t) sin phi) / sqrt((1+t)^2 - 4t cos^2 phi).
inline Complex zeta_edge(double t, Complex abar, double phi) {
    if (!(t >= 0.0 && t < 1.0)) throw std::domain_error("zeta_edge: t must lie in [0,1)");
    const double c = std::cos(phi);
    const double s = std::sin(phi);
    const double denom = std::sqrt((1.0 + t) * (1.0 + t) - 4.0 * t * c * c);
    return abar / std::sqrt(2.0) * Complex{(1.0 - t) * c, (1.0 + t) * s} / denom;
}

/// Limiting density at z0 + a e^{i psi}/sqrt(n): 1/pi inside, 0 outside,
/// (1/2pi) erfc(sqrt(2) Re a) at the edge with a in the outward-normal frame.
inline double limit_density(Regime regime, Complex a = {0.0, 0.0}) {
    switch (regime) {
    case Regime::Inside: return 1.0 / M_PI;
    case Regime::Outside: return 0.0;
    case Regime::Edge: return 0.5 / M_PI * std::erfc(std::sqrt(2.0) * a.real());
    }
    return 0.0;
}

/// Oscillatory part of the kernel phase, sqrt(n) Im(e^{-i psi}(abar-bbar)(z0 - t conj z0)).
inline double phase_oscillatory(double t, Complex z0, double psi, Complex a, Complex b, long n) {
    const Complex d = std::conj(a) - std::conj(b);
    return std::sqrt(static_cast<double>(n)) *
           (std::polar(1.0, -psi) * d * (z0 - t * std::conj(z0))).imag();
}

/// n-independent part of the kernel phase, Im(abar b + (t/2) e^{2 i psi}(a^2 - b^2)).
inline double phase_static(double t, double psi, Complex a, Complex b) {
    return (std::conj(a) * b + 0.5 * t * std::polar(1.0, 2.0 * psi) * (a * a - b * b)).imag();
}

struct LimitKernelParams {
    Regime regime = Regime::Inside;
    Complex a{0.0, 0.0};
    Complex b{0.0, 0.0};
    double phase = 0.0; // theta_n
    long n = 0;         // n used for the oscillatory phase term
};

inline LimitKernelParams limit_kernel_params(Regime regime, double t, Complex z0, double psi,
                                             Complex a, Complex b, long n) {
    LimitKernelParams p;
    p.regime = regime;
    p.a = a;
    p.b = b;
    p.n = n;
    p.phase = phase_oscillatory(t, z0, psi, a, b, n) + phase_static(t, psi, a, b);
    return p;
}

/// Limiting kernel e^{i theta_n} e^{-|a-b|^2/2} {1/pi | 0 | erfc((abar+b)/sqrt(2))/(2pi)}.
inline Complex limit_kernel(const LimitKernelParams& p) {
    double factor = 0.0;
    Complex edge_factor{0.0, 0.0};
    switch (p.regime) {
    case Regime::Inside: factor = 1.0 / M_PI; break;
    case Regime::Outside: return {0.0, 0.0};
    case Regime::Edge:
        edge_factor = complex_erfc((std::conj(p.a) + p.b) / std::sqrt(2.0)) * (0.5 / M_PI);
        break;
    }
    const Complex gauss = std::exp(Complex{-0.5 * std::norm(p.a - p.b), p.phase});
    return p.regime == Regime::Edge ? gauss * edge_factor : gauss * factor;
}

/// Limiting m-point correlation determinant for offsets in the local
/// (edge: outward-normal) frame.  Universal: independent of t and of the
/// boundary position; the t parameter is kept for interface symmetry.
/// The renormalized variant rescales offsets by the local density per the
/// K~(z0,z0) normalization.
inline double limit_correlation([[maybe_unused]] double t, Regime regime,
                                const std::vector<Complex>& offsets, bool renormalized = false) {
    const auto m = static_cast<long>(offsets.size());
    if (m < 1 || m > 64) throw std::domain_error("limit_correlation: need 1 <= m <= 64 offsets");
    if (regime == Regime::Outside) return 0.0;
    Eigen::MatrixXcd M(m, m);
    for (long k = 0; k < m; ++k) {
        for (long l = 0; l < m; ++l) {
            const Complex ak = offsets[static_cast<std::size_t>(k)];
            const Complex al = offsets[static_cast<std::size_t>(l)];
            Complex entry;
            if (!renormalized) {
                const Complex expo{-0.5 * std::norm(ak - al), (std::conj(ak) * al).imag()};
                entry = std::exp(expo) / M_PI;
                if (regime == Regime::Edge)
                    entry *= 0.5 * complex_erfc((std::conj(ak) + al) / std::sqrt(2.0));
            } else if (regime == Regime::Inside) {
                const Complex expo{-0.5 * M_PI * std::norm(ak - al),
                                   M_PI * (std::conj(ak) * al).imag()};
                entry = std::exp(expo);
            } else {
                const Complex expo{-M_PI * std::norm(ak - al),
                                   2.0 * M_PI * (std::conj(ak) * al).imag()};
                entry = std::exp(expo) * complex_erfc(std::sqrt(M_PI) * (std::conj(ak) + al));
            }
            M(k, l) = entry;
        }
    }
    return M.determinant().real();
}

} // namespace nkl
