#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "nkl/orthopoly.hpp"
#include "nkl/quadrature.hpp"
#include "nkl/scaled_complex.hpp"

namespace nkl {

namespace detail {

/// e^{n(-wz + t w^2/2 + t z^2/2)} as a scaled value.
inline ScaledComplex prekernel_prefactor(const CanonicalModel& model, Complex w, Complex z) {
    const Complex expo =
        static_cast<double>(model.n) * (-w * z + 0.5 * model.t * (w * w + z * z));
    return sc_from_log_polar(expo.real(), expo.imag());
}

/// Running scaled sum that remembers the largest addend.  The identities
/// below equate quantities that are exponentially smaller than the terms
/// they are assembled from (the telescoping structure behind them), so a
/// meaningful residual must be measured against the peak term, not the
/// collapsed value.
struct TrackedSum {
    ScaledComplex sum = ScaledComplex::zero();
    double log_peak = -std::numeric_limits<double>::infinity();

    void add(const ScaledComplex& x) {
        sum = sc_add(sum, x);
        log_peak = std::max(log_peak, sc_log_abs(x));
    }
};

/// (1/n) sum_{m<n} p_m(w) p_m(z) and the derivative sums
/// (1/n) sum p_m'(w) p_m(z), (1/n) sum p_m(w) p_m'(z), using the termwise
/// derivative relation p_m' = sqrt(n m (1-t^2)) p_{m-1}.
struct PreKernelSums {
    TrackedSum s;  // (1/n) sum p_m(w) p_m(z)
    TrackedSum sw; // (1/n) sum p_m'(w) p_m(z)
    TrackedSum sz; // (1/n) sum p_m(w) p_m'(z)
};

inline PreKernelSums prekernel_sums(const CanonicalModel& model, Complex w, Complex z) {
    const PolySequence pw = poly_sequence(model, w, model.n - 1);
    const PolySequence pz = poly_sequence(model, z, model.n - 1);
    PreKernelSums out;
    const double n = static_cast<double>(model.n);
    const double inv_n = 1.0 / n;
    for (long m = 0; m < model.n; ++m) {
        const auto k = static_cast<std::size_t>(m);
        out.s.add(sc_scale(sc_mul(pw[k], pz[k]), inv_n));
        if (m >= 1) {
            const double c =
                inv_n * std::sqrt(n * static_cast<double>(m) * (1.0 - model.t * model.t));
            out.sw.add(sc_scale(sc_mul(pw[k - 1], pz[k]), c));
            out.sz.add(sc_scale(sc_mul(pw[k], pz[k - 1]), c));
        }
    }
    return out;
}

/// |lhs - rhs| relative to the larger side and any extra scale (log) the
/// caller knows the computation passed through.
inline double residual_between(const ScaledComplex& lhs, const ScaledComplex& rhs,
                               double extra_log_scale = -std::numeric_limits<double>::infinity()) {
    const ScaledComplex diff = sc_sub(lhs, rhs);
    if (diff.is_zero()) return 0.0;
    const double log_scale =
        std::max({sc_log_abs(lhs), sc_log_abs(rhs), extra_log_scale});
    if (!std::isfinite(log_scale)) return sc_abs(diff);
    return std::exp(sc_log_abs(diff) - log_scale);
}

} // namespace detail

/// Kernel value with the largest intermediate power-of-two exponent met
/// while accumulating it; the diagnostic shows how far the summation left
/// the native double range.
struct KernelEval {
    Complex value{0.0, 0.0};
    std::int64_t max_exponent = 0;
};

/// Pre-kernel H_n(w,z) = (1/n) e^{n(-wz + t(w^2+z^2)/2)} sum_{m<n} p_m(w) p_m(z)
/// in scaled arithmetic.
inline ScaledComplex pre_kernel_scaled(const CanonicalModel& model, Complex w, Complex z) {
    return sc_mul(detail::prekernel_prefactor(model, w, z),
                  detail::prekernel_sums(model, w, z).s.sum);
}

/// Native-range pre-kernel; throws std::overflow_error when the de-scaled
/// value exceeds the double range (diagnostic only -- it cannot happen for
/// arguments within a few units of the droplet).
inline Complex pre_kernel(const CanonicalModel& model, Complex w, Complex z) {
    return sc_to_native(pre_kernel_scaled(model, w, z));
}

inline KernelEval pre_kernel_eval(const CanonicalModel& model, Complex w, Complex z) {
    const detail::PreKernelSums sums = detail::prekernel_sums(model, w, z);
    const ScaledComplex value = sc_mul(detail::prekernel_prefactor(model, w, z), sums.s.sum);
    const double peak = std::max(sums.s.log_peak, sc_log_abs(value));
    return {sc_to_native(value),
            static_cast<std::int64_t>(std::floor(peak / nkl::detail::kLn2))};
}

/// Normalized kernel K~_n(w,z)/n = (1/n) e^{-n(V(w)+V(z))/2} sum conj(p_m(w)) p_m(z).
/// For real t, conj(p_m(w)) = p_m(conj w).
inline KernelEval normalized_kernel_eval(const CanonicalModel& model, Complex w, Complex z) {
    const PolySequence pw = poly_sequence(model, std::conj(w), model.n - 1);
    const PolySequence pz = poly_sequence(model, z, model.n - 1);
    ScaledComplex sum = ScaledComplex::zero();
    std::int64_t peak = 0;
    for (long m = 0; m < model.n; ++m) {
        const auto k = static_cast<std::size_t>(m);
        const ScaledComplex term = sc_mul(pw[k], pz[k]);
        peak = std::max(peak, term.exponent);
        sum = sc_add(sum, term);
    }
    peak = std::max(peak, sum.exponent);
    const double expo = -0.5 * model.n * (model.potential(w) + model.potential(z));
    sum = sc_mul(sum, sc_from_log_polar(expo, 0.0));
    return {sc_to_native(sum) / static_cast<double>(model.n), peak};
}

inline Complex normalized_kernel(const CanonicalModel& model, Complex w, Complex z) {
    return normalized_kernel_eval(model, w, z).value;
}

/// Normalized kernel of a general potential through the canonical
/// reduction: K~^{gen}_n(w,z) = (1/t0) K~^{canon}_n(w~, z~) at the shifted,
/// scaled, rotated arguments.
inline Complex normalized_kernel(const GeneralPotential& pot, long n, Complex w, Complex z) {
    const CanonicalReduction red = reduce_general(pot);
    const CanonicalModel canon(n, red.canonical_t);
    const Complex rot = std::polar(1.0, 0.5 * red.rotation);
    const Complex wt = rot * (w / red.scale - red.shift);
    const Complex zt = rot * (z / red.scale - red.shift);
    return normalized_kernel(canon, wt, zt) / pot.t0;
}

/// One-point density rho_n(z) = K~_n(z,z)/n.
inline double density(const CanonicalModel& model, Complex z) {
    return normalized_kernel(model, z, z).real();
}

inline double density(const GeneralPotential& pot, long n, Complex z) {
    return normalized_kernel(pot, n, z, z).real();
}

/// Kernel Gram matrix of a point configuration with its determinant.
/// Entries are K~_n(z_k, z_l)/n; `det_rescaled` is det of those entries
/// (the n^{-m} R_n^m appearing in the limit theorems), `det_raw` restores
/// the n^m factor of the bare m-point correlation determinant.
struct CorrelationMatrix {
    std::vector<Complex> points;
    Eigen::MatrixXcd entries;
    Complex det_rescaled{0.0, 0.0};
    double log_abs_det = 0.0;
    Complex det_raw{0.0, 0.0};
};

inline CorrelationMatrix correlation(const CanonicalModel& model,
                                     const std::vector<Complex>& points) {
    const auto m = static_cast<long>(points.size());
    if (m < 1 || m > 64) throw std::domain_error("correlation: need 1 <= m <= 64 points");
    for (Complex p : points)
        if (!std::isfinite(p.real()) || !std::isfinite(p.imag()))
            throw std::invalid_argument("correlation: non-finite point");
    CorrelationMatrix out;
    out.points = points;
    out.entries.resize(m, m);
    for (long k = 0; k < m; ++k)
        for (long l = 0; l < m; ++l)
            out.entries(k, l) = normalized_kernel(model, points[static_cast<std::size_t>(k)],
                                                  points[static_cast<std::size_t>(l)]);
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(out.entries);
    out.det_rescaled = lu.determinant();
    double log_abs = 0.0;
    for (long k = 0; k < m; ++k) log_abs += std::log(std::abs(lu.matrixLU()(k, k)));
    out.log_abs_det = log_abs;
    out.det_raw = out.det_rescaled * std::pow(static_cast<double>(model.n), static_cast<double>(m));
    return out;
}

/// Relative residuals of the two symmetric pre-kernel identities
///   dH/dw + dH/dz = -sqrt((1-t)/(1+t)) (p_n(w)p_{n-1}(z) + p_{n-1}(w)p_n(z)) e^{...}
///   dH/dw - dH/dz = +sqrt((1+t)/(1-t)) (p_n(w)p_{n-1}(z) - p_{n-1}(w)p_n(z)) e^{...}
/// Both sides share the exponential prefactor, which cancels in the ratio,
/// so the residuals stay meaningful when each side overflows native range.
inline std::pair<double, double> identity_residual_sym(const CanonicalModel& model, Complex w,
                                                       Complex z) {
    const double n = static_cast<double>(model.n);
    const double t = model.t;
    const detail::PreKernelSums sums = detail::prekernel_sums(model, w, z);
    // d/dw of the prefactor exponent is n(-z + t w); similarly for z.
    const Complex gw = n * (-z + t * w);
    const Complex gz = n * (-w + t * z);
    const ScaledComplex dw = sc_add(sc_mul(sums.s.sum, gw), sums.sw.sum);
    const ScaledComplex dz = sc_add(sc_mul(sums.s.sum, gz), sums.sz.sum);
    const double log_scale = std::max(
        {sums.s.log_peak + std::log(std::max(std::abs(gw), std::abs(gz))),
         sums.sw.log_peak, sums.sz.log_peak});

    const PolySequence pw = poly_sequence(model, w, model.n);
    const PolySequence pz = poly_sequence(model, z, model.n);
    const auto nn = static_cast<std::size_t>(model.n);
    const ScaledComplex cross_plus =
        sc_add(sc_mul(pw[nn], pz[nn - 1]), sc_mul(pw[nn - 1], pz[nn]));
    const ScaledComplex cross_minus =
        sc_sub(sc_mul(pw[nn], pz[nn - 1]), sc_mul(pw[nn - 1], pz[nn]));

    const ScaledComplex lhs1 = sc_add(dw, dz);
    const ScaledComplex rhs1 = sc_scale(cross_plus, -std::sqrt((1.0 - t) / (1.0 + t)));
    const ScaledComplex lhs2 = sc_sub(dw, dz);
    const ScaledComplex rhs2 = sc_scale(cross_minus, std::sqrt((1.0 + t) / (1.0 - t)));
    return {detail::residual_between(lhs1, rhs1, log_scale),
            detail::residual_between(lhs2, rhs2, log_scale)};
}

/// Relative residuals of the separate-derivative identities
///   dH/dw = ( t p_n(w)p_{n-1}(z) - p_{n-1}(w)p_n(z)) e^{...} / sqrt(1-t^2)
///   dH/dz = (-p_n(w)p_{n-1}(z) + t p_{n-1}(w)p_n(z)) e^{...} / sqrt(1-t^2)
inline std::pair<double, double> identity_residual_wz(const CanonicalModel& model, Complex w,
                                                      Complex z) {
    const double n = static_cast<double>(model.n);
    const double t = model.t;
    const detail::PreKernelSums sums = detail::prekernel_sums(model, w, z);
    const Complex gw = n * (-z + t * w);
    const Complex gz = n * (-w + t * z);
    const ScaledComplex dw = sc_add(sc_mul(sums.s.sum, gw), sums.sw.sum);
    const ScaledComplex dz = sc_add(sc_mul(sums.s.sum, gz), sums.sz.sum);
    const double log_scale = std::max(
        {sums.s.log_peak + std::log(std::max(std::abs(gw), std::abs(gz))),
         sums.sw.log_peak, sums.sz.log_peak});

    const PolySequence pw = poly_sequence(model, w, model.n);
    const PolySequence pz = poly_sequence(model, z, model.n);
    const auto nn = static_cast<std::size_t>(model.n);
    const double inv = 1.0 / std::sqrt(1.0 - t * t);
    const ScaledComplex rhs_w = sc_scale(
        sc_sub(sc_scale(sc_mul(pw[nn], pz[nn - 1]), t), sc_mul(pw[nn - 1], pz[nn])), inv);
    const ScaledComplex rhs_z = sc_scale(
        sc_sub(sc_scale(sc_mul(pw[nn - 1], pz[nn]), t), sc_mul(pw[nn], pz[nn - 1])), inv);
    return {detail::residual_between(dw, rhs_w, log_scale),
            detail::residual_between(dz, rhs_z, log_scale)};
}

/// Relative residual of the level-k telescoping relation behind the kernel
/// identities (max over the two sign variants):
///   -/+ sqrt(k/n) sqrt((1-/+t)/(1+/-t)) (p_k(w)p_{k-1}(z) +/- p_{k-1}(w)p_k(z))
///   = same at k-1  -/+ (1-/+t)(w +/- z) p_{k-1}(w)p_{k-1}(z)
///     + (1/n)(p'_{k-1}(w)p_{k-1}(z) +/- p_{k-1}(w)p'_{k-1}(z)).
inline double cd_recursion_residual(const CanonicalModel& model, Complex w, Complex z, long k) {
    if (k < 1 || k > model.n) throw std::domain_error("cd_recursion_residual: need 1 <= k <= n");
    const double n = static_cast<double>(model.n);
    const double t = model.t;
    const PolySequence pw = poly_sequence(model, w, k);
    const PolySequence pz = poly_sequence(model, z, k);
    auto deriv = [&](const PolySequence& p, long m) {
        if (m < 1) return ScaledComplex::zero();
        const double c = std::sqrt(n * static_cast<double>(m) * (1.0 - t * t));
        return sc_scale(p[static_cast<std::size_t>(m - 1)], c);
    };
    auto value = [&](const PolySequence& p, long m) {
        return m < 0 ? ScaledComplex::zero() : p[static_cast<std::size_t>(m)];
    };
    double worst = 0.0;
    for (int variant = 0; variant < 2; ++variant) {
        const double sign = (variant == 0) ? 1.0 : -1.0;   // + combination first
        const double tfac = (variant == 0) ? (1.0 - t) : (1.0 + t);
        const double root = std::sqrt((variant == 0) ? (1.0 - t) / (1.0 + t)
                                                     : (1.0 + t) / (1.0 - t));
        auto cross = [&](long a, long b) {
            const ScaledComplex first = sc_mul(value(pw, a), value(pz, b));
            const ScaledComplex second = sc_mul(value(pw, b), value(pz, a));
            return (variant == 0) ? sc_add(first, second) : sc_sub(first, second);
        };
        const ScaledComplex lhs =
            sc_scale(cross(k, k - 1), -sign * std::sqrt(static_cast<double>(k) / n) * root);
        detail::TrackedSum rhs;
        rhs.add(sc_scale(cross(k - 1, k - 2),
                         -sign * std::sqrt(static_cast<double>(k - 1) / n) * root));
        const Complex wpz = (variant == 0) ? (w + z) : (w - z);
        rhs.add(sc_scale(sc_mul(sc_mul(value(pw, k - 1), value(pz, k - 1)), wpz), -sign * tfac));
        ScaledComplex dterm = sc_mul(deriv(pw, k - 1), value(pz, k - 1));
        const ScaledComplex dterm2 = sc_mul(value(pw, k - 1), deriv(pz, k - 1));
        dterm = (variant == 0) ? sc_add(dterm, dterm2) : sc_sub(dterm, dterm2);
        rhs.add(sc_scale(dterm, 1.0 / n));
        worst = std::max(worst, detail::residual_between(lhs, rhs.sum, rhs.log_peak));
    }
    return worst;
}

/// Quadrature value of the total mass integral of K~_n(z,z); equals n.
inline double normalization_integral(const CanonicalModel& model, const QuadratureSpec& spec = {}) {
    const double a = std::sqrt((1.0 + model.t) / (1.0 - model.t));
    const double R =
        a + std::sqrt(69.1 / (static_cast<double>(model.n) * (1.0 - model.t))) + 1.0;
    auto evaluate = [&](int nr, int ntheta) {
        DiskRule rule(R, nr, ntheta);
        return rule.integrate([&](Complex z) {
            return static_cast<double>(model.n) * density(model, z);
        });
    };
    double v = evaluate(spec.nr, spec.ntheta);
    int nr = spec.nr, ntheta = spec.ntheta;
    for (int pass = 0; pass < spec.max_refine; ++pass) {
        nr *= 2;
        ntheta *= 2;
        const double v2 = evaluate(nr, ntheta);
        const double diff = std::abs(v2 - v);
        v = v2;
        if (diff <= spec.tol * std::max(1.0, std::abs(v))) return v;
    }
    throw ConvergenceError("normalization_integral: quadrature did not stabilize");
}

/// rho_n(0) by the explicit even-term series
/// (sqrt(1-t^2)/pi) sum_{2l<n} (2l)!/(l!)^2 (t^2/4)^l.
inline double density_series_at_zero(const CanonicalModel& model) {
    const double x = 0.25 * model.t * model.t;
    double term = 1.0;
    double sum = 0.0;
    for (long l = 0; 2 * l < model.n; ++l) {
        if (l > 0) {
            const double dl = static_cast<double>(l);
            term *= x * (2.0 * dl) * (2.0 * dl - 1.0) / (dl * dl);
        }
        sum += term;
    }
    return std::sqrt(1.0 - model.t * model.t) * sum / M_PI;
}

} // namespace nkl
