#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>

namespace nkl {

/// Complex value with a separated power-of-two exponent.
///
/// Represents mantissa * 2^exponent with |mantissa| in [1,2) (or exactly
/// zero, in which case the exponent is zero too).  Keeps quantities of
/// magnitude e^{O(n)} -- polynomial values, exponential prefactors, kernel
/// partial sums -- exactly representable without touching the native
/// double range.
struct ScaledComplex {
    std::complex<double> mantissa{0.0, 0.0};
    std::int64_t exponent = 0;

    static ScaledComplex zero() { return {}; }

    static ScaledComplex one() { return ScaledComplex{{1.0, 0.0}, 0}; }

    bool is_zero() const { return mantissa.real() == 0.0 && mantissa.imag() == 0.0; }
};

namespace detail {

// ln2 split for an accurate residual when converting natural logs to
// power-of-two exponents.
inline constexpr double kLn2Hi = 6.93147180369123816490e-01;
inline constexpr double kLn2Lo = 1.90821492927058770002e-10;
inline constexpr double kLn2 = 0.6931471805599453094172321;

} // namespace detail

/// Renormalize an arbitrary (mantissa, exponent) pair.
inline ScaledComplex sc_normalize(std::complex<double> m, std::int64_t e) {
    const double mag = std::hypot(m.real(), m.imag());
    if (mag == 0.0) return ScaledComplex::zero();
    if (!std::isfinite(mag)) throw std::overflow_error("ScaledComplex: non-finite mantissa");
    const int k = std::ilogb(mag);
    if (k != 0) {
        const double scale = std::ldexp(1.0, -k);
        m = {m.real() * scale, m.imag() * scale};
        e += k;
    }
    // ilogb can land one bin off at the binade boundary after rounding.
    const double q = std::norm(m);
    if (q >= 4.0) {
        m *= 0.5;
        ++e;
    } else if (q < 1.0) {
        m *= 2.0;
        --e;
    }
    return ScaledComplex{m, e};
}

inline ScaledComplex sc_from(std::complex<double> z) { return sc_normalize(z, 0); }

inline ScaledComplex sc_from(double x) { return sc_normalize({x, 0.0}, 0); }

/// Build e^{log_mag + i*phase} with log_mag a natural logarithm.
inline ScaledComplex sc_from_log_polar(double log_mag, double phase) {
    const double eb = std::floor(log_mag / detail::kLn2);
    if (std::abs(eb) > 9.0e15) throw std::overflow_error("ScaledComplex: exponent out of range");
    const auto e = static_cast<std::int64_t>(eb);
    const double r = (log_mag - eb * detail::kLn2Hi) - eb * detail::kLn2Lo;
    const double mag = std::exp(r);
    return sc_normalize({mag * std::cos(phase), mag * std::sin(phase)}, e);
}

inline ScaledComplex sc_mul(const ScaledComplex& a, const ScaledComplex& b) {
    if (a.is_zero() || b.is_zero()) return ScaledComplex::zero();
    std::complex<double> m = a.mantissa * b.mantissa;
    std::int64_t e = a.exponent + b.exponent;
    if (std::norm(m) >= 4.0) {
        m *= 0.5;
        ++e;
    }
    return ScaledComplex{m, e};
}

/// Multiply by a native complex factor of moderate magnitude.
inline ScaledComplex sc_mul(const ScaledComplex& a, std::complex<double> w) {
    if (a.is_zero()) return ScaledComplex::zero();
    return sc_normalize(a.mantissa * w, a.exponent);
}

inline ScaledComplex sc_scale(const ScaledComplex& a, double s) {
    if (a.is_zero() || s == 0.0) return ScaledComplex::zero();
    return sc_normalize(a.mantissa * s, a.exponent);
}

inline ScaledComplex sc_neg(const ScaledComplex& a) {
    return ScaledComplex{-a.mantissa, a.exponent};
}

inline ScaledComplex sc_conj(const ScaledComplex& a) {
    return ScaledComplex{std::conj(a.mantissa), a.exponent};
}

inline ScaledComplex sc_add(const ScaledComplex& a, const ScaledComplex& b) {
    if (a.is_zero()) return b;
    if (b.is_zero()) return a;
    const ScaledComplex& hi = (a.exponent >= b.exponent) ? a : b;
    const ScaledComplex& lo = (a.exponent >= b.exponent) ? b : a;
    const std::int64_t gap = hi.exponent - lo.exponent;
    if (gap > 53) return hi; // absorbed below mantissa precision
    const std::complex<double> shifted{std::ldexp(lo.mantissa.real(), -static_cast<int>(gap)),
                                       std::ldexp(lo.mantissa.imag(), -static_cast<int>(gap))};
    return sc_normalize(hi.mantissa + shifted, hi.exponent);
}

inline ScaledComplex sc_sub(const ScaledComplex& a, const ScaledComplex& b) {
    return sc_add(a, sc_neg(b));
}

inline ScaledComplex sc_div(const ScaledComplex& a, const ScaledComplex& b) {
    if (b.is_zero()) throw std::domain_error("ScaledComplex: division by zero");
    if (a.is_zero()) return ScaledComplex::zero();
    return sc_normalize(a.mantissa / b.mantissa, a.exponent - b.exponent);
}

/// Natural log of the modulus; -inf for zero.
inline double sc_log_abs(const ScaledComplex& a) {
    if (a.is_zero()) return -std::numeric_limits<double>::infinity();
    return std::log(std::abs(a.mantissa)) + static_cast<double>(a.exponent) * detail::kLn2;
}

inline double sc_arg(const ScaledComplex& a) { return std::arg(a.mantissa); }

inline bool sc_representable(const ScaledComplex& a) {
    return a.is_zero() || (a.exponent > -1065 && a.exponent < 1020);
}

inline std::complex<double> sc_to_native(const ScaledComplex& a) {
    if (a.is_zero()) return {0.0, 0.0};
    if (a.exponent >= 1020) throw std::overflow_error("ScaledComplex: value exceeds native range");
    if (a.exponent <= -1065) return {0.0, 0.0}; // below double underflow
    const auto e = static_cast<int>(a.exponent);
    return {std::ldexp(a.mantissa.real(), e), std::ldexp(a.mantissa.imag(), e)};
}

/// |a| as a native double, +inf on overflow.
inline double sc_abs(const ScaledComplex& a) {
    if (a.is_zero()) return 0.0;
    return std::exp(sc_log_abs(a));
}

} // namespace nkl
