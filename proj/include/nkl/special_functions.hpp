#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>

namespace nkl {

namespace detail {

inline constexpr double kTwoOverSqrtPi = 1.1283791670955125738961589;

// Maclaurin series of erf.  Every partial sum is exact up to rounding of
// terms whose magnitude peaks near e^{|z|^2}; the caller restricts the
// region so that this amplification stays below the target accuracy.
inline std::complex<double> erf_series(std::complex<double> z) {
    const std::complex<double> z2 = z * z;
    std::complex<double> term = z;
    std::complex<double> sum = z;
    for (int k = 1; k < 400; ++k) {
        term *= -z2 / static_cast<double>(k);
        const std::complex<double> contrib = term / static_cast<double>(2 * k + 1);
        sum += contrib;
        if (std::abs(contrib) < 1e-20 * std::abs(sum) + 1e-300) break;
    }
    return kTwoOverSqrtPi * sum;
}

// Laplace continued fraction for erfc, evaluated by the modified Lentz
// scheme.  Valid for Re z > 0; depth grows as z approaches the imaginary
// axis, which the caller excludes.
inline std::complex<double> erfc_continued_fraction(std::complex<double> z) {
    constexpr double tiny = 1e-290;
    std::complex<double> f = z;
    std::complex<double> c = z;
    std::complex<double> d = 0.0;
    int k = 1;
    for (; k < 4000; ++k) {
        const double a = 0.5 * k;
        d = z + a * d;
        if (std::abs(d) < tiny) d = tiny;
        c = z + a / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const std::complex<double> delta = c * d;
        f *= delta;
        if (k >= 60 && std::abs(delta - 1.0) < 1e-17) break;
    }
    // erfc(z) = e^{-z^2}/sqrt(pi) * 1/(z + 1/2/(z + 1/(z + 3/2/(z + ...))))
    const std::complex<double> z2 = -z * z;
    const std::complex<double> expfac = std::exp(z2);
    return expfac / (f * 1.7724538509055160272981675); // sqrt(pi)
}

} // namespace detail

/// Complementary error function analytically continued to the complex
/// plane.  Two regimes after the reflection erfc(-z) = 2 - erfc(z):
/// Maclaurin series of erf close to the imaginary axis (where erfc is
/// O(1) or larger and the 1 - erf subtraction is benign) and the Laplace
/// continued fraction elsewhere (where erfc is small and the series would
/// lose all relative accuracy).
inline std::complex<double> complex_erfc(std::complex<double> z) {
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
        throw std::invalid_argument("complex_erfc: non-finite argument");
    if (z.real() < 0.0) return 2.0 - complex_erfc(-z);
    if (z.real() <= 1.5) return 1.0 - detail::erf_series(z);
    return detail::erfc_continued_fraction(z);
}

/// ln(n!).
inline double log_factorial(long n) {
    if (n < 0) throw std::domain_error("log_factorial: negative argument");
    return std::lgamma(static_cast<double>(n) + 1.0);
}

} // namespace nkl
