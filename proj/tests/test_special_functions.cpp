#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <random>

#include "nkl/special_functions.hpp"

using namespace nkl;
using Complex = std::complex<double>;

namespace {

// Independent oracle: Maclaurin series of erf in long double, usable where
// cancellation stays below extended precision (small arguments).
Complex erf_maclaurin_oracle(Complex z, int terms = 60) {
    const std::complex<long double> zl{z.real(), z.imag()};
    const std::complex<long double> z2 = zl * zl;
    std::complex<long double> term = zl;
    std::complex<long double> sum = zl;
    for (int k = 1; k < terms; ++k) {
        term *= -z2 / static_cast<long double>(k);
        sum += term / static_cast<long double>(2 * k + 1);
    }
    sum *= 2.0L / std::sqrt(3.14159265358979323846264338327950288L);
    return {static_cast<double>(sum.real()), static_cast<double>(sum.imag())};
}

struct ErfcReference {
    double re, im;
    double ref_re, ref_im;
};

// 40-digit reference values spanning the series regime, the continued
// fraction regime and the reflection.
const ErfcReference kReferences[] = {
    {0.5, 0.0, 0.47950012218695346232, 0.0},
    {1.0, 0.0, 0.15729920705028513066, 0.0},
    {1.9, 0.0, 0.0072095707647425327628, 0.0},
    {2.1, 0.0, 0.0029794666563329842857, 0.0},
    {3.0, 0.0, 0.000022090496998585441373, 0.0},
    {3.9, 0.0, 3.4792248597231767129e-8, 0.0},
    {4.1, 0.0, 6.7000276540849184417e-9, 0.0},
    {6.0, 0.0, 2.1519736712498913117e-17, 0.0},
    {8.0, 0.0, 1.122429717298292708e-29, 0.0},
    {0.5, 1.5, -2.3864053337276503889, -1.6258350472446836891},
    {1.5, -2.5, -6.2546886934779263446, 8.7859672933704554608},
    {2.0, 7.5, 3.5798314928176019147e+21, 3.9545311119308529114e+20},
    {2.5, 0.5, -0.00046024143552160713233, -0.0002318197199098071131},
    {3.5, -3.5, 0.11287072876041572779, 0.015026380322129921374},
    {2.2, 7.6, -6.8056994447087935529e+21, 1.1478530183519853443e+21},
    {4.0, 4.0, 0.021450766923918074128, -0.097339690630831865347},
    {7.0, 3.0, -3.9641953582072797246e-21, 3.1283358803360064234e-19},
    {0.0, 3.0, 1.0, -1629.9946226015656511},
    {0.1, 7.9, -9.0632950828945528928e+25, -3.3219635777181766457e+23},
    {-1.0, 0.0, 1.8427007929497148693, 0.0},
    {-2.5, 1.0, 1.9993826851377998453, 0.00084694454339379261683},
    {-6.0, -2.0, 1.9999999999999992353, -8.16444869943385355e-16},
    {1e-8, 0.0, 0.99999998871620832904, 0.0},
    {0.0, 0.0, 1.0, 0.0},
};

} // namespace

TEST_CASE("erfc basics") {
    REQUIRE(complex_erfc({0.0, 0.0}) == Complex{1.0, 0.0});
    REQUIRE_THROWS_AS(complex_erfc({std::nan(""), 0.0}), std::invalid_argument);
    REQUIRE_THROWS_AS(complex_erfc({0.0, std::numeric_limits<double>::infinity()}),
                      std::invalid_argument);
}

TEST_CASE("erfc(1) against the Maclaurin oracle") {
    const Complex oracle = 1.0 - erf_maclaurin_oracle({1.0, 0.0}, 40);
    const Complex got = complex_erfc({1.0, 0.0});
    REQUIRE(std::abs(got - oracle) <= 1e-14);
    REQUIRE(got.real() == Catch::Approx(0.15729920705028513066).epsilon(1e-13));
}

TEST_CASE("erfc matches 40-digit references to 1e-12 relative") {
    for (const auto& r : kReferences) {
        const Complex got = complex_erfc({r.re, r.im});
        const Complex ref{r.ref_re, r.ref_im};
        const double scale = std::max(std::abs(ref), 1e-300);
        INFO("z = (" << r.re << ", " << r.im << ")");
        REQUIRE(std::abs(got - ref) <= 1e-12 * scale);
    }
}

TEST_CASE("reflection erfc(-z) = 2 - erfc(z)") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-6.0, 6.0);
    for (int i = 0; i < 200; ++i) {
        const Complex z{u(rng), u(rng)};
        const Complex a = complex_erfc(-z);
        const Complex b = 2.0 - complex_erfc(z);
        REQUIRE(std::abs(a - b) <= 1e-12 * std::max({std::abs(a), std::abs(b), 1.0}));
    }
}

TEST_CASE("real axis matches std::erfc on [-6, 6]") {
    for (int i = 0; i <= 240; ++i) {
        const double x = -6.0 + 12.0 * i / 240.0;
        const double ref = std::erfc(x);
        const Complex got = complex_erfc({x, 0.0});
        REQUIRE(std::abs(got.imag()) <= 1e-13 * std::max(ref, 1e-300));
        REQUIRE(std::abs(got.real() - ref) <= 1e-13 * std::max(ref, 1e-300));
    }
}

TEST_CASE("conjugation symmetry") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    for (int i = 0; i < 200; ++i) {
        const Complex z{u(rng), u(rng)};
        const Complex a = complex_erfc(std::conj(z));
        const Complex b = std::conj(complex_erfc(z));
        REQUIRE(std::abs(a - b) <= 1e-13 * std::max(std::abs(b), 1e-300));
    }
}

TEST_CASE("log_factorial values") {
    REQUIRE(log_factorial(0) == 0.0);
    REQUIRE(log_factorial(1) == 0.0);
    // Exact products as the oracle for small n.
    long double fact = 1.0L;
    for (long n = 2; n <= 25; ++n) {
        fact *= n;
        const double ref = static_cast<double>(std::log(fact));
        REQUIRE(log_factorial(n) == Catch::Approx(ref).epsilon(1e-14));
    }
    REQUIRE(log_factorial(5) == Catch::Approx(4.787491742782045994248).epsilon(1e-14));
    REQUIRE_THROWS_AS(log_factorial(-1), std::domain_error);
}

TEST_CASE("Stirling bracket 1/(12n+1) < ln n! - ln(sqrt(2 pi n) n^n e^-n) < 1/(12n)") {
    for (long n : {1L, 2L, 5L, 10L, 100L, 1000L, 10000L}) {
        const double nn = static_cast<double>(n);
        const double stirling = 0.5 * std::log(2.0 * M_PI * nn) + nn * std::log(nn) - nn;
        const double corr = log_factorial(n) - stirling;
        REQUIRE(corr > 1.0 / (12.0 * nn + 1.0));
        REQUIRE(corr < 1.0 / (12.0 * nn));
    }
}
