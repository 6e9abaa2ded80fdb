#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <random>

#include "nkl/kernel.hpp"
#include "nkl/orthopoly.hpp"
#include "nkl/quadrature.hpp"

using namespace nkl;

namespace {

double rel_diff(const ScaledComplex& a, const ScaledComplex& b) {
    const ScaledComplex d = sc_sub(a, b);
    if (d.is_zero()) return 0.0;
    const ScaledComplex ref = sc_log_abs(a) > sc_log_abs(b) ? a : b;
    return sc_abs(sc_div(d, ref));
}

} // namespace

TEST_CASE("recurrence coefficients") {
    REQUIRE(recurrence_coeff(0, 5, 0.3) == 0.0);
    REQUIRE(recurrence_coeff(7, 7, 0.0) == Catch::Approx(1.0).epsilon(1e-15));
    REQUIRE(recurrence_coeff(10, 100, 0.3) ==
            Catch::Approx(0.3314967720658979360).epsilon(1e-15));
}

TEST_CASE("p0 closed form") {
    const CanonicalModel model(4, 0.2);
    REQUIRE(poly_p0(model) == Catch::Approx(1.116922057251033866).epsilon(1e-15));
    const ScaledComplex p0 = poly_sequence(model, {0.7, -0.3}, 0)[0];
    REQUIRE(sc_to_native(p0).real() == Catch::Approx(poly_p0(model)).epsilon(1e-15));
}

TEST_CASE("t = 0 polynomials are monomials") {
    const CanonicalModel model(3, 0.0);
    const Complex z{1.0, 1.0};
    const PolySequence seq = poly_sequence(model, z, 20);
    for (long m = 0; m <= 20; ++m) {
        const double coef = std::exp(
            0.5 * ((m + 1) * std::log(3.0) - std::log(M_PI) - log_factorial(m)));
        const Complex expected = coef * std::pow(z, static_cast<double>(m));
        const Complex got = sc_to_native(seq[static_cast<std::size_t>(m)]);
        REQUIRE(std::abs(got - expected) <= 1e-12 * std::abs(expected));
    }
}

TEST_CASE("parity and conjugation symmetry") {
    const CanonicalModel model(10, 0.45);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-2.5, 2.5);
    for (int i = 0; i < 50; ++i) {
        const Complex z{u(rng), u(rng)};
        const PolySequence plus = poly_sequence(model, z, 25);
        const PolySequence minus = poly_sequence(model, -z, 25);
        const PolySequence conj = poly_sequence(model, std::conj(z), 25);
        for (long m = 0; m <= 25; ++m) {
            const auto k = static_cast<std::size_t>(m);
            const double sign = (m % 2 == 0) ? 1.0 : -1.0;
            REQUIRE(rel_diff(minus[k], sc_scale(plus[k], sign)) <= 1e-13);
            REQUIRE(rel_diff(conj[k], sc_conj(plus[k])) <= 1e-13);
        }
    }
}

TEST_CASE("values at zero follow the even-degree closed form") {
    const CanonicalModel model(6, 0.4);
    const PolySequence seq = poly_sequence(model, {0.0, 0.0}, 24);
    for (long m = 0; m <= 24; ++m) {
        const auto k = static_cast<std::size_t>(m);
        if (m % 2 == 1) {
            REQUIRE(seq[k].is_zero());
            continue;
        }
        const long l = m / 2;
        const double logsq = 0.5 * std::log(1.0 - 0.4 * 0.4) + std::log(6.0) +
                             log_factorial(m) + m * std::log(0.4) - std::log(M_PI) -
                             2.0 * log_factorial(l) - m * std::log(2.0);
        REQUIRE(2.0 * sc_log_abs(seq[k]) == Catch::Approx(logsq).margin(1e-10));
    }
}

TEST_CASE("recurrence matches the closed form up to degree 200") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (double t : {0.1, 0.3, 0.5, 0.7}) {
        const CanonicalModel model(50, t);
        for (int i = 0; i < 8; ++i) {
            const Complex z{u(rng), u(rng)};
            const PolySequence seq = poly_sequence(model, z, 200);
            for (long m : {1L, 5L, 25L, 100L, 200L}) {
                const ScaledComplex closed = poly_closed_form(model, z, m);
                REQUIRE(rel_diff(seq[static_cast<std::size_t>(m)], closed) <= 1e-9);
            }
        }
    }
}

TEST_CASE("t -> 0 continuity toward the monomials") {
    const Complex z{1.3, -0.4};
    const CanonicalModel tiny(5, 1e-8);
    const CanonicalModel zero(5, 0.0);
    const PolySequence a = poly_sequence(tiny, z, 12);
    const PolySequence b = poly_sequence(zero, z, 12);
    for (long m = 0; m <= 12; ++m)
        REQUIRE(rel_diff(a[static_cast<std::size_t>(m)], b[static_cast<std::size_t>(m)]) <= 1e-6);
}

TEST_CASE("derivative relation residual") {
    const CanonicalModel model(12, 0.35);
    SECTION("m = 1 is exact") {
        const auto res = derivative_relation_residual(model, {0.8, 0.6}, 1);
        REQUIRE(!res.absolute);
        REQUIRE(res.value <= 1e-14);
    }
    SECTION("random arguments stay below 1e-10") {
        std::mt19937_64 rng(7);
        std::uniform_real_distribution<double> u(-2.0, 2.0);
        for (int i = 0; i < 60; ++i) {
            const Complex z{u(rng), u(rng)};
            const long m = 1 + static_cast<long>(49.0 * i / 60.0);
            const auto res = derivative_relation_residual(model, z, m);
            if (!res.absolute) REQUIRE(res.value <= 1e-10);
        }
    }
    SECTION("zero of the reference polynomial flags absolute mode") {
        const std::vector<double> zeros = poly_zeros(model, 2);
        const auto res = derivative_relation_residual(model, {zeros.back(), 0.0}, 3);
        REQUIRE(res.absolute);
    }
}

TEST_CASE("zero bound and Jacobi-matrix zeros") {
    SECTION("single zero of p_1 sits at the origin") {
        const CanonicalModel model(4, 0.3);
        const std::vector<double> zeros = poly_zeros(model, 1);
        REQUIRE(zeros.size() == 1);
        REQUIRE(std::abs(zeros[0]) <= 1e-12);
        REQUIRE(std::abs(zeros[0]) <= zero_bound(model, 1));
    }
    SECTION("all rescaled Hermite zeros lie inside F_m") {
        const CanonicalModel model(6, 0.3);
        const double bound = zero_bound(model, 6);
        for (double z : poly_zeros(model, 6)) REQUIRE(std::abs(z) < bound);
    }
    SECTION("F_n decreases monotonically toward F") {
        const double F = focus_distance(0.4);
        double prev = std::numeric_limits<double>::infinity();
        for (long n : {10L, 100L, 1000L}) {
            const CanonicalModel model(n, 0.4);
            const double Fn = zero_bound(model, n);
            REQUIRE(Fn > F);
            REQUIRE(Fn < prev);
            prev = Fn;
        }
        REQUIRE(prev == Catch::Approx(F).epsilon(1e-3));
    }
}

TEST_CASE("general potential reduction") {
    SECTION("real t2 with no linear term is already canonical") {
        const CanonicalReduction r = reduce_general(GeneralPotential(1.0, {0.0, 0.0}, {0.2, 0.0}));
        REQUIRE(r.shift == Complex{0.0, 0.0});
        REQUIRE(r.rotation == 0.0);
        REQUIRE(r.canonical_t == Catch::Approx(0.4).epsilon(1e-15));
        REQUIRE(r.scale == 1.0);
        REQUIRE(r.constant == 0.0);
    }
    SECTION("real t2, complex linear term") {
        const Complex t1{0.3, -0.7};
        const double t2 = 0.15;
        const CanonicalReduction r = reduce_general(GeneralPotential(1.0, t1, {t2, 0.0}));
        REQUIRE(r.shift.real() == Catch::Approx(t1.real() / (1.0 - 2.0 * t2)).epsilon(1e-14));
        REQUIRE(r.shift.imag() == Catch::Approx(-t1.imag() / (1.0 + 2.0 * t2)).epsilon(1e-14));
    }
    SECTION("purely imaginary t2 rotates by pi/2") {
        const CanonicalReduction r = reduce_general(GeneralPotential(4.0, {0.0, 0.0}, {0.0, 0.1}));
        REQUIRE(r.rotation == Catch::Approx(M_PI / 2.0).epsilon(1e-15));
        REQUIRE(r.scale == Catch::Approx(2.0).epsilon(1e-15));
        REQUIRE(r.shift == Complex{0.0, 0.0});
        REQUIRE(r.canonical_t == Catch::Approx(0.2).epsilon(1e-15));
    }
    SECTION("shift completes the square of the potential") {
        // |z|^2 - 2 Re(t1 z + t2 z^2) + C = |z-v|^2 - 2 Re(t2 (z-v)^2)
        const GeneralPotential pot(1.0, {0.25, -0.4}, {0.1, 0.2});
        const CanonicalReduction r = reduce_general(pot);
        std::mt19937_64 rng(11);
        std::uniform_real_distribution<double> u(-2.0, 2.0);
        for (int i = 0; i < 40; ++i) {
            const Complex z{u(rng), u(rng)};
            const double lhs = pot.potential(z) + r.constant;
            const Complex w = z - r.shift;
            const double rhs = std::norm(w) - 2.0 * (pot.t2 * w * w).real();
            REQUIRE(lhs == Catch::Approx(rhs).margin(1e-12));
        }
    }
    REQUIRE_THROWS_AS(GeneralPotential(1.0, {0.0, 0.0}, {0.5, 0.1}), std::domain_error);
    REQUIRE_THROWS_AS(GeneralPotential(-1.0, {0.0, 0.0}, {0.1, 0.0}), std::domain_error);
}

TEST_CASE("composed general polynomials are orthonormal under quadrature") {
    const GeneralPotential pot(2.0, {0.3, 0.1}, {0.0, 0.15});
    const long n = 3;
    const long mmax = 4;
    const CanonicalReduction red = reduce_general(pot);
    // integrate around the shifted center; weight includes the reduction constant
    const Complex center = red.scale * red.shift;
    const double R = std::sqrt(69.1 / (n * (1.0 - red.canonical_t))) * red.scale + 1.0;
    DiskRule rule(R, 160, 256);
    Eigen::MatrixXcd G = Eigen::MatrixXcd::Zero(mmax + 1, mmax + 1);
    for (std::size_t i = 0; i < rule.r.size(); ++i) {
        for (double th : rule.theta) {
            const Complex z = center + Complex{rule.r[i] * std::cos(th), rule.r[i] * std::sin(th)};
            const double w =
                rule.wr[i] * rule.wtheta *
                std::exp(-n * (pot.potential(z) + red.constant));
            const PolySequence seq = general_poly_sequence(pot, n, z, mmax);
            Eigen::VectorXcd v(mmax + 1);
            for (long k = 0; k <= mmax; ++k) v(k) = sc_to_native(seq[static_cast<std::size_t>(k)]);
            G += w * v.conjugate() * v.transpose();
        }
    }
    REQUIRE((G - Eigen::MatrixXcd::Identity(mmax + 1, mmax + 1)).cwiseAbs().maxCoeff() <= 1e-6);
}

TEST_CASE("gram matrix oracle") {
    SECTION("orthonormality for n = 2, t = 0.3") {
        const CanonicalModel model(2, 0.3);
        const Eigen::MatrixXcd G = gram_matrix(model, 6);
        REQUIRE(std::abs(G(0, 0) - 1.0) <= 1e-8);
        REQUIRE((G - Eigen::MatrixXcd::Identity(7, 7)).cwiseAbs().maxCoeff() <= 1e-6);
        for (long k = 0; k <= 6; ++k)
            for (long l = 0; l <= 6; ++l)
                if ((k + l) % 2 == 1) REQUIRE(std::abs(G(k, l)) <= 1e-10);
    }
    SECTION("monic normalization constants at t = 0") {
        const long n = 3;
        DiskRule rule(std::sqrt(69.1 / n) + 1.0, 128, 16);
        for (long m = 0; m <= 4; ++m) {
            const double got = rule.integrate([&](Complex z) {
                return std::pow(std::norm(z), static_cast<double>(m)) *
                       std::exp(-static_cast<double>(n) * std::norm(z));
            });
            const double expected =
                M_PI * std::exp(log_factorial(m) - (m + 1) * std::log(static_cast<double>(n)));
            REQUIRE(got == Catch::Approx(expected).epsilon(1e-8));
        }
    }
}
