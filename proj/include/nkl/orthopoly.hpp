#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "nkl/geometry.hpp"
#include "nkl/quadrature.hpp"
#include "nkl/scaled_complex.hpp"
#include "nkl/special_functions.hpp"

namespace nkl {

/// Canonical model: dimension n and real quadratic coupling t in the
/// potential V(z) = |z|^2 - t Re(z^2).  All chapter-level formulas are
/// written for this model; general Gaussian potentials reduce to it.
struct CanonicalModel {
    long n = 1;
    double t = 0.0;

    CanonicalModel(long n_, double t_) : n(n_), t(t_) {
        if (n < 1) throw std::domain_error("CanonicalModel: n must be >= 1");
        if (!(t >= 0.0 && t < 1.0)) throw std::domain_error("CanonicalModel: t must lie in [0,1)");
    }

    double potential(Complex z) const {
        return std::norm(z) - t * (z.real() * z.real() - z.imag() * z.imag());
    }
};

/// General Gaussian potential V(z) = (1/t0)(|z|^2 - 2 Re(t1 z + t2 z^2)).
struct GeneralPotential {
    double t0 = 1.0;
    Complex t1{0.0, 0.0};
    Complex t2{0.0, 0.0};

    GeneralPotential(double t0_, Complex t1_, Complex t2_) : t0(t0_), t1(t1_), t2(t2_) {
        if (!(t0 > 0.0)) throw std::domain_error("GeneralPotential: t0 must be positive");
        if (!(2.0 * std::abs(t2) < 1.0))
            throw std::domain_error("GeneralPotential: need 2|t2| < 1");
    }

    double potential(Complex z) const {
        return (std::norm(z) - 2.0 * (t1 * z + t2 * z * z).real()) / t0;
    }
};

/// Data reducing a general potential to the canonical model: rescale by
/// sqrt(t0), shift by the scaled-coordinate offset v, rotate by half the
/// phase of t2.  `constant` is the additive constant absorbed into the
/// shifted potential; it drops out of every kernel.
struct CanonicalReduction {
    double scale = 1.0;     // sqrt(t0)
    Complex shift{0.0, 0.0}; // v, in the coordinates already divided by sqrt(t0)
    double rotation = 0.0;  // theta = arg t2
    double canonical_t = 0.0; // 2|t2|
    double constant = 0.0;  // C = |v|^2 - 2 Re(t2 v^2)
};

inline CanonicalReduction reduce_general(const GeneralPotential& p) {
    CanonicalReduction r;
    r.scale = std::sqrt(p.t0);
    const Complex t1s = p.t1 / r.scale;
    const double denom = 1.0 - 4.0 * std::norm(p.t2);
    r.shift = (std::conj(t1s) + 2.0 * t1s * std::conj(p.t2)) / denom;
    r.rotation = (p.t2 == Complex{0.0, 0.0}) ? 0.0 : std::arg(p.t2);
    r.canonical_t = 2.0 * std::abs(p.t2);
    r.constant = std::norm(r.shift) - 2.0 * (p.t2 * r.shift * r.shift).real();
    return r;
}

/// Recurrence coefficient r_m = sqrt(m / (n (1 - t^2))), with r_0 = 0.
inline double recurrence_coeff(long m, long n, double t) {
    if (m < 0) throw std::domain_error("recurrence_coeff: m must be >= 0");
    if (n < 1) throw std::domain_error("recurrence_coeff: n must be >= 1");
    if (!(t >= 0.0 && t < 1.0)) throw std::domain_error("recurrence_coeff: t must lie in [0,1)");
    return std::sqrt(static_cast<double>(m) / (static_cast<double>(n) * (1.0 - t * t)));
}

/// Orthonormal polynomial values p_0(z)..p_m(z) in scaled arithmetic.
struct PolySequence {
    std::vector<ScaledComplex> values;

    const ScaledComplex& operator[](std::size_t k) const { return values[k]; }
    std::size_t size() const { return values.size(); }
};

inline double poly_p0(const CanonicalModel& model) {
    return std::sqrt(static_cast<double>(model.n) * std::sqrt(1.0 - model.t * model.t) / M_PI);
}

/// Evaluate p_0..p_m at z via the three-term recurrence
/// z p_k = r_{k+1} p_{k+1} + t r_k p_{k-1}.
inline PolySequence poly_sequence(const CanonicalModel& model, Complex z, long m) {
    if (m < 0) throw std::domain_error("poly_sequence: m must be >= 0");
    PolySequence seq;
    seq.values.reserve(static_cast<std::size_t>(m) + 1);
    ScaledComplex prev = ScaledComplex::zero();
    ScaledComplex cur = sc_from(poly_p0(model));
    seq.values.push_back(cur);
    for (long k = 0; k < m; ++k) {
        const double rk = recurrence_coeff(k, model.n, model.t);
        const double rk1 = recurrence_coeff(k + 1, model.n, model.t);
        ScaledComplex next = sc_mul(cur, z);
        if (model.t != 0.0 && k > 0) next = sc_sub(next, sc_scale(prev, model.t * rk));
        next = sc_scale(next, 1.0 / rk1);
        prev = cur;
        cur = next;
        seq.values.push_back(cur);
    }
    return seq;
}

/// Same recurrence, propagating values and derivatives together.  The
/// derivative route is independent of the closed-form relation
/// p_m' = sqrt(n m (1-t^2)) p_{m-1} that it is used to check.
inline std::pair<PolySequence, PolySequence>
poly_sequence_with_derivative(const CanonicalModel& model, Complex z, long m) {
    if (m < 0) throw std::domain_error("poly_sequence_with_derivative: m must be >= 0");
    PolySequence seq, dseq;
    seq.values.reserve(static_cast<std::size_t>(m) + 1);
    dseq.values.reserve(static_cast<std::size_t>(m) + 1);
    ScaledComplex prev = ScaledComplex::zero();
    ScaledComplex dprev = ScaledComplex::zero();
    ScaledComplex cur = sc_from(poly_p0(model));
    ScaledComplex dcur = ScaledComplex::zero();
    seq.values.push_back(cur);
    dseq.values.push_back(dcur);
    for (long k = 0; k < m; ++k) {
        const double rk = recurrence_coeff(k, model.n, model.t);
        const double rk1 = recurrence_coeff(k + 1, model.n, model.t);
        ScaledComplex next = sc_mul(cur, z);
        ScaledComplex dnext = sc_add(cur, sc_mul(dcur, z));
        if (model.t != 0.0 && k > 0) {
            next = sc_sub(next, sc_scale(prev, model.t * rk));
            dnext = sc_sub(dnext, sc_scale(dprev, model.t * rk));
        }
        next = sc_scale(next, 1.0 / rk1);
        dnext = sc_scale(dnext, 1.0 / rk1);
        prev = cur;
        dprev = dcur;
        cur = next;
        dcur = dnext;
        seq.values.push_back(cur);
        dseq.values.push_back(dcur);
    }
    return {std::move(seq), std::move(dseq)};
}

/// Closed-form value of p_m(z): a rescaled Hermite polynomial for t > 0,
/// the monomial sqrt(n^{m+1}/(pi m!)) z^m for t = 0.  Cross-check oracle
/// for the recurrence path.
inline ScaledComplex poly_closed_form(const CanonicalModel& model, Complex z, long m) {
    if (m < 0) throw std::domain_error("poly_closed_form: m must be >= 0");
    const double n = static_cast<double>(model.n);
    if (model.t == 0.0) {
        const double lpref = 0.5 * ((m + 1) * std::log(n) - std::log(M_PI) - log_factorial(m));
        if (z == Complex{0.0, 0.0})
            return m == 0 ? sc_from_log_polar(lpref, 0.0) : ScaledComplex::zero();
        const double la = std::log(std::abs(z));
        return sc_from_log_polar(lpref + m * la, m * std::arg(z));
    }
    // s computed in logarithms: s = sqrt(n (1-t^2) / (2 t)).
    const double ls = 0.5 * (std::log(n) + std::log1p(-model.t * model.t) - std::log(2.0 * model.t));
    const double s = std::exp(ls);
    const Complex x = s * z;
    // Hermite recurrence H_{k+1} = 2x H_k - 2k H_{k-1} in scaled arithmetic.
    ScaledComplex hprev = ScaledComplex::zero();
    ScaledComplex h = ScaledComplex::one();
    for (long k = 0; k < m; ++k) {
        ScaledComplex next = sc_mul(h, 2.0 * x);
        if (k > 0) next = sc_sub(next, sc_scale(hprev, 2.0 * static_cast<double>(k)));
        hprev = h;
        h = next;
    }
    const double lpref = 0.5 * (m * (std::log(model.t) - std::log(2.0)) - log_factorial(m)) +
                         std::log(poly_p0(model));
    return sc_mul(h, sc_from_log_polar(lpref, 0.0));
}

struct DerivativeResidual {
    double value = 0.0;
    bool absolute = false; // set when the reference term is too small to divide by
};

/// Residual of the derivative relation p_m' = sqrt(n m (1-t^2)) p_{m-1},
/// with p_m' obtained from the differentiated recurrence.  Near a zero of
/// p_{m-1} (reference small against the neighboring-degree amplitude) the
/// ratio is meaningless and the residual is reported in absolute terms
/// with the flag set.
inline DerivativeResidual derivative_relation_residual(const CanonicalModel& model, Complex z, long m) {
    if (m < 1) throw std::domain_error("derivative_relation_residual: m must be >= 1");
    auto [seq, dseq] = poly_sequence_with_derivative(model, z, m);
    const double c = std::sqrt(static_cast<double>(model.n) * static_cast<double>(m) *
                               (1.0 - model.t * model.t));
    const ScaledComplex ref = sc_scale(seq[static_cast<std::size_t>(m - 1)], c);
    const ScaledComplex num = sc_sub(dseq[static_cast<std::size_t>(m)], ref);
    double neighbor = sc_log_abs(seq[static_cast<std::size_t>(m)]);
    if (m >= 2) neighbor = std::max(neighbor, sc_log_abs(seq[static_cast<std::size_t>(m - 2)]));
    const bool degenerate = ref.is_zero() || sc_log_abs(ref) < -690.0 ||
                            sc_log_abs(ref) < std::log(c) + neighbor + std::log(1e-8);
    if (degenerate)
        return {sc_representable(num) ? std::abs(sc_to_native(num)) : sc_abs(num), true};
    return {sc_abs(sc_div(num, ref)), false};
}

/// Bound F_m = F sqrt((m + 1/2)/n) on the zeros of p_m.
inline double zero_bound(const CanonicalModel& model, long m) {
    if (m < 1) throw std::domain_error("zero_bound: m must be >= 1");
    return focus_distance(model.t) *
           std::sqrt((static_cast<double>(m) + 0.5) / static_cast<double>(model.n));
}

/// Zeros of p_m on the real line (real t), via the eigenvalues of the
/// symmetric tridiagonal Jacobi matrix of the Hermite recurrence.
inline std::vector<double> poly_zeros(const CanonicalModel& model, long m) {
    if (m < 1) throw std::domain_error("poly_zeros: m must be >= 1");
    if (model.t == 0.0) return std::vector<double>(static_cast<std::size_t>(m), 0.0);
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(m, m);
    for (long k = 1; k < m; ++k) {
        const double beta = std::sqrt(0.5 * static_cast<double>(k));
        J(k - 1, k) = beta;
        J(k, k - 1) = beta;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    const double s = std::sqrt(static_cast<double>(model.n) * (1.0 - model.t * model.t) /
                               (2.0 * model.t));
    std::vector<double> zeros(static_cast<std::size_t>(m));
    for (long k = 0; k < m; ++k) zeros[static_cast<std::size_t>(k)] = es.eigenvalues()(k) / s;
    return zeros;
}

/// Orthonormal polynomials of the general potential, by composition with
/// the canonical reduction:
///   p_k(z) = t0^{-1/2} e^{-i k theta/2} ptilde_k(e^{i theta/2}(z/sqrt(t0) - v)).
/// These are orthonormal for the weight e^{-n (V + C)} with the reduction
/// constant C; kernels are unaffected by C.
inline PolySequence general_poly_sequence(const GeneralPotential& p, long n, Complex z, long m) {
    const CanonicalReduction red = reduce_general(p);
    const CanonicalModel canon(n, red.canonical_t);
    const Complex rot = std::polar(1.0, 0.5 * red.rotation);
    const Complex u = rot * (z / red.scale - red.shift);
    PolySequence seq = poly_sequence(canon, u, m);
    const double inv_scale = 1.0 / red.scale;
    for (std::size_t k = 0; k < seq.values.size(); ++k) {
        const Complex phase = std::polar(inv_scale, -0.5 * red.rotation * static_cast<double>(k));
        seq.values[k] = sc_mul(seq.values[k], phase);
    }
    return seq;
}

struct QuadratureSpec {
    int nr = 48;
    int ntheta = 64;
    int max_refine = 6;
    double tol = 1e-7;
};

/// Gram matrix G_{kl} = <p_k, p_l> of the orthonormal polynomials under
/// tensor quadrature on a truncated disk; the orthonormality oracle.
/// Refines by doubling until two successive rules agree.
inline Eigen::MatrixXcd gram_matrix(const CanonicalModel& model, long mmax,
                                    const QuadratureSpec& spec = {}) {
    if (mmax < 0) throw std::domain_error("gram_matrix: mmax must be >= 0");
    // Radius where the weight drops below ~1e-30: n V(z) >= n (1-t) |z|^2.
    const double R = std::sqrt(69.1 / (static_cast<double>(model.n) * (1.0 - model.t))) + 1.0;
    const long dim = mmax + 1;
    auto evaluate = [&](int nr, int ntheta) {
        DiskRule rule(R, nr, ntheta);
        Eigen::MatrixXcd G = Eigen::MatrixXcd::Zero(dim, dim);
        for (std::size_t i = 0; i < rule.r.size(); ++i) {
            for (double th : rule.theta) {
                const Complex z{rule.r[i] * std::cos(th), rule.r[i] * std::sin(th)};
                const double w = rule.wr[i] * rule.wtheta * std::exp(-model.n * model.potential(z));
                PolySequence seq = poly_sequence(model, z, mmax);
                Eigen::VectorXcd v(dim);
                for (long k = 0; k <= mmax; ++k)
                    v(k) = sc_to_native(seq[static_cast<std::size_t>(k)]);
                G += w * v.conjugate() * v.transpose();
            }
        }
        return G;
    };
    Eigen::MatrixXcd G = evaluate(spec.nr, spec.ntheta);
    int nr = spec.nr, ntheta = spec.ntheta;
    for (int pass = 0; pass < spec.max_refine; ++pass) {
        nr *= 2;
        ntheta *= 2;
        Eigen::MatrixXcd G2 = evaluate(nr, ntheta);
        const double diff = (G2 - G).cwiseAbs().maxCoeff();
        G = G2;
        if (diff <= spec.tol) return G;
    }
    throw ConvergenceError("gram_matrix: quadrature did not stabilize");
}

} // namespace nkl
