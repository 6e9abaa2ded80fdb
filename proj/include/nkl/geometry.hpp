#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>

namespace nkl {

using Complex = std::complex<double>;

/// Thrown when a map is evaluated on (or too close to) the focal cut
/// [-F, F], where the branch functions are undefined.
struct CutError : std::domain_error {
    using std::domain_error::domain_error;
};

inline constexpr double kCutTolerance = 1e-14;

/// Focus distance F = 2 sqrt(t / (1 - t^2)) of the droplet ellipse.
inline double focus_distance(double t) {
    if (!(t >= 0.0 && t < 1.0)) throw std::domain_error("focus_distance: t must lie in [0,1)");
    return 2.0 * std::sqrt(t / (1.0 - t * t));
}

/// Droplet ellipse for the canonical potential: semi-axes
/// a = sqrt((1+t)/(1-t)), b = sqrt((1-t)/(1+t)), foci at +/-F.
struct EllipseGeometry {
    double t = 0.0;
    double F = 0.0;
    double a = 1.0;
    double b = 1.0;

    static EllipseGeometry from_t(double t) {
        if (!(t >= 0.0 && t < 1.0))
            throw std::domain_error("EllipseGeometry: t must lie in [0,1)");
        EllipseGeometry g;
        g.t = t;
        g.F = focus_distance(t);
        g.a = std::sqrt((1.0 + t) / (1.0 - t));
        g.b = std::sqrt((1.0 - t) / (1.0 + t));
        return g;
    }

    Complex boundary_point(double phi) const {
        return {a * std::cos(phi), b * std::sin(phi)};
    }
};

/// Confocal coordinates (b, phi): z = sqrt(b^2 + F^2) cos(phi) + i b sin(phi).
struct EllipticCoords {
    double bcoord = 0.0;
    double phi = 0.0;
};

enum class RegionLabel { InsideBulk, OutsideBulk, BoundaryBand, OnCut };

/// Distance from z to the segment [-F, F] on the real axis.
inline double cut_distance(Complex z, double F) {
    const double dx = std::max(std::abs(z.real()) - F, 0.0);
    return std::hypot(dx, z.imag());
}

namespace detail {

inline void require_off_cut(Complex z, double F) {
    if (cut_distance(z, F) < kCutTolerance)
        throw CutError("point lies on the focal cut [-F,F]");
}

// Right half plane plus the nonnegative imaginary axis.  The negative
// imaginary axis is deliberately excluded: the branch convention treats
// points with Re z = 0, Im z < 0 by the "outside" formula.
inline bool in_half_plane(Complex z) {
    return z.real() > 0.0 || (z.real() == 0.0 && z.imag() >= 0.0);
}

} // namespace detail

/// Branch-consistent square root of z^2 - F^2 (sign flips outside the
/// right half plane so that T(z) ~ z at infinity).
inline Complex t_map(Complex z, double F) {
    detail::require_off_cut(z, F);
    const Complex s = std::sqrt(z * z - F * F);
    return detail::in_half_plane(z) ? s : -s;
}

/// Inverse Joukowski-type map onto the punctured unit disk: the branch of
/// (z -/+ sqrt(z^2 - F^2))/F with modulus below one.
inline Complex u_map(Complex z, double F) {
    if (!(F > 0.0)) throw std::domain_error("u_map: F must be positive");
    detail::require_off_cut(z, F);
    const Complex s = std::sqrt(z * z - F * F);
    return detail::in_half_plane(z) ? (z - s) / F : (z + s) / F;
}

/// Inverse of u_map: the Joukowski map (F/2)(u + 1/u).
inline Complex u_inverse(Complex u, double F) {
    const double r = std::abs(u);
    if (!(r > 0.0 && r < 1.0)) throw std::domain_error("u_inverse: need 0 < |u| < 1");
    return 0.5 * F * (u + 1.0 / u);
}

/// Quarter-power prefactor ((z+F)/(z-F))^{1/4} + ((z-F)/(z+F))^{1/4};
/// identically 2 for F = 0.
inline Complex w_map(Complex z, double F) {
    if (F < 0.0) throw std::domain_error("w_map: F must be nonnegative");
    detail::require_off_cut(z, F);
    if (F == 0.0) return {2.0, 0.0};
    const Complex q = (z + F) / (z - F);
    return std::pow(q, 0.25) + std::pow(1.0 / q, 0.25);
}

/// Confocal coordinates of z with foci +/-F.
inline EllipticCoords elliptic_coords(Complex z, double F) {
    detail::require_off_cut(z, F);
    const double x = z.real();
    const double y = z.imag();
    if (F == 0.0) return {std::abs(z), std::arg(z)};
    const double s = x * x + y * y;
    const double d = s - F * F;
    const double disc = std::sqrt(4.0 * y * y * F * F + d * d);
    // conjugate form when d < 0: the direct difference cancels for points
    // hugging the cut and can round below zero
    const double b2 = d >= 0.0 ? 0.5 * (d + disc) : 2.0 * y * y * F * F / (disc - d);
    const double b = std::sqrt(b2);
    const double a = std::sqrt(b2 + F * F);
    return {b, std::atan2(y / b, x / a)};
}

/// Angle of the outward normal to the droplet boundary at parameter phi.
inline double normal_angle(double t, double phi) {
    if (!(t >= 0.0 && t < 1.0)) throw std::domain_error("normal_angle: t must lie in [0,1)");
    return std::atan2((1.0 + t) * std::sin(phi), (1.0 - t) * std::cos(phi));
}

/// Stratify the plane by the offset ellipses with semi-axes a -/+ delta,
/// b -/+ delta (not by Euclidean distance to the boundary).  Points of the
/// focal cut that the offset ellipses leave unresolved are labelled OnCut;
/// a cut point deep in the bulk still counts as InsideBulk.
inline RegionLabel classify(Complex z, double t, double delta) {
    if (!(delta > 0.0)) throw std::domain_error("classify: delta must be positive");
    const EllipseGeometry g = EllipseGeometry::from_t(t);
    const double x = z.real();
    const double y = z.imag();
    const double ai = g.a - delta;
    const double bi = g.b - delta;
    if (ai > 0.0 && bi > 0.0) {
        const double q = (x / ai) * (x / ai) + (y / bi) * (y / bi);
        if (q < 1.0) return RegionLabel::InsideBulk;
    }
    const double ao = g.a + delta;
    const double bo = g.b + delta;
    const double qo = (x / ao) * (x / ao) + (y / bo) * (y / bo);
    if (qo > 1.0) return RegionLabel::OutsideBulk;
    if (g.F > 0.0 && cut_distance(z, g.F) <= kCutTolerance) return RegionLabel::OnCut;
    return RegionLabel::BoundaryBand;
}

} // namespace nkl
