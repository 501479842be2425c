#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>

namespace epstein {

using Complex = std::complex<double>;

/// Unit-determinant 2x2 complex matrix acting on upper half-space and its
/// ideal boundary. Constructors rescale the entries so det = 1; a singular
/// matrix is rejected.
struct MobiusTransform {
    Complex a{1.0}, b{0.0}, c{0.0}, d{1.0};

    MobiusTransform() = default;
    MobiusTransform(Complex a_, Complex b_, Complex c_, Complex d_) : a(a_), b(b_), c(c_), d(d_) {
        const Complex det = a * d - b * c;
        if (std::abs(det) < 1e-30) throw std::invalid_argument("MobiusTransform: singular matrix");
        if (std::abs(det - 1.0) > 1e-12) {
            const Complex s = std::sqrt(det);
            a /= s;
            b /= s;
            c /= s;
            d /= s;
        }
    }

    Complex det() const { return a * d - b * c; }
    MobiusTransform inverse() const { return {d, -b, -c, a}; }

    static MobiusTransform identity() { return {}; }
    static MobiusTransform translation(Complex w) { return {1.0, w, 0.0, 1.0}; }
    /// z -> lambda * z, lambda > 0.
    static MobiusTransform dilation(double lambda) {
        const double r = std::sqrt(lambda);
        return {r, 0.0, 0.0, 1.0 / r};
    }
    /// Maps the point at infinity to the finite point xi.
    static MobiusTransform infinity_to(Complex xi) { return {xi, -1.0, 1.0, 0.0}; }
};

inline MobiusTransform operator*(const MobiusTransform& A, const MobiusTransform& B) {
    return {A.a * B.a + A.b * B.c, A.a * B.b + A.b * B.d,
            A.c * B.a + A.d * B.c, A.c * B.b + A.d * B.d};
}

/// Point of the upper half-space model: horizontal coordinate z, height t > 0.
struct UpperHalfSpacePoint {
    Complex z;
    double t;

    UpperHalfSpacePoint(Complex z_, double t_) : z(z_), t(t_) {
        if (!(t > 0.0)) throw std::invalid_argument("UpperHalfSpacePoint: height must be positive");
    }
};

/// Boundary point: a finite complex number, or the point at infinity.
struct IdealPoint {
    Complex value{0.0};
    bool at_infinity = false;

    IdealPoint() = default;
    explicit IdealPoint(Complex v) : value(v) {}
    static IdealPoint infinity() {
        IdealPoint p;
        p.at_infinity = true;
        return p;
    }
};

inline IdealPoint mobius_apply(const MobiusTransform& m, const IdealPoint& x) {
    if (x.at_infinity) {
        if (std::abs(m.c) == 0.0) return IdealPoint::infinity();
        return IdealPoint(m.a / m.c);
    }
    const Complex den = m.c * x.value + m.d;
    if (std::abs(den) == 0.0) return IdealPoint::infinity();
    return IdealPoint((m.a * x.value + m.b) / den);
}

/// Poincare extension of the boundary action to the interior.
inline UpperHalfSpacePoint mobius_apply(const MobiusTransform& m, const UpperHalfSpacePoint& p) {
    const Complex czd = m.c * p.z + m.d;
    const double den = std::norm(czd) + std::norm(m.c) * p.t * p.t;
    const Complex z = ((m.a * p.z + m.b) * std::conj(czd) + m.a * std::conj(m.c) * p.t * p.t) / den;
    return {z, p.t / den};
}

/// Hyperbolic distance. The 2*asinh form equals acosh(1 + ...) but stays
/// accurate for nearby points.
inline double hyp_distance(const UpperHalfSpacePoint& p, const UpperHalfSpacePoint& q) {
    const double s2 = (std::norm(p.z - q.z) + (p.t - q.t) * (p.t - q.t)) / (4.0 * p.t * q.t);
    return 2.0 * std::asinh(std::sqrt(s2));
}

/// Point at signed distance t from p along the geodesic from p toward xi.
inline UpperHalfSpacePoint geodesic_flow(const UpperHalfSpacePoint& p, const IdealPoint& xi, double t) {
    if (xi.at_infinity) return {p.z, p.t * std::exp(t)};
    // Conjugate xi to infinity, flow vertically, map back. The result does
    // not depend on the choice of conjugating map.
    const MobiusTransform m = MobiusTransform::infinity_to(xi.value);
    const UpperHalfSpacePoint q = mobius_apply(m.inverse(), p);
    return mobius_apply(m, UpperHalfSpacePoint{q.z, q.t * std::exp(t)});
}

}  // namespace epstein
