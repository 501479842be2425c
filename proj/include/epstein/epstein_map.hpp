#pragma once

#include <array>
#include <limits>
#include <vector>

#include "epstein/conformal.hpp"

namespace epstein {

/// Base point of the frame-field description. With eta = 0 at z = 0 the
/// frame is the identity and the map formula gives (0, 2), so consistency of
/// the two descriptions pins the base point to height 2.
inline UpperHalfSpacePoint epstein_base_point() { return {Complex{0.0}, 2.0}; }

/// Epstein point from the 1-jet of the log density at a chart point.
inline UpperHalfSpacePoint epstein_point_from_jet(Complex z, double eta, Complex eta_z) {
    const double D = std::exp(2.0 * eta) + 4.0 * std::norm(eta_z);
    return {z + 4.0 * std::conj(eta_z) / D, 2.0 * std::exp(eta) / D};
}

inline UpperHalfSpacePoint epstein_point(const ConformalMetricField& s, int i, int j) {
    return epstein_point_from_jet(s.grid.point(i, j), s.eta(i, j), s.eta_z(i, j));
}

/// SL(2,C) frame whose orbit of the base point is the Epstein map:
/// translation by z, unipotent shear by eta_z, diagonal density scaling.
inline MobiusTransform epstein_frame_from_jet(Complex z, double eta, Complex eta_z) {
    const MobiusTransform T = MobiusTransform::translation(z);
    const MobiusTransform L{1.0, 0.0, eta_z, 1.0};
    const MobiusTransform D{std::exp(-0.5 * eta), 0.0, 0.0, std::exp(0.5 * eta)};
    return T * L * D;
}

inline MobiusTransform epstein_frame(const ConformalMetricField& s, int i, int j) {
    return epstein_frame_from_jet(s.grid.point(i, j), s.eta(i, j), s.eta_z(i, j));
}

/// Normal geodesic flow of the surface: the Epstein point pushed distance t
/// toward its normal endpoint (the chart point itself). Equals the Epstein
/// point of e^{2t} sigma.
inline UpperHalfSpacePoint flow_surface(const ConformalMetricField& s, double t, int i, int j) {
    return geodesic_flow(epstein_point(s, i, j), IdealPoint(s.grid.point(i, j)), t);
}

/// First fundamental form: (4/sigma)|B|^2 + (1/4)(1-K)^2 sigma + 2(1-K) Re B.
inline SymTwoTensor first_form(const ConformalMetricField& s, const QuadDifferential& B,
                               const Field<double>& K) {
    if (!s.grid.same_chart(B.grid)) throw std::invalid_argument("first_form: grid mismatch");
    SymTwoTensor I{s.grid, Field<double>(s.grid), Field<Complex>(s.grid)};
    for (size_t n = 0; n < I.f.size(); ++n) {
        const double e2 = std::exp(2.0 * s.eta.v[n]);
        const double k = K.v[n];
        const Complex b = B.q.v[n];
        I.f.v[n] = 4.0 * std::norm(b) / e2 + 0.25 * (1.0 - k) * (1.0 - k) * e2;
        I.q.v[n] = 2.0 * (1.0 - k) * b;
    }
    return I;
}

/// Second fundamental form relative to the normal lift:
/// (4/sigma)|B|^2 - (1/4)(1-K^2) sigma - 2K Re B.
inline SymTwoTensor second_form(const ConformalMetricField& s, const QuadDifferential& B,
                                const Field<double>& K) {
    if (!s.grid.same_chart(B.grid)) throw std::invalid_argument("second_form: grid mismatch");
    SymTwoTensor II{s.grid, Field<double>(s.grid), Field<Complex>(s.grid)};
    for (size_t n = 0; n < II.f.size(); ++n) {
        const double e2 = std::exp(2.0 * s.eta.v[n]);
        const double k = K.v[n];
        const Complex b = B.q.v[n];
        II.f.v[n] = 4.0 * std::norm(b) / e2 - 0.25 * (1.0 - k * k) * e2;
        II.q.v[n] = -2.0 * k * b;
    }
    return II;
}

namespace detail {

/// (1-K)^2 - 16 |B|^2 / sigma^2, the nondegeneracy denominator.
inline double form_denominator(double eta, Complex b, double K) {
    return (1.0 - K) * (1.0 - K) - 16.0 * std::norm(b) * std::exp(-4.0 * eta);
}

inline void check_denominator(double den, double eta, Complex b, double K, int i, int j) {
    const double scale = (1.0 - K) * (1.0 - K) + 16.0 * std::norm(b) * std::exp(-4.0 * eta) + 1e-300;
    if (std::abs(den) <= 1e-12 * scale) {
        std::ostringstream msg;
        msg << "degenerate surface point at node (" << i << "," << j << ")";
        throw std::domain_error(msg.str());
    }
}

}  // namespace detail

/// Gaussian curvature of the Epstein surface: 4K / ((1-K)^2 - 16|B|^2/sigma^2).
inline Field<double> surface_gauss_curvature(const ConformalMetricField& s, const QuadDifferential& B,
                                             const Field<double>& K) {
    Field<double> out(s.grid);
    for (int j = 0; j < s.grid.ny; ++j)
        for (int i = 0; i < s.grid.nx; ++i) {
            const double den = detail::form_denominator(s.eta(i, j), B.q(i, j), K(i, j));
            detail::check_denominator(den, s.eta(i, j), B.q(i, j), K(i, j), i, j);
            out(i, j) = 4.0 * K(i, j) / den;
        }
    return out;
}

/// Mean curvature of the Epstein surface:
/// (K^2 - 1 - 16|B|^2/sigma^2) / ((K-1)^2 - 16|B|^2/sigma^2).
inline Field<double> surface_mean_curvature(const ConformalMetricField& s, const QuadDifferential& B,
                                            const Field<double>& K) {
    Field<double> out(s.grid);
    for (int j = 0; j < s.grid.ny; ++j)
        for (int i = 0; i < s.grid.nx; ++i) {
            const double beta = 16.0 * std::norm(B.q(i, j)) * std::exp(-4.0 * s.eta(i, j));
            const double den = detail::form_denominator(s.eta(i, j), B.q(i, j), K(i, j));
            detail::check_denominator(den, s.eta(i, j), B.q(i, j), K(i, j), i, j);
            out(i, j) = (K(i, j) * K(i, j) - 1.0 - beta) / den;
        }
    return out;
}

/// A family gamma(eps) = f(eps) sigma(eps) of scaled metrics, described by
/// the log density lambda of gamma and its z-derivative, plus the scaling
/// function f.
struct ScaledFamily {
    std::function<double(double)> f;
    std::function<double(double, Complex)> lambda;
    std::function<Complex(double, Complex)> lambda_z;
};

/// Closed form for the distance between the time-t flow of the eps-surface
/// and the e^{-2t} eps surface, from the scaled family data.
inline double parallel_distance_from_jets(double f_eps, double f_ceps, double lam_eps, double lam_ceps,
                                          Complex lamz_eps, Complex lamz_ceps, double t) {
    if (!(f_eps > 0.0) || !(f_ceps > 0.0))
        throw std::domain_error("parallel_distance: scaling function must be positive");
    const double c = std::exp(-2.0 * t);
    const double r = std::sqrt(c * f_eps / f_ceps) * std::exp(lam_ceps - lam_eps);
    const double extra = 4.0 * c * f_eps * std::exp(-2.0 * lam_eps) * std::norm(lamz_ceps - lamz_eps);
    const double N = (1.0 - r) * (1.0 - r) + extra;
    const double M = (1.0 + r) * (1.0 + r) + extra;
    if (!(N < M)) throw std::domain_error("parallel_distance: arctanh argument >= 1, not a valid family");
    return 2.0 * std::atanh(std::sqrt(N / M));
}

inline double parallel_distance(const ScaledFamily& fam, double eps, double t, Complex z) {
    const double c = std::exp(-2.0 * t);
    return parallel_distance_from_jets(fam.f(eps), fam.f(c * eps), fam.lambda(eps, z),
                                       fam.lambda(c * eps, z), fam.lambda_z(eps, z),
                                       fam.lambda_z(c * eps, z), t);
}

/// One mesh vertex: Epstein point, normal endpoint (the chart point), the
/// fundamental forms and curvatures there. Non-immersed points are flagged,
/// not fatal; their curvatures are NaN.
struct EpsteinSample {
    UpperHalfSpacePoint base;
    Complex normal_endpoint;
    double I_f;
    Complex I_q;
    double II_f;
    Complex II_q;
    double K_I;
    double H;
    bool degenerate;
};

struct EpsteinMesh {
    ChartGrid grid;
    std::vector<EpsteinSample> vertices;              // grid row-major
    std::vector<std::array<int, 3>> triangles;        // periodic stitching in x
};

inline EpsteinMesh sample_mesh(const ConformalMetricField& s, const QuadDifferential& B,
                               const Field<double>& K) {
    if (!s.grid.same_chart(B.grid)) throw std::invalid_argument("sample_mesh: grid mismatch");
    EpsteinMesh mesh;
    mesh.grid = s.grid;
    mesh.vertices.reserve(s.grid.size());
    const SymTwoTensor I = first_form(s, B, K);
    const SymTwoTensor II = second_form(s, B, K);
    for (int j = 0; j < s.grid.ny; ++j)
        for (int i = 0; i < s.grid.nx; ++i) {
            const double k = K(i, j);
            const Complex b = B.q(i, j);
            const double beta = 16.0 * std::norm(b) * std::exp(-4.0 * s.eta(i, j));
            const double den = (1.0 - k) * (1.0 - k) - beta;
            const double scale = (1.0 - k) * (1.0 - k) + beta + 1e-300;
            const bool degenerate = !(den > 1e-12 * scale);
            const double nan = std::numeric_limits<double>::quiet_NaN();
            mesh.vertices.push_back({epstein_point(s, i, j), s.grid.point(i, j),
                                     I.f(i, j), I.q(i, j), II.f(i, j), II.q(i, j),
                                     degenerate ? nan : 4.0 * k / den,
                                     degenerate ? nan : (k * k - 1.0 - beta) / den,
                                     degenerate});
        }
    const int icells = s.grid.periodic_x ? s.grid.nx : s.grid.nx - 1;
    for (int j = 0; j + 1 < s.grid.ny; ++j)
        for (int i = 0; i < icells; ++i) {
            const int i1 = (i + 1) % s.grid.nx;
            const int v00 = s.grid.index(i, j);
            const int v10 = s.grid.index(i1, j);
            const int v11 = s.grid.index(i1, j + 1);
            const int v01 = s.grid.index(i, j + 1);
            mesh.triangles.push_back({v00, v10, v11});
            mesh.triangles.push_back({v00, v11, v01});
        }
    return mesh;
}

/// Mesh of a metric on a plane chart, with the Schwarzian taken relative to
/// the flat chart metric.
inline EpsteinMesh sample_mesh(const ConformalMetricField& s) {
    QuadDifferential B{s.grid, Field<Complex>(s.grid)};
    for (size_t n = 0; n < B.q.size(); ++n)
        B.q.v[n] = s.eta_zz.v[n] - s.eta_z.v[n] * s.eta_z.v[n];
    return sample_mesh(s, B, gauss_curvature(s));
}

}  // namespace epstein
