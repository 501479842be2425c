#pragma once

// Test-only oracles, kept independent of the library code paths they check.

#include <random>

#include "epstein/verify.hpp"

namespace oracles {

using namespace epstein;

/// Pullback f^* h of the half-plane Poincare metric under a holomorphic map
/// into the half-plane: log density -ln Im f + ln |f'| with closed-form jets.
inline MetricClosure pullback_half_plane(const HolomorphicMap& f) {
    MetricClosure out;
    out.eta = [f](Complex z) { return -std::log(f.f(z).imag()) + std::log(std::abs(f.df(z))); };
    out.eta_z = [f](Complex z) {
        const Complex fp = f.df(z);
        return Complex(0.0, 0.5) * fp / f.f(z).imag() + f.d2f(z) / (2.0 * fp);
    };
    out.eta_zz = [f](Complex z) {
        const Complex fp = f.df(z);
        const double im = f.f(z).imag();
        const Complex a = Complex(0.0, 0.5) * f.d2f(z) / im - fp * fp / (4.0 * im * im);
        return a + (f.d3f(z) * fp - f.d2f(z) * f.d2f(z)) / (2.0 * fp * fp);
    };
    out.eta_zzbar = [f](Complex z) {
        const double im = f.f(z).imag();
        return std::norm(f.df(z)) / (4.0 * im * im);
    };
    return out;
}

/// Centered finite difference of the Gaussian curvature in the conformal
/// direction 2 u tau, with step s.
inline Field<double> curvature_fd(const ConformalMetricField& tau, const Field<double>& u,
                                  const DiffOps& ops, double s) {
    Field<double> up(u.nx, u.ny), um(u.nx, u.ny);
    for (size_t n = 0; n < u.size(); ++n) {
        up.v[n] = s * u.v[n];
        um.v[n] = -s * u.v[n];
    }
    const Field<double> Kp = gauss_curvature(tau.conformally_scaled(up, ops));
    const Field<double> Km = gauss_curvature(tau.conformally_scaled(um, ops));
    Field<double> out(u.nx, u.ny);
    for (size_t n = 0; n < u.size(); ++n) out.v[n] = (Kp.v[n] - Km.v[n]) / (2.0 * s);
    return out;
}

/// Least-squares slope of log(v) against log(x).
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& v) {
    const size_t n = x.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < n; ++i) {
        const double lx = std::log(x[i]), ly = std::log(v[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

inline Field<double> random_smooth_field(const ChartGrid& g, std::mt19937_64& rng, double amp = 1.0) {
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    const double ax = U(rng), ay = U(rng), bx = U(rng), by = U(rng), c0 = U(rng);
    Field<double> u(g);
    const double Lx = g.nx * g.dx, Ly = (g.ny - 1) * g.dy;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const Complex z = g.point(i, j) - g.origin;
            const double px = g.periodic_x ? std::sin(2.0 * M_PI * z.real() / Lx + ax) : std::sin(2.0 * z.real() + ax);
            u(i, j) = amp * (px * std::sin(M_PI * z.imag() / Ly + ay) + 0.3 * bx * std::cos(by + z.imag()) + 0.1 * c0);
        }
    return u;
}

}  // namespace oracles
