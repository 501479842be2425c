#pragma once

#include <functional>
#include <sstream>
#include <string>

#include "epstein/grid.hpp"
#include "epstein/hyp3.hpp"

namespace epstein {

/// Pointwise 2-jet of a log density, as analytic closures.
struct MetricClosure {
    std::function<double(Complex)> eta;
    std::function<Complex(Complex)> eta_z;
    std::function<Complex(Complex)> eta_zz;
    std::function<double(Complex)> eta_zzbar;
};

/// sigma = |dz|^2.
inline MetricClosure flat_metric() {
    return {[](Complex) { return 0.0; },
            [](Complex) { return Complex{0.0}; },
            [](Complex) { return Complex{0.0}; },
            [](Complex) { return 0.0; }};
}

/// Poincare metric |dz|^2 / (Im z)^2 of the upper half-plane.
inline MetricClosure half_plane_poincare() {
    return {[](Complex z) { return -std::log(z.imag()); },
            [](Complex z) { return Complex(0.0, 0.5 / z.imag()); },
            [](Complex z) { return Complex(-0.25 / (z.imag() * z.imag()), 0.0); },
            [](Complex z) { return 0.25 / (z.imag() * z.imag()); }};
}

/// Poincare metric 4 |dz|^2 / (1 - |z|^2)^2 of the unit disk.
inline MetricClosure disk_poincare() {
    return {[](Complex z) { return std::log(2.0) - std::log(1.0 - std::norm(z)); },
            [](Complex z) { return std::conj(z) / (1.0 - std::norm(z)); },
            [](Complex z) {
                const Complex r = std::conj(z) / (1.0 - std::norm(z));
                return r * r;
            },
            [](Complex z) {
                const double d = 1.0 - std::norm(z);
                return 1.0 / (d * d);
            }};
}

/// Hyperbolic metric |dz|^2 / sin^2(Im z) of the strip 0 < Im z < pi; the
/// horizontal translation z -> z + l is an isometry, so this descends to the
/// cylinder of core length l.
inline MetricClosure strip_poincare() {
    return {[](Complex z) { return -std::log(std::sin(z.imag())); },
            [](Complex z) { return Complex(0.0, 0.5 / std::tan(z.imag())); },
            [](Complex z) {
                const double s = std::sin(z.imag());
                return Complex(-0.25 / (s * s), 0.0);
            },
            [](Complex z) {
                const double s = std::sin(z.imag());
                return 0.25 / (s * s);
            }};
}

/// c * sigma for a constant c > 0.
inline MetricClosure scaled_closure(MetricClosure m, double c) {
    if (!(c > 0.0)) throw std::domain_error("scaled_closure: factor must be positive");
    const double shift = 0.5 * std::log(c);
    MetricClosure out = m;
    out.eta = [m, shift](Complex z) { return m.eta(z) + shift; };
    return out;
}

enum class DerivSource { Analytic, FiniteDifference };

/// Conformal metric e^{2 eta} |dz|^2 on a chart grid, carrying the 2-jet of
/// the log density eta.
struct ConformalMetricField {
    ChartGrid grid;
    Field<double> eta;
    Field<Complex> eta_z;
    Field<Complex> eta_zz;
    Field<double> eta_zzbar;
    DerivSource source = DerivSource::Analytic;

    double density(int i, int j) const { return std::exp(2.0 * eta(i, j)); }

    static ConformalMetricField from_closure(const ChartGrid& g, const MetricClosure& m) {
        ConformalMetricField s;
        s.grid = g;
        s.eta = Field<double>(g);
        s.eta_z = Field<Complex>(g);
        s.eta_zz = Field<Complex>(g);
        s.eta_zzbar = Field<double>(g);
        s.source = DerivSource::Analytic;
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) {
                const Complex z = g.point(i, j);
                s.eta(i, j) = m.eta(z);
                s.eta_z(i, j) = m.eta_z(z);
                s.eta_zz(i, j) = m.eta_zz(z);
                s.eta_zzbar(i, j) = m.eta_zzbar(z);
            }
        s.check_closure_consistency();
        return s;
    }

    static ConformalMetricField from_samples(const ChartGrid& g, Field<double> eta_samples,
                                             const DiffOps& ops) {
        ConformalMetricField s;
        s.grid = g;
        s.eta_z = ops.dz(eta_samples);
        s.eta_zz = ops.dzz(eta_samples);
        const Field<double> lap = ops.flat_laplacian(eta_samples);
        s.eta_zzbar = Field<double>(g);
        for (size_t n = 0; n < lap.size(); ++n) s.eta_zzbar.v[n] = 0.25 * lap.v[n];
        s.eta = std::move(eta_samples);
        s.source = DerivSource::FiniteDifference;
        return s;
    }

    /// factor * sigma; the log density shifts by a constant, derivatives are
    /// unchanged.
    ConformalMetricField scaled(double factor) const {
        if (!(factor > 0.0)) throw std::domain_error("ConformalMetricField::scaled: factor must be positive");
        ConformalMetricField out = *this;
        const double shift = 0.5 * std::log(factor);
        for (double& e : out.eta.v) e += shift;
        return out;
    }

    /// e^{2u} * sigma for a grid field u, with derivatives of u taken by
    /// finite differences.
    ConformalMetricField conformally_scaled(const Field<double>& u, const DiffOps& ops) const {
        if (!u.same_shape(eta)) throw std::invalid_argument("conformally_scaled: field shape mismatch");
        ConformalMetricField out = *this;
        const Field<Complex> uz = ops.dz(u);
        const Field<Complex> uzz = ops.dzz(u);
        const Field<double> ulap = ops.flat_laplacian(u);
        for (size_t n = 0; n < out.eta.size(); ++n) {
            out.eta.v[n] += u.v[n];
            out.eta_z.v[n] += uz.v[n];
            out.eta_zz.v[n] += uzz.v[n];
            out.eta_zzbar.v[n] += 0.25 * ulap.v[n];
        }
        out.source = DerivSource::FiniteDifference;
        return out;
    }

private:
    /// Analytic closures are cross-checked against finite differences of the
    /// sampled eta at a few interior probes; catches sign errors in
    /// hand-derived jets.
    void check_closure_consistency() const {
        const DiffOps ops(grid);
        const Field<Complex> fd = ops.dz(eta);
        const int pi[3] = {grid.nx / 2, grid.nx / 3, 2 * grid.nx / 3};
        const int pj[3] = {grid.ny / 2, grid.ny / 3, 2 * grid.ny / 3};
        for (int i : pi)
            for (int j : pj) {
                const double scale = 1.0 + std::abs(eta_z(i, j));
                const double tol = 20.0 * (grid.dx * grid.dx + grid.dy * grid.dy) * scale;
                if (std::abs(fd(i, j) - eta_z(i, j)) > tol) {
                    std::ostringstream msg;
                    msg << "ConformalMetricField: closure derivative disagrees with finite differences "
                        << "at node (" << i << "," << j << "): |diff| = " << std::abs(fd(i, j) - eta_z(i, j));
                    throw std::invalid_argument(msg.str());
                }
            }
    }
};

/// Pointwise Gaussian curvature K = -4 e^{-2 eta} eta_zzbar.
inline Field<double> gauss_curvature(const ConformalMetricField& s) {
    Field<double> K(s.grid);
    for (size_t n = 0; n < K.size(); ++n)
        K.v[n] = -4.0 * std::exp(-2.0 * s.eta.v[n]) * s.eta_zzbar.v[n];
    return K;
}

/// Coefficient field q of a quadratic differential q dz^2.
struct QuadDifferential {
    ChartGrid grid;
    Field<Complex> q;
};

/// Schwarzian derivative of sigma2 relative to sigma1:
/// (eta2'' - eta2'^2 - eta1'' + eta1'^2) dz^2. Satisfies the cocycle identity
/// B(s1,s3) = B(s1,s2) + B(s2,s3).
inline QuadDifferential schwarzian_B(const ConformalMetricField& s1, const ConformalMetricField& s2) {
    if (!s1.grid.same_chart(s2.grid)) throw std::invalid_argument("schwarzian_B: metrics on different grids");
    QuadDifferential B{s1.grid, Field<Complex>(s1.grid)};
    for (size_t n = 0; n < B.q.size(); ++n) {
        const Complex a = s1.eta_zz.v[n] - s1.eta_z.v[n] * s1.eta_z.v[n];
        const Complex b = s2.eta_zz.v[n] - s2.eta_z.v[n] * s2.eta_z.v[n];
        B.q.v[n] = b - a;
    }
    return B;
}

/// Locally injective holomorphic map with its first three derivatives.
struct HolomorphicMap {
    std::function<Complex(Complex)> f;
    std::function<Complex(Complex)> df;
    std::function<Complex(Complex)> d2f;
    std::function<Complex(Complex)> d3f;
};

inline HolomorphicMap mobius_map(const MobiusTransform& m) {
    return {[m](Complex z) { return (m.a * z + m.b) / (m.c * z + m.d); },
            [m](Complex z) { const Complex d = m.c * z + m.d; return 1.0 / (d * d); },
            [m](Complex z) { const Complex d = m.c * z + m.d; return -2.0 * m.c / (d * d * d); },
            [m](Complex z) { const Complex d = m.c * z + m.d; return 6.0 * m.c * m.c / (d * d * d * d); }};
}

inline HolomorphicMap log_map() {
    return {[](Complex z) { return std::log(z); },
            [](Complex z) { return 1.0 / z; },
            [](Complex z) { return -1.0 / (z * z); },
            [](Complex z) { return 2.0 / (z * z * z); }};
}

/// Principal branch of z^alpha; single-valued on the upper half-plane.
inline HolomorphicMap power_map(double alpha) {
    return {[alpha](Complex z) { return std::pow(z, alpha); },
            [alpha](Complex z) { return alpha * std::pow(z, alpha - 1.0); },
            [alpha](Complex z) { return alpha * (alpha - 1.0) * std::pow(z, alpha - 2.0); },
            [alpha](Complex z) { return alpha * (alpha - 1.0) * (alpha - 2.0) * std::pow(z, alpha - 3.0); }};
}

/// Koebe function w / (1 - w)^2 on the unit disk.
inline HolomorphicMap koebe_map() {
    return {[](Complex w) { const Complex d = 1.0 - w; return w / (d * d); },
            [](Complex w) { const Complex d = 1.0 - w; return (1.0 + w) / (d * d * d); },
            [](Complex w) { const Complex d = 1.0 - w; return (4.0 + 2.0 * w) / (d * d * d * d); },
            [](Complex w) { const Complex d = 1.0 - w; return (18.0 + 6.0 * w) / (d * d * d * d * d); }};
}

inline HolomorphicMap compose(const HolomorphicMap& f, const HolomorphicMap& g) {
    return {[f, g](Complex z) { return f.f(g.f(z)); },
            [f, g](Complex z) { return f.df(g.f(z)) * g.df(z); },
            [f, g](Complex z) {
                const Complex w = g.f(z), gp = g.df(z);
                return f.d2f(w) * gp * gp + f.df(w) * g.d2f(z);
            },
            [f, g](Complex z) {
                const Complex w = g.f(z), gp = g.df(z), gpp = g.d2f(z);
                return f.d3f(w) * gp * gp * gp + 3.0 * f.d2f(w) * gp * gpp + f.df(w) * g.d3f(z);
            }};
}

/// Schwarzian derivative S(f) = f'''/f' - (3/2)(f''/f')^2 at one point.
inline Complex schwarzian_at(const HolomorphicMap& f, Complex z) {
    const Complex fp = f.df(z);
    if (std::abs(fp) < 1e-12) {
        std::ostringstream msg;
        msg << "schwarzian_at: derivative vanishes at z = " << z.real() << " + " << z.imag() << "i";
        throw std::domain_error(msg.str());
    }
    const Complex r2 = f.d2f(z) / fp;
    return f.d3f(z) / fp - 1.5 * r2 * r2;
}

inline QuadDifferential schwarzian_map(const HolomorphicMap& f, const ChartGrid& g) {
    QuadDifferential S{g, Field<Complex>(g)};
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) S.q(i, j) = schwarzian_at(f, g.point(i, j));
    return S;
}

/// Symmetric 2-tensor f |dz|^2 + Re(q dz^2); the real-coordinate matrix is
/// [[f + Re q, -Im q], [-Im q, f - Re q]].
struct SymTwoTensor {
    ChartGrid grid;
    Field<double> f;
    Field<Complex> q;

    /// Positive definite iff f > |q| pointwise.
    bool positive_definite() const {
        for (size_t n = 0; n < f.size(); ++n)
            if (!(f.v[n] > std::abs(q.v[n]))) return false;
        return true;
    }

    bool negative_definite() const {
        for (size_t n = 0; n < f.size(); ++n)
            if (!(-f.v[n] > std::abs(q.v[n]))) return false;
        return true;
    }
};

/// The metric itself as a symmetric 2-tensor: f = e^{2 eta}, q = 0.
inline SymTwoTensor metric_tensor(const ConformalMetricField& s) {
    SymTwoTensor t{s.grid, Field<double>(s.grid), Field<Complex>(s.grid)};
    for (size_t n = 0; n < t.f.size(); ++n) t.f.v[n] = std::exp(2.0 * s.eta.v[n]);
    return t;
}

inline SymTwoTensor tensor_lincomb(double ca, const SymTwoTensor& a, double cb, const SymTwoTensor& b) {
    if (!a.f.same_shape(b.f)) throw std::invalid_argument("tensor_lincomb: shape mismatch");
    SymTwoTensor out{a.grid, Field<double>(a.f.nx, a.f.ny), Field<Complex>(a.f.nx, a.f.ny)};
    for (size_t n = 0; n < out.f.size(); ++n) {
        out.f.v[n] = ca * a.f.v[n] + cb * b.f.v[n];
        out.q.v[n] = ca * a.q.v[n] + cb * b.q.v[n];
    }
    return out;
}

inline SymTwoTensor re_part(const QuadDifferential& phi) {
    return {phi.grid, Field<double>(phi.grid), phi.q};
}

inline SymTwoTensor im_part(const QuadDifferential& phi) {
    SymTwoTensor t{phi.grid, Field<double>(phi.grid), Field<Complex>(phi.grid)};
    for (size_t n = 0; n < t.q.size(); ++n) t.q.v[n] = Complex(0.0, -1.0) * phi.q.v[n];
    return t;
}

/// L^2(h) pairing of symmetric 2-tensors: pointwise inner product
/// <a,b>_h = 2 e^{-4 rho} (f_a f_b + Re(q_a conj(q_b))) integrated against
/// the h-area e^{2 rho} dx dy.
inline double pairing(const SymTwoTensor& a, const SymTwoTensor& b, const ConformalMetricField& h) {
    if (!a.grid.same_chart(b.grid) || !a.grid.same_chart(h.grid))
        throw std::invalid_argument("pairing: tensors on different grids");
    double acc = 0.0;
    for (int j = 0; j < a.grid.ny; ++j)
        for (int i = 0; i < a.grid.nx; ++i) {
            const double e = std::exp(-2.0 * h.eta(i, j));
            const double ip =
                2.0 * e * (a.f(i, j) * b.f(i, j) + (a.q(i, j) * std::conj(b.q(i, j))).real());
            acc += ip * quad_weight(a.grid, i, j);
        }
    return acc;
}

inline double l2_norm(const SymTwoTensor& a, const ConformalMetricField& h) {
    return std::sqrt(std::max(0.0, pairing(a, a, h)));
}

struct TensorAlgebra {
    Field<double> det_a;
    Field<double> trace_h_a;
    Field<double> shape_trace;
    Field<double> shape_det;
    double pairing = 0.0;
};

/// det, h-trace, shape operator a^{-1} b invariants, and the L^2(h) pairing.
inline TensorAlgebra tensor_algebra(const SymTwoTensor& a, const SymTwoTensor& b,
                                    const ConformalMetricField& h) {
    if (!a.grid.same_chart(b.grid) || !a.grid.same_chart(h.grid))
        throw std::invalid_argument("tensor_algebra: tensors on different grids");
    TensorAlgebra out;
    out.det_a = Field<double>(a.grid);
    out.trace_h_a = Field<double>(a.grid);
    out.shape_trace = Field<double>(a.grid);
    out.shape_det = Field<double>(a.grid);
    for (int j = 0; j < a.grid.ny; ++j)
        for (int i = 0; i < a.grid.nx; ++i) {
            const double fa = a.f(i, j), fb = b.f(i, j);
            const Complex qa = a.q(i, j), qb = b.q(i, j);
            const double det_a = fa * fa - std::norm(qa);
            const double det_b = fb * fb - std::norm(qb);
            out.det_a(i, j) = det_a;
            out.trace_h_a(i, j) = 2.0 * fa * std::exp(-2.0 * h.eta(i, j));
            const double scale = fa * fa + std::norm(qa);
            if (std::abs(det_a) <= 1e-13 * scale) {
                std::ostringstream msg;
                msg << "tensor_algebra: singular tensor at node (" << i << "," << j << ")";
                throw std::domain_error(msg.str());
            }
            // tr(a^{-1} b) = 2 (fa fb - Re(qa conj qb)) / det a
            out.shape_trace(i, j) = 2.0 * (fa * fb - (qa * std::conj(qb)).real()) / det_a;
            out.shape_det(i, j) = det_b / det_a;
        }
    out.pairing = pairing(a, b, h);
    return out;
}

/// Hyperbolic sup norm sup |q| e^{-2 eta}; chart invariant.
inline double hyperbolic_sup_norm(const QuadDifferential& phi, const ConformalMetricField& h) {
    if (!phi.grid.same_chart(h.grid)) throw std::invalid_argument("hyperbolic_sup_norm: grid mismatch");
    double m = 0.0;
    for (size_t n = 0; n < phi.q.size(); ++n)
        m = std::max(m, std::abs(phi.q.v[n]) * std::exp(-2.0 * h.eta.v[n]));
    return m;
}

/// Pushforward m_* sigma of a metric closure: on the target chart,
/// eta_*(w) = eta(g(w)) + ln|g'(w)| with g = m^{-1}.
inline MetricClosure pushforward(const MobiusTransform& m, const MetricClosure& src) {
    const MobiusTransform g = m.inverse();
    auto gval = [g](Complex w) { return (g.a * w + g.b) / (g.c * w + g.d); };
    auto den = [g](Complex w) { return g.c * w + g.d; };
    MetricClosure out;
    out.eta = [src, gval, den](Complex w) {
        return src.eta(gval(w)) - 2.0 * std::log(std::abs(den(w)));
    };
    out.eta_z = [src, gval, den, g](Complex w) {
        const Complex d = den(w);
        const Complex gp = 1.0 / (d * d);
        return src.eta_z(gval(w)) * gp - g.c / d;  // g''/(2g') = -c/(cw+d)
    };
    out.eta_zz = [src, gval, den, g](Complex w) {
        const Complex d = den(w);
        const Complex gp = 1.0 / (d * d);
        const Complex gpp = -2.0 * g.c / (d * d * d);
        const Complex z = gval(w);
        // d/dw [eta_z(g) g'] + d/dw [g''/(2g')]
        return src.eta_zz(z) * gp * gp + src.eta_z(z) * gpp + g.c * g.c / (d * d);
    };
    out.eta_zzbar = [src, gval, den](Complex w) {
        const Complex d = den(w);
        return src.eta_zzbar(gval(w)) / std::norm(d * d);
    };
    return out;
}

/// Pushforward of a quadratic differential coefficient: (m_* q)(w) =
/// q(g(w)) g'(w)^2 with g = m^{-1}.
inline std::function<Complex(Complex)> pushforward_quad(const MobiusTransform& m,
                                                        std::function<Complex(Complex)> q) {
    const MobiusTransform g = m.inverse();
    return [g, q](Complex w) {
        const Complex d = g.c * w + g.d;
        const Complex gp = 1.0 / (d * d);
        return q((g.a * w + g.b) / d) * gp * gp;
    };
}

}  // namespace epstein
