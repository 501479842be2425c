#pragma once

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <string>
#include <vector>

#include "epstein/epstein_map.hpp"

namespace epstein {

/// Fuchsian scale factor: the constant c with K(I(c h)) = k, k in (-1, 0).
inline double c_of_k(double k) {
    if (!(k > -1.0) || !(k < 0.0)) throw std::domain_error("c_of_k: k must lie in (-1, 0)");
    const double s = std::sqrt(1.0 + k);
    return (1.0 + s) / (1.0 - s);
}

/// Scaling function for the constant-mean-curvature family; equals 1/c_of_k
/// on (-1, 0) and extends smoothly through 0 (needed for two-sided
/// difference quotients at the origin).
inline double f_cmc(double k) {
    if (!(k > -1.0) || !(k < 1.0)) throw std::domain_error("f_cmc: k must lie in (-1, 1)");
    const double s = std::sqrt(1.0 + k);
    return (1.0 - s) / (1.0 + s);
}

enum class FoliationMode { KSurface, Cmc };

inline const char* mode_name(FoliationMode m) { return m == FoliationMode::KSurface ? "k-surface" : "cmc"; }

struct SolverConfig {
    double newton_tol = 1e-10;       // sup norm of the interior residual
    int max_iter = 30;
    double k_step = 0.02;            // default continuation step
    double linear_solver_tol = 1e-8; // accepted relative defect of the linear solve
};

struct SolverError : std::runtime_error {
    double k;
    double residual;
    SolverError(const std::string& msg, double k_, double res) : std::runtime_error(msg), k(k_), residual(res) {}
};

struct EllipticityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class SurfaceKind { DiskChart, Cylinder };

/// Model end: a hyperbolic surface chart with the quadratic differential
/// datum phi. The cylinder is the strip 0 < Im z < pi modulo z -> z + l,
/// truncated at hyperbolic distance R from the core line Im z = pi/2; the
/// disk chart is a rectangle in the upper half-plane.
struct ModelSurface {
    SurfaceKind kind = SurfaceKind::Cylinder;
    double core_length = 0.0;
    double trunc_radius = 0.0;
    ChartGrid grid;
    ConformalMetricField h;
    QuadDifferential phi;
    DiffOps ops;

    static ModelSurface cylinder(double core_length, double trunc_radius, int nx, int ny,
                                 Complex phi_amplitude) {
        if (!(core_length > 0.0) || !(trunc_radius > 0.0))
            throw std::invalid_argument("ModelSurface::cylinder: need positive length and radius");
        const double y0 = 2.0 * std::atan(std::exp(-trunc_radius));
        const double y1 = 2.0 * std::atan(std::exp(trunc_radius));
        ModelSurface s;
        s.kind = SurfaceKind::Cylinder;
        s.core_length = core_length;
        s.trunc_radius = trunc_radius;
        s.grid = ChartGrid(Complex(0.0, y0), core_length / nx, (y1 - y0) / (ny - 1), nx, ny,
                           true, core_length);
        s.finish(strip_poincare(), [phi_amplitude](Complex) { return phi_amplitude; });
        return s;
    }

    static ModelSurface disk_chart(double x0, double x1, double y0, double y1, int nx, int ny,
                                   Complex phi_amplitude) {
        return disk_chart_with_phi(x0, x1, y0, y1, nx, ny,
                                   [phi_amplitude](Complex) { return phi_amplitude; });
    }

    static ModelSurface disk_chart_with_phi(double x0, double x1, double y0, double y1, int nx, int ny,
                                            std::function<Complex(Complex)> phi_coeff) {
        if (!(x1 > x0) || !(y1 > y0) || !(y0 > 0.0))
            throw std::invalid_argument("ModelSurface::disk_chart: rectangle must sit in the upper half-plane");
        ModelSurface s;
        s.kind = SurfaceKind::DiskChart;
        s.grid = ChartGrid(Complex(x0, y0), (x1 - x0) / (nx - 1), (y1 - y0) / (ny - 1), nx, ny);
        s.finish(half_plane_poincare(), std::move(phi_coeff));
        return s;
    }

    /// Chart with a caller-supplied hyperbolic metric, e.g. the pullback of
    /// the half-plane metric under an explicit Riemann map.
    static ModelSurface custom_chart(const ChartGrid& grid, const MetricClosure& hyperbolic,
                                     std::function<Complex(Complex)> phi_coeff) {
        ModelSurface s;
        s.kind = SurfaceKind::DiskChart;
        s.grid = grid;
        s.finish(hyperbolic, std::move(phi_coeff));
        return s;
    }

    bool is_dirichlet(int i, int j) const {
        if (j == 0 || j == grid.ny - 1) return true;
        if (kind == SurfaceKind::DiskChart && (i == 0 || i == grid.nx - 1)) return true;
        return false;
    }

private:
    void finish(const MetricClosure& metric, std::function<Complex(Complex)> phi_coeff) {
        ops = DiffOps(grid);
        h = ConformalMetricField::from_closure(grid, metric);
        phi.grid = grid;
        phi.q = Field<Complex>(grid);
        for (int j = 0; j < grid.ny; ++j)
            for (int i = 0; i < grid.nx; ++i) phi.q(i, j) = phi_coeff(grid.point(i, j));
        validate();
    }

    void validate() const {
        Field<double> K = gauss_curvature(h);
        for (double& k : K.v) k += 1.0;
        if (max_abs(K) > 1e-10)
            throw std::invalid_argument("ModelSurface: reference metric is not hyperbolic");
        const double qmax = max_abs(phi.q);
        const double htol = (1.0 + qmax) * std::max(1e-8, grid.dx * grid.dx + grid.dy * grid.dy);
        if (max_abs(ops.dzbar(phi.q)) > htol)
            throw std::invalid_argument("ModelSurface: phi is not holomorphic on the chart");
        if (hyperbolic_sup_norm(phi, h) > 1.5 + 1e-9)
            throw std::invalid_argument("ModelSurface: phi violates the sup-norm admissibility bound 3/2");
    }
};

/// tau = e^{2u} h for a grid field u.
inline ConformalMetricField scaled_metric_from(const ModelSurface& s, const Field<double>& u) {
    return s.h.conformally_scaled(u, s.ops);
}

/// Schwarzian of tau in the end described by (h, phi): phi/2 + B(h, tau).
/// At tau = h this is exactly phi/2.
inline QuadDifferential intrinsic_B(const ConformalMetricField& tau, const ModelSurface& s) {
    QuadDifferential B = schwarzian_B(s.h, tau);
    for (size_t n = 0; n < B.q.size(); ++n) B.q.v[n] += 0.5 * s.phi.q.v[n];
    return B;
}

namespace detail {

struct ResidualParts {
    Field<double> K;     // Gaussian curvature of tau
    Field<Complex> b;    // intrinsic Schwarzian coefficient
    Field<double> q2;    // |b|^2 e^{-4 eta} = |B|^2 / tau^2
};

inline ResidualParts residual_parts(const ConformalMetricField& tau, const ModelSurface& s) {
    ResidualParts p;
    p.K = gauss_curvature(tau);
    p.b = intrinsic_B(tau, s).q;
    p.q2 = Field<double>(tau.grid);
    for (size_t n = 0; n < p.q2.size(); ++n)
        p.q2.v[n] = std::norm(p.b.v[n]) * std::exp(-4.0 * tau.eta.v[n]);
    return p;
}

inline void check_k_range(double k) {
    if (!(k > -1.0) || !(k < 1.0)) throw std::domain_error("residual: k must lie in (-1, 1)");
}

inline Field<double> combine_residual(FoliationMode mode, double k, const ResidualParts& p) {
    const double s = std::sqrt(1.0 + k);
    Field<double> r(p.K.nx, p.K.ny);
    if (mode == FoliationMode::KSurface) {
        const double cq = 16.0 * (2.0 * s - 2.0 - k);
        for (size_t n = 0; n < r.size(); ++n) {
            const double K = p.K.v[n];
            r.v[n] = (2.0 + k) * (1.0 + K) * (1.0 + K) + 2.0 * s * (1.0 - K * K) + cq * p.q2.v[n];
        }
    } else {
        for (size_t n = 0; n < r.size(); ++n) {
            const double K = p.K.v[n];
            r.v[n] = 1.0 + s + 2.0 * s * K + (s - 1.0) * (K * K - 16.0 * p.q2.v[n]);
        }
    }
    return r;
}

}  // namespace detail

/// Scaled k-surface residual
/// (2+k)(1+K)^2 + 2 sqrt(1+k)(1-K^2) + 16(2 sqrt(1+k)-2-k)|B|^2/tau^2.
inline Field<double> residual_F(double k, const ConformalMetricField& tau, const ModelSurface& s) {
    detail::check_k_range(k);
    return detail::combine_residual(FoliationMode::KSurface, k, detail::residual_parts(tau, s));
}

/// Scaled constant-mean-curvature residual
/// 1 + sqrt(1+k) + 2 sqrt(1+k) K + (sqrt(1+k)-1)(K^2 - 16|B|^2/tau^2).
inline Field<double> residual_G(double k, const ConformalMetricField& tau, const ModelSurface& s) {
    detail::check_k_range(k);
    return detail::combine_residual(FoliationMode::Cmc, k, detail::residual_parts(tau, s));
}

inline Field<double> residual(FoliationMode mode, double k, const ConformalMetricField& tau,
                              const ModelSurface& s) {
    return mode == FoliationMode::KSurface ? residual_F(k, tau, s) : residual_G(k, tau, s);
}

/// Directional derivative of gauss_curvature at tau in the direction
/// delta tau = 2 u tau: -2 u K - 4 e^{-2 eta} u_zzbar. At tau = h this is
/// 2u - Delta_h u with Delta_h = 4 e^{-2 rho} d^2/(dz dzbar).
inline Field<double> linearize_curvature(const ConformalMetricField& tau, const Field<double>& u,
                                         const DiffOps& ops) {
    if (!u.same_shape(tau.eta)) throw std::invalid_argument("linearize_curvature: shape mismatch");
    const Field<double> K = gauss_curvature(tau);
    const Field<double> lap = ops.flat_laplacian(u);
    Field<double> out(u.nx, u.ny);
    for (size_t n = 0; n < out.size(); ++n)
        out.v[n] = -2.0 * u.v[n] * K.v[n] - std::exp(-2.0 * tau.eta.v[n]) * lap.v[n];
    return out;
}

struct NewtonResult {
    Field<double> u;
    double residual_sup = 0.0;
    int iterations = 0;
    std::vector<double> residual_history;
};

namespace detail {

inline double interior_sup(const Field<double>& r, const ModelSurface& s) {
    double m = 0.0;
    for (int j = 0; j < r.ny; ++j)
        for (int i = 0; i < r.nx; ++i)
            if (!s.is_dirichlet(i, j)) m = std::max(m, std::abs(r(i, j)));
    return m;
}

using Triplets = std::vector<Eigen::Triplet<double>>;

inline void add_x(Triplets& t, const ChartGrid& g, const AxisOps& ax, int row, int i, int j,
                  const Stencil& s, double c) {
    for (int k = 0; k < s.n; ++k)
        t.emplace_back(row, g.index(ax.wrap(i + s.start + k), j), c * s.w[k]);
}

inline void add_y(Triplets& t, const ChartGrid& g, int row, int i, int j, const Stencil& s, double c) {
    for (int k = 0; k < s.n; ++k) t.emplace_back(row, g.index(i, j + s.start + k), c * s.w[k]);
}

inline void add_xy(Triplets& t, const ChartGrid& g, const AxisOps& ax, int row, int i, int j,
                   const Stencil& sx, const Stencil& sy, double c) {
    for (int kx = 0; kx < sx.n; ++kx)
        for (int ky = 0; ky < sy.n; ++ky)
            t.emplace_back(row, g.index(ax.wrap(i + sx.start + kx), j + sy.start + ky),
                           c * sx.w[kx] * sy.w[ky]);
}

/// Exact Jacobian of the discrete residual with respect to u. For a node
/// value perturbation du:
///   dK  = -2 K du - e^{-2 eta} (Dxx + Dyy) du
///   db  = du_zz - 2 eta_z du_z
///   dq2 = e^{-4 eta} 2 Re(conj(b) db) - 4 q2 du
/// assembled against dResidual/dK and dResidual/dq2.
inline Eigen::SparseMatrix<double> assemble_jacobian(FoliationMode mode, double k,
                                                     const ModelSurface& S,
                                                     const ConformalMetricField& tau,
                                                     const ResidualParts& p) {
    const ChartGrid& g = tau.grid;
    const AxisOps& ax = S.ops.x_axis();
    const AxisOps& ay = S.ops.y_axis();
    const double s = std::sqrt(1.0 + k);
    Triplets trips;
    trips.reserve(static_cast<size_t>(g.size()) * 48);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const int row = g.index(i, j);
            if (S.is_dirichlet(i, j)) {
                trips.emplace_back(row, row, 1.0);
                continue;
            }
            const double K = p.K(i, j);
            const Complex b = p.b(i, j);
            const double q2 = p.q2(i, j);
            const double em2 = std::exp(-2.0 * tau.eta(i, j));
            const double em4 = em2 * em2;
            double cA, cB;  // dR/dK and dR/dq2
            if (mode == FoliationMode::KSurface) {
                cA = 2.0 * (2.0 + k) * (1.0 + K) - 4.0 * s * K;
                cB = 16.0 * (2.0 * s - 2.0 - k);
            } else {
                cA = 2.0 * s + 2.0 * (s - 1.0) * K;
                cB = -16.0 * (s - 1.0);
            }
            const Complex bbar_etaz = std::conj(b) * tau.eta_z(i, j);
            trips.emplace_back(row, row, cA * (-2.0 * K) + cB * (-4.0 * q2));
            add_x(trips, g, ax, row, i, j, ax.d2(i), -cA * em2 + cB * em4 * 0.5 * b.real());
            add_y(trips, g, row, i, j, ay.d2(j), -cA * em2 - cB * em4 * 0.5 * b.real());
            add_xy(trips, g, ax, row, i, j, ax.d1(i), ay.d1(j), -cB * em4 * b.imag());
            add_x(trips, g, ax, row, i, j, ax.d1(i), -2.0 * cB * em4 * bbar_etaz.real());
            add_y(trips, g, row, i, j, ay.d1(j), -2.0 * cB * em4 * bbar_etaz.imag());
        }
    Eigen::SparseMatrix<double> J(g.size(), g.size());
    J.setFromTriplets(trips.begin(), trips.end());
    return J;
}

}  // namespace detail

/// Damped-free Newton iteration for the scaled surface equation at fixed k,
/// with u = 0 on the Dirichlet boundary. The linear systems use the exact
/// Jacobian of the discrete residual and a sparse direct factorization.
inline NewtonResult newton_solve(FoliationMode mode, double k, const ModelSurface& S,
                                 Field<double> u0, const SolverConfig& cfg) {
    detail::check_k_range(k);
    if (!(cfg.newton_tol > 0.0) || cfg.max_iter < 1)
        throw std::invalid_argument("newton_solve: bad solver config");
    const ChartGrid& g = S.grid;
    if (u0.nx != g.nx || u0.ny != g.ny) throw std::invalid_argument("newton_solve: initial field shape mismatch");
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            if (S.is_dirichlet(i, j)) u0(i, j) = 0.0;

    NewtonResult out;
    out.u = std::move(u0);
    for (int iter = 0; iter <= cfg.max_iter; ++iter) {
        const ConformalMetricField tau = scaled_metric_from(S, out.u);
        const detail::ResidualParts parts = detail::residual_parts(tau, S);
        const Field<double> r = detail::combine_residual(mode, k, parts);
        out.residual_sup = detail::interior_sup(r, S);
        out.residual_history.push_back(out.residual_sup);
        out.iterations = iter;
        if (out.residual_sup <= cfg.newton_tol) return out;
        if (iter == cfg.max_iter) break;

        const Eigen::SparseMatrix<double> J = detail::assemble_jacobian(mode, k, S, tau, parts);
        Eigen::VectorXd rhs(g.size());
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i)
                rhs[g.index(i, j)] = S.is_dirichlet(i, j) ? -out.u(i, j) : -r(i, j);

        Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
        lu.compute(J);
        if (lu.info() != Eigen::Success)
            throw EllipticityError("newton_solve: linearized operator factorization broke down");
        const Eigen::VectorXd delta = lu.solve(rhs);
        const double defect = (J * delta - rhs).lpNorm<Eigen::Infinity>();
        if (!(defect <= cfg.linear_solver_tol * (1.0 + rhs.lpNorm<Eigen::Infinity>())))
            throw EllipticityError("newton_solve: linear solve lost accuracy, operator near-singular");
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) out.u(i, j) += delta[g.index(i, j)];
    }
    throw SolverError("newton_solve: no convergence within max_iter at k = " + std::to_string(k), k,
                      out.residual_sup);
}

struct BranchSample {
    double k;
    Field<double> u;
    double residual_sup;
};

/// Continuation path k -> tau_k = e^{2 u_k} h with residual certificates.
struct FoliationBranch {
    FoliationMode mode = FoliationMode::KSurface;
    std::vector<BranchSample> samples;

    /// Residuals within tolerance, k strictly increasing toward 0-, and the
    /// sup norm of u nonincreasing on the stored tail.
    void validate(double tol) const {
        if (samples.empty()) throw std::invalid_argument("FoliationBranch: empty");
        for (size_t n = 0; n < samples.size(); ++n) {
            if (!(samples[n].residual_sup <= tol))
                throw std::invalid_argument("FoliationBranch: residual certificate exceeds tolerance");
            if (!(samples[n].k < 0.0)) throw std::invalid_argument("FoliationBranch: k must be negative");
            if (n > 0 && !(samples[n].k > samples[n - 1].k))
                throw std::invalid_argument("FoliationBranch: k values must increase toward 0");
        }
        for (size_t n = samples.size() / 2; n + 1 < samples.size(); ++n)
            if (max_abs(samples[n + 1].u) > max_abs(samples[n].u) + 1e-12)
                throw std::invalid_argument("FoliationBranch: |u| must decrease along the tail");
    }
};

/// Solve along k_list (ascending toward 0-), warm-starting each step from
/// the previous solution. If the first target does not converge from the
/// cold start, march toward it from near k = 0 in steps of k_step; a failure
/// there still aborts, reporting the offending k.
inline FoliationBranch continuation(FoliationMode mode, const std::vector<double>& k_list,
                                    const ModelSurface& S, const SolverConfig& cfg) {
    if (k_list.empty()) throw std::invalid_argument("continuation: empty k list");
    for (size_t n = 0; n < k_list.size(); ++n) {
        if (!(k_list[n] > -1.0) || !(k_list[n] < 0.0))
            throw std::domain_error("continuation: k values must lie in (-1, 0)");
        if (n > 0 && !(k_list[n] > k_list[n - 1]))
            throw std::invalid_argument("continuation: k values must ascend toward 0");
    }
    FoliationBranch branch;
    branch.mode = mode;
    Field<double> u(S.grid);
    bool first = true;
    for (double k : k_list) {
        NewtonResult r;
        try {
            r = newton_solve(mode, k, S, u, cfg);
        } catch (const SolverError&) {
            if (!first || !(cfg.k_step > 0.0)) throw;
            Field<double> w(S.grid);
            for (double km = -cfg.k_step; km > k; km -= cfg.k_step)
                w = newton_solve(mode, km, S, w, cfg).u;
            r = newton_solve(mode, k, S, w, cfg);
        }
        first = false;
        u = r.u;
        branch.samples.push_back({k, u, r.residual_sup});
    }
    return branch;
}

/// Back to the surface metric: sigma_k = c(k) tau in both modes (the two
/// scalings are reciprocal by the same factor).
inline ConformalMetricField unscale(FoliationMode, double k, const ConformalMetricField& tau) {
    return tau.scaled(c_of_k(k));
}

}  // namespace epstein
