#pragma once

#include <future>
#include <limits>
#include <random>

#include "epstein/asymptotics.hpp"

namespace epstein {

struct CheckResult {
    std::string name;
    bool pass = false;
    double measured = 0.0;
    double bound = 0.0;
};

struct SuiteResult {
    std::string suite;
    std::vector<CheckResult> checks;

    bool pass() const {
        for (const CheckResult& c : checks)
            if (!c.pass) return false;
        return true;
    }
};

namespace detail {

inline CheckResult check_below(const std::string& name, double measured, double bound) {
    return {name, measured <= bound, measured, bound};
}

inline CheckResult check_in(const std::string& name, double measured, double lo, double hi) {
    CheckResult c{name, measured >= lo && measured <= hi, measured, hi};
    return c;
}

/// Half-plane Poincare metric plus a few Gaussian bumps and one harmonic
/// term, all with closed-form jets.
inline MetricClosure perturbed_half_plane(std::mt19937_64& rng, double amplitude = 0.08) {
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    struct Bump {
        Complex z0;
        double w2, amp;
    };
    std::vector<Bump> bumps;
    for (int n = 0; n < 2; ++n)
        bumps.push_back({Complex(0.6 * U(rng), 1.25 + 0.35 * U(rng)), 0.45 + 0.2 * U(rng),
                         amplitude * U(rng)});
    const Complex beta(U(rng), U(rng));
    const Complex gamma(0.35 * U(rng), 0.35 * U(rng));
    const double harm = amplitude * U(rng);
    const MetricClosure base = half_plane_poincare();

    MetricClosure out;
    out.eta = [base, bumps, beta, gamma, harm](Complex z) {
        double v = base.eta(z);
        for (const Bump& b : bumps) v += b.amp * std::exp(-std::norm(z - b.z0) / b.w2);
        v += harm * (beta * std::exp(gamma * z)).real();
        return v;
    };
    out.eta_z = [base, bumps, beta, gamma, harm](Complex z) {
        Complex v = base.eta_z(z);
        for (const Bump& b : bumps)
            v += b.amp * (-std::conj(z - b.z0) / b.w2) * std::exp(-std::norm(z - b.z0) / b.w2);
        v += harm * 0.5 * beta * gamma * std::exp(gamma * z);
        return v;
    };
    out.eta_zz = [base, bumps, beta, gamma, harm](Complex z) {
        Complex v = base.eta_zz(z);
        for (const Bump& b : bumps) {
            const Complex c = std::conj(z - b.z0) / b.w2;
            v += b.amp * c * c * std::exp(-std::norm(z - b.z0) / b.w2);
        }
        v += harm * 0.5 * beta * gamma * gamma * std::exp(gamma * z);
        return v;
    };
    out.eta_zzbar = [base, bumps](Complex z) {
        double v = base.eta_zzbar(z);
        for (const Bump& b : bumps) {
            const double r2 = std::norm(z - b.z0);
            v += b.amp * std::exp(-r2 / b.w2) * (r2 / (b.w2 * b.w2) - 1.0 / b.w2);
        }
        return v;
    };
    return out;
}

inline MobiusTransform random_mobius(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    return {Complex(1.0 + 0.3 * U(rng), 0.2 * U(rng)), Complex(0.4 * U(rng), 0.4 * U(rng)),
            Complex(0.25 * U(rng), 0.25 * U(rng)), Complex(1.0 + 0.3 * U(rng), 0.2 * U(rng))};
}

inline ChartGrid small_rect_grid(int nx = 24, int ny = 16) {
    return ChartGrid(Complex(-0.5, 0.85), 1.0 / (nx - 1), 1.0 / (ny - 1), nx, ny);
}

/// Pullback of the ambient metric through the Epstein map by central
/// differences; independent of the closed-form first fundamental form.
inline std::array<double, 3> pullback_first_form_fd(const MetricClosure& m, Complex z, double step) {
    auto P = [&m](Complex w) { return epstein_point_from_jet(w, m.eta(w), m.eta_z(w)); };
    const UpperHalfSpacePoint p0 = P(z);
    const UpperHalfSpacePoint pxp = P(z + step), pxm = P(z - step);
    const UpperHalfSpacePoint pyp = P(z + Complex(0.0, step)), pym = P(z - Complex(0.0, step));
    const Complex zx = (pxp.z - pxm.z) / (2.0 * step);
    const Complex zy = (pyp.z - pym.z) / (2.0 * step);
    const double tx = (pxp.t - pxm.t) / (2.0 * step);
    const double ty = (pyp.t - pym.t) / (2.0 * step);
    const double t2 = p0.t * p0.t;
    return {(std::norm(zx) + tx * tx) / t2,
            ((zx * std::conj(zy)).real() + tx * ty) / t2,
            (std::norm(zy) + ty * ty) / t2};
}

/// Matrix entries (E, F, G) of f |dz|^2 + Re(q dz^2).
inline std::array<double, 3> tensor_entries(double f, Complex q) {
    return {f + q.real(), -q.imag(), f - q.real()};
}

inline std::array<double, 3> first_form_entries(const MetricClosure& m, Complex z) {
    const Complex b = m.eta_zz(z) - m.eta_z(z) * m.eta_z(z);
    const double e2 = std::exp(2.0 * m.eta(z));
    const double K = -4.0 * m.eta_zzbar(z) / e2;
    const double f = 4.0 * std::norm(b) / e2 + 0.25 * (1.0 - K) * (1.0 - K) * e2;
    return tensor_entries(f, 2.0 * (1.0 - K) * b);
}

inline SuiteResult suite_flow(uint64_t seed) {
    SuiteResult out{"flow", {}};
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    const ChartGrid g = small_rect_grid(24, 16);

    double worst_flow = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        const MetricClosure mc = perturbed_half_plane(rng);
        const ConformalMetricField sigma = ConformalMetricField::from_closure(g, mc);
        for (double t : {U(rng), 0.5 * U(rng), 1.0}) {
            const ConformalMetricField flowed = sigma.scaled(std::exp(2.0 * t));
            for (int j = 1; j + 1 < g.ny; ++j)
                for (int i = 1; i + 1 < g.nx; ++i)
                    worst_flow = std::max(
                        worst_flow, hyp_distance(flow_surface(sigma, t, i, j), epstein_point(flowed, i, j)));
        }
    }
    out.checks.push_back(check_below("flow equals scaled-metric surface", worst_flow, 1e-9));

    double worst_nat = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        const MetricClosure mc = perturbed_half_plane(rng);
        const MobiusTransform m = random_mobius(rng);
        const MetricClosure pushed = pushforward(m, mc);
        for (int j = 2; j + 2 < g.ny; j += 3)
            for (int i = 2; i + 2 < g.nx; i += 3) {
                const Complex z = g.point(i, j);
                const UpperHalfSpacePoint lhs =
                    mobius_apply(m, epstein_point_from_jet(z, mc.eta(z), mc.eta_z(z)));
                const Complex w = mobius_apply(m, IdealPoint(z)).value;
                const UpperHalfSpacePoint rhs = epstein_point_from_jet(w, pushed.eta(w), pushed.eta_z(w));
                worst_nat = std::max(worst_nat, hyp_distance(lhs, rhs));
            }
    }
    out.checks.push_back(check_below("Mobius naturality of the Epstein map", worst_nat, 1e-9));

    double worst_jet = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
        const MetricClosure mc = perturbed_half_plane(rng);
        const Complex z0(0.4 * U(rng), 1.1 + 0.3 * U(rng));
        const double alpha = U(rng);
        // Same value and first derivative at z0, different second derivative.
        MetricClosure other = mc;
        other.eta = [mc, z0, alpha](Complex z) {
            const Complex d = z - z0;
            return mc.eta(z) + alpha * (d * d).real();
        };
        other.eta_z = [mc, z0, alpha](Complex z) { return mc.eta_z(z) + alpha * (z - z0); };
        other.eta_zz = [mc, alpha](Complex z) { return mc.eta_zz(z) + alpha; };
        const UpperHalfSpacePoint a = epstein_point_from_jet(z0, mc.eta(z0), mc.eta_z(z0));
        const UpperHalfSpacePoint b = epstein_point_from_jet(z0, other.eta(z0), other.eta_z(z0));
        worst_jet = std::max(worst_jet, std::abs(a.z - b.z) + std::abs(a.t - b.t));
    }
    out.checks.push_back(check_below("image depends only on the 1-jet", worst_jet, 0.0));

    double worst_gnat = 0.0;
    for (int trial = 0; trial < 60; ++trial) {
        const MobiusTransform m = random_mobius(rng);
        const UpperHalfSpacePoint p(Complex(U(rng), U(rng)), 0.5 + 1.5 * std::abs(U(rng)));
        const IdealPoint xi = (trial % 5 == 0) ? IdealPoint::infinity() : IdealPoint(Complex(2.0 * U(rng), 2.0 * U(rng)));
        const double t = 1.5 * U(rng);
        const UpperHalfSpacePoint lhs = mobius_apply(m, geodesic_flow(p, xi, t));
        const UpperHalfSpacePoint rhs = geodesic_flow(mobius_apply(m, p), mobius_apply(m, xi), t);
        worst_gnat = std::max(worst_gnat, hyp_distance(lhs, rhs));
    }
    out.checks.push_back(check_below("geodesic flow naturality", worst_gnat, 1e-10));

    // Fuchsian family: after eps -> eps^2, surface height over eps tends to
    // e^{-rho(z)} = Im z on the half-plane chart.
    double worst_limit = 0.0;
    for (double eps : {0.04, 0.02, 0.01}) {
        const double c = c_of_k(-eps * eps);
        const MetricClosure mc = scaled_closure(half_plane_poincare(), c);
        for (double y : {0.9, 1.3}) {
            const Complex z(0.2, y);
            const UpperHalfSpacePoint p = epstein_point_from_jet(z, mc.eta(z), mc.eta_z(z));
            worst_limit = std::max(worst_limit, std::abs(p.t / eps - y) / y);
        }
    }
    out.checks.push_back(check_below("boundary limit of the family heights", worst_limit, 1e-3));
    return out;
}

inline SuiteResult suite_distance(uint64_t seed) {
    SuiteResult out{"distance", {}};
    std::mt19937_64 rng(seed + 1);
    std::uniform_real_distribution<double> U(-1.0, 1.0);

    auto random_point = [&]() {
        return UpperHalfSpacePoint(Complex(2.0 * U(rng), 2.0 * U(rng)), 0.3 + 2.0 * std::abs(U(rng)));
    };

    double worst_iso = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const MobiusTransform m = random_mobius(rng);
        const UpperHalfSpacePoint p = random_point(), q = random_point();
        worst_iso = std::max(worst_iso,
                             std::abs(hyp_distance(mobius_apply(m, p), mobius_apply(m, q)) - hyp_distance(p, q)));
    }
    out.checks.push_back(check_below("Mobius invariance of the distance", worst_iso, 1e-10));

    double worst_tri = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
        const UpperHalfSpacePoint p = random_point(), q = random_point(), r = random_point();
        worst_tri = std::max(worst_tri, hyp_distance(p, r) - hyp_distance(p, q) - hyp_distance(q, r));
    }
    out.checks.push_back(check_below("triangle inequality", worst_tri, 1e-12));

    const double vert = std::abs(hyp_distance({Complex(0.0), 1.0}, {Complex(0.0), std::exp(1.0)}) - 1.0);
    out.checks.push_back(check_below("vertical geodesic length", vert, 1e-12));

    double worst_flow = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const UpperHalfSpacePoint p = random_point();
        const IdealPoint xi = (trial % 7 == 0) ? IdealPoint::infinity() : IdealPoint(Complex(2.0 * U(rng), 2.0 * U(rng)));
        const double t = 2.0 * U(rng);
        worst_flow = std::max(worst_flow, std::abs(hyp_distance(p, geodesic_flow(p, xi, t)) - std::abs(t)));
    }
    out.checks.push_back(check_below("flow moves by |t|", worst_flow, 1e-10));

    // Closed-form parallel distance against the direct distance between the
    // flowed surface and the rescaled-parameter surface.
    const MetricClosure bump = perturbed_half_plane(rng, 0.25);
    const MetricClosure rho = half_plane_poincare();
    ScaledFamily fam;
    fam.f = [](double e) { return 0.25 * e * (1.0 + 0.5 * e); };
    fam.lambda = [bump, rho](double e, Complex z) {
        return rho.eta(z) + e * (bump.eta(z) - rho.eta(z));
    };
    fam.lambda_z = [bump, rho](double e, Complex z) {
        return rho.eta_z(z) + e * (bump.eta_z(z) - rho.eta_z(z));
    };
    double worst_par = 0.0;
    for (double eps : {0.3, 0.1, 0.05, 0.01}) {
        for (double t : {0.1, 0.3, 1.0}) {
            const double c = std::exp(-2.0 * t);
            for (double x : {-0.3, 0.2}) {
                const Complex z(x, 1.2);
                const double closed = parallel_distance(fam, eps, t, z);
                const double eta1 = fam.lambda(eps, z) - 0.5 * std::log(c * fam.f(eps));
                const double eta2 = fam.lambda(c * eps, z) - 0.5 * std::log(fam.f(c * eps));
                const double direct = hyp_distance(epstein_point_from_jet(z, eta1, fam.lambda_z(eps, z)),
                                                   epstein_point_from_jet(z, eta2, fam.lambda_z(c * eps, z)));
                worst_par = std::max(worst_par, std::abs(closed - direct));
            }
        }
    }
    out.checks.push_back(check_below("parallel distance closed form", worst_par, 1e-9));

    // Exactly scaled family: the distance vanishes identically, and t = 0
    // compares a surface with itself.
    ScaledFamily exact;
    exact.f = [](double e) { return e; };
    exact.lambda = [rho](double, Complex z) { return rho.eta(z); };
    exact.lambda_z = [rho](double, Complex z) { return rho.eta_z(z); };
    double worst_exact = std::max(parallel_distance(exact, 0.2, 0.7, Complex(0.1, 1.0)),
                                  parallel_distance(fam, 0.2, 0.0, Complex(0.1, 1.0)));
    out.checks.push_back(check_below("exactly scaled family stays put", worst_exact, 1e-12));
    return out;
}

inline SuiteResult suite_curvature(uint64_t seed) {
    SuiteResult out{"curvature", {}};
    std::mt19937_64 rng(seed + 2);
    const ChartGrid g = small_rect_grid(28, 20);

    double worst_scale = 0.0;
    for (int trial = 0; trial < 5; ++trial) {
        const ConformalMetricField sigma = ConformalMetricField::from_closure(g, perturbed_half_plane(rng));
        const Field<double> K = gauss_curvature(sigma);
        for (double c : {0.5, 2.0, std::exp(1.0)}) {
            const Field<double> Kc = gauss_curvature(sigma.scaled(c));
            for (size_t n = 0; n < K.size(); ++n)
                worst_scale = std::max(worst_scale, std::abs(Kc.v[n] - K.v[n] / c));
        }
    }
    out.checks.push_back(check_below("curvature scaling", worst_scale, 1e-12));

    double worst_hyp = 0.0;
    {
        Field<double> K = gauss_curvature(ConformalMetricField::from_closure(g, half_plane_poincare()));
        for (double& k : K.v) k += 1.0;
        worst_hyp = std::max(worst_hyp, max_abs(K));
        const ChartGrid gd(Complex(-0.45, -0.45), 0.9 / 19, 0.9 / 19, 20, 20);
        Field<double> Kd = gauss_curvature(ConformalMetricField::from_closure(gd, disk_poincare()));
        for (double& k : Kd.v) k += 1.0;
        worst_hyp = std::max(worst_hyp, max_abs(Kd));
    }
    out.checks.push_back(check_below("Poincare instances have K = -1", worst_hyp, 1e-10));

    {
        // Finite-difference fallback from plain samples of eta.
        const ChartGrid gf(Complex(-0.5, 0.75), 1.0 / 63, 1.0 / 63, 64, 64);
        const DiffOps ops(gf);
        Field<double> eta(gf);
        for (int j = 0; j < gf.ny; ++j)
            for (int i = 0; i < gf.nx; ++i) eta(i, j) = -std::log(gf.point(i, j).imag());
        const ConformalMetricField sigma = ConformalMetricField::from_samples(gf, eta, ops);
        const Field<double> K = gauss_curvature(sigma);
        double interior = 0.0, full = 0.0;
        for (int j = 0; j < gf.ny; ++j)
            for (int i = 0; i < gf.nx; ++i) {
                const double e = std::abs(K(i, j) + 1.0);
                full = std::max(full, e);
                if (i >= 3 && i < gf.nx - 3 && j >= 3 && j < gf.ny - 3) interior = std::max(interior, e);
            }
        out.checks.push_back(check_below("finite-difference curvature, interior", interior, 1e-6));
        out.checks.push_back(check_below("finite-difference curvature, edges", full, 1e-4));
    }

    double worst_id = 0.0;
    for (int trial = 0; trial < 5; ++trial) {
        const ConformalMetricField sigma = ConformalMetricField::from_closure(g, perturbed_half_plane(rng));
        QuadDifferential B{g, Field<Complex>(g)};
        for (size_t n = 0; n < B.q.size(); ++n)
            B.q.v[n] = sigma.eta_zz.v[n] - sigma.eta_z.v[n] * sigma.eta_z.v[n];
        const Field<double> K = gauss_curvature(sigma);
        const SymTwoTensor I = first_form(sigma, B, K);
        const SymTwoTensor II = second_form(sigma, B, K);
        const TensorAlgebra ta = tensor_algebra(I, II, sigma);
        const Field<double> KI = surface_gauss_curvature(sigma, B, K);
        const Field<double> H = surface_mean_curvature(sigma, B, K);
        for (size_t n = 0; n < KI.size(); ++n) {
            worst_id = std::max(worst_id, std::abs(KI.v[n] - (-1.0 + ta.shape_det.v[n])));
            worst_id = std::max(worst_id, std::abs(H.v[n] - 0.5 * ta.shape_trace.v[n]));
        }
    }
    out.checks.push_back(check_below("curvature formulas vs shape operator", worst_id, 1e-9));

    double worst_fuchs = 0.0;
    for (double k : {-0.75, -0.5, -0.1}) {
        const ConformalMetricField sigma =
            ConformalMetricField::from_closure(g, scaled_closure(half_plane_poincare(), c_of_k(k)));
        QuadDifferential B{g, Field<Complex>(g)};
        const Field<double> K = gauss_curvature(sigma);
        const Field<double> KI = surface_gauss_curvature(sigma, B, K);
        const Field<double> H = surface_mean_curvature(sigma, B, K);
        for (size_t n = 0; n < KI.size(); ++n) {
            worst_fuchs = std::max(worst_fuchs, std::abs(KI.v[n] - k));
            worst_fuchs = std::max(worst_fuchs, std::abs(H.v[n] + std::sqrt(1.0 + k)));
        }
    }
    out.checks.push_back(check_below("Fuchsian surface curvatures", worst_fuchs, 1e-12));

    // Pullback of the ambient metric through the map: absolute agreement and
    // second-order convergence under step halving.
    double worst_pull = 0.0, worst_ratio_dev = 0.0;
    for (int trial = 0; trial < 3; ++trial) {
        const MetricClosure mc = perturbed_half_plane(rng);
        for (double x : {-0.25, 0.3}) {
            const Complex z(x, 1.2);
            const std::array<double, 3> exact = first_form_entries(mc, z);
            double err[2];
            for (int lev = 0; lev < 2; ++lev) {
                const double step = 0.02 / (1 << lev);
                const std::array<double, 3> fd = pullback_first_form_fd(mc, z, step);
                err[lev] = std::max({std::abs(fd[0] - exact[0]), std::abs(fd[1] - exact[1]),
                                     std::abs(fd[2] - exact[2])});
            }
            worst_pull = std::max(worst_pull, err[1]);
            worst_ratio_dev = std::max(worst_ratio_dev, std::abs(err[0] / err[1] - 4.0));
        }
    }
    out.checks.push_back(check_below("pullback oracle agreement", worst_pull, 1e-3));
    out.checks.push_back(check_below("pullback second-order convergence (|ratio-4|)", worst_ratio_dev, 0.5));

    // Second fundamental form along a small solved branch: negative definite,
    // and the nondegeneracy denominator stays positive.
    {
        const ModelSurface S = ModelSurface::cylinder(4.0, 2.0, 48, 24, Complex(0.05, 0.02));
        const SolverConfig cfg;
        const FoliationBranch branch =
            continuation(FoliationMode::KSurface, {-0.2, -0.1, -0.05}, S, cfg);
        double worst_neg = -std::numeric_limits<double>::infinity();
        double worst_den = std::numeric_limits<double>::infinity();
        for (const BranchSample& bs : branch.samples) {
            const ConformalMetricField tau = scaled_metric_from(S, bs.u);
            const ConformalMetricField sigma = unscale(branch.mode, bs.k, tau);
            const Field<double> K = gauss_curvature(sigma);
            const QuadDifferential B = intrinsic_B(sigma, S);
            const SymTwoTensor II = second_form(sigma, B, K);
            for (size_t n = 0; n < II.f.size(); ++n)
                worst_neg = std::max(worst_neg, II.f.v[n] + std::abs(II.q.v[n]));
            for (int j = 0; j < S.grid.ny; ++j)
                for (int i = 0; i < S.grid.nx; ++i) {
                    const double den = detail::form_denominator(sigma.eta(i, j), B.q(i, j), K(i, j));
                    worst_den = std::min(worst_den, den);
                }
        }
        out.checks.push_back(check_below("second form negative definite on branch", worst_neg, 0.0));
        out.checks.push_back(check_below("nondegeneracy guard positive", -worst_den, 0.0));
    }
    return out;
}

inline SuiteResult suite_schwarzian(uint64_t seed) {
    SuiteResult out{"schwarzian", {}};
    std::mt19937_64 rng(seed + 3);
    const ChartGrid g = small_rect_grid(24, 18);

    double worst_cocycle = 0.0;
    for (int trial = 0; trial < 5; ++trial) {
        const ConformalMetricField s1 = ConformalMetricField::from_closure(g, perturbed_half_plane(rng));
        const ConformalMetricField s2 = ConformalMetricField::from_closure(g, perturbed_half_plane(rng));
        const ConformalMetricField s3 = ConformalMetricField::from_closure(g, perturbed_half_plane(rng));
        const QuadDifferential B13 = schwarzian_B(s1, s3);
        const QuadDifferential B12 = schwarzian_B(s1, s2);
        const QuadDifferential B23 = schwarzian_B(s2, s3);
        for (size_t n = 0; n < B13.q.size(); ++n)
            worst_cocycle = std::max(worst_cocycle, std::abs(B13.q.v[n] - B12.q.v[n] - B23.q.v[n]));
    }
    out.checks.push_back(check_below("cocycle identity", worst_cocycle, 1e-10));

    {
        const ConformalMetricField flat = ConformalMetricField::from_closure(g, flat_metric());
        const ConformalMetricField hp = ConformalMetricField::from_closure(g, half_plane_poincare());
        out.checks.push_back(
            check_below("half-plane metric is Mobius flat", max_abs(schwarzian_B(flat, hp).q), 1e-12));
    }

    const HolomorphicMap cayley = mobius_map(MobiusTransform{1.0, Complex(0.0, -1.0), 1.0, Complex(0.0, 1.0)});
    const HolomorphicMap slit = compose(koebe_map(), cayley);
    const std::vector<HolomorphicMap> maps{log_map(), power_map(1.5), power_map(0.5), slit};

    double worst_comp = 0.0;
    for (const HolomorphicMap& f : {log_map(), power_map(1.5)}) {
        for (const HolomorphicMap& h : {power_map(0.5), mobius_map(random_mobius(rng))}) {
            for (int j = 0; j < g.ny; j += 4)
                for (int i = 0; i < g.nx; i += 4) {
                    const Complex z = g.point(i, j);
                    const Complex lhs = schwarzian_at(compose(f, h), z);
                    const Complex gp = h.df(z);
                    const Complex rhs = schwarzian_at(f, h.f(z)) * gp * gp + schwarzian_at(h, z);
                    worst_comp = std::max(worst_comp, std::abs(lhs - rhs));
                }
        }
    }
    out.checks.push_back(check_below("composition rule", worst_comp, 1e-8));

    {
        // S(f) = 2 B(|dz|^2, f^*|dz|^2); the pullback metric has log density
        // ln|f'| with jets from f', f'', f'''.
        const HolomorphicMap f = log_map();
        MetricClosure pull;
        pull.eta = [f](Complex z) { return std::log(std::abs(f.df(z))); };
        pull.eta_z = [f](Complex z) { return f.d2f(z) / (2.0 * f.df(z)); };
        pull.eta_zz = [f](Complex z) {
            const Complex fp = f.df(z);
            return (f.d3f(z) * fp - f.d2f(z) * f.d2f(z)) / (2.0 * fp * fp);
        };
        pull.eta_zzbar = [](Complex) { return 0.0; };
        const ConformalMetricField flat = ConformalMetricField::from_closure(g, flat_metric());
        const ConformalMetricField fstar = ConformalMetricField::from_closure(g, pull);
        const QuadDifferential B = schwarzian_B(flat, fstar);
        const QuadDifferential S = schwarzian_map(f, g);
        double worst = 0.0, worst_log = 0.0;
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) {
                worst = std::max(worst, std::abs(S.q(i, j) - 2.0 * B.q(i, j)));
                const Complex z = g.point(i, j);
                worst_log = std::max(worst_log, std::abs(S.q(i, j) - 0.5 / (z * z)));
            }
        out.checks.push_back(check_below("map Schwarzian vs metric Schwarzian", worst, 1e-8));
        out.checks.push_back(check_below("S(log z) = 1/(2 z^2)", worst_log, 1e-12));
    }

    double worst_mob = 0.0;
    for (int trial = 0; trial < 5; ++trial)
        worst_mob = std::max(worst_mob, max_abs(schwarzian_map(mobius_map(random_mobius(rng)), g).q));
    out.checks.push_back(check_below("Schwarzian kills Mobius maps", worst_mob, 1e-12));

    double worst_nehari = 0.0;
    for (const HolomorphicMap& f : maps) {
        const QuadDifferential S = schwarzian_map(f, g);
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) {
                const double y = g.point(i, j).imag();
                worst_nehari = std::max(worst_nehari, std::abs(S.q(i, j)) * y * y);
            }
    }
    out.checks.push_back(check_below("Nehari bound for univalent maps", worst_nehari, 1.5 + 1e-6));

    // Chart invariance: hyperbolic sup norm of a quadratic differential and
    // naturality of B under a Mobius change of chart.
    double worst_inv = 0.0, worst_bnat = 0.0;
    for (int trial = 0; trial < 5; ++trial) {
        const MobiusTransform m = random_mobius(rng);
        const MetricClosure s1 = perturbed_half_plane(rng);
        const MetricClosure s2 = perturbed_half_plane(rng);
        const MetricClosure p1 = pushforward(m, s1);
        const MetricClosure p2 = pushforward(m, s2);
        auto q_src = [s1, s2](Complex z) {
            return (s2.eta_zz(z) - s2.eta_z(z) * s2.eta_z(z)) - (s1.eta_zz(z) - s1.eta_z(z) * s1.eta_z(z));
        };
        const auto q_pushed = pushforward_quad(m, q_src);
        for (int j = 2; j + 2 < g.ny; j += 3)
            for (int i = 2; i + 2 < g.nx; i += 3) {
                const Complex z = g.point(i, j);
                const Complex w = mobius_apply(m, IdealPoint(z)).value;
                const Complex Bw = (p2.eta_zz(w) - p2.eta_z(w) * p2.eta_z(w)) -
                                   (p1.eta_zz(w) - p1.eta_z(w) * p1.eta_z(w));
                worst_bnat = std::max(worst_bnat, std::abs(Bw - q_pushed(w)));
                const double n_src = std::abs(q_src(z)) * std::exp(-2.0 * s1.eta(z));
                const double n_dst = std::abs(Bw) * std::exp(-2.0 * p1.eta(w));
                worst_inv = std::max(worst_inv, std::abs(n_src - n_dst));
            }
    }
    out.checks.push_back(check_below("B naturality under chart change", worst_bnat, 1e-9));
    out.checks.push_back(check_below("hyperbolic sup-norm chart invariance", worst_inv, 1e-9));
    return out;
}

}  // namespace detail

inline std::vector<std::string> suite_names() { return {"flow", "distance", "curvature", "schwarzian"}; }

inline SuiteResult run_suite(const std::string& name, uint64_t seed) {
    if (name == "flow") return detail::suite_flow(seed);
    if (name == "distance") return detail::suite_distance(seed);
    if (name == "curvature") return detail::suite_curvature(seed);
    if (name == "schwarzian") return detail::suite_schwarzian(seed);
    throw std::invalid_argument("unknown verify suite \"" + name + "\"");
}

/// Runs the named suites, fanning out across at most max_threads workers;
/// results come back in input order.
inline std::vector<SuiteResult> run_suites(const std::vector<std::string>& names, uint64_t seed,
                                           unsigned max_threads) {
    std::vector<SuiteResult> results(names.size());
    if (max_threads <= 1 || names.size() <= 1) {
        for (size_t n = 0; n < names.size(); ++n) results[n] = run_suite(names[n], seed);
        return results;
    }
    std::vector<std::future<SuiteResult>> futs(names.size());
    size_t next = 0, done = 0;
    while (done < names.size()) {
        while (next < names.size() && next - done < max_threads) {
            const std::string name = names[next];
            futs[next] = std::async(std::launch::async, [name, seed]() { return run_suite(name, seed); });
            ++next;
        }
        results[done] = futs[done].get();
        ++done;
    }
    return results;
}

}  // namespace epstein
