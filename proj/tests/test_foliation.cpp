#include <catch2/catch_amalgamated.hpp>

#include <cstring>

#include "oracles.hpp"

using namespace epstein;
using Catch::Approx;

namespace {

std::mt19937_64 rng(173205);

ModelSurface small_cylinder(Complex a = Complex(0.05, 0.02)) {
    return ModelSurface::cylinder(4.0, 2.0, 48, 24, a);
}

bool bitwise_equal(const Field<double>& a, const Field<double>& b) {
    return a.v.size() == b.v.size() &&
           std::memcmp(a.v.data(), b.v.data(), a.v.size() * sizeof(double)) == 0;
}

}  // namespace

TEST_CASE("fuchsian scale factor") {
    REQUIRE(c_of_k(-0.75) == Approx(3.0).margin(1e-14));
    REQUIRE(c_of_k(-1.0 + 1e-12) == Approx(1.0).epsilon(1e-5));
    // series -4/k - 2 + O(k) near zero
    REQUIRE(c_of_k(-0.01) == Approx(-4.0 / -0.01 - 2.0).epsilon(0.01));
    REQUIRE_THROWS_AS(c_of_k(-1.0), std::domain_error);
    REQUIRE_THROWS_AS(c_of_k(0.0), std::domain_error);
    REQUIRE_THROWS_AS(c_of_k(0.5), std::domain_error);
}

TEST_CASE("cmc scaling function") {
    REQUIRE(f_cmc(-0.75) == Approx(1.0 / 3.0).margin(1e-14));
    for (double k : {-0.9, -0.5, -0.2, -0.05})
        REQUIRE(f_cmc(k) * c_of_k(k) == Approx(1.0).margin(1e-13));
    // simple zero at 0 with two-sided derivative -1/4
    REQUIRE(f_cmc(0.0) == 0.0);
    const double d = 1e-6;
    REQUIRE((f_cmc(d) - f_cmc(-d)) / (2.0 * d) == Approx(-0.25).margin(1e-6));
    REQUIRE_THROWS_AS(f_cmc(-1.0), std::domain_error);
}

TEST_CASE("intrinsic schwarzian") {
    const ModelSurface S = small_cylinder();
    const Field<double> zero(S.grid);

    SECTION("at tau = h it is exactly phi/2") {
        const QuadDifferential B = intrinsic_B(S.h, S);
        for (size_t n = 0; n < B.q.size(); ++n)
            REQUIRE(B.q.v[n] == 0.5 * S.phi.q.v[n]);
    }

    SECTION("phi = 0 and tau = h gives zero") {
        const ModelSurface S0 = small_cylinder(Complex(0.0));
        REQUIRE(max_abs(intrinsic_B(S0.h, S0).q) == 0.0);
    }

    SECTION("riemann-map chart: intrinsic B at h matches half the map schwarzian") {
        // f(z) = z^2 is the Riemann map of the quarter plane onto the half
        // plane; the chart hyperbolic metric is f^* h and the datum is
        // phi = S(f) = -3/(2 z^2).
        const HolomorphicMap f = power_map(2.0);
        const ChartGrid g(Complex(0.6, 0.6), 0.8 / 15, 0.8 / 15, 16, 16);
        const ModelSurface Sf = ModelSurface::custom_chart(
            g, oracles::pullback_half_plane(f), [f](Complex z) { return schwarzian_at(f, z); });
        const QuadDifferential B = intrinsic_B(Sf.h, Sf);
        const QuadDifferential Sq = schwarzian_map(f, g);
        for (size_t n = 0; n < B.q.size(); ++n)
            REQUIRE(std::abs(B.q.v[n] - 0.5 * Sq.q.v[n]) < 1e-8);

        // cross-check against the chart-level metric schwarzian route
        const ConformalMetricField flat = ConformalMetricField::from_closure(g, flat_metric());
        const QuadDifferential Bflat = schwarzian_B(flat, Sf.h);
        for (size_t n = 0; n < Bflat.q.size(); ++n)
            REQUIRE(std::abs(Bflat.q.v[n] - 0.5 * Sq.q.v[n]) < 1e-8);
    }
    (void)zero;
}

TEST_CASE("residuals vanish where they should") {
    const ModelSurface S = small_cylinder();
    const ModelSurface S0 = small_cylinder(Complex(0.0));

    SECTION("F(0, h) = 0 for any phi") {
        REQUIRE(max_abs(residual_F(0.0, S.h, S)) < 1e-13);
        REQUIRE(max_abs(residual_G(0.0, S.h, S)) < 1e-13);
    }

    SECTION("phi = 0: h solves both equations for every k") {
        for (double k : {-0.9, -0.5, -0.1, -0.01, 0.3}) {
            REQUIRE(max_abs(residual_F(k, S0.h, S0)) < 1e-12);
            REQUIRE(max_abs(residual_G(k, S0.h, S0)) < 1e-12);
        }
    }

    SECTION("domain errors") {
        REQUIRE_THROWS_AS(residual_F(-1.0, S.h, S), std::domain_error);
        REQUIRE_THROWS_AS(residual_G(-1.5, S.h, S), std::domain_error);
    }
}

TEST_CASE("scaled residual is equivalent to the surface-curvature equation") {
    // c(k)^2 (4 K(sigma) - k[(1-K)^2 - 16|B|^2/sigma^2]) = c(k) F(k, tau)
    // for sigma = c(k) tau; checked pointwise on a random conformal factor.
    const ModelSurface S = small_cylinder();
    const Field<double> u = oracles::random_smooth_field(S.grid, rng, 0.02);
    const ConformalMetricField tau = scaled_metric_from(S, u);
    for (double k : {-0.3, -0.1}) {
        const double c = c_of_k(k);
        const ConformalMetricField sigma = unscale(FoliationMode::KSurface, k, tau);
        const Field<double> Ks = gauss_curvature(sigma);
        const QuadDifferential Bs = intrinsic_B(sigma, S);
        const Field<double> F = residual_F(k, tau, S);
        for (int j = 0; j < S.grid.ny; j += 3)
            for (int i = 0; i < S.grid.nx; i += 3) {
                const double beta = 16.0 * std::norm(Bs.q(i, j)) * std::exp(-4.0 * sigma.eta(i, j));
                const double eq1 = 4.0 * Ks(i, j) - k * ((1.0 - Ks(i, j)) * (1.0 - Ks(i, j)) - beta);
                REQUIRE(c * eq1 == Approx(F(i, j)).margin(1e-10));
            }
    }
}

TEST_CASE("curvature linearization") {
    const ModelSurface S = small_cylinder();

    SECTION("direction h itself has derivative 1 at tau = h") {
        const Field<double> half(S.grid, 0.5);
        const Field<double> d = linearize_curvature(S.h, half, S.ops);
        for (size_t n = 0; n < d.size(); ++n) REQUIRE(d.v[n] == Approx(1.0).margin(1e-12));
        // oracle: K(c h) = -1/c, so d/dc at c = 1 equals +1
        const double fd = (gauss_curvature(S.h.scaled(1.0 + 1e-6))(10, 10) -
                           gauss_curvature(S.h.scaled(1.0 - 1e-6))(10, 10)) /
                          (2e-6);
        REQUIRE(fd == Approx(1.0).margin(1e-6));
    }

    SECTION("zero direction") {
        REQUIRE(max_abs(linearize_curvature(S.h, Field<double>(S.grid), S.ops)) == 0.0);
    }

    SECTION("matches centered finite differences on random directions") {
        const Field<double> u0 = oracles::random_smooth_field(S.grid, rng, 0.05);
        const ConformalMetricField tau = scaled_metric_from(S, u0);
        for (int trial = 0; trial < 20; ++trial) {
            const Field<double> u = oracles::random_smooth_field(S.grid, rng);
            const Field<double> lin = linearize_curvature(tau, u, S.ops);
            const Field<double> fd = oracles::curvature_fd(tau, u, S.ops, 1e-5);
            for (size_t n = 0; n < lin.size(); ++n)
                REQUIRE(lin.v[n] == Approx(fd.v[n]).margin(1e-6));
        }
    }
}

TEST_CASE("jacobian matches directional differences of the residual") {
    const ModelSurface S = small_cylinder();
    const Field<double> u0 = oracles::random_smooth_field(S.grid, rng, 0.03);
    for (FoliationMode mode : {FoliationMode::KSurface, FoliationMode::Cmc}) {
        const double k = -0.15;
        Field<double> ub = u0;
        for (int j = 0; j < S.grid.ny; ++j)
            for (int i = 0; i < S.grid.nx; ++i)
                if (S.is_dirichlet(i, j)) ub(i, j) = 0.0;
        const ConformalMetricField tau = scaled_metric_from(S, ub);
        const auto parts = detail::residual_parts(tau, S);
        const Eigen::SparseMatrix<double> J = detail::assemble_jacobian(mode, k, S, tau, parts);

        const Field<double> v = oracles::random_smooth_field(S.grid, rng);
        const double step = 1e-6;
        Field<double> up = ub, um = ub;
        for (size_t n = 0; n < up.size(); ++n) {
            up.v[n] += step * v.v[n];
            um.v[n] -= step * v.v[n];
        }
        const Field<double> rp = residual(mode, k, scaled_metric_from(S, up), S);
        const Field<double> rm = residual(mode, k, scaled_metric_from(S, um), S);
        Eigen::VectorXd vv(S.grid.size());
        for (int j = 0; j < S.grid.ny; ++j)
            for (int i = 0; i < S.grid.nx; ++i) vv[S.grid.index(i, j)] = v(i, j);
        const Eigen::VectorXd Jv = J * vv;
        for (int j = 1; j + 1 < S.grid.ny; ++j)
            for (int i = 0; i < S.grid.nx; ++i) {
                if (S.is_dirichlet(i, j)) continue;
                const double fd = (rp(i, j) - rm(i, j)) / (2.0 * step);
                REQUIRE(Jv[S.grid.index(i, j)] == Approx(fd).margin(1e-5));
            }
    }
}

TEST_CASE("newton solver") {
    const SolverConfig cfg;

    SECTION("fuchsian data converges immediately to u = 0") {
        const ModelSurface S0 = small_cylinder(Complex(0.0));
        for (FoliationMode mode : {FoliationMode::KSurface, FoliationMode::Cmc}) {
            const NewtonResult r = newton_solve(mode, -0.3, S0, Field<double>(S0.grid), cfg);
            REQUIRE(r.iterations <= 1);
            REQUIRE(max_abs(r.u) == 0.0);
            REQUIRE(r.residual_sup < 1e-12);
        }
    }

    SECTION("small phi on the cylinder, with a posteriori curvature check") {
        const ModelSurface S = small_cylinder(Complex(0.05, 0.0));
        const NewtonResult r = newton_solve(FoliationMode::KSurface, -0.1, S, Field<double>(S.grid), cfg);
        REQUIRE(r.residual_sup < 1e-9);
        REQUIRE(max_abs(r.u) < 0.1 * 0.05);  // O(|phi| |k|)-small
        const ConformalMetricField sigma =
            unscale(FoliationMode::KSurface, -0.1, scaled_metric_from(S, r.u));
        const Field<double> KI =
            surface_gauss_curvature(sigma, intrinsic_B(sigma, S), gauss_curvature(sigma));
        double worst = 0.0;
        for (int j = 1; j + 1 < S.grid.ny; ++j)
            for (int i = 0; i < S.grid.nx; ++i) worst = std::max(worst, std::abs(KI(i, j) + 0.1));
        REQUIRE(worst < 10.0 * cfg.newton_tol);

        // cmc mode: unscaled surface has the right constant mean curvature
        const NewtonResult rc = newton_solve(FoliationMode::Cmc, -0.1, S, Field<double>(S.grid), cfg);
        const ConformalMetricField sc = unscale(FoliationMode::Cmc, -0.1, scaled_metric_from(S, rc.u));
        const Field<double> H = surface_mean_curvature(sc, intrinsic_B(sc, S), gauss_curvature(sc));
        double worstH = 0.0;
        for (int j = 1; j + 1 < S.grid.ny; ++j)
            for (int i = 0; i < S.grid.nx; ++i)
                worstH = std::max(worstH, std::abs(H(i, j) + std::sqrt(1.0 - 0.1)));
        REQUIRE(worstH < 10.0 * cfg.newton_tol);
    }

    SECTION("quadratic residual decrease") {
        const ModelSurface S = ModelSurface::cylinder(4.0, 2.0, 48, 24, Complex(0.5, 0.2));
        const NewtonResult r = newton_solve(FoliationMode::KSurface, -0.5, S, Field<double>(S.grid), cfg);
        REQUIRE(r.residual_sup <= cfg.newton_tol);
        bool saw_fast_ratio = false;
        for (size_t n = 1; n < r.residual_history.size(); ++n)
            if (r.residual_history[n - 1] < 1e-4) {
                REQUIRE(r.residual_history[n] <= 0.1 * r.residual_history[n - 1]);
                saw_fast_ratio = true;
            }
        REQUIRE(saw_fast_ratio);
    }

    SECTION("iteration budget exhausted raises with the residual attached") {
        const ModelSurface S = ModelSurface::cylinder(4.0, 2.0, 48, 24, Complex(0.5, 0.2));
        SolverConfig tight = cfg;
        tight.max_iter = 1;
        try {
            newton_solve(FoliationMode::KSurface, -0.5, S, Field<double>(S.grid), tight);
            FAIL("expected SolverError");
        } catch (const SolverError& e) {
            REQUIRE(e.k == -0.5);
            REQUIRE(e.residual > 0.0);
        }
    }
}

TEST_CASE("continuation") {
    const SolverConfig cfg;

    SECTION("fuchsian branch is identically zero") {
        const ModelSurface S0 = small_cylinder(Complex(0.0));
        const FoliationBranch b =
            continuation(FoliationMode::KSurface, {-0.4, -0.2, -0.1, -0.05}, S0, cfg);
        b.validate(cfg.newton_tol);
        for (const BranchSample& s : b.samples) REQUIRE(max_abs(s.u) == 0.0);
    }

    SECTION("small phi: |u| decreases toward k = 0 and halving the step is stable") {
        const ModelSurface S = small_cylinder();
        const std::vector<double> coarse{-0.2, -0.1, -0.05};
        const std::vector<double> fine{-0.2, -0.15, -0.1, -0.075, -0.05};
        const FoliationBranch bc = continuation(FoliationMode::KSurface, coarse, S, cfg);
        const FoliationBranch bf = continuation(FoliationMode::KSurface, fine, S, cfg);
        bc.validate(cfg.newton_tol);
        for (size_t n = 1; n < bc.samples.size(); ++n)
            REQUIRE(max_abs(bc.samples[n].u) <= max_abs(bc.samples[n - 1].u) + 1e-12);
        // common k values agree to solver accuracy regardless of the path
        for (const BranchSample& s : bc.samples) {
            for (const BranchSample& t : bf.samples)
                if (t.k == s.k) {
                    double diff = 0.0;
                    for (size_t m = 0; m < s.u.v.size(); ++m)
                        diff = std::max(diff, std::abs(s.u.v[m] - t.u.v[m]));
                    REQUIRE(diff < 1e-8);
                }
        }
    }

    SECTION("bad k lists are rejected") {
        const ModelSurface S0 = small_cylinder(Complex(0.0));
        REQUIRE_THROWS_AS(continuation(FoliationMode::KSurface, {}, S0, cfg), std::invalid_argument);
        REQUIRE_THROWS_AS(continuation(FoliationMode::KSurface, {-0.1, -0.2}, S0, cfg),
                          std::invalid_argument);
        REQUIRE_THROWS_AS(continuation(FoliationMode::KSurface, {-0.1, 0.2}, S0, cfg),
                          std::domain_error);
    }

    SECTION("reruns are bit identical") {
        const ModelSurface S = small_cylinder();
        const FoliationBranch a = continuation(FoliationMode::Cmc, {-0.1, -0.05}, S, cfg);
        const FoliationBranch b = continuation(FoliationMode::Cmc, {-0.1, -0.05}, S, cfg);
        for (size_t n = 0; n < a.samples.size(); ++n)
            REQUIRE(bitwise_equal(a.samples[n].u, b.samples[n].u));
    }

    SECTION("a far first target is reached by marching in k_step") {
        const ModelSurface S = ModelSurface::cylinder(4.0, 2.0, 48, 24, Complex(1.2, 0.4));
        SolverConfig tight = cfg;
        tight.max_iter = 4;  // the cold solve at k = -0.85 needs more
        tight.k_step = 0.1;
        REQUIRE_THROWS_AS(
            newton_solve(FoliationMode::KSurface, -0.85, S, Field<double>(S.grid), tight),
            SolverError);
        const FoliationBranch b = continuation(FoliationMode::KSurface, {-0.85, -0.8}, S, tight);
        b.validate(tight.newton_tol);
        REQUIRE(b.samples.size() == 2);
    }
}

TEST_CASE("disk-chart solves satisfy the curvature condition at interior nodes") {
    const ModelSurface S = ModelSurface::disk_chart(-0.5, 0.5, 0.75, 1.75, 32, 32, Complex(0.02, 0.01));
    const SolverConfig cfg;
    const NewtonResult r = newton_solve(FoliationMode::KSurface, -0.1, S, Field<double>(S.grid), cfg);
    REQUIRE(r.residual_sup <= cfg.newton_tol);
    const ConformalMetricField sigma =
        unscale(FoliationMode::KSurface, -0.1, scaled_metric_from(S, r.u));
    const Field<double> KI =
        surface_gauss_curvature(sigma, intrinsic_B(sigma, S), gauss_curvature(sigma));
    double worst = 0.0;
    for (int j = 1; j + 1 < S.grid.ny; ++j)
        for (int i = 1; i + 1 < S.grid.nx; ++i) worst = std::max(worst, std::abs(KI(i, j) + 0.1));
    REQUIRE(worst < 10.0 * cfg.newton_tol);
}

TEST_CASE("unscale") {
    const ModelSurface S = small_cylinder(Complex(0.0));
    const ConformalMetricField sigma = unscale(FoliationMode::KSurface, -0.75, S.h);
    for (size_t n = 0; n < sigma.eta.size(); ++n)
        REQUIRE(sigma.eta.v[n] == Approx(S.h.eta.v[n] + 0.5 * std::log(3.0)).margin(1e-14));

    // round trip through the cmc scaling function
    const ConformalMetricField back = sigma.scaled(f_cmc(-0.75));
    for (size_t n = 0; n < back.eta.size(); ++n)
        REQUIRE(back.eta.v[n] == Approx(S.h.eta.v[n]).margin(1e-13));

    // unscaled fuchsian solutions have surface curvature exactly k
    for (double k : {-0.5, -0.05}) {
        const ConformalMetricField sk = unscale(FoliationMode::Cmc, k, S.h);
        const Field<double> KI = surface_gauss_curvature(sk, intrinsic_B(sk, S), gauss_curvature(sk));
        for (int j = 0; j < S.grid.ny; j += 5)
            for (int i = 0; i < S.grid.nx; i += 5) REQUIRE(KI(i, j) == Approx(k).margin(1e-10));
    }
}

TEST_CASE("branch validation catches broken certificates") {
    FoliationBranch b;
    b.mode = FoliationMode::KSurface;
    const ChartGrid g(Complex(0.0, 0.1), 0.1, 0.1, 8, 8);
    b.samples.push_back({-0.1, Field<double>(g), 1e-12});
    b.samples.push_back({-0.2, Field<double>(g), 1e-12});  // wrong order
    REQUIRE_THROWS_AS(b.validate(1e-10), std::invalid_argument);
    b.samples[1].k = -0.05;
    b.samples[1].residual_sup = 1.0;  // exceeds tolerance
    REQUIRE_THROWS_AS(b.validate(1e-10), std::invalid_argument);
}
