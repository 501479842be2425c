#pragma once

#include <chrono>
#include <cstdlib>
#include <iomanip>
#include <iostream>

#include "epstein/io.hpp"
#include "epstein/verify.hpp"

namespace epstein {

enum class CliAction { Sample, Solve, Asymptotics, FuchsianTable, Verify };

/// Worker cap for suite fan-out; EPSTEIN_NUM_THREADS, default 1.
inline unsigned thread_cap_from_env() {
    const char* env = std::getenv("EPSTEIN_NUM_THREADS");
    if (!env) return 1;
    const long v = std::strtol(env, nullptr, 10);
    return v < 1 ? 1u : static_cast<unsigned>(v);
}

namespace detail {

inline ConformalMetricField sample_metric(const ExperimentConfig& cfg, const ModelSurface& S) {
    if (cfg.metric_type == "hyperbolic") return S.h;
    if (cfg.metric_type == "fuchsian") return S.h.scaled(c_of_k(cfg.metric_k));
    const NewtonResult r =
        newton_solve(FoliationMode::KSurface, cfg.metric_k, S, Field<double>(S.grid), cfg.solver);
    return unscale(FoliationMode::KSurface, cfg.metric_k, scaled_metric_from(S, r.u));
}

inline std::string out_path(const ExperimentConfig& cfg, const std::string& tail) {
    return cfg.out_dir + "/" + cfg.prefix + tail;
}

}  // namespace detail

/// Runs one experiment; returns the process exit status (0 success,
/// 4 verification failure; config and solver problems throw).
inline int dispatch(CliAction action, const ExperimentConfig& cfg, bool quiet,
                    std::ostream& log = std::cout) {
    const std::string echo = cfg.echo();
    if (!quiet) log << "config: " << echo << "\n";

    switch (action) {
        case CliAction::Sample: {
            const ModelSurface S = cfg.make_surface();
            const ConformalMetricField sigma = detail::sample_metric(cfg, S);
            const QuadDifferential B = intrinsic_B(sigma, S);
            const EpsteinMesh mesh = sample_mesh(sigma, B, gauss_curvature(sigma));
            write_obj(detail::out_path(cfg, "_mesh.obj"), mesh, echo);
            write_mesh_csv(detail::out_path(cfg, "_mesh.csv"), mesh, echo);
            if (!quiet)
                log << "wrote " << detail::out_path(cfg, "_mesh.obj") << " ("
                    << mesh.vertices.size() << " vertices)\n";
            return 0;
        }
        case CliAction::Solve:
        case CliAction::Asymptotics: {
            const ModelSurface S = cfg.make_surface();
            const FoliationMode mode = cfg.mode == "cmc" ? FoliationMode::Cmc : FoliationMode::KSurface;
            const auto t0 = std::chrono::steady_clock::now();
            const FoliationBranch branch = continuation(mode, cfg.ks(), S, cfg.solver);
            branch.validate(cfg.solver.newton_tol);
            if (!quiet) {
                const double secs =
                    std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
                log << "solved " << branch.samples.size() << " values of k in " << std::fixed
                    << std::setprecision(2) << secs << " s";
                log.unsetf(std::ios::fixed);
                for (const BranchSample& bs : branch.samples)
                    log << "  [k=" << bs.k << " res=" << bs.residual_sup << "]";
                log << "\n";
            }
            write_branch(detail::out_path(cfg, "_branch.json"), branch, S.grid, echo);
            if (action == CliAction::Solve) {
                if (!quiet) log << "wrote " << detail::out_path(cfg, "_branch.json") << "\n";
                return 0;
            }
            const TangentReport rep = verify_asymptotics(branch, S);
            write_report(detail::out_path(cfg, "_report.json"), rep, echo);
            write_report_csv(detail::out_path(cfg, "_report.csv"), rep, echo);
            if (!quiet) {
                log << "tangent coefficients (d/dk): cI = (" << rep.cI_re << ", " << rep.cI_im
                    << "), cII = (" << rep.cII_re << ", " << rep.cII_im << ")\n";
                log << "wrote " << detail::out_path(cfg, "_report.json") << "\n";
            }
            return 0;
        }
        case CliAction::FuchsianTable: {
            std::vector<double> ks = cfg.k_list;
            if (ks.empty()) ks = {-0.75, -0.5, -0.25, -0.1, -0.05, -0.01};
            const ChartGrid g(Complex(-0.5, 0.75), 0.125, 0.125, 9, 9);
            const ConformalMetricField h = ConformalMetricField::from_closure(g, half_plane_poincare());
            const QuadDifferential zero{g, Field<Complex>(g)};
            log << "k,c(k),K(I),H\n";
            for (double k : ks) {
                const ConformalMetricField sigma = h.scaled(c_of_k(k));
                const Field<double> K = gauss_curvature(sigma);
                const Field<double> KI = surface_gauss_curvature(sigma, zero, K);
                const Field<double> H = surface_mean_curvature(sigma, zero, K);
                log << fmt17(k) << "," << fmt17(c_of_k(k)) << "," << fmt17(KI(g.nx / 2, g.ny / 2))
                    << "," << fmt17(H(g.nx / 2, g.ny / 2)) << "\n";
            }
            return 0;
        }
        case CliAction::Verify: {
            std::vector<std::string> names;
            if (cfg.suite == "all")
                names = suite_names();
            else
                names.push_back(cfg.suite);
            const std::vector<SuiteResult> results = run_suites(names, cfg.seed, thread_cap_from_env());
            bool ok = true;
            for (const SuiteResult& sr : results) {
                for (const CheckResult& c : sr.checks) {
                    ok = ok && c.pass;
                    log << (c.pass ? "pass" : "FAIL") << "  [" << sr.suite << "] " << c.name
                        << "  (measured " << c.measured << ", bound " << c.bound << ")\n";
                }
            }
            log << (ok ? "verify: all checks passed\n" : "verify: FAILURES above\n");
            return ok ? 0 : 4;
        }
    }
    return 0;
}

}  // namespace epstein
