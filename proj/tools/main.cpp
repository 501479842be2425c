#include <CLI11.hpp>

#include "epstein/cli.hpp"

using namespace epstein;

int main(int argc, char** argv) {
    CLI::App app{"Epstein surfaces from conformal metrics: meshes, curvature continuation, and "
                 "asymptotic tangent reports"};
    app.fallthrough();
    app.require_subcommand(1);

    std::string config_path, out_dir, mode, suite;
    bool quiet = false;
    app.add_option("--config", config_path, "JSON experiment config");
    app.add_option("--out", out_dir, "output directory (overrides config)");
    app.add_option("--mode", mode, "k-surface | cmc (overrides config)");
    app.add_option("--suite", suite, "verify suite: flow | distance | curvature | schwarzian | all");
    app.add_flag("--quiet", quiet, "suppress progress output");

    CLI::App* sample = app.add_subcommand("sample", "write the Epstein surface mesh of a metric");
    CLI::App* solve = app.add_subcommand("solve", "run the continuation and write a branch file");
    CLI::App* asym = app.add_subcommand("asymptotics", "solve a branch and write the tangent report");
    CLI::App* table = app.add_subcommand("fuchsian-table", "print exact-baseline rows k, c(k), K(I), H");
    CLI::App* verify = app.add_subcommand("verify", "run a named property suite");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        ExperimentConfig cfg =
            config_path.empty() ? ExperimentConfig{} : ExperimentConfig::from_json_file(config_path);
        if (!out_dir.empty()) cfg.out_dir = out_dir;
        if (!mode.empty()) {
            if (mode != "k-surface" && mode != "cmc")
                throw ConfigError("config: --mode must be k-surface or cmc, got \"" + mode + "\"");
            cfg.mode = mode;
        }
        if (!suite.empty()) cfg.suite = suite;

        CliAction action = CliAction::Verify;
        if (sample->parsed()) {
            action = CliAction::Sample;
            cfg.mode = "epstein-sample";
        } else if (solve->parsed() || asym->parsed()) {
            action = solve->parsed() ? CliAction::Solve : CliAction::Asymptotics;
            if (mode.empty() && cfg.mode != "k-surface" && cfg.mode != "cmc")
                cfg.mode = "k-surface";
        } else if (table->parsed()) {
            action = CliAction::FuchsianTable;
        } else if (verify->parsed()) {
            action = CliAction::Verify;
            cfg.mode = "verify-suite";
        }
        cfg.check();
        return dispatch(action, cfg, quiet);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const SolverError& e) {
        std::cerr << "solver error: " << e.what() << " (residual " << e.residual << ")\n";
        return 3;
    } catch (const EllipticityError& e) {
        std::cerr << "solver error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
