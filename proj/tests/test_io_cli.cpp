#include <catch2/catch_amalgamated.hpp>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "epstein/cli.hpp"
#include "oracles.hpp"

using namespace epstein;
using Catch::Approx;

namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path temp_dir(const std::string& tag) {
    const fs::path p = fs::temp_directory_path() / ("epstein_test_" + tag);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

}  // namespace

TEST_CASE("config defaults, echo, and validation") {
    const ExperimentConfig def;
    const std::string echo = def.echo();
    for (const char* key : {"\"mode\"", "\"surface\"", "\"solver\"", "\"eps_ladder\"", "\"metric\"",
                            "\"suite\"", "\"seed\"", "\"output\"", "\"newton_tol\"", "\"phi_amplitude\""})
        REQUIRE(echo.find(key) != std::string::npos);

    // echo parses back to the same config
    const ExperimentConfig back = ExperimentConfig::from_json(nlohmann::json::parse(echo));
    REQUIRE(back.echo() == echo);

    SECTION("unknown fields are rejected with the field name") {
        try {
            ExperimentConfig::from_json(nlohmann::json::parse(R"({"mode":"cmc","bogus":1})"));
            FAIL("expected ConfigError");
        } catch (const ConfigError& e) {
            REQUIRE(std::string(e.what()).find("bogus") != std::string::npos);
        }
        REQUIRE_THROWS_AS(ExperimentConfig::from_json(
                              nlohmann::json::parse(R"({"surface":{"kind":"cylinder","warp":2}})")),
                          ConfigError);
    }

    SECTION("bad values are rejected") {
        REQUIRE_THROWS_AS(ExperimentConfig::from_json(nlohmann::json::parse(R"({"mode":"bad"})")),
                          ConfigError);
        REQUIRE_THROWS_AS(ExperimentConfig::from_json(nlohmann::json::parse(R"({"k_list":[0.5]})")),
                          ConfigError);
        REQUIRE_THROWS_AS(ExperimentConfig::from_json(
                              nlohmann::json::parse(R"({"solver":{"newton_tol":-1}})")),
                          ConfigError);
        REQUIRE_THROWS_AS(ExperimentConfig::from_json(nlohmann::json::parse(R"({"mode":3})")),
                          ConfigError);
    }

    SECTION("eps ladder builds an ascending k list") {
        ExperimentConfig c;
        c.eps0 = 0.08;
        c.eps_count = 4;
        c.eps_ratio = 0.5;
        const std::vector<double> ks = c.ks();
        REQUIRE(ks == std::vector<double>{-0.08, -0.04, -0.02, -0.01});
    }
}

TEST_CASE("bundled configs parse and resolve") {
    for (const char* name : {"cylinder.json", "cylinder_cmc.json", "solved_mesh.json"}) {
        const ExperimentConfig c =
            ExperimentConfig::from_json_file(std::string(EPSTEIN_CONFIG_DIR) + "/" + name);
        REQUIRE_NOTHROW(c.make_surface());
        REQUIRE(!c.ks().empty());
    }
    const ExperimentConfig hl =
        ExperimentConfig::from_json_file(std::string(EPSTEIN_CONFIG_DIR) + "/cylinder.json");
    REQUIRE(hl.nx == 128);
    REQUIRE(hl.ks() == std::vector<double>{-0.08, -0.04, -0.02, -0.01});
}

TEST_CASE("seventeen-digit floats round trip") {
    for (double x : {1.0 / 3.0, 1e-10, -0.05, 3.141592653589793, 2.2250738585072014e-308}) {
        const std::string s = fmt17(x);
        REQUIRE(std::stod(s) == x);
    }
}

TEST_CASE("branch files round trip bitwise") {
    const ModelSurface S = ModelSurface::cylinder(4.0, 2.0, 32, 16, Complex(0.05, 0.01));
    const SolverConfig cfg;
    const FoliationBranch b = continuation(FoliationMode::KSurface, {-0.1, -0.05}, S, cfg);
    const fs::path dir = temp_dir("branch");
    const std::string path = (dir / "branch.json").string();
    write_branch(path, b, S.grid, ExperimentConfig{}.echo());
    const FoliationBranch loaded = load_branch(path, S.grid);
    REQUIRE(loaded.mode == b.mode);
    REQUIRE(loaded.samples.size() == b.samples.size());
    for (size_t n = 0; n < b.samples.size(); ++n) {
        REQUIRE(loaded.samples[n].k == b.samples[n].k);
        REQUIRE(std::memcmp(loaded.samples[n].u.v.data(), b.samples[n].u.v.data(),
                            b.samples[n].u.v.size() * sizeof(double)) == 0);
    }
    REQUIRE_THROWS_AS(load_branch(path, ChartGrid(Complex(0, 0.1), 0.1, 0.1, 8, 8)), ConfigError);
}

TEST_CASE("dispatch writes meshes with the config embedded") {
    const fs::path dir = temp_dir("sample");
    ExperimentConfig cfg;
    cfg.mode = "epstein-sample";
    cfg.surface_kind = "cylinder";
    cfg.nx = 24;
    cfg.ny = 12;
    cfg.metric_type = "fuchsian";
    cfg.metric_k = -0.5;
    cfg.out_dir = dir.string();
    std::ostringstream log;
    REQUIRE(dispatch(CliAction::Sample, cfg, true, log) == 0);
    const std::string obj = slurp(dir / "epstein_mesh.obj");
    REQUIRE(obj.find("# config: {\"mode\":\"epstein-sample\"") != std::string::npos);
    REQUIRE(std::count(obj.begin(), obj.end(), 'v') >= 24 * 12);  // vertex lines
    const std::string csv = slurp(dir / "epstein_mesh.csv");
    REQUIRE(csv.find("vertex,K_I,H,degenerate") != std::string::npos);
}

TEST_CASE("dispatch solve and asymptotics are deterministic byte for byte") {
    ExperimentConfig cfg;
    cfg.mode = "cmc";
    cfg.nx = 32;
    cfg.ny = 16;
    cfg.truncation_radius = 2.0;
    cfg.core_length = 4.0;
    cfg.eps0 = 0.06;
    cfg.eps_count = 3;
    std::ostringstream log;

    const fs::path d1 = temp_dir("det1"), d2 = temp_dir("det2");
    cfg.out_dir = d1.string();
    REQUIRE(dispatch(CliAction::Asymptotics, cfg, true, log) == 0);
    cfg.out_dir = d2.string();
    REQUIRE(dispatch(CliAction::Asymptotics, cfg, true, log) == 0);

    for (const char* name : {"epstein_branch.json", "epstein_report.json", "epstein_report.csv"}) {
        const std::string a = slurp(d1 / name), b = slurp(d2 / name);
        // outputs embed the config, which differs only in the out dir
        std::string an = a, bn = b;
        const auto scrub = [](std::string& s, const std::string& dir) {
            size_t pos;
            while ((pos = s.find(dir)) != std::string::npos) s.erase(pos, dir.size());
        };
        scrub(an, d1.string());
        scrub(bn, d2.string());
        REQUIRE(an == bn);
    }
}

TEST_CASE("fuchsian table rows match the closed forms") {
    ExperimentConfig cfg;
    cfg.k_list = {-0.75};
    std::ostringstream log;
    REQUIRE(dispatch(CliAction::FuchsianTable, cfg, true, log) == 0);
    const std::string out = log.str();
    REQUIRE(out.find("k,c(k),K(I),H") != std::string::npos);
    REQUIRE(out.find("-0.75,3,-0.75,-0.5") != std::string::npos);
}

TEST_CASE("dispatch verify maps failures to the documented exit code") {
    ExperimentConfig cfg;
    cfg.mode = "verify-suite";
    cfg.suite = "distance";
    std::ostringstream log;
    REQUIRE(dispatch(CliAction::Verify, cfg, true, log) == 0);
    REQUIRE(log.str().find("pass") != std::string::npos);
}

TEST_CASE("tangent report file carries the verdict fields") {
    const ModelSurface S = ModelSurface::cylinder(4.0, 2.0, 32, 16, Complex(0.05, 0.0));
    const SolverConfig scfg;
    const FoliationBranch b = continuation(FoliationMode::KSurface, {-0.06, -0.03, -0.015}, S, scfg);
    const TangentReport rep = verify_asymptotics(b, S);
    const fs::path dir = temp_dir("report");
    write_report((dir / "r.json").string(), rep, ExperimentConfig{}.echo());
    write_report_csv((dir / "r.csv").string(), rep, ExperimentConfig{}.echo());
    const std::string json = slurp(dir / "r.json");
    for (const char* key : {"\"cI_re\"", "\"cII_re\"", "\"residual_norms\"", "\"extrapolation_order\"",
                            "\"eps_list\"", "\"predicted\"", "\"version\""})
        REQUIRE(json.find(key) != std::string::npos);
    const std::string csv = slurp(dir / "r.csv");
    REQUIRE(csv.find("eps,cI_re,cI_im,cII_re,cII_im") != std::string::npos);
}
