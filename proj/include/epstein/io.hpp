#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <set>
#include <string>

#include "epstein/asymptotics.hpp"
#include "epstein/version.hpp"

namespace epstein {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Doubles in output files are written with 17 significant digits so parsed
/// values round-trip exactly.
inline std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

namespace detail {

inline void require_keys(const nlohmann::json& j, const std::set<std::string>& allowed,
                         const std::string& where) {
    for (const auto& item : j.items())
        if (!allowed.count(item.key()))
            throw ConfigError("config: unknown field \"" + item.key() + "\" in " + where);
}

template <class T>
void read_into(const nlohmann::json& j, const char* key, T& out) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config: bad value for \"") + key + "\": " + e.what());
    }
}

}  // namespace detail

/// Fully resolved experiment description. All defaults are explicit in the
/// echoed JSON; unknown fields in the input are rejected.
struct ExperimentConfig {
    std::string mode = "k-surface";       // k-surface | cmc | epstein-sample | verify-suite
    std::string surface_kind = "cylinder";  // cylinder | disk
    double core_length = 6.0;
    double truncation_radius = 3.0;
    int nx = 128, ny = 64;
    Complex phi_amplitude{0.05, 0.0};
    std::array<double, 4> disk_rect{-0.5, 0.5, 0.75, 1.75};
    std::vector<double> k_list;           // when empty, built from the eps ladder
    double eps0 = 0.08;
    int eps_count = 4;
    double eps_ratio = 0.5;
    SolverConfig solver;
    std::string metric_type = "fuchsian";  // sample mode: hyperbolic | fuchsian | solved
    double metric_k = -0.5;
    std::string suite = "all";
    uint64_t seed = 20240801;
    std::string out_dir = "out";
    std::string prefix = "epstein";

    static ExperimentConfig from_json(const nlohmann::json& j) {
        ExperimentConfig c;
        detail::require_keys(j, {"mode", "surface", "k_list", "eps_ladder", "solver", "metric",
                                 "suite", "seed", "output"},
                             "top level");
        detail::read_into(j, "mode", c.mode);
        if (j.contains("surface")) {
            const auto& s = j.at("surface");
            detail::require_keys(s, {"kind", "core_length", "truncation_radius", "nx", "ny",
                                     "phi_amplitude", "rect"},
                                 "surface");
            detail::read_into(s, "kind", c.surface_kind);
            detail::read_into(s, "core_length", c.core_length);
            detail::read_into(s, "truncation_radius", c.truncation_radius);
            detail::read_into(s, "nx", c.nx);
            detail::read_into(s, "ny", c.ny);
            if (s.contains("phi_amplitude")) {
                std::array<double, 2> a{};
                detail::read_into(s, "phi_amplitude", a);
                c.phi_amplitude = Complex(a[0], a[1]);
            }
            detail::read_into(s, "rect", c.disk_rect);
        }
        detail::read_into(j, "k_list", c.k_list);
        if (j.contains("eps_ladder")) {
            const auto& e = j.at("eps_ladder");
            detail::require_keys(e, {"eps0", "count", "ratio"}, "eps_ladder");
            detail::read_into(e, "eps0", c.eps0);
            detail::read_into(e, "count", c.eps_count);
            detail::read_into(e, "ratio", c.eps_ratio);
        }
        if (j.contains("solver")) {
            const auto& s = j.at("solver");
            detail::require_keys(s, {"newton_tol", "max_iter", "k_step", "linear_solver_tol"}, "solver");
            detail::read_into(s, "newton_tol", c.solver.newton_tol);
            detail::read_into(s, "max_iter", c.solver.max_iter);
            detail::read_into(s, "k_step", c.solver.k_step);
            detail::read_into(s, "linear_solver_tol", c.solver.linear_solver_tol);
        }
        if (j.contains("metric")) {
            const auto& m = j.at("metric");
            detail::require_keys(m, {"type", "k"}, "metric");
            detail::read_into(m, "type", c.metric_type);
            detail::read_into(m, "k", c.metric_k);
        }
        detail::read_into(j, "suite", c.suite);
        detail::read_into(j, "seed", c.seed);
        if (j.contains("output")) {
            const auto& o = j.at("output");
            detail::require_keys(o, {"dir", "prefix"}, "output");
            detail::read_into(o, "dir", c.out_dir);
            detail::read_into(o, "prefix", c.prefix);
        }
        c.check();
        return c;
    }

    static ExperimentConfig from_json_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("config: cannot open " + path);
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(in);
        } catch (const nlohmann::json::parse_error& e) {
            throw ConfigError("config: parse error in " + path + ": " + e.what());
        }
        return from_json(j);
    }

    void check() const {
        static const std::set<std::string> modes{"k-surface", "cmc", "epstein-sample", "verify-suite"};
        if (!modes.count(mode)) throw ConfigError("config: unknown mode \"" + mode + "\"");
        if (surface_kind != "cylinder" && surface_kind != "disk")
            throw ConfigError("config: unknown surface kind \"" + surface_kind + "\"");
        if (metric_type != "hyperbolic" && metric_type != "fuchsian" && metric_type != "solved")
            throw ConfigError("config: unknown metric type \"" + metric_type + "\"");
        static const std::set<std::string> suites{"flow", "distance", "curvature", "schwarzian", "all"};
        if (!suites.count(suite)) throw ConfigError("config: unknown suite \"" + suite + "\"");
        if (nx < 8 || ny < 8) throw ConfigError("config: grid must be at least 8x8");
        if (!(eps0 > 0.0) || !(eps0 < 1.0) || eps_count < 1 || !(eps_ratio > 0.0) || !(eps_ratio < 1.0))
            throw ConfigError("config: bad eps ladder");
        for (double k : k_list)
            if (!(k > -1.0) || !(k < 0.0)) throw ConfigError("config: k values must lie in (-1, 0)");
        if (!(solver.newton_tol > 0.0) || solver.max_iter < 1)
            throw ConfigError("config: bad solver settings");
    }

    /// Continuation targets: explicit k_list, else -eps down the ladder,
    /// ascending toward 0-.
    std::vector<double> ks() const {
        std::vector<double> out = k_list;
        if (out.empty()) {
            double e = eps0;
            for (int n = 0; n < eps_count; ++n, e *= eps_ratio) out.push_back(-e);
        }
        std::sort(out.begin(), out.end());
        return out;
    }

    ModelSurface make_surface() const {
        if (surface_kind == "cylinder")
            return ModelSurface::cylinder(core_length, truncation_radius, nx, ny, phi_amplitude);
        return ModelSurface::disk_chart(disk_rect[0], disk_rect[1], disk_rect[2], disk_rect[3], nx, ny,
                                        phi_amplitude);
    }

    /// Resolved configuration echo; every default is spelled out.
    std::string echo() const {
        std::string s = "{";
        s += "\"mode\":\"" + mode + "\",";
        s += "\"surface\":{\"kind\":\"" + surface_kind + "\",";
        s += "\"core_length\":" + fmt17(core_length) + ",";
        s += "\"truncation_radius\":" + fmt17(truncation_radius) + ",";
        s += "\"nx\":" + std::to_string(nx) + ",\"ny\":" + std::to_string(ny) + ",";
        s += "\"phi_amplitude\":[" + fmt17(phi_amplitude.real()) + "," + fmt17(phi_amplitude.imag()) + "],";
        s += "\"rect\":[" + fmt17(disk_rect[0]) + "," + fmt17(disk_rect[1]) + "," + fmt17(disk_rect[2]) +
             "," + fmt17(disk_rect[3]) + "]},";
        s += "\"k_list\":[";
        for (size_t n = 0; n < k_list.size(); ++n) s += (n ? "," : "") + fmt17(k_list[n]);
        s += "],";
        s += "\"eps_ladder\":{\"eps0\":" + fmt17(eps0) + ",\"count\":" + std::to_string(eps_count) +
             ",\"ratio\":" + fmt17(eps_ratio) + "},";
        s += "\"solver\":{\"newton_tol\":" + fmt17(solver.newton_tol) +
             ",\"max_iter\":" + std::to_string(solver.max_iter) + ",\"k_step\":" + fmt17(solver.k_step) +
             ",\"linear_solver_tol\":" + fmt17(solver.linear_solver_tol) + "},";
        s += "\"metric\":{\"type\":\"" + metric_type + "\",\"k\":" + fmt17(metric_k) + "},";
        s += "\"suite\":\"" + suite + "\",";
        s += "\"seed\":" + std::to_string(seed) + ",";
        s += "\"output\":{\"dir\":\"" + out_dir + "\",\"prefix\":\"" + prefix + "\"}";
        s += "}";
        return s;
    }
};

namespace detail {

inline void write_text(const std::string& path, const std::string& text) {
    std::filesystem::path p(path);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text;
}

}  // namespace detail

inline void write_branch(const std::string& path, const FoliationBranch& branch, const ChartGrid& grid,
                         const std::string& config_echo) {
    std::string s = "{\n";
    s += "\"format\":\"epstein-branch\",\n\"version\":\"" + std::string(kVersion) + "\",\n";
    s += "\"config\":" + config_echo + ",\n";
    s += "\"mode\":\"" + std::string(mode_name(branch.mode)) + "\",\n";
    s += "\"grid\":{\"nx\":" + std::to_string(grid.nx) + ",\"ny\":" + std::to_string(grid.ny) + "},\n";
    s += "\"samples\":[\n";
    for (size_t n = 0; n < branch.samples.size(); ++n) {
        const BranchSample& bs = branch.samples[n];
        s += "{\"k\":" + fmt17(bs.k) + ",\"residual_sup\":" + fmt17(bs.residual_sup) + ",\"u\":[";
        for (size_t m = 0; m < bs.u.v.size(); ++m) s += (m ? "," : "") + fmt17(bs.u.v[m]);
        s += "]}";
        s += (n + 1 < branch.samples.size()) ? ",\n" : "\n";
    }
    s += "]\n}\n";
    detail::write_text(path, s);
}

inline FoliationBranch load_branch(const std::string& path, const ChartGrid& grid) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open branch file " + path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("branch file parse error: ") + e.what());
    }
    if (j.value("format", "") != "epstein-branch") throw ConfigError("not a branch file: " + path);
    if (j.at("grid").at("nx").get<int>() != grid.nx || j.at("grid").at("ny").get<int>() != grid.ny)
        throw ConfigError("branch file grid does not match the configured surface");
    FoliationBranch branch;
    branch.mode = j.at("mode").get<std::string>() == "cmc" ? FoliationMode::Cmc : FoliationMode::KSurface;
    for (const auto& js : j.at("samples")) {
        BranchSample bs{js.at("k").get<double>(), Field<double>(grid.nx, grid.ny),
                        js.at("residual_sup").get<double>()};
        const auto& u = js.at("u");
        if (static_cast<int>(u.size()) != grid.size()) throw ConfigError("branch sample size mismatch");
        for (size_t m = 0; m < bs.u.v.size(); ++m) bs.u.v[m] = u[m].get<double>();
        branch.samples.push_back(std::move(bs));
    }
    return branch;
}

inline void write_report(const std::string& path, const TangentReport& rep, const std::string& config_echo) {
    std::string s = "{\n";
    s += "\"format\":\"epstein-tangent-report\",\n\"version\":\"" + std::string(kVersion) + "\",\n";
    s += "\"config\":" + config_echo + ",\n";
    s += "\"mode\":\"" + std::string(mode_name(rep.mode)) + "\",\n";
    s += "\"convention\":\"d/dk at k=0-\",\n";
    s += "\"eps_list\":[";
    for (size_t n = 0; n < rep.eps_list.size(); ++n) s += (n ? "," : "") + fmt17(rep.eps_list[n]);
    s += "],\n";
    s += "\"cI_re\":" + fmt17(rep.cI_re) + ",\n\"cI_im\":" + fmt17(rep.cI_im) + ",\n";
    s += "\"cII_re\":" + fmt17(rep.cII_re) + ",\n\"cII_im\":" + fmt17(rep.cII_im) + ",\n";
    s += "\"residual_norms\":{\"I\":" + fmt17(rep.residual_norm_I) + ",\"II\":" + fmt17(rep.residual_norm_II) + "},\n";
    s += "\"trace_norms\":{\"I\":" + fmt17(rep.trace_norm_I) + ",\"II\":" + fmt17(rep.trace_norm_II) + "},\n";
    s += "\"extrapolation_order\":" + std::to_string(rep.extrapolation_order) + ",\n";
    s += "\"predicted\":{\"cI_re\":" + fmt17(rep.predicted_cI_re) + ",\"cI_im\":0,\"cII_re\":" +
         fmt17(rep.predicted_cII) + ",\"cII_im\":0,\"eps_convention_cI_re\":" + fmt17(-rep.predicted_cI_re) + "},\n";
    s += "\"per_eps\":[\n";
    for (size_t n = 0; n < rep.per_eps.size(); ++n) {
        const auto& r = rep.per_eps[n];
        s += "[" + fmt17(r[0]) + "," + fmt17(r[1]) + "," + fmt17(r[2]) + "," + fmt17(r[3]) + "," +
             fmt17(r[4]) + "]";
        s += (n + 1 < rep.per_eps.size()) ? ",\n" : "\n";
    }
    s += "]\n}\n";
    detail::write_text(path, s);
}

inline void write_report_csv(const std::string& path, const TangentReport& rep,
                             const std::string& config_echo) {
    std::string s = "# epstein " + std::string(kVersion) + " tangent coefficients (d/dk convention)\n";
    s += "# config: " + config_echo + "\n";
    s += "eps,cI_re,cI_im,cII_re,cII_im\n";
    for (const auto& r : rep.per_eps)
        s += fmt17(r[0]) + "," + fmt17(r[1]) + "," + fmt17(r[2]) + "," + fmt17(r[3]) + "," + fmt17(r[4]) +
             "\n";
    detail::write_text(path, s);
}

/// ASCII OBJ with upper half-space coordinates (x, y, t); per-vertex scalars
/// go to the sidecar CSV keyed by vertex index.
inline void write_obj(const std::string& path, const EpsteinMesh& mesh, const std::string& config_echo) {
    std::string s = "# epstein mesh " + std::string(kVersion) + "\n";
    s += "# config: " + config_echo + "\n";
    for (const EpsteinSample& v : mesh.vertices)
        s += "v " + fmt17(v.base.z.real()) + " " + fmt17(v.base.z.imag()) + " " + fmt17(v.base.t) + "\n";
    for (const auto& t : mesh.triangles)
        s += "f " + std::to_string(t[0] + 1) + " " + std::to_string(t[1] + 1) + " " +
             std::to_string(t[2] + 1) + "\n";
    detail::write_text(path, s);
}

inline void write_mesh_csv(const std::string& path, const EpsteinMesh& mesh,
                           const std::string& config_echo) {
    std::string s = "# epstein mesh attributes " + std::string(kVersion) + "\n";
    s += "# config: " + config_echo + "\n";
    s += "vertex,K_I,H,degenerate\n";
    for (size_t n = 0; n < mesh.vertices.size(); ++n) {
        const EpsteinSample& v = mesh.vertices[n];
        s += std::to_string(n) + "," + fmt17(v.K_I) + "," + fmt17(v.H) + "," +
             (v.degenerate ? "1" : "0") + "\n";
    }
    detail::write_text(path, s);
}

}  // namespace epstein
