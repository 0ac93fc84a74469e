#pragma once

// Subcommand runners. Each writes its artifacts into an output directory and
// returns a JSON summary plus the list of files it produced.

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <openssl/evp.h>

#include "config.hpp"

namespace percohom::cli {

namespace fs = std::filesystem;

#ifndef PERCOHOM_VERSION
#define PERCOHOM_VERSION "0.0.0"
#endif

inline constexpr const char* tool_version = PERCOHOM_VERSION;

/// Exit codes.
enum Exit : int { ok = 0, failure = 1, validation = 2, solver = 3 };

/// git-style object hash: SHA-1 of "blob <size>\0" followed by the content.
inline std::string content_hash(const std::string& content) {
    const std::string header = "blob " + std::to_string(content.size()) + std::string(1, '\0');
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    if (ctx == nullptr) throw std::runtime_error("cannot allocate digest context");
    const bool good = EVP_DigestInit_ex(ctx, EVP_sha1(), nullptr) == 1 &&
                      EVP_DigestUpdate(ctx, header.data(), header.size()) == 1 &&
                      EVP_DigestUpdate(ctx, content.data(), content.size()) == 1 &&
                      EVP_DigestFinal_ex(ctx, md, &len) == 1;
    EVP_MD_CTX_free(ctx);
    if (!good) throw std::runtime_error("SHA-1 digest failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[md[i] >> 4]);
        out.push_back(hex[md[i] & 15]);
    }
    return out;
}

/// Hash of (resolved config without the thread count, seed, version).
inline std::string run_hash(const json& resolved) {
    json key = resolved;
    key.erase("threads");
    const json doc{{"config", key}, {"seed", resolved.value("seed", std::uint64_t{0})}, {"version", tool_version}};
    return content_hash(doc.dump());
}

inline std::string utc_now() {
    const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

struct Artifacts {
    fs::path dir;
    json outputs = json::object();
    json summary = json::object();
    int exit_code = Exit::ok;

    std::ofstream open(const std::string& stage, const std::string& name, bool binary = false) {
        const auto path = dir / name;
        std::ofstream os(path, binary ? std::ios::binary : std::ios::out);
        if (!os) throw std::runtime_error("cannot write " + path.string());
        outputs[stage] = name;
        return os;
    }
};

namespace detail {

inline json to_json(const Vec3& v, int dim) {
    json a = json::array();
    for (int d = 0; d < dim; ++d) a.push_back(v[d]);
    return a;
}

inline json pairs_json(const std::vector<std::pair<double, double>>& v) {
    json a = json::array();
    for (const auto& [x, y] : v) a.push_back({x, y});
    return a;
}

inline json solve_report_json(const SolveReport& r) {
    return {{"iterations", r.iterations}, {"relative_residual", r.relative_residual}};
}

inline double intensity_of(const GeometryFamily& f) {
    if (const auto* b = std::get_if<BooleanFamily>(&f)) return b->intensity;
    if (const auto* r = std::get_if<RcmFamily>(&f)) return r->intensity;
    throw InvalidArgument("a Poisson check needs a boolean or rcm family");
}

} // namespace detail

inline void run_geometry(const Config& cfg, Artifacts& art) {
    const auto& g = *cfg.geometry;
    const auto seed = cfg.common.seed;
    const auto obs = realize(g.family, g.eps, g.domain, seed);
    auto m = rasterize(obs, g.domain, 1.0 / static_cast<double>(g.cells));
    m.set_provenance(family_name(g.family), "seed " + std::to_string(seed), g.eps);
    auto& s = art.summary;
    s["family"] = family_name(g.family);
    s["points"] = obs.points().size();
    s["primitives"] = obs.primitive_count();
    s["description"] = obs.description();
    s["volume_fraction"] = volume_fraction(m);
    s["hole_cells"] = m.count(CellFlag::hole);
    s["warnings"] = m.warnings();
    if (!obs.empty()) s["min_radius"] = obs.min_radius();
    if (std::holds_alternative<RcmFamily>(g.family)) {
        const auto comps = connected_components(obs.points(), obs.edges());
        std::size_t largest = 0;
        for (const auto& c : comps) largest = std::max(largest, c.size());
        s["edges"] = obs.edges().edges.size();
        s["components"] = comps.size();
        s["largest_component"] = largest;
    }
    if (g.write_points) {
        auto os = art.open("points", "points.txt");
        write_points(os, obs.points());
    }
    if (g.write_mask) {
        auto os = art.open("mask", "mask.txt");
        write_mask(os, m);
    }
    if (g.poisson) {
        const auto& p = *g.poisson;
        const auto chk = poisson_law_check(g.domain, detail::intensity_of(g.family), p.replicas, seed, p.kmax, p.cell,
                                           cfg.common.threads);
        auto os = art.open("poisson", "poisson.csv");
        write_poisson_csv(os, chk);
        s["poisson"] = {{"histogram", chk.histogram},     {"chi_square", chk.chi_square},
                        {"p_value", chk.p_value},         {"empty_mean", chk.empty_mean},
                        {"empty_expected", chk.empty_expected}, {"empty_sigma", chk.empty_sigma}};
    }
}

inline void run_solve(const Config& cfg, Artifacts& art) {
    const auto& c = *cfg.solve;
    const double dx = 1.0 / static_cast<double>(c.cells);
    MaskPtr m;
    if (c.family) {
        auto pm = std::make_shared<PerforatedMask>(rasterize(realize(*c.family, c.eps, c.domain, cfg.common.seed), c.domain, dx));
        pm->set_provenance(family_name(*c.family), "seed " + std::to_string(cfg.common.seed), c.eps);
        m = pm;
    } else {
        m = plain_mask(c.domain, dx);
    }
    const Source f(Expression::parse(c.source));
    const auto sol = c.homogenized_c ? solve_homogenized(m, c.reaction, *c.homogenized_c, f, {c.tol, 0})
                                     : solve_dirichlet_perforated(m, c.reaction, f, {c.tol, 0});
    const double reaction = c.reaction + c.homogenized_c.value_or(0.0);
    {
        auto os = art.open("field", "field.bin", true);
        write_field(os, sol.u);
    }
    auto& s = art.summary;
    s["solver"] = detail::solve_report_json(sol.report);
    s["l2"] = l2_norm(sol.u);
    s["h1"] = h1_norm(sol.u);
    s["gamma"] = energy_gamma(sol.u, reaction, f);
    s["hole_cells"] = m->count(CellFlag::hole);
    s["warnings"] = m->warnings();
}

inline void run_capacity(const Config& cfg, Artifacts& art) {
    const auto& c = *cfg.capacity;
    auto& s = art.summary;
    s["mode"] = c.mode;
    if (c.mode == "newton") {
        const auto& n = c.newton;
        std::vector<NewtonCapacity> rows;
        for (long k : n.cells_per_unit)
            rows.push_back(newton_capacity(Ball{{0.0, 0.0, 0.0}, n.radius}, n.outer_radius, 1.0 / static_cast<double>(k),
                                           {n.truncation, n.tol, 0}));
        const double sphere = ball_capacity_exact(n.radius, n.outer_radius);
        const double exact = sphere;
        {
            auto os = art.open("capacity", "newton.csv");
            write_newton_csv(os, rows, exact);
        }
        s["exact"] = exact;
        if (n.truncation == Truncation::cube)
            s["exact_bracket"] = {ball_capacity_exact(n.radius, std::sqrt(3.0) * n.outer_radius), sphere};
        s["values"] = json::array();
        for (const auto& r : rows) s["values"].push_back({{"dx", r.dx}, {"capacity", r.value}});
        if (rows.size() >= 2) {
            // first-order extrapolation from the two finest grids
            std::vector<NewtonCapacity> sorted = rows;
            std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.dx > b.dx; });
            const auto& coarse = sorted[sorted.size() - 2];
            const auto& fine = sorted.back();
            const double x = fine.value + (fine.value - coarse.value) * fine.dx / (coarse.dx - fine.dx);
            s["extrapolated"] = x;
            s["extrapolated_rel_error"] = (x - exact) / exact;
        }
    } else if (c.mode == "strange_term") {
        const auto res = strange_term(c.strange);
        {
            auto os = art.open("capacity", "capacity.csv");
            write_capacity_csv(os, res);
        }
        {
            auto os = art.open("plot_eps_first", "plot_eps_first.txt");
            write_plot_data(os, res.eps_first);
        }
        {
            auto os = art.open("plot_h_first", "plot_h_first.txt");
            write_plot_data(os, res.h_first);
        }
        s["c"] = res.c;
        s["spread"] = res.spread;
        s["eps_first"] = detail::pairs_json(res.eps_first);
        s["h_first"] = detail::pairs_json(res.h_first);
        s["bound_violated"] = res.bound_violated;
        s["warnings"] = res.warnings;
    } else {
        const auto& k = c.conductivity;
        const double dx = k.h / static_cast<double>(k.cells_per_h);
        const Box cube = cube_at(k.z, k.h, k.dim);
        PerforatedMask m = k.family ? rasterize(realize(*k.family, k.eps, cube, cfg.common.seed), cube, dx)
                                    : PerforatedMask(cube, dx);
        if (k.family) m.set_provenance(family_name(*k.family), "seed " + std::to_string(cfg.common.seed), k.eps);
        const auto t = conductivity_tensor(m, k.z, k.h, k.gamma);
        json a = json::array();
        for (int i = 0; i < t.dim; ++i) {
            json row = json::array();
            for (int j = 0; j < t.dim; ++j) row.push_back(t.a[i][j]);
            a.push_back(row);
        }
        s["tensor"] = a;
        s["tensor_per_volume"] = json::array();
        for (int i = 0; i < t.dim; ++i) {
            json row = json::array();
            for (int j = 0; j < t.dim; ++j) row.push_back(t.a[i][j] / std::pow(k.h, t.dim));
            s["tensor_per_volume"].push_back(row);
        }
        s["eigenvalues"] = std::vector<double>(t.eigenvalues.begin(), t.eigenvalues.begin() + t.dim);
        s["hole_cells"] = m.count(CellFlag::hole);
    }
}

inline void run_sweep_command(const Config& cfg, Artifacts& art) {
    const auto& spec = *cfg.sweep;
    const auto rep = run_sweep(spec);
    {
        auto os = art.open("table", "sweep.csv");
        write_sweep_csv(os, rep, spec.h_values);
    }
    {
        auto os = art.open("plot_error", "plot_error.txt");
        write_plot_data(os, rep.summary.error_by_eps);
    }
    {
        auto os = art.open("plot_h1", "plot_h1.txt");
        write_plot_data(os, rep.summary.h1_by_eps);
    }
    const auto& m = rep.summary;
    auto& s = art.summary;
    s["c"] = m.c;
    s["c_spread"] = m.c_spread;
    s["eps_first"] = detail::pairs_json(m.eps_first);
    s["h_first"] = detail::pairs_json(m.h_first);
    if (std::isfinite(m.boolean_C)) s["boolean_C"] = m.boolean_C;
    s["error_by_eps"] = detail::pairs_json(m.error_by_eps);
    if (std::isfinite(m.decay_slope)) s["decay_slope"] = m.decay_slope;
    if (std::isfinite(m.error_ratio)) s["error_ratio"] = m.error_ratio;
    s["homogenized"] = detail::solve_report_json(m.homogenized);
    json flags{{"energy_inequalities", m.energy_inequalities},
               {"nested_pairs", m.nested_pairs},
               {"nested_violations", m.nested_violations},
               {"empty_cells_ok", m.empty_cells_ok},
               {"nondegenerate", m.nondegenerate},
               {"converges", m.converges},
               {"bound_violated", m.bound_violated},
               {"partial", m.partial}};
    if (m.h1_audit)
        flags["h1_audit"] = {{"pass", m.h1_audit->pass},
                             {"max_h1", m.h1_audit->max_h1},
                             {"ceiling", m.h1_audit->ceiling},
                             {"bounded_trend", m.h1_audit->bounded_trend},
                             {"friedrichs_constant", m.friedrichs_C}};
    s["flags"] = flags;
    s["warnings"] = m.warnings;
    if (m.partial) art.exit_code = Exit::solver;
}

inline void run_ergodic_command(const Config& cfg, Artifacts& art) {
    const auto& e = *cfg.ergodic;
    const auto res = ergodic_average_experiment(e.spec);
    {
        auto os = art.open("table", "ergodic.csv");
        write_ergodic_csv(os, res);
    }
    {
        auto os = art.open("levels", "ergodic_levels.csv");
        write_ergodic_levels_csv(os, res);
    }
    std::vector<std::pair<double, double>> rs;
    for (const auto& l : res.levels) rs.emplace_back(l.t, l.rel_std);
    {
        auto os = art.open("plot_rel_std", "plot_rel_std.txt");
        write_plot_data(os, rs);
    }
    auto& s = art.summary;
    s["levels"] = json::array();
    for (const auto& l : res.levels) s["levels"].push_back({{"t", l.t}, {"mean", l.mean}, {"rel_std", l.rel_std}});
    s["decays"] = res.decays;
    s["warnings"] = res.warnings;
    if (e.correlation) {
        const auto c = disjoint_cube_correlation(e.spec, e.correlation->first, e.correlation->second);
        s["correlation"] = {{"t", e.correlation->first}, {"gap", e.correlation->second}, {"rho", c.correlation}};
    }
}

inline void run_density(const Config& cfg, Artifacts& art) {
    const auto& d = *cfg.density;
    const auto m = rasterize(realize(d.family, d.eps, d.domain, cfg.common.seed), d.domain,
                             1.0 / static_cast<double>(d.cells));
    const auto r = density_ratio_check(m, d.radius, d.probes, cfg.common.seed, d.margin);
    art.summary["min_ratio"] = r.min_ratio;
    art.summary["max_ratio"] = r.max_ratio;
    art.summary["condition_holds"] = r.condition_holds;
    art.summary["volume_fraction"] = volume_fraction(m);
    art.summary["warnings"] = m.warnings();
}

/// Runs the configured command into <out>/<hash>/ and writes the summary and
/// the run record there. Library exceptions propagate to the caller.
inline Artifacts run_command(const Config& cfg, const fs::path& out_root) {
    Artifacts art;
    const auto hash = run_hash(cfg.resolved);
    art.dir = out_root / hash;
    fs::create_directories(art.dir);
    const auto started = utc_now();
    const auto& c = cfg.common.command;
    if (c == "geometry") run_geometry(cfg, art);
    else if (c == "solve") run_solve(cfg, art);
    else if (c == "capacity") run_capacity(cfg, art);
    else if (c == "sweep") run_sweep_command(cfg, art);
    else if (c == "ergodic") run_ergodic_command(cfg, art);
    else run_density(cfg, art);
    art.summary["format_version"] = format_version;
    {
        auto os = art.open("summary", "summary.json");
        os << art.summary.dump(2) << '\n';
    }
    const json record{{"format_version", format_version},
                      {"command", c},
                      {"config", cfg.resolved},
                      {"seed", cfg.common.seed},
                      {"content_hash", hash},
                      {"started", started},
                      {"finished", utc_now()},
                      {"tool_version", tool_version},
                      {"outputs", art.outputs},
                      {"exit_code", art.exit_code}};
    std::ofstream os(art.dir / "run_record.json");
    os << record.dump(2) << '\n';
    return art;
}

} // namespace percohom::cli
