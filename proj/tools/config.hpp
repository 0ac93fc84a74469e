#pragma once

// JSON configuration for the command-line tool: schema readers that reject
// unknown keys, record every value they use (defaults included) as the
// resolved config, and convert to the library's spec types.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "percohom/percohom.hpp"

namespace percohom::cli {

using json = nlohmann::json;

/// Schema violation; `field` is a dotted path such as "family.rho".
class ConfigError : public std::runtime_error {
  public:
    ConfigError(const std::string& field, const std::string& msg)
        : std::runtime_error(field.empty() ? msg : field + ": " + msg), field_(field) {}
    const std::string& field() const noexcept { return field_; }

  private:
    std::string field_;
};

class Reader {
  public:
    Reader(const json& j, std::string path, json* resolved) : j_(j), path_(std::move(path)), out_(resolved) {
        if (!j_.is_object()) throw ConfigError(path_, "expected an object");
    }

    std::string field(const std::string& key) const {
        if (key.empty()) return path_;
        return path_.empty() ? key : path_ + "." + key;
    }
    bool has(const std::string& key) const { return j_.contains(key) && !j_.at(key).is_null(); }

    template <class T>
    T get(const std::string& key, const T& fallback) {
        seen_.push_back(key);
        T v = has(key) ? convert<T>(key) : fallback;
        (*out_)[key] = v;
        return v;
    }

    template <class T>
    T require(const std::string& key) {
        seen_.push_back(key);
        if (!has(key)) throw ConfigError(field(key), "required key missing");
        T v = convert<T>(key);
        (*out_)[key] = v;
        return v;
    }

    template <class T>
    std::optional<T> optional(const std::string& key) {
        seen_.push_back(key);
        if (!has(key)) return std::nullopt;
        T v = convert<T>(key);
        (*out_)[key] = v;
        return v;
    }

    Reader child(const std::string& key) {
        seen_.push_back(key);
        static const json empty = json::object();
        (*out_)[key] = json::object();
        return Reader(has(key) ? j_.at(key) : empty, field(key), &(*out_)[key]);
    }

    /// Throws on the first key that was never read.
    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (std::find(seen_.begin(), seen_.end(), it.key()) == seen_.end())
                throw ConfigError(field(it.key()), "unknown key");
    }

  private:
    template <class T>
    T convert(const std::string& key) const {
        const json& v = j_.at(key);
        try {
            if constexpr (std::is_same_v<T, double>) {
                if (!v.is_number()) throw ConfigError(field(key), "expected a number");
            } else if constexpr (std::is_integral_v<T> && !std::is_same_v<T, bool>) {
                if (!v.is_number_integer()) throw ConfigError(field(key), "expected an integer");
                if constexpr (std::is_unsigned_v<T>)
                    if (v.is_number_integer() && !v.is_number_unsigned() && v.get<long long>() < 0)
                        throw ConfigError(field(key), "expected a non-negative integer");
            } else if constexpr (std::is_same_v<T, bool>) {
                if (!v.is_boolean()) throw ConfigError(field(key), "expected true or false");
            } else if constexpr (std::is_same_v<T, std::string>) {
                if (!v.is_string()) throw ConfigError(field(key), "expected a string");
            }
            return v.get<T>();
        } catch (const json::exception& e) {
            throw ConfigError(field(key), std::string("type error: ") + e.what());
        }
    }

    const json& j_;
    std::string path_;
    json* out_;
    std::vector<std::string> seen_;
};

// ---------------------------------------------------------------------------
// Pieces shared by several commands

inline GeometryFamily read_family(Reader r, int dim) {
    const auto kind = r.require<std::string>("kind");
    GeometryFamily f;
    const double s_default = dim == 3 ? 3.0 : std::numeric_limits<double>::quiet_NaN();
    auto exponent = [&](Reader& rr) {
        if (dim == 3) return rr.get<double>("exponent", s_default);
        return rr.require<double>("exponent");
    };
    if (kind == "boolean") {
        BooleanFamily b;
        b.intensity = r.get<double>("intensity", b.intensity);
        const auto rule = r.get<std::string>("rule", "fixed");
        if (rule == "fixed") b.rule = BooleanFamily::Rule::fixed;
        else if (rule == "min_distance") b.rule = BooleanFamily::Rule::min_distance;
        else if (rule == "iid_capped") b.rule = BooleanFamily::Rule::iid_capped;
        else throw ConfigError(r.field("rule"), "expected fixed, min_distance or iid_capped");
        if (b.rule == BooleanFamily::Rule::fixed) {
            b.r0 = r.get<double>("r0", b.r0);
            b.exponent = exponent(r);
        } else {
            b.theta = r.get<double>("theta", b.theta);
        }
        f = b;
    } else if (kind == "rcm") {
        RcmFamily c;
        c.intensity = r.get<double>("intensity", c.intensity);
        c.c1 = r.get<double>("c1", c.c1);
        c.c2 = r.get<double>("c2", c.c2);
        c.rho = r.get<double>("rho", c.rho);
        c.rho_max = r.get<double>("rho_max", c.rho_max);
        f = c;
    } else if (kind == "lattice") {
        LatticeFamily l;
        l.r0 = r.get<double>("r0", l.r0);
        l.exponent = exponent(r);
        f = l;
    } else {
        throw ConfigError(r.field("kind"), "expected boolean, rcm or lattice");
    }
    r.finish();
    try {
        validate_family(f);
    } catch (const InvalidArgument& e) {
        throw ConfigError(r.field(""), e.what());
    }
    return f;
}

inline Vec3 read_vec(const std::vector<double>& v, int dim, const std::string& field) {
    if (static_cast<int>(v.size()) != dim) throw ConfigError(field, "expected " + std::to_string(dim) + " entries");
    Vec3 out{0.0, 0.0, 0.0};
    for (int d = 0; d < dim; ++d) out[d] = v[static_cast<std::size_t>(d)];
    return out;
}

inline Box read_domain(Reader r, int dim) {
    const auto lo = r.get<std::vector<double>>("lower", std::vector<double>(static_cast<std::size_t>(dim), 0.0));
    const auto hi = r.get<std::vector<double>>("upper", std::vector<double>(static_cast<std::size_t>(dim), 1.0));
    r.finish();
    try {
        return Box(dim, read_vec(lo, dim, r.field("lower")), read_vec(hi, dim, r.field("upper")));
    } catch (const InvalidArgument& e) {
        throw ConfigError(r.field(""), e.what());
    }
}

inline int read_dim(Reader& r, int fallback = 3) {
    const int dim = r.get<int>("dim", fallback);
    if (dim != 2 && dim != 3) throw ConfigError(r.field("dim"), "dim must be 2 or 3");
    return dim;
}

// ---------------------------------------------------------------------------
// Commands

struct Common {
    std::string command;
    std::uint64_t seed = 0;
    int threads = 1;
};

struct PoissonCheckConfig {
    std::size_t replicas = 10000;
    int kmax = 5;
    double cell = 1.0;
};

struct GeometryConfig {
    int dim = 3;
    Box domain;
    GeometryFamily family;
    double eps = 1.0;
    long cells = 64;
    bool write_mask = true;
    bool write_points = true;
    std::optional<PoissonCheckConfig> poisson;
};

struct SolveConfig {
    int dim = 3;
    Box domain;
    std::optional<GeometryFamily> family;
    double eps = 1.0;
    long cells = 64;
    double reaction = 1.0;
    std::string source = "-1";
    double tol = 1e-8;
    std::optional<double> homogenized_c;
};

struct NewtonConfig {
    double radius = 0.1;
    double outer_radius = 1.0;
    std::vector<long> cells_per_unit{24, 48};
    Truncation truncation = Truncation::sphere;
    double tol = 1e-10;
};

struct ConductivityConfig {
    int dim = 3;
    std::optional<GeometryFamily> family;
    double eps = 1.0;
    Vec3 z{0.5, 0.5, 0.5};
    double h = 1e-4;
    double gamma = 1.0;
    long cells_per_h = 32;
};

struct CapacityConfig {
    std::string mode = "newton";
    NewtonConfig newton;
    StrangeTermSpec strange;
    ConductivityConfig conductivity;
};

struct ErgodicConfig {
    ErgodicSpec spec;
    std::optional<std::pair<double, double>> correlation; ///< (t, gap)
};

struct DensityConfig {
    int dim = 3;
    Box domain;
    GeometryFamily family;
    double eps = 1.0;
    long cells = 64;
    double radius = 0.1;
    std::size_t probes = 200;
    double margin = 0.0;
};

struct Config {
    Common common;
    json resolved = json::object();
    std::optional<GeometryConfig> geometry;
    std::optional<SolveConfig> solve;
    std::optional<CapacityConfig> capacity;
    std::optional<SweepSpec> sweep;
    std::optional<ErgodicConfig> ergodic;
    std::optional<DensityConfig> density;
};

inline const std::vector<std::string>& command_names() {
    static const std::vector<std::string> names{"geometry", "solve", "capacity", "sweep", "ergodic", "density-check"};
    return names;
}

namespace detail {

inline std::vector<double> positive_list(Reader& r, const std::string& key) {
    auto v = r.require<std::vector<double>>(key);
    if (v.empty()) throw ConfigError(r.field(key), "list must not be empty");
    for (double x : v)
        if (!(std::isfinite(x) && x > 0.0)) throw ConfigError(r.field(key), "entries must be > 0");
    return v;
}

inline GeometryConfig read_geometry(Reader& r) {
    GeometryConfig g;
    g.dim = read_dim(r);
    g.domain = read_domain(r.child("domain"), g.dim);
    g.family = read_family(r.child("family"), g.dim);
    g.eps = r.get<double>("eps", 1.0);
    g.cells = r.get<long>("cells", 64);
    g.write_mask = r.get<bool>("write_mask", true);
    g.write_points = r.get<bool>("write_points", true);
    if (r.has("poisson_check")) {
        auto p = r.child("poisson_check");
        PoissonCheckConfig pc;
        pc.replicas = p.get<std::size_t>("replicas", pc.replicas);
        pc.kmax = p.get<int>("kmax", pc.kmax);
        pc.cell = p.get<double>("cell", pc.cell);
        p.finish();
        g.poisson = pc;
    }
    return g;
}

inline SolveConfig read_solve(Reader& r) {
    SolveConfig s;
    s.dim = read_dim(r);
    s.domain = read_domain(r.child("domain"), s.dim);
    if (r.has("family")) s.family = read_family(r.child("family"), s.dim);
    s.eps = r.get<double>("eps", 1.0);
    s.cells = r.get<long>("cells", 64);
    s.reaction = r.get<double>("reaction", 1.0);
    s.source = r.get<std::string>("source", "-1");
    s.tol = r.get<double>("tol", 1e-8);
    s.homogenized_c = r.optional<double>("homogenized_c");
    return s;
}

inline CapacityConfig read_capacity(Reader& r) {
    CapacityConfig c;
    c.mode = r.get<std::string>("mode", "newton");
    if (c.mode == "newton") {
        auto& n = c.newton;
        n.radius = r.get<double>("radius", n.radius);
        n.outer_radius = r.get<double>("outer_radius", n.outer_radius);
        n.cells_per_unit = r.get<std::vector<long>>("cells_per_unit", n.cells_per_unit);
        const auto t = r.get<std::string>("truncation", "sphere");
        if (t == "sphere") n.truncation = Truncation::sphere;
        else if (t == "cube") n.truncation = Truncation::cube;
        else throw ConfigError(r.field("truncation"), "expected sphere or cube");
        n.tol = r.get<double>("tol", n.tol);
        if (n.cells_per_unit.empty()) throw ConfigError(r.field("cells_per_unit"), "list must not be empty");
    } else if (c.mode == "strange_term") {
        auto& s = c.strange;
        s.dim = read_dim(r);
        s.family = read_family(r.child("family"), s.dim);
        s.center = read_vec(r.get<std::vector<double>>("center", std::vector<double>(static_cast<std::size_t>(s.dim), 0.5)),
                            s.dim, r.field("center"));
        s.h_values = positive_list(r, "h");
        s.eps_values = positive_list(r, "eps");
        s.replicas = r.get<int>("replicas", 1);
        s.cells_per_h = r.get<long>("cells_per_h", s.cells_per_h);
        s.bound_A = r.optional<double>("bound_A");
        s.tol = r.get<double>("tol", s.tol);
    } else if (c.mode == "conductivity") {
        auto& k = c.conductivity;
        k.dim = read_dim(r);
        if (r.has("family")) k.family = read_family(r.child("family"), k.dim);
        k.eps = r.get<double>("eps", 1.0);
        k.z = read_vec(r.get<std::vector<double>>("z", std::vector<double>(static_cast<std::size_t>(k.dim), 0.5)), k.dim,
                       r.field("z"));
        k.h = r.get<double>("h", k.h);
        k.gamma = r.get<double>("gamma", k.gamma);
        k.cells_per_h = r.get<long>("cells_per_h", k.cells_per_h);
    } else {
        throw ConfigError(r.field("mode"), "expected newton, strange_term or conductivity");
    }
    return c;
}

inline SweepSpec read_sweep(Reader& r) {
    SweepSpec s;
    s.dim = read_dim(r);
    s.domain = read_domain(r.child("domain"), s.dim);
    s.family = read_family(r.child("family"), s.dim);
    s.eps_values = positive_list(r, "eps");
    s.h_values = r.get<std::vector<double>>("h", {});
    s.reaction = r.get<double>("reaction", s.reaction);
    s.source = r.get<std::string>("source", s.source);
    s.cells = r.get<long>("cells", s.cells);
    s.cells_per_feature = r.get<long>("cells_per_feature", s.cells_per_feature);
    s.replicas = r.get<int>("replicas", s.replicas);
    s.tol = r.get<double>("tol", s.tol);
    s.c_override = r.optional<double>("c");
    s.bound_A = r.optional<double>("bound_A");
    return s;
}

inline ErgodicConfig read_ergodic(Reader& r) {
    ErgodicConfig e;
    auto& s = e.spec;
    s.dim = read_dim(r, 2);
    s.family = read_family(r.child("family"), s.dim);
    const auto fn = r.get<std::string>("functional", "local_capacity");
    if (fn == "local_capacity") s.functional = CubeFunctional::local_capacity;
    else if (fn == "minimizer_energy") s.functional = CubeFunctional::minimizer_energy;
    else throw ConfigError(r.field("functional"), "expected local_capacity or minimizer_energy");
    s.t_values = positive_list(r, "t");
    s.replicas = r.get<int>("replicas", s.replicas);
    s.cells_per_unit = r.get<long>("cells_per_unit", s.cells_per_unit);
    s.reaction = r.get<double>("reaction", s.reaction);
    s.source = r.get<std::string>("source", s.source);
    s.tol = r.get<double>("tol", s.tol);
    if (r.has("correlation")) {
        auto c = r.child("correlation");
        const double t = c.require<double>("t");
        const double gap = c.get<double>("gap", 1.0);
        c.finish();
        e.correlation = std::make_pair(t, gap);
    }
    return e;
}

inline DensityConfig read_density(Reader& r) {
    DensityConfig d;
    d.dim = read_dim(r);
    d.domain = read_domain(r.child("domain"), d.dim);
    d.family = read_family(r.child("family"), d.dim);
    d.eps = r.get<double>("eps", 1.0);
    d.cells = r.get<long>("cells", 64);
    d.radius = r.get<double>("radius", d.radius);
    d.probes = r.get<std::size_t>("probes", d.probes);
    d.margin = r.get<double>("margin", d.margin);
    return d;
}

} // namespace detail

/// Parses a config document. `command` (if non-empty) must match the
/// document's "command" key when that key is present.
inline Config parse_config(const json& doc, const std::string& command = {}) {
    Config cfg;
    Reader r(doc, "", &cfg.resolved);
    const auto fv = r.get<int>("format_version", format_version);
    if (fv != format_version) throw ConfigError("format_version", "unsupported format version " + std::to_string(fv));
    cfg.common.command = r.get<std::string>("command", command);
    if (!command.empty() && cfg.common.command != command)
        throw ConfigError("command", "config is for '" + cfg.common.command + "', not '" + command + "'");
    const auto& names = command_names();
    if (std::find(names.begin(), names.end(), cfg.common.command) == names.end())
        throw ConfigError("command", "unknown command '" + cfg.common.command + "'");
    cfg.common.seed = r.get<std::uint64_t>("seed", 0);
    cfg.common.threads = r.get<int>("threads", 1);
    if (cfg.common.threads < 1) throw ConfigError("threads", "threads must be >= 1");
    const auto& c = cfg.common.command;
    if (c == "geometry") cfg.geometry = detail::read_geometry(r);
    else if (c == "solve") cfg.solve = detail::read_solve(r);
    else if (c == "capacity") cfg.capacity = detail::read_capacity(r);
    else if (c == "sweep") cfg.sweep = detail::read_sweep(r);
    else if (c == "ergodic") cfg.ergodic = detail::read_ergodic(r);
    else cfg.density = detail::read_density(r);
    r.finish();
    if (cfg.sweep) {
        cfg.sweep->seed = cfg.common.seed;
        cfg.sweep->threads = cfg.common.threads;
    }
    if (cfg.ergodic) {
        cfg.ergodic->spec.seed = cfg.common.seed;
        cfg.ergodic->spec.threads = cfg.common.threads;
    }
    if (cfg.capacity) cfg.capacity->strange.seed = cfg.common.seed;
    return cfg;
}

/// Semantic checks beyond the schema; every violation at once.
inline std::vector<std::string> semantic_diagnostics(const Config& cfg) {
    std::vector<std::string> d;
    auto grid_check = [&](const Box& box, long cells) {
        if (cells < 4) d.push_back("cells must be >= 4");
        else try {
                percohom::detail::partition_counts(box, 1.0 / static_cast<double>(cells));
            } catch (const InvalidArgument&) {
                d.push_back("domain sides must be whole multiples of 1/cells");
            }
    };
    auto eps_check = [&](double eps) {
        if (!(std::isfinite(eps) && eps > 0.0)) d.push_back("eps must be > 0");
    };
    if (cfg.geometry) {
        const auto& g = *cfg.geometry;
        grid_check(g.domain, g.cells);
        eps_check(g.eps);
        if (g.poisson && (g.poisson->replicas < 1 || g.poisson->kmax < 1 || !(g.poisson->cell > 0.0)))
            d.push_back("poisson_check needs replicas >= 1, kmax >= 1 and cell > 0");
    }
    if (cfg.solve) {
        const auto& s = *cfg.solve;
        grid_check(s.domain, s.cells);
        eps_check(s.eps);
        if (!(s.reaction >= 0.0)) d.push_back("reaction coefficient must be >= 0");
        if (!(s.tol > 0.0)) d.push_back("tol must be > 0");
        if (s.homogenized_c && !(*s.homogenized_c >= 0.0)) d.push_back("homogenized_c must be >= 0");
        try {
            Expression::parse(s.source);
        } catch (const InvalidArgument& e) {
            d.push_back(std::string("source: ") + e.what());
        }
    }
    if (cfg.capacity) {
        const auto& c = *cfg.capacity;
        if (c.mode == "newton") {
            const auto& n = c.newton;
            if (!(n.radius > 0.0 && n.outer_radius > n.radius)) d.push_back("need 0 < radius < outer_radius");
            for (long k : n.cells_per_unit)
                if (k < 2) d.push_back("cells_per_unit entries must be >= 2");
        } else if (c.mode == "strange_term") {
            try {
                validate_strange_term(c.strange);
            } catch (const std::exception& e) {
                d.push_back(e.what());
            }
        } else {
            const auto& k = c.conductivity;
            if (!(k.gamma > 0.0 && k.gamma < 2.0)) d.push_back("gamma must lie in (0,2)");
            if (!(k.h > 0.0)) d.push_back("h must be > 0");
            if (k.cells_per_h < 2) d.push_back("cells_per_h must be >= 2");
            eps_check(k.eps);
        }
    }
    if (cfg.sweep) {
        const auto v = validate_sweep(*cfg.sweep);
        d.insert(d.end(), v.begin(), v.end());
    }
    if (cfg.ergodic) {
        const auto v = validate_ergodic(cfg.ergodic->spec);
        d.insert(d.end(), v.begin(), v.end());
        if (cfg.ergodic->correlation && !(cfg.ergodic->correlation->first > 0.0 && cfg.ergodic->correlation->second >= 0.0))
            d.push_back("correlation needs t > 0 and gap >= 0");
    }
    if (cfg.density) {
        const auto& g = *cfg.density;
        grid_check(g.domain, g.cells);
        eps_check(g.eps);
        if (!(g.radius > 0.0) || g.probes < 1 || g.margin < 0.0)
            d.push_back("density check needs radius > 0, probes >= 1 and margin >= 0");
    }
    return d;
}

/// Schema and semantic diagnostics together; empty means valid.
inline std::vector<std::string> validate_config(const json& doc, const std::string& command = {}) {
    try {
        return semantic_diagnostics(parse_config(doc, command));
    } catch (const ConfigError& e) {
        return {e.what()};
    }
}

/// Applies "a.b.c=value"; the value is parsed as JSON when possible and taken
/// as a string otherwise.
inline void apply_override(json& doc, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError(assignment, "override must look like key=value");
    const std::string path = assignment.substr(0, eq), text = assignment.substr(eq + 1);
    json value;
    try {
        value = json::parse(text);
    } catch (const json::parse_error&) {
        value = text;
    }
    json* node = &doc;
    std::size_t start = 0;
    for (;;) {
        const auto dot = path.find('.', start);
        const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (key.empty()) throw ConfigError(path, "empty key in override");
        if (!node->is_object()) throw ConfigError(path, "override path crosses a non-object");
        if (dot == std::string::npos) {
            (*node)[key] = value;
            return;
        }
        node = &(*node)[key];
        if (node->is_null()) *node = json::object();
        start = dot + 1;
    }
}

/// Built-in presets by name.
inline const std::map<std::string, json>& presets() {
    static const std::map<std::string, json> p{
        {"ball-oracle",
         {{"command", "capacity"}, {"mode", "newton"}, {"radius", 0.1}, {"outer_radius", 1.0},
          {"cells_per_unit", {24, 48}}}},
        {"poisson-law",
         {{"command", "geometry"},
          {"dim", 3},
          {"family", {{"kind", "boolean"}, {"intensity", 1.0}, {"r0", 0.2}}},
          {"eps", 1.0},
          {"cells", 16},
          {"write_mask", false},
          {"write_points", false},
          {"poisson_check", {{"replicas", 10000}, {"kmax", 5}, {"cell", 1.0}}}}},
        {"rcm-geometry",
         {{"command", "geometry"},
          {"dim", 3},
          {"family", {{"kind", "rcm"}, {"intensity", 1.0}, {"c1", 1.0}, {"c2", 1.5}, {"rho", 0.15}}},
          {"eps", 0.125},
          {"cells", 64}}},
        {"periodic-ergodic",
         {{"command", "ergodic"},
          {"dim", 2},
          {"family", {{"kind", "lattice"}, {"r0", 0.25}, {"exponent", 1.0}}},
          {"t", {2, 4, 8}},
          {"replicas", 8},
          {"cells_per_unit", 16}}},
        {"boolean-ergodic",
         {{"command", "ergodic"},
          {"dim", 2},
          {"family", {{"kind", "boolean"}, {"intensity", 1.0}, {"r0", 0.25}, {"exponent", 1.0}}},
          {"t", {2, 4, 8}},
          {"replicas", 16},
          {"cells_per_unit", 16}}},
        {"boolean-critical",
         {{"command", "sweep"},
          {"dim", 3},
          {"family", {{"kind", "boolean"}, {"intensity", 1.0}, {"r0", 0.2}, {"exponent", 3.0}}},
          {"eps", {0.125, 0.0625, 0.03125}},
          {"h", {0.75, 0.625}},
          {"cells", 96}}},
        {"hole-free-solve",
         {{"command", "solve"}, {"dim", 3}, {"cells", 32}, {"reaction", 1.0}, {"source", "-1"}}},
        {"unit-conductivity",
         {{"command", "capacity"}, {"mode", "conductivity"}, {"h", 1e-4}, {"gamma", 1.0}, {"cells_per_h", 32}}},
        {"rcm-density",
         {{"command", "density-check"},
          {"dim", 3},
          {"family", {{"kind", "rcm"}, {"intensity", 1.0}, {"c1", 1.0}, {"c2", 1.5}, {"rho", 0.2}}},
          {"eps", 0.25},
          {"cells", 64},
          {"radius", 0.2},
          {"probes", 100},
          {"margin", 0.2}}},
    };
    return p;
}

} // namespace percohom::cli
