#pragma once

// ε-sweeps of the perforated Dirichlet problem against the homogenized one,
// ergodic averaging of cube functionals, the partition of unity and the
// corrector w_h^ε, and the uniform H^1 bound audit.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "capacity.hpp"
#include "errors.hpp"
#include "expression.hpp"
#include "families.hpp"
#include "grid_solver.hpp"
#include "mask.hpp"
#include "parallel.hpp"
#include "point_process.hpp"
#include "rng.hpp"
#include "stats.hpp"

namespace percohom {

// ---------------------------------------------------------------------------
// Uniform H^1 bound

struct BoundAudit {
    bool pass = false;
    bool bounded_trend = false;   ///< last <= 1.5 * first
    double max_h1 = 0.0;
    double first_h1 = 0.0;
    double ceiling = 0.0;
};

/// Ceiling 2 C_D sqrt(1 + C_D^2) ||f||: the energy bound ||∇u||^2 <= 2||u|| ||f||
/// with ||u|| <= C_D ||∇u|| gives ||∇u|| <= 2 C_D ||f|| and ||u|| <= 2 C_D^2 ||f||.
inline double h1_ceiling(double friedrichs_C, double f_l2) {
    return 2.0 * friedrichs_C * std::sqrt(1.0 + friedrichs_C * friedrichs_C) * f_l2;
}

/// h1 in sweep order (ε decreasing).
inline BoundAudit uniform_bound_audit(const std::vector<double>& h1, double friedrichs_C, double f_l2,
                                      double tol = 1e-9) {
    detail::require(h1.size() >= 3, "uniform bound audit needs at least three epsilon values");
    detail::require(friedrichs_C > 0.0 && f_l2 >= 0.0, "Friedrichs constant must be > 0 and ||f|| >= 0");
    BoundAudit a;
    a.first_h1 = h1.front();
    a.max_h1 = *std::max_element(h1.begin(), h1.end());
    a.ceiling = h1_ceiling(friedrichs_C, f_l2);
    a.bounded_trend = h1.back() <= 1.5 * h1.front();
    a.pass = a.bounded_trend && a.max_h1 <= a.ceiling + tol;
    return a;
}

// ---------------------------------------------------------------------------
// Sweep

struct SweepSpec {
    GeometryFamily family = BooleanFamily{};
    int dim = 3;
    Box domain = Box::cube(3, 0.0, 1.0);
    std::vector<double> eps_values;        ///< strictly decreasing
    std::vector<double> h_values;          ///< cube sides for the c estimate
    double reaction = 1.0;
    std::string source = "-1";             ///< expression in x, y, z
    long cells = 96;                       ///< grid cells per unit length
    long cells_per_feature = 2;            ///< resolution rule (warning only)
    int replicas = 1;
    std::uint64_t seed = 0;
    double tol = 1e-8;
    std::optional<double> c_override;      ///< skip the capacity pipeline
    std::optional<double> bound_A;
    int threads = 1;

    double dx() const { return 1.0 / static_cast<double>(cells); }
};

/// Every violated invariant, reported at once.
inline std::vector<std::string> validate_sweep(const SweepSpec& s) {
    std::vector<std::string> diag;
    auto check = [&](bool ok, const std::string& msg) {
        if (!ok) diag.push_back(msg);
    };
    check(s.dim == 2 || s.dim == 3, "dim must be 2 or 3");
    check(s.domain.dim() == s.dim, "domain dimension must equal dim");
    check(!s.eps_values.empty(), "eps list must not be empty");
    for (std::size_t i = 0; i < s.eps_values.size(); ++i) {
        check(std::isfinite(s.eps_values[i]) && s.eps_values[i] > 0.0, "every epsilon must be > 0");
        if (i > 0) check(s.eps_values[i] < s.eps_values[i - 1], "eps list must be strictly decreasing");
    }
    for (double h : s.h_values) {
        check(std::isfinite(h) && h > 0.0, "every h must be > 0");
        for (double e : s.eps_values)
            if (!(e < h / 4.0)) {
                diag.push_back("scale ordering violated: epsilon " + detail::fmt17(e) + " is not << h " +
                               detail::fmt17(h) + " (need epsilon < h/4)");
                break;
            }
        if (s.domain.dim() == s.dim) check(h < s.domain.side(0), "h must be smaller than the domain (h << diam D)");
    }
    check(std::isfinite(s.reaction) && s.reaction >= 0.0, "reaction coefficient must be >= 0");
    check(s.cells >= 4, "cells must be >= 4");
    check(s.cells_per_feature >= 1, "cells_per_feature must be >= 1");
    check(s.replicas >= 1, "replicas must be >= 1");
    check(s.tol > 0.0, "tol must be > 0");
    check(s.threads >= 1, "threads must be >= 1");
    if (s.c_override) check(*s.c_override >= 0.0, "strange term c must be >= 0");
    if (!s.c_override) {
        check(s.dim == 3, "the strange-term pipeline requires dim = 3 (set c to override)");
        check(!s.h_values.empty(), "h list required to estimate c");
    }
    try {
        validate_family(s.family);
    } catch (const InvalidArgument& e) {
        diag.push_back(e.what());
    }
    try {
        Expression::parse(s.source);
    } catch (const InvalidArgument& e) {
        diag.push_back(std::string("source: ") + e.what());
    }
    if (s.domain.dim() == s.dim && s.cells >= 4) {
        try {
            detail::partition_counts(s.domain, s.dx());
        } catch (const InvalidArgument&) {
            diag.push_back("domain sides must be whole multiples of 1/cells");
        }
        for (double h : s.h_values) {
            const Box q = cube_at(s.domain.center(), h, s.dim);
            for (int d = 0; d < s.dim; ++d) {
                const double t = (q.lower()[d] - s.domain.lower()[d]) / s.dx();
                if (std::fabs(t - std::round(t)) > 1e-9 * std::max(1.0, std::fabs(t))) {
                    diag.push_back("cube of side h = " + detail::fmt17(h) +
                                   " at the domain centre is not aligned with the grid");
                    break;
                }
            }
        }
    }
    return diag;
}

struct SweepRow {
    double eps = 0.0;
    int replica = 0;
    std::uint64_t seed = 0;
    double volume_fraction = 0.0;
    std::size_t hole_cells = 0;
    std::vector<double> cap_per_volume; ///< one entry per h value
    double h1 = 0.0;
    double gamma = 0.0;
    double energy = 0.0;                ///< ∫|∇u|^2 + λ|u|^2
    double u_l2 = 0.0;
    double l2_error = 0.0;
    long iterations = 0;
    double empty_cell_frequency = std::numeric_limits<double>::quiet_NaN();
    double boolean_C = std::numeric_limits<double>::quiet_NaN();
    bool resolved = true;               ///< no resolution warning on this row
    bool gamma_nonpositive = false;
    bool energy_bound = false;
    std::string error;                  ///< empty on success
    std::vector<std::string> warnings;
    MaskPtr mask;
};

struct SweepSummary {
    double c = 0.0;
    double c_spread = 0.0;
    std::vector<std::pair<double, double>> eps_first; ///< (h, mean cap/h^n at min ε)
    std::vector<std::pair<double, double>> h_first;   ///< (ε, mean cap/h^n at min h)
    double boolean_C = std::numeric_limits<double>::quiet_NaN();
    double f_l2 = 0.0;
    double friedrichs_C = 0.0;
    std::vector<std::pair<double, double>> error_by_eps; ///< (ε, replica-mean L2 error)
    std::vector<std::pair<double, double>> h1_by_eps;
    double decay_slope = std::numeric_limits<double>::quiet_NaN();
    double error_ratio = std::numeric_limits<double>::quiet_NaN(); ///< err(min ε) / err(max ε)
    bool energy_inequalities = true;
    std::size_t nested_pairs = 0;
    std::size_t nested_violations = 0;
    std::optional<BoundAudit> h1_audit;
    bool empty_cells_ok = true;
    bool nondegenerate = false;         ///< every row has resolved, non-empty holes
    bool converges = false;             ///< nondegenerate and error_ratio <= 1/2
    bool bound_violated = false;
    bool partial = false;
    SolveReport homogenized;
    std::vector<std::string> warnings;
};

struct HomogenizationReport {
    std::vector<SweepRow> rows;
    SweepSummary summary;
    std::shared_ptr<const GridField> u_hom;
};

namespace detail {

/// Σ 4π r over balls whose centre lies at distance >= 2r from ∂D, per |D|.
inline double boolean_constant(const ObstacleSet& obs, const Box& D) {
    if (obs.kind() != ObstacleSet::Kind::balls || obs.dim() != 3) return std::numeric_limits<double>::quiet_NaN();
    double s = 0.0;
    for (const auto& b : obs.balls()) {
        double dist = std::numeric_limits<double>::infinity();
        for (int d = 0; d < 3; ++d) dist = std::min({dist, b.center[d] - D.lower()[d], D.upper()[d] - b.center[d]});
        if (dist >= 2.0 * b.radius) s += 4.0 * std::numbers::pi * b.radius;
    }
    return s / D.volume();
}

/// Hole set of a contained in that of b (same grid).
inline bool holes_nested(const PerforatedMask& a, const PerforatedMask& b) {
    if (!a.same_grid(b)) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a.is_hole(i) && !b.is_hole(i)) return false;
    return true;
}

inline void add_unique(std::vector<std::string>& v, const std::string& s) {
    if (std::find(v.begin(), v.end(), s) == v.end()) v.push_back(s);
}

} // namespace detail

/// Per (ε, replica): realize F^ε over D, rasterize, measure the geometry and
/// the local capacities (same realization), solve the perforated problem and
/// compare with the homogenized solution, which is solved once for the final
/// c. A failing row keeps its error message; the summary is then partial.
inline HomogenizationReport run_sweep(const SweepSpec& spec) {
    const auto diag = validate_sweep(spec);
    if (!diag.empty()) throw InvalidArgument("invalid sweep spec: " + diag.front());
    const Source f(Expression::parse(spec.source));
    const Box& D = spec.domain;
    const int n = spec.dim;
    const double dx = spec.dx();
    const std::size_t ne = spec.eps_values.size();
    const std::size_t nr = static_cast<std::size_t>(spec.replicas);
    const bool estimate_c = !spec.c_override;
    HomogenizationReport rep;
    rep.rows.resize(ne * nr);
    auto& sum = rep.summary;

    // geometry and capacities
    parallel_for(ne * nr, spec.threads, [&](std::size_t job) {
        SweepRow& row = rep.rows[job];
        row.eps = spec.eps_values[job / nr];
        row.replica = static_cast<int>(job % nr);
        row.seed = derive_seed(spec.seed, static_cast<std::uint64_t>(row.replica));
        try {
            const auto obs = realize(spec.family, row.eps, D, row.seed);
            auto m = std::make_shared<PerforatedMask>(rasterize(obs, D, dx));
            m->set_provenance(family_name(spec.family), "seed " + std::to_string(row.seed), row.eps);
            row.warnings = m->warnings();
            const double feature = obs.empty() ? std::numeric_limits<double>::infinity() : 2.0 * obs.min_radius();
            if (feature < static_cast<double>(spec.cells_per_feature) * dx)
                row.warnings.push_back("resolution: smallest obstacle feature " + detail::fmt17(feature) +
                                       " spans fewer than " + std::to_string(spec.cells_per_feature) + " cells");
            row.resolved = row.warnings.empty();
            row.volume_fraction = volume_fraction(*m);
            row.hole_cells = m->count(CellFlag::hole);
            row.boolean_C = detail::boolean_constant(obs, D);
            if (std::holds_alternative<RcmFamily>(spec.family)) {
                std::vector<Vec3> inside;
                for (const auto& p : obs.points().points())
                    if (D.contains(p)) inside.push_back(p);
                row.empty_cell_frequency = empty_cell_frequency(PointConfiguration(std::move(inside), D, 0.0, row.seed),
                                                                row.eps);
            }
            if (estimate_c)
                for (double h : spec.h_values) {
                    const auto est = local_capacity(*m, cube_at(D.center(), h, n));
                    row.cap_per_volume.push_back(est.value / std::pow(h, n));
                }
            row.mask = std::move(m);
        } catch (const std::exception& e) {
            row.error = e.what();
        }
    });

    // strange term from the rows above
    if (spec.c_override) {
        sum.c = *spec.c_override;
    } else {
        std::map<std::pair<std::size_t, std::size_t>, std::vector<double>> cell;
        for (std::size_t job = 0; job < rep.rows.size(); ++job) {
            const auto& row = rep.rows[job];
            if (!row.error.empty()) continue;
            for (std::size_t ih = 0; ih < spec.h_values.size(); ++ih) {
                cell[{ih, job / nr}].push_back(row.cap_per_volume[ih]);
                if (spec.bound_A && row.cap_per_volume[ih] >= *spec.bound_A) sum.bound_violated = true;
            }
        }
        std::size_t ih_min = 0;
        for (std::size_t ih = 1; ih < spec.h_values.size(); ++ih)
            if (spec.h_values[ih] < spec.h_values[ih_min]) ih_min = ih;
        const std::size_t ie_min = ne - 1;
        sum.c = stats::mean(cell[{ih_min, ie_min}]);
        sum.c_spread = stats::stddev(cell[{ih_min, ie_min}]);
        std::vector<std::size_t> order(spec.h_values.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&](auto a, auto b) { return spec.h_values[a] > spec.h_values[b]; });
        for (auto ih : order) sum.eps_first.emplace_back(spec.h_values[ih], stats::mean(cell[{ih, ie_min}]));
        for (std::size_t ie = 0; ie < ne; ++ie)
            sum.h_first.emplace_back(spec.eps_values[ie], stats::mean(cell[{ih_min, ie}]));
    }
    {
        std::vector<double> cs;
        for (const auto& row : rep.rows)
            if (row.error.empty() && row.eps == spec.eps_values.back() && std::isfinite(row.boolean_C))
                cs.push_back(row.boolean_C);
        if (!cs.empty()) sum.boolean_C = stats::mean(cs);
    }

    const auto plain = plain_mask(D, dx);
    const auto hom = solve_homogenized(plain, spec.reaction, sum.c, f, {spec.tol, 0});
    rep.u_hom = std::make_shared<const GridField>(hom.u);
    sum.homogenized = hom.report;
    sum.f_l2 = l2_norm(f.on(*plain), *plain);

    // perforated solves
    parallel_for(ne * nr, spec.threads, [&](std::size_t job) {
        SweepRow& row = rep.rows[job];
        if (!row.error.empty()) return;
        try {
            const auto sol = solve_dirichlet_perforated(row.mask, spec.reaction, f, {spec.tol, 0});
            row.iterations = sol.report.iterations;
            row.u_l2 = l2_norm(sol.u);
            const double grad = dirichlet_energy(sol.u);
            row.h1 = std::sqrt(row.u_l2 * row.u_l2 + grad);
            row.energy = grad + spec.reaction * row.u_l2 * row.u_l2;
            row.gamma = energy_gamma(sol.u, spec.reaction, f);
            row.l2_error = l2_distance(sol.u, *rep.u_hom);
            row.gamma_nonpositive = row.gamma <= 1e-8 * row.energy;
            row.energy_bound = row.energy <= 2.0 * row.u_l2 * sum.f_l2 * (1.0 + 1e-8);
        } catch (const std::exception& e) {
            row.error = e.what();
        }
    });

    // summary
    std::vector<double> err_mean, eps_ok, h1_first_replica;
    sum.nondegenerate = true;
    for (std::size_t ie = 0; ie < ne; ++ie) {
        std::vector<double> errs, h1s;
        for (std::size_t r = 0; r < nr; ++r) {
            const auto& row = rep.rows[ie * nr + r];
            if (!row.error.empty()) {
                sum.partial = true;
                detail::add_unique(sum.warnings, "row eps=" + detail::fmt17(row.eps) + " replica " +
                                                     std::to_string(row.replica) + " failed: " + row.error);
                continue;
            }
            for (const auto& w : row.warnings) detail::add_unique(sum.warnings, w);
            errs.push_back(row.l2_error);
            h1s.push_back(row.h1);
            if (!(row.gamma_nonpositive && row.energy_bound)) sum.energy_inequalities = false;
            if (!row.resolved || row.hole_cells == 0) sum.nondegenerate = false;
            if (std::isfinite(row.empty_cell_frequency)) {
                const double p = std::exp(-std::visit([](const auto& fam) {
                    if constexpr (requires { fam.intensity; }) return fam.intensity;
                    else return 1.0;
                }, spec.family));
                const double cells = std::round(D.volume() / std::pow(row.eps, n));
                if (std::fabs(row.empty_cell_frequency - p) > 3.0 * std::sqrt(p * (1.0 - p) / cells))
                    sum.empty_cells_ok = false;
            }
        }
        if (errs.empty()) {
            sum.nondegenerate = false;
            continue;
        }
        sum.error_by_eps.emplace_back(spec.eps_values[ie], stats::mean(errs));
        sum.h1_by_eps.emplace_back(spec.eps_values[ie], stats::mean(h1s));
    }
    if (sum.error_by_eps.size() >= 2) {
        const double e0 = sum.error_by_eps.front().second, e1 = sum.error_by_eps.back().second;
        sum.error_ratio = e0 > 0.0 ? e1 / e0 : std::numeric_limits<double>::quiet_NaN();
        std::vector<double> xs, ys;
        for (const auto& [e, v] : sum.error_by_eps)
            if (v > 0.0) {
                xs.push_back(e);
                ys.push_back(v);
            }
        if (xs.size() >= 2) sum.decay_slope = stats::loglog_slope(xs, ys);
    }
    sum.converges = sum.nondegenerate && std::isfinite(sum.error_ratio) && sum.error_ratio <= 0.5;

    for (std::size_t a = 0; a < rep.rows.size(); ++a)
        for (std::size_t b = 0; b < rep.rows.size(); ++b) {
            const auto& ra = rep.rows[a];
            const auto& rb = rep.rows[b];
            if (a == b || !ra.error.empty() || !rb.error.empty()) continue;
            if (*ra.mask == *rb.mask && a > b) continue;
            if (!detail::holes_nested(*ra.mask, *rb.mask)) continue;
            ++sum.nested_pairs;
            if (rb.gamma < ra.gamma - 1e-8 * std::fabs(ra.gamma)) ++sum.nested_violations;
        }

    if (sum.h1_by_eps.size() >= 3 && sum.f_l2 >= 0.0) {
        sum.friedrichs_C = friedrichs_constant(plain).constant;
        std::vector<double> h1;
        for (const auto& [e, v] : sum.h1_by_eps) h1.push_back(v);
        sum.h1_audit = uniform_bound_audit(h1, sum.friedrichs_C, sum.f_l2);
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Ergodic averaging over growing cubes Q_t = [0, t]^n (unit scale, ε = 1)

enum class CubeFunctional { local_capacity, minimizer_energy };

struct ErgodicSpec {
    GeometryFamily family = BooleanFamily{};
    CubeFunctional functional = CubeFunctional::local_capacity;
    int dim = 2;
    std::vector<double> t_values;          ///< increasing
    int replicas = 8;
    std::uint64_t seed = 0;
    long cells_per_unit = 16;
    double reaction = 1.0;                 ///< minimizer energy only
    std::string source = "-1";
    double tol = 1e-9;
    int threads = 1;
};

struct ErgodicRow {
    double t = 0.0;
    int replica = 0;
    std::uint64_t seed = 0;
    double value = 0.0;
    double per_volume = 0.0;
    long iterations = 0;
};

struct ErgodicLevel {
    double t = 0.0;
    double mean = 0.0;
    double rel_std = 0.0;
};

struct ErgodicResult {
    std::vector<ErgodicRow> rows;
    std::vector<ErgodicLevel> levels;
    bool decays = false;                   ///< rel-std at max t < rel-std at min t
    std::vector<std::string> warnings;
};

inline std::vector<std::string> validate_ergodic(const ErgodicSpec& s) {
    std::vector<std::string> diag;
    auto check = [&](bool ok, const std::string& msg) {
        if (!ok) diag.push_back(msg);
    };
    check(s.dim == 2 || s.dim == 3, "dim must be 2 or 3");
    check(s.t_values.size() >= 3, "at least three cube sizes required");
    check(s.replicas >= 8, "at least eight replicas required");
    check(s.cells_per_unit >= 1, "cells_per_unit must be >= 1");
    check(s.threads >= 1, "threads must be >= 1");
    check(std::isfinite(s.reaction) && s.reaction >= 0.0, "reaction coefficient must be >= 0");
    for (std::size_t i = 0; i < s.t_values.size(); ++i) {
        const double t = s.t_values[i];
        check(std::isfinite(t) && t > 0.0, "cube sizes must be > 0");
        if (i > 0) check(t > s.t_values[i - 1], "cube sizes must be increasing");
        const double c = t * static_cast<double>(s.cells_per_unit);
        check(std::fabs(c - std::round(c)) <= 1e-9 * c, "t * cells_per_unit must be a whole number");
    }
    try {
        validate_family(s.family);
    } catch (const InvalidArgument& e) {
        diag.push_back(e.what());
    }
    try {
        Expression::parse(s.source);
    } catch (const InvalidArgument& e) {
        diag.push_back(std::string("source: ") + e.what());
    }
    return diag;
}

namespace detail {

inline double cube_functional(const PerforatedMask& m, const Box& cube, const ErgodicSpec& s, const Source& f,
                              long& iterations) {
    if (s.functional == CubeFunctional::local_capacity) {
        const auto est = local_capacity(m, cube, {s.tol, 0, std::nullopt});
        iterations = est.report.iterations;
        return est.value;
    }
    auto sub = std::make_shared<PerforatedMask>(restrict_to(m, cube));
    const auto sol = solve_dirichlet_perforated(sub, s.reaction, f, {s.tol, 0});
    iterations = sol.report.iterations;
    return energy_gamma(sol.u, s.reaction, f);
}

} // namespace detail

/// functional(Q_t)/|Q_t| for every (t, replica); replica seeds are
/// derive_seed(seed, replica), shared across t.
inline ErgodicResult ergodic_average_experiment(const ErgodicSpec& spec) {
    const auto diag = validate_ergodic(spec);
    if (!diag.empty()) throw InvalidArgument("invalid ergodic spec: " + diag.front());
    const Source f(Expression::parse(spec.source));
    const std::size_t nt = spec.t_values.size(), nr = static_cast<std::size_t>(spec.replicas);
    const double dx = 1.0 / static_cast<double>(spec.cells_per_unit);
    ErgodicResult out;
    out.rows.resize(nt * nr);
    std::vector<std::vector<std::string>> warn(nt * nr);
    parallel_for(nt * nr, spec.threads, [&](std::size_t job) {
        ErgodicRow& row = out.rows[job];
        row.t = spec.t_values[job / nr];
        row.replica = static_cast<int>(job % nr);
        row.seed = derive_seed(spec.seed, static_cast<std::uint64_t>(row.replica));
        const Box cube = Box::cube(spec.dim, 0.0, row.t);
        const auto m = rasterize(realize(spec.family, 1.0, cube, row.seed), cube, dx);
        warn[job] = m.warnings();
        row.value = detail::cube_functional(m, cube, spec, f, row.iterations);
        row.per_volume = row.value / cube.volume();
    });
    for (const auto& w : warn)
        for (const auto& s : w) detail::add_unique(out.warnings, s);
    for (std::size_t it = 0; it < nt; ++it) {
        std::vector<double> v;
        for (std::size_t r = 0; r < nr; ++r) v.push_back(out.rows[it * nr + r].per_volume);
        out.levels.push_back({spec.t_values[it], stats::mean(v), stats::rel_std(v)});
    }
    out.decays = out.levels.back().rel_std < out.levels.front().rel_std;
    return out;
}

struct CorrelationResult {
    double correlation = 0.0;
    std::vector<double> first;
    std::vector<double> second;
};

/// Functional on two disjoint congruent cubes [0,t]^n and (t+gap)e_1 + [0,t]^n
/// of one realization, over the replicas.
inline CorrelationResult disjoint_cube_correlation(const ErgodicSpec& spec, double t, double gap) {
    detail::require(t > 0.0 && gap >= 0.0, "cube size must be > 0 and gap >= 0");
    detail::require(spec.replicas >= 2, "correlation needs at least two replicas");
    validate_family(spec.family);
    const Source f(Expression::parse(spec.source));
    const double dx = 1.0 / static_cast<double>(spec.cells_per_unit);
    const int n = spec.dim;
    const Box a = Box::cube(n, 0.0, t);
    const Box b = a.translated(Vec3{t + gap, 0.0, 0.0});
    Vec3 hi = a.upper();
    hi[0] = b.upper()[0];
    const Box region(n, a.lower(), hi);
    CorrelationResult out;
    out.first.resize(static_cast<std::size_t>(spec.replicas));
    out.second.resize(out.first.size());
    parallel_for(out.first.size(), spec.threads, [&](std::size_t r) {
        const auto seed = derive_seed(spec.seed, static_cast<std::uint64_t>(r));
        const auto m = rasterize(realize(spec.family, 1.0, region, seed), region, dx);
        long it = 0;
        out.first[r] = detail::cube_functional(m, a, spec, f, it);
        out.second[r] = detail::cube_functional(m, b, spec, f, it);
    });
    out.correlation = stats::correlation(out.first, out.second);
    return out;
}

// ---------------------------------------------------------------------------
// Partition of unity on cubes of side h, widened by r/2 on each side, with
// smootherstep transitions of width r. Tensor product of 1D partitions, so
// Σ_α φ_α = 1 up to rounding and φ_α = 1 where only Q^α covers.

namespace detail {

inline double smootherstep(double t) {
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    return t * t * t * (t * (6.0 * t - 15.0) + 10.0);
}

} // namespace detail

class PartitionOfUnity {
  public:
    PartitionOfUnity(const PerforatedMask& grid, double h, double r)
        : dim_(grid.dim()), shape_(grid.shape()), dx_(grid.dx()), grid_(grid.grid_box()), h_(h), r_(r) {
        detail::require(std::isfinite(h) && h > 0.0, "cube side h must be > 0");
        detail::require(std::isfinite(r) && r > 0.0 && r < 0.5 * h, "overlap width must satisfy 0 < r < h/2");
        detail::require(r >= 4.0 * dx_ * (1.0 - 1e-12), "overlap width r must span at least 4 grid cells");
        const Box& D = grid.domain();
        for (int d = 0; d < dim_; ++d) {
            const double q = D.side(d) / h;
            count_[d] = static_cast<long>(std::llround(q));
            detail::require(count_[d] >= 1 && std::fabs(q - static_cast<double>(count_[d])) <= 1e-9 * q,
                            "domain sides must be whole multiples of h");
            weight_[d].assign(static_cast<std::size_t>(count_[d]), std::vector<double>(static_cast<std::size_t>(shape_[d]), 0.0));
            first_[d].assign(static_cast<std::size_t>(count_[d]), shape_[d]);
            last_[d].assign(static_cast<std::size_t>(count_[d]), -1);
            for (long c = 0; c < count_[d]; ++c) {
                const double a = D.lower()[d] + static_cast<double>(c) * h;
                const double b = a + h;
                for (long i = 0; i < shape_[d]; ++i) {
                    const double x = grid_.lower()[d] + (static_cast<double>(i) + 0.5) * dx_;
                    const double up = c == 0 ? 1.0 : detail::smootherstep((x - a + 0.5 * r) / r);
                    const double down = c + 1 == count_[d] ? 0.0 : detail::smootherstep((x - b + 0.5 * r) / r);
                    const double w = up - down;
                    weight_[d][static_cast<std::size_t>(c)][static_cast<std::size_t>(i)] = w;
                    if (w > 0.0) {
                        first_[d][static_cast<std::size_t>(c)] = std::min(first_[d][static_cast<std::size_t>(c)], i);
                        last_[d][static_cast<std::size_t>(c)] = std::max(last_[d][static_cast<std::size_t>(c)], i);
                    }
                }
            }
        }
    }

    int dim() const noexcept { return dim_; }
    double h() const noexcept { return h_; }
    double r() const noexcept { return r_; }
    std::size_t size() const noexcept {
        std::size_t s = 1;
        for (int d = 0; d < dim_; ++d) s *= static_cast<std::size_t>(count_[d]);
        return s;
    }
    std::array<long, 3> cube_index(std::size_t alpha) const noexcept {
        std::array<long, 3> c{0, 0, 0};
        for (int d = 0; d < dim_; ++d) {
            c[d] = static_cast<long>(alpha % static_cast<std::size_t>(count_[d]));
            alpha /= static_cast<std::size_t>(count_[d]);
        }
        return c;
    }

    /// φ_α at cell (i,j,k).
    double value(std::size_t alpha, long i, long j, long k = 0) const noexcept {
        const auto c = cube_index(alpha);
        const std::array<long, 3> q{i, j, k};
        double v = 1.0;
        for (int d = 0; d < dim_; ++d)
            v *= weight_[d][static_cast<std::size_t>(c[d])][static_cast<std::size_t>(q[d])];
        return v;
    }

    /// Cell range [lo, hi] (inclusive) where φ_α > 0.
    std::pair<std::array<long, 3>, std::array<long, 3>> support_cells(std::size_t alpha) const noexcept {
        const auto c = cube_index(alpha);
        std::array<long, 3> lo{0, 0, 0}, hi{0, 0, 0};
        for (int d = 0; d < dim_; ++d) {
            lo[d] = first_[d][static_cast<std::size_t>(c[d])];
            hi[d] = last_[d][static_cast<std::size_t>(c[d])];
        }
        return {lo, hi};
    }

    /// Grid-aligned box of the support cells.
    Box support_box(std::size_t alpha) const {
        const auto [lo, hi] = support_cells(alpha);
        Vec3 a{0.0, 0.0, 0.0}, b{0.0, 0.0, 0.0};
        for (int d = 0; d < dim_; ++d) {
            a[d] = grid_.lower()[d] + static_cast<double>(lo[d]) * dx_;
            b[d] = grid_.lower()[d] + static_cast<double>(hi[d] + 1) * dx_;
        }
        return Box(dim_, a, b);
    }

    /// Σ_α φ_α at every cell (linear cell order).
    std::vector<double> sum() const {
        std::vector<double> s(cell_count(), 0.0);
        for (std::size_t a = 0; a < size(); ++a) for_support(a, [&](std::size_t idx, double v) { s[idx] += v; });
        return s;
    }

    /// Largest Euclidean norm of the forward-difference gradient of any φ_α.
    double max_gradient() const {
        double g = 0.0;
        for (std::size_t a = 0; a < size(); ++a)
            for (long k = 0; k < shape_[2]; ++k)
                for (long j = 0; j < shape_[1]; ++j)
                    for (long i = 0; i < shape_[0]; ++i) {
                        const double v = value(a, i, j, k);
                        double s = 0.0;
                        const std::array<long, 3> q{i, j, k};
                        for (int d = 0; d < dim_; ++d) {
                            if (q[d] + 1 >= shape_[d]) continue;
                            auto p = q;
                            ++p[d];
                            const double diff = (value(a, p[0], p[1], p[2]) - v) / dx_;
                            s += diff * diff;
                        }
                        g = std::max(g, std::sqrt(s));
                    }
        return g;
    }

    /// fn(linear cell index, φ_α) over the support of φ_α.
    template <class Fn>
    void for_support(std::size_t alpha, Fn&& fn) const {
        const auto [lo, hi] = support_cells(alpha);
        const long klo = dim_ == 3 ? lo[2] : 0, khi = dim_ == 3 ? hi[2] : 0;
        for (long k = klo; k <= khi; ++k)
            for (long j = lo[1]; j <= hi[1]; ++j)
                for (long i = lo[0]; i <= hi[0]; ++i)
                    fn(static_cast<std::size_t>(i + shape_[0] * (j + shape_[1] * k)), value(alpha, i, j, k));
    }

  private:
    std::size_t cell_count() const noexcept {
        return static_cast<std::size_t>(shape_[0] * shape_[1] * (dim_ == 3 ? shape_[2] : 1));
    }

    int dim_;
    std::array<long, 3> shape_;
    double dx_;
    Box grid_;
    double h_;
    double r_;
    std::array<long, 3> count_{1, 1, 1};
    std::array<std::vector<std::vector<double>>, 3> weight_;
    std::array<std::vector<long>, 3> first_;
    std::array<std::vector<long>, 3> last_;
};

inline PartitionOfUnity build_partition_of_unity(const PerforatedMask& grid, double h, double r) {
    return PartitionOfUnity(grid, h, r);
}

// ---------------------------------------------------------------------------
// Corrector w_h^ε = w Σ_α v^α φ_α / Σ_α φ_α

/// Local capacity minimizer on the support box of every φ_α (box cell order).
inline std::vector<std::vector<double>> local_minimizers(const PerforatedMask& mask, const PartitionOfUnity& pou,
                                                         const CapacityOptions& opt = {}) {
    std::vector<std::vector<double>> v(pou.size());
    for (std::size_t a = 0; a < pou.size(); ++a) v[a] = local_capacity(mask, pou.support_box(a), opt).minimizer;
    return v;
}

struct CorrectorResult {
    GridField field;
    double gamma_corrector = 0.0;   ///< Γ^ε[w_h^ε] on the perforated mask
    double gamma_homogenized = 0.0; ///< Γ̄[w] with reaction λ + c on the full grid
    double gap = 0.0;               ///< gamma_corrector - gamma_homogenized
    std::size_t hole_cells = 0;
    std::size_t nonzero_on_holes = 0;
};

inline CorrectorResult build_corrector(const MaskPtr& mask, const Source& w, const PartitionOfUnity& pou,
                                       const std::vector<std::vector<double>>& minimizers, double reaction, double c,
                                       const Source& f) {
    detail::require(mask != nullptr, "mask required");
    detail::require(minimizers.size() == pou.size(), "one local minimizer per cube required");
    const auto wv = w.on(*mask);
    std::vector<double> num(mask->size(), 0.0), den(mask->size(), 0.0);
    for (std::size_t a = 0; a < pou.size(); ++a) {
        const auto [lo, hi] = pou.support_cells(a);
        const long bx = hi[0] - lo[0] + 1, by = hi[1] - lo[1] + 1;
        detail::require(minimizers[a].size() ==
                            static_cast<std::size_t>(bx * by * (mask->dim() == 3 ? hi[2] - lo[2] + 1 : 1)),
                        "local minimizer does not match its cube");
        pou.for_support(a, [&](std::size_t idx, double phi) {
            const auto q = mask->coords(idx);
            const long local = (q[0] - lo[0]) + bx * ((q[1] - lo[1]) + by * (mask->dim() == 3 ? q[2] - lo[2] : 0));
            num[idx] += phi * minimizers[a][static_cast<std::size_t>(local)];
            den[idx] += phi;
        });
    }
    std::vector<double> out(mask->size(), 0.0);
    for (std::size_t i = 0; i < out.size(); ++i)
        if (mask->is_material(i) && den[i] > 0.0) out[i] = wv[i] * (num[i] / den[i]);
    CorrectorResult res{GridField(mask, std::move(out))};
    for (std::size_t i = 0; i < mask->size(); ++i)
        if (mask->is_hole(i)) {
            ++res.hole_cells;
            if (res.field[i] != 0.0) ++res.nonzero_on_holes;
        }
    res.gamma_corrector = energy_gamma(res.field, reaction, f);
    auto plain = std::make_shared<PerforatedMask>(mask->grid_box(), mask->dx());
    plain->set_domain(mask->domain());
    res.gamma_homogenized = energy_gamma(GridField(plain, w.on(*plain)), reaction + c, f);
    res.gap = res.gamma_corrector - res.gamma_homogenized;
    return res;
}

inline CorrectorResult build_corrector(const MaskPtr& mask, const Source& w, const PartitionOfUnity& pou,
                                       double reaction, double c, const Source& f, const CapacityOptions& opt = {}) {
    return build_corrector(mask, w, pou, local_minimizers(*mask, pou, opt), reaction, c, f);
}

} // namespace percohom
