#pragma once

// Parametrised families of obstacle sets F^ε: one realization per (ε, seed),
// generated at unit scale and mapped by x -> εx.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "errors.hpp"
#include "point_process.hpp"
#include "random_geometry.hpp"

namespace percohom {

/// Balls on unit-intensity Poisson points (before scaling). Physical radius
/// r0 * ε^s for the fixed rule; θ times the minimum pairwise distance (times
/// ε) for the min-distance rules.
struct BooleanFamily {
    enum class Rule { fixed, min_distance, iid_capped };
    double intensity = 1.0;
    double r0 = 0.2;
    double exponent = 3.0;
    Rule rule = Rule::fixed;
    double theta = 0.5;
};

/// Tubes of radius rho around annulus-RCM edges (before scaling);
/// rho_max > rho draws per-edge radii uniformly in [rho, rho_max].
struct RcmFamily {
    double intensity = 1.0;
    double c1 = 1.0;
    double c2 = 1.5;
    double rho = 0.5;
    double rho_max = 0.0;
};

/// One ball per cell of the lattice εZ^n, centred in the cell; radius r0 ε^s.
struct LatticeFamily {
    double r0 = 0.2;
    double exponent = 3.0;
};

using GeometryFamily = std::variant<BooleanFamily, RcmFamily, LatticeFamily>;

inline std::string family_name(const GeometryFamily& f) {
    if (std::holds_alternative<BooleanFamily>(f)) return "boolean";
    if (std::holds_alternative<RcmFamily>(f)) return "rcm";
    return "lattice";
}

/// Largest primitive extent around a generating point, at unit scale.
inline double family_reach(const GeometryFamily& f, double eps, int dim) {
    if (const auto* b = std::get_if<BooleanFamily>(&f)) {
        if (b->rule == BooleanFamily::Rule::fixed) return b->r0 * std::pow(eps, b->exponent - 1.0);
        // theta times the mean spacing bounds theta * d_min in practice
        return b->theta * std::pow(std::max(b->intensity, 1e-12), -1.0 / dim);
    }
    if (const auto* r = std::get_if<RcmFamily>(&f)) return r->c2 + std::max(r->rho, r->rho_max);
    const auto& l = std::get<LatticeFamily>(f);
    return l.r0 * std::pow(eps, l.exponent - 1.0);
}

inline void validate_family(const GeometryFamily& f) {
    if (const auto* b = std::get_if<BooleanFamily>(&f)) {
        detail::require(std::isfinite(b->intensity) && b->intensity >= 0.0, "intensity must be >= 0");
        if (b->rule == BooleanFamily::Rule::fixed) {
            detail::require(b->r0 > 0.0, "r0 must be > 0");
            detail::require(std::isfinite(b->exponent), "radius exponent must be finite");
        } else {
            detail::require(b->theta > 0.0 && b->theta <= 1.0, "theta must lie in (0,1]");
        }
    } else if (const auto* r = std::get_if<RcmFamily>(&f)) {
        detail::require(std::isfinite(r->intensity) && r->intensity >= 0.0, "intensity must be >= 0");
        detail::require(r->c1 > 0.0 && r->c2 >= r->c1, "annulus needs 0 < c1 <= c2");
        detail::require(r->rho > 0.0, "tube radius must be > 0");
        detail::require(r->rho_max == 0.0 || r->rho_max >= r->rho, "rho_max must be 0 or >= rho");
    } else {
        const auto& l = std::get<LatticeFamily>(f);
        detail::require(l.r0 > 0.0 && std::isfinite(l.exponent), "lattice needs r0 > 0 and a finite exponent");
    }
}

/// Realization of F^ε covering `region` (physical coordinates). Points are
/// sampled in region/ε enlarged by the family reach, so primitives entering
/// the region from outside are included.
inline ObstacleSet realize(const GeometryFamily& f, double eps, const Box& region, std::uint64_t seed) {
    detail::require(std::isfinite(eps) && eps > 0.0, "epsilon must be > 0");
    validate_family(f);
    const int n = region.dim();
    const double reach = family_reach(f, eps, n);
    Vec3 lo = (1.0 / eps) * region.lower(), hi = (1.0 / eps) * region.upper();
    for (int d = 0; d < n; ++d) {
        lo[d] -= reach;
        hi[d] += reach;
    }
    const Box unit(n, lo, hi);
    if (const auto* l = std::get_if<LatticeFamily>(&f)) {
        std::vector<Vec3> pts;
        std::array<long, 3> a{0, 0, 0}, b{0, 0, 0};
        for (int d = 0; d < n; ++d) {
            a[d] = static_cast<long>(std::floor(lo[d]));
            b[d] = static_cast<long>(std::ceil(hi[d]));
        }
        for (long k = a[2]; k <= b[2]; ++k)
            for (long j = a[1]; j <= b[1]; ++j)
                for (long i = a[0]; i <= b[0]; ++i) {
                    const Vec3 p{i + 0.5, j + 0.5, n == 3 ? k + 0.5 : 0.0};
                    if (unit.contains(p)) pts.push_back(p);
                }
        PointConfiguration cfg(std::move(pts), unit, 1.0, seed);
        const double r = l->r0 * std::pow(eps, l->exponent - 1.0);
        if (cfg.empty()) return scale_obstacles(build_balls_with_radii(cfg, {}), eps);
        return scale_obstacles(build_balls(cfg, FixedRadius{r}), eps);
    }
    if (const auto* b = std::get_if<BooleanFamily>(&f)) {
        const auto cfg = sample_poisson(unit, b->intensity, seed);
        if (cfg.empty()) return scale_obstacles(build_balls_with_radii(cfg, {}), eps);
        switch (b->rule) {
        case BooleanFamily::Rule::fixed:
            return scale_obstacles(build_balls(cfg, FixedRadius{b->r0 * std::pow(eps, b->exponent - 1.0)}), eps);
        case BooleanFamily::Rule::min_distance:
            return scale_obstacles(build_balls(cfg, MinDistanceFraction{b->theta}), eps);
        default: return scale_obstacles(build_balls(cfg, IidCappedRadius{b->theta}, seed), eps);
        }
    }
    const auto& r = std::get<RcmFamily>(f);
    const auto cfg = sample_poisson(unit, r.intensity, seed);
    const auto edges = build_rcm_edges(cfg, ConnectivityFunction::annulus(r.c1, r.c2), seed);
    if (r.rho_max > r.rho) return scale_obstacles(build_tubes(cfg, edges, r.rho, r.rho_max, seed, r.c1), eps);
    return scale_obstacles(build_tubes(cfg, edges, r.rho, r.c1), eps);
}

} // namespace percohom
