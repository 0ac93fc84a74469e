#pragma once

// Random obstacle sets built on Poisson points: random-connection-model tube
// unions and Boolean ball unions, their epsilon-scaling, and graph diagnostics.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "errors.hpp"
#include "point_process.hpp"
#include "rng.hpp"

namespace percohom {

// ---------------------------------------------------------------------------
// Connectivity functions

class ConnectivityFunction {
  public:
    enum class Kind { annulus, general };

    /// g(d) = 1 on [c1, c2], 0 elsewhere.
    static ConnectivityFunction annulus(double c1, double c2) {
        detail::require(std::isfinite(c1) && std::isfinite(c2) && c1 > 0.0 && c2 >= c1,
                        "annulus connectivity needs 0 < c1 <= c2");
        ConnectivityFunction g;
        g.kind_ = Kind::annulus;
        g.c1_ = c1;
        g.c2_ = c2;
        return g;
    }

    /// Piecewise-linear interpolation of (distance, probability) knots, held
    /// constant beyond the first and last knot. Probabilities must lie in
    /// [0,1] and be nonincreasing in distance.
    static ConnectivityFunction general(std::vector<std::pair<double, double>> table) {
        detail::require(!table.empty(), "connectivity table must not be empty");
        for (std::size_t i = 0; i < table.size(); ++i) {
            const auto [d, p] = table[i];
            detail::require(std::isfinite(d) && d >= 0.0, "connectivity distances must be >= 0");
            detail::require(p >= 0.0 && p <= 1.0, "connectivity probabilities must lie in [0,1]");
            if (i > 0) {
                detail::require(d > table[i - 1].first, "connectivity distances must increase");
                detail::require(p <= table[i - 1].second, "connectivity must be nonincreasing");
            }
        }
        ConnectivityFunction g;
        g.kind_ = Kind::general;
        g.table_ = std::move(table);
        return g;
    }

    Kind kind() const noexcept { return kind_; }
    double c1() const noexcept { return c1_; }
    double c2() const noexcept { return c2_; }
    const std::vector<std::pair<double, double>>& table() const noexcept { return table_; }

    double operator()(double d) const noexcept {
        if (kind_ == Kind::annulus) return (d >= c1_ && d <= c2_) ? 1.0 : 0.0;
        if (d <= table_.front().first) return table_.front().second;
        if (d >= table_.back().first) return table_.back().second;
        const auto it = std::upper_bound(table_.begin(), table_.end(), d,
                                         [](double x, const auto& knot) { return x < knot.first; });
        const auto& [d1, p1] = *it;
        const auto& [d0, p0] = *(it - 1);
        return p0 + (p1 - p0) * (d - d0) / (d1 - d0);
    }

    /// Smallest distance beyond which g vanishes, or +inf.
    double support_radius() const noexcept {
        if (kind_ == Kind::annulus) return c2_;
        if (table_.back().second > 0.0) return std::numeric_limits<double>::infinity();
        // first knot from which the function stays at zero
        std::size_t k = table_.size() - 1;
        while (k > 0 && table_[k - 1].second == 0.0) --k;
        return table_[k].first;
    }

  private:
    Kind kind_ = Kind::annulus;
    double c1_ = 0.0;
    double c2_ = 0.0;
    std::vector<std::pair<double, double>> table_;
};

// ---------------------------------------------------------------------------
// Spatial hashing

namespace detail {

/// Uniform bucket grid over a box, for fixed-radius neighbour searches.
class CellList {
  public:
    CellList(const std::vector<Vec3>& pts, const Box& box, double cell) : pts_(&pts), box_(box), dim_(box.dim()) {
        // cap the bucket count so huge cutoffs degrade to a single bucket
        for (int d = 0; d < 3; ++d) {
            if (d < dim_) {
                const double c = std::max(cell, box.side(d) / 256.0);
                n_[d] = std::max<long>(1, static_cast<long>(std::floor(box.side(d) / c)));
                width_[d] = box.side(d) / static_cast<double>(n_[d]);
            } else {
                n_[d] = 1;
                width_[d] = 1.0;
            }
        }
        head_.assign(static_cast<std::size_t>(n_[0] * n_[1] * n_[2]), -1);
        next_.assign(pts.size(), -1);
        for (std::size_t i = pts.size(); i-- > 0;) {
            const auto b = bucket_of(pts[i]);
            next_[i] = head_[b];
            head_[b] = static_cast<long>(i);
        }
    }

    /// Calls fn(i, j) for every unordered pair i < j whose buckets are
    /// neighbours (covers all pairs closer than one bucket width).
    template <class Fn>
    void for_each_candidate_pair(Fn&& fn) const {
        const auto& pts = *pts_;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            const auto c = coords_of(pts[i]);
            for (long dz = (dim_ == 3 ? -1 : 0); dz <= (dim_ == 3 ? 1 : 0); ++dz)
                for (long dy = -1; dy <= 1; ++dy)
                    for (long dx = -1; dx <= 1; ++dx) {
                        const long x = c[0] + dx, y = c[1] + dy, z = c[2] + dz;
                        if (x < 0 || y < 0 || z < 0 || x >= n_[0] || y >= n_[1] || z >= n_[2]) continue;
                        for (long j = head_[static_cast<std::size_t>(x + n_[0] * (y + n_[1] * z))]; j >= 0;
                             j = next_[static_cast<std::size_t>(j)]) {
                            if (static_cast<std::size_t>(j) > i) fn(i, static_cast<std::size_t>(j));
                        }
                    }
        }
    }

    double min_width() const noexcept {
        double w = width_[0];
        for (int d = 1; d < dim_; ++d) w = std::min(w, width_[d]);
        return w;
    }

  private:
    std::array<long, 3> coords_of(const Vec3& p) const noexcept {
        std::array<long, 3> c{0, 0, 0};
        for (int d = 0; d < dim_; ++d) {
            const long i = static_cast<long>(std::floor((p[d] - box_.lower()[d]) / width_[d]));
            c[d] = std::clamp(i, 0L, n_[d] - 1);
        }
        return c;
    }
    std::size_t bucket_of(const Vec3& p) const noexcept {
        const auto c = coords_of(p);
        return static_cast<std::size_t>(c[0] + n_[0] * (c[1] + n_[1] * c[2]));
    }

    const std::vector<Vec3>* pts_;
    Box box_;
    int dim_;
    std::array<long, 3> n_{};
    std::array<double, 3> width_{};
    std::vector<long> head_;
    std::vector<long> next_;
};

} // namespace detail

// ---------------------------------------------------------------------------
// Edges

struct EdgeSet {
    std::vector<std::pair<std::uint32_t, std::uint32_t>> edges; ///< i < j, sorted, unique
    std::uint64_t seed = 0;

    std::size_t size() const noexcept { return edges.size(); }
    bool empty() const noexcept { return edges.empty(); }
};

/// Random connection model: annulus g connects deterministically, a general g
/// connects each pair independently with probability g(|x_i - x_j|). Pair
/// draws are counter-based, so the result does not depend on search order.
inline EdgeSet build_rcm_edges(const PointConfiguration& cfg, const ConnectivityFunction& g, std::uint64_t seed) {
    EdgeSet out;
    out.seed = g.kind() == ConnectivityFunction::Kind::general ? seed : 0;
    const auto& pts = cfg.points();
    const double cutoff = g.support_radius();
    const std::uint64_t edge_seed = derive_seed(seed, Stream::edges);
    auto consider = [&](std::size_t i, std::size_t j) {
        const double d = distance(pts[i], pts[j]);
        if (d > cutoff) return;
        const double p = g(d);
        bool connect = false;
        if (g.kind() == ConnectivityFunction::Kind::annulus) {
            connect = p > 0.0;
        } else {
            connect = p >= 1.0 || (p > 0.0 && pair_uniform(edge_seed, i, j) < p);
        }
        if (connect) out.edges.emplace_back(static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j));
    };
    if (std::isfinite(cutoff) && pts.size() > 64) {
        detail::CellList cells(pts, cfg.box(), cutoff);
        if (cells.min_width() >= cutoff) {
            cells.for_each_candidate_pair(consider);
            std::sort(out.edges.begin(), out.edges.end());
            return out;
        }
    }
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = i + 1; j < pts.size(); ++j) consider(i, j);
    return out;
}

/// Maximal connected sets of point indices (union-find). Each component is
/// sorted; components are ordered by their smallest member.
inline std::vector<std::vector<std::uint32_t>> connected_components(const PointConfiguration& cfg,
                                                                    const EdgeSet& edges) {
    const std::size_t n = cfg.size();
    std::vector<std::uint32_t> parent(n);
    std::iota(parent.begin(), parent.end(), 0u);
    auto find = [&](std::uint32_t x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    };
    for (const auto& [i, j] : edges.edges) {
        detail::require(i < n && j < n, "edge index out of range");
        auto a = find(i), b = find(j);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
    std::vector<long> slot(n, -1);
    std::vector<std::vector<std::uint32_t>> comps;
    for (std::uint32_t i = 0; i < n; ++i) {
        const auto r = find(i);
        if (slot[r] < 0) {
            slot[r] = static_cast<long>(comps.size());
            comps.emplace_back();
        }
        comps[static_cast<std::size_t>(slot[r])].push_back(i);
    }
    return comps;
}

/// Smallest distance between two distinct points.
inline double min_pairwise_distance(const PointConfiguration& cfg) {
    const auto& pts = cfg.points();
    if (pts.size() < 2) throw DegenerateInput("min pairwise distance needs at least two points");
    double best = std::numeric_limits<double>::infinity();
    if (pts.size() <= 64) {
        for (std::size_t i = 0; i < pts.size(); ++i)
            for (std::size_t j = i + 1; j < pts.size(); ++j) best = std::min(best, distance(pts[i], pts[j]));
        return best;
    }
    double radius = std::pow(cfg.box().volume() / static_cast<double>(pts.size()), 1.0 / cfg.dim());
    for (;;) {
        detail::CellList cells(pts, cfg.box(), radius);
        cells.for_each_candidate_pair([&](std::size_t i, std::size_t j) { best = std::min(best, distance(pts[i], pts[j])); });
        if (best <= cells.min_width()) return best;
        radius *= 2.0;
    }
}

// ---------------------------------------------------------------------------
// Obstacle sets

struct Ball {
    Vec3 center{};
    double radius = 0.0;
};

struct Capsule {
    Vec3 a{};
    Vec3 b{};
    double radius = 0.0;
};

namespace detail {

inline double point_segment_distance2(const Vec3& x, const Vec3& a, const Vec3& b) {
    const Vec3 ab = b - a;
    const double len2 = norm2(ab);
    double t = len2 > 0.0 ? dot(x - a, ab) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return norm2(x - (a + t * ab));
}

/// Squared distance between segments [p1,q1] and [p2,q2] (Ericson, RTCD 5.1.9).
inline double segment_segment_distance2(const Vec3& p1, const Vec3& q1, const Vec3& p2, const Vec3& q2) {
    const Vec3 d1 = q1 - p1, d2 = q2 - p2, r = p1 - p2;
    const double a = norm2(d1), e = norm2(d2), f = dot(d2, r);
    constexpr double tiny = 1e-300;
    double s = 0.0, t = 0.0;
    if (a <= tiny && e <= tiny) return norm2(r);
    if (a <= tiny) {
        t = std::clamp(f / e, 0.0, 1.0);
    } else {
        const double c = dot(d1, r);
        if (e <= tiny) {
            s = std::clamp(-c / a, 0.0, 1.0);
        } else {
            const double b = dot(d1, d2);
            const double denom = a * e - b * b;
            s = denom > 0.0 ? std::clamp((b * f - c * e) / denom, 0.0, 1.0) : 0.0;
            t = (b * s + f) / e;
            if (t < 0.0) {
                t = 0.0;
                s = std::clamp(-c / a, 0.0, 1.0);
            } else if (t > 1.0) {
                t = 1.0;
                s = std::clamp((b - c) / a, 0.0, 1.0);
            }
        }
    }
    return norm2((p1 + s * d1) - (p2 + t * d2));
}

} // namespace detail

/// Union of tubes around RCM edges or of balls around points, in continuous
/// coordinates. `scale_applied` records the cumulative epsilon.
class ObstacleSet {
  public:
    enum class Kind { tubes, balls };

    Kind kind() const noexcept { return kind_; }
    int dim() const noexcept { return points_.dim(); }
    const PointConfiguration& points() const noexcept { return points_; }
    const EdgeSet& edges() const noexcept { return edges_; }
    const std::vector<Ball>& balls() const noexcept { return balls_; }
    const std::vector<Capsule>& capsules() const noexcept { return capsules_; }
    double scale_applied() const noexcept { return scale_; }
    const std::vector<std::string>& warnings() const noexcept { return warnings_; }
    bool empty() const noexcept { return balls_.empty() && capsules_.empty(); }
    std::size_t primitive_count() const noexcept { return balls_.size() + capsules_.size(); }

    /// Membership in the closed obstacle set F.
    bool contains(const Vec3& x) const noexcept {
        for (const auto& b : balls_)
            if (norm2(x - b.center) <= b.radius * b.radius) return true;
        for (const auto& c : capsules_)
            if (detail::point_segment_distance2(x, c.a, c.b) <= c.radius * c.radius) return true;
        return false;
    }

    /// Indicator a(x) = 1 - min(1_F, 1): zero on obstacles, one elsewhere.
    double indicator(const Vec3& x) const noexcept { return contains(x) ? 0.0 : 1.0; }

    /// Smallest radius over all primitives (inf if empty).
    double min_radius() const noexcept {
        double r = std::numeric_limits<double>::infinity();
        for (const auto& b : balls_) r = std::min(r, b.radius);
        for (const auto& c : capsules_) r = std::min(r, c.radius);
        return r;
    }

    std::string description() const {
        return std::string(kind_ == Kind::tubes ? "tubes" : "balls") + " n=" + std::to_string(primitive_count());
    }

    friend ObstacleSet build_tubes(const PointConfiguration&, const EdgeSet&, std::vector<double>,
                                   std::optional<double>);
    friend ObstacleSet build_balls_with_radii(const PointConfiguration&, std::vector<double>);
    friend ObstacleSet scale_obstacles(const ObstacleSet&, double);

  private:
    Kind kind_ = Kind::balls;
    PointConfiguration points_;
    EdgeSet edges_;
    std::vector<Ball> balls_;
    std::vector<Capsule> capsules_;
    double scale_ = 1.0;
    std::vector<std::string> warnings_;
};

/// Tubes with one radius per edge. If `c1` is given, radii above c1/2 add a
/// warning (variable radii are allowed, so this is not an error).
inline ObstacleSet build_tubes(const PointConfiguration& cfg, const EdgeSet& edges, std::vector<double> radii,
                               std::optional<double> c1 = std::nullopt) {
    detail::require(radii.size() == edges.size(), "one tube radius per edge required");
    ObstacleSet out;
    out.kind_ = ObstacleSet::Kind::tubes;
    out.points_ = cfg;
    out.edges_ = edges;
    bool too_wide = false;
    for (std::size_t e = 0; e < edges.size(); ++e) {
        const auto [i, j] = edges.edges[e];
        detail::require(i < cfg.size() && j < cfg.size(), "edge index out of range");
        detail::require(std::isfinite(radii[e]) && radii[e] > 0.0, "tube radius must be > 0");
        if (c1 && radii[e] > 0.5 * *c1 * (1.0 + 1e-12)) too_wide = true;
        out.capsules_.push_back({cfg[i], cfg[j], radii[e]});
    }
    if (too_wide) out.warnings_.push_back("tube radius exceeds c1/2");
    return out;
}

inline ObstacleSet build_tubes(const PointConfiguration& cfg, const EdgeSet& edges, double radius,
                               std::optional<double> c1 = std::nullopt) {
    return build_tubes(cfg, edges, std::vector<double>(edges.size(), radius), c1);
}

/// Tube radii drawn i.i.d. uniform in [rho_min, rho_max] per edge.
inline ObstacleSet build_tubes(const PointConfiguration& cfg, const EdgeSet& edges, double rho_min, double rho_max,
                               std::uint64_t seed, std::optional<double> c1 = std::nullopt) {
    detail::require(rho_min > 0.0 && rho_max >= rho_min, "tube radius range needs 0 < rho_min <= rho_max");
    Rng rng(derive_seed(seed, Stream::tube_radii));
    std::vector<double> radii(edges.size());
    for (auto& r : radii) r = rng.uniform(rho_min, rho_max);
    return build_tubes(cfg, edges, std::move(radii), c1);
}

/// Ball radius rules.
struct FixedRadius {
    double radius;
};
/// radius = theta * (min pairwise distance); theta <= 1/2 keeps balls disjoint.
struct MinDistanceFraction {
    double theta;
};
/// radius_i = theta * (min pairwise distance) * U_i with U_i ~ U(0,1] i.i.d.
struct IidCappedRadius {
    double theta = 0.5;
};
using BallRadiusRule = std::variant<FixedRadius, MinDistanceFraction, IidCappedRadius>;

inline ObstacleSet build_balls_with_radii(const PointConfiguration& cfg, std::vector<double> radii) {
    detail::require(radii.size() == cfg.size(), "one ball radius per point required");
    ObstacleSet out;
    out.kind_ = ObstacleSet::Kind::balls;
    out.points_ = cfg;
    out.balls_.reserve(cfg.size());
    for (std::size_t i = 0; i < cfg.size(); ++i) {
        detail::require(std::isfinite(radii[i]) && radii[i] > 0.0, "ball radius must be > 0");
        out.balls_.push_back({cfg[i], radii[i]});
    }
    return out;
}

inline ObstacleSet build_balls(const PointConfiguration& cfg, const BallRadiusRule& rule, std::uint64_t seed = 0) {
    std::vector<double> radii(cfg.size());
    if (const auto* f = std::get_if<FixedRadius>(&rule)) {
        detail::require(std::isfinite(f->radius) && f->radius > 0.0, "ball radius must be > 0");
        std::fill(radii.begin(), radii.end(), f->radius);
    } else if (const auto* m = std::get_if<MinDistanceFraction>(&rule)) {
        detail::require(m->theta > 0.0 && m->theta <= 1.0, "theta must lie in (0,1]");
        if (cfg.size() < 2)
            throw DegenerateInput("degenerate configuration: min-distance radius rule needs >= 2 points");
        std::fill(radii.begin(), radii.end(), m->theta * min_pairwise_distance(cfg));
    } else {
        const auto& c = std::get<IidCappedRadius>(rule);
        detail::require(c.theta > 0.0 && c.theta <= 1.0, "theta must lie in (0,1]");
        if (cfg.size() < 2)
            throw DegenerateInput("degenerate configuration: min-distance radius rule needs >= 2 points");
        const double cap = c.theta * min_pairwise_distance(cfg);
        Rng rng(derive_seed(seed, Stream::radii));
        for (auto& r : radii) r = cap * (1.0 - rng.uniform()); // (0, cap]
    }
    return build_balls_with_radii(cfg, std::move(radii));
}

/// F -> epsilon F: centers, radii and segment endpoints multiplied by epsilon.
inline ObstacleSet scale_obstacles(const ObstacleSet& obs, double eps) {
    detail::require(std::isfinite(eps) && eps > 0.0, "epsilon must be > 0");
    ObstacleSet out = obs;
    out.points_ = scale(obs.points_, eps);
    for (auto& b : out.balls_) {
        b.center = eps * b.center;
        b.radius *= eps;
    }
    for (auto& c : out.capsules_) {
        c.a = eps * c.a;
        c.b = eps * c.b;
        c.radius *= eps;
    }
    out.scale_ = obs.scale_ * eps;
    return out;
}

/// Number of unordered pairs of distinct tubes that intersect (pairs sharing
/// an endpoint included). Diagnostic for the tube-intersection set.
inline std::size_t tube_overlap_pairs(const ObstacleSet& obs) {
    const auto& caps = obs.capsules();
    struct Span {
        double lo, hi;
        std::size_t idx;
    };
    std::vector<Span> spans;
    spans.reserve(caps.size());
    for (std::size_t i = 0; i < caps.size(); ++i) {
        const auto& c = caps[i];
        spans.push_back({std::min(c.a[0], c.b[0]) - c.radius, std::max(c.a[0], c.b[0]) + c.radius, i});
    }
    std::sort(spans.begin(), spans.end(), [](const Span& x, const Span& y) { return x.lo < y.lo; });
    std::size_t count = 0;
    for (std::size_t s = 0; s < spans.size(); ++s) {
        for (std::size_t t = s + 1; t < spans.size() && spans[t].lo <= spans[s].hi; ++t) {
            const auto& a = caps[spans[s].idx];
            const auto& b = caps[spans[t].idx];
            const double reach = a.radius + b.radius;
            if (detail::segment_segment_distance2(a.a, a.b, b.a, b.b) <= reach * reach) ++count;
        }
    }
    return count;
}

/// Pairs of balls with |c_i - c_j| < r_i + r_j (0 for a non-intersecting set).
inline std::size_t ball_overlap_pairs(const ObstacleSet& obs) {
    const auto& balls = obs.balls();
    std::vector<std::size_t> order(balls.size());
    std::iota(order.begin(), order.end(), 0u);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return balls[a].center[0] - balls[a].radius < balls[b].center[0] - balls[b].radius; });
    std::size_t count = 0;
    for (std::size_t s = 0; s < order.size(); ++s) {
        const auto& a = balls[order[s]];
        for (std::size_t t = s + 1; t < order.size(); ++t) {
            const auto& b = balls[order[t]];
            if (b.center[0] - b.radius > a.center[0] + a.radius) break;
            const double reach = a.radius + b.radius;
            if (norm2(a.center - b.center) < reach * reach) ++count;
        }
    }
    return count;
}

} // namespace percohom
