#pragma once

// Variational capacities on the grid: Newton capacity of a compact set, the
// local capacity cap(x,h,ε,ω) of a cube, its limit c, and the penalized local
// functional with the conductivity tensor it induces.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "errors.hpp"
#include "families.hpp"
#include "grid_solver.hpp"
#include "mask.hpp"
#include "rng.hpp"
#include "stencil.hpp"

namespace percohom {

// ---------------------------------------------------------------------------
// Newton capacity

enum class Truncation { sphere, cube };

struct NewtonOptions {
    Truncation truncation = Truncation::sphere;
    double tol = 1e-10;
    long max_iter = 0;
};

struct NewtonCapacity {
    double value = 0.0;
    double dx = 0.0;
    double outer_radius = 0.0;
    std::size_t target_cells = 0;
    SolveReport report;
};

/// cap(B) = inf ∫|∇v|^2 with v = 1 on cells whose centres lie in B and v = 0
/// at distance >= R from `center` (sphere) or on the faces of the cube of
/// half-side R (cube). n = 3 only.
inline NewtonCapacity newton_capacity(const ObstacleSet& B, const Vec3& center, double R, double dx,
                                      const NewtonOptions& opt = {}) {
    if (B.dim() != 3) throw UnsupportedDimension("Newton capacity is defined for n = 3 only");
    detail::require(std::isfinite(R) && R > 0.0, "outer radius must be > 0");
    detail::require(std::isfinite(dx) && dx > 0.0 && dx < R, "grid spacing must lie in (0, R)");
    if (B.empty()) throw DegenerateInput("empty obstacle has zero capacity");
    for (const auto& b : B.balls())
        detail::require(distance(b.center, center) + b.radius < R, "obstacle must lie strictly inside the truncation");
    for (const auto& c : B.capsules())
        detail::require(std::max(distance(c.a, center), distance(c.b, center)) + c.radius < R,
                        "obstacle must lie strictly inside the truncation");
    const Box box(3, center - Vec3{R, R, R}, center + Vec3{R, R, R});
    const auto m = rasterize(B, box, dx);
    Stencil s(3, m.shape(), dx, 0.0);
    std::size_t targets = 0;
    for (std::size_t idx = 0; idx < m.size(); ++idx) {
        const auto q = m.coords(idx);
        if (m.is_hole(idx)) {
            s.set(q[0], q[1], q[2], Node::fixed, 1.0);
            ++targets;
        } else if (opt.truncation == Truncation::sphere && distance(m.center(idx), center) >= R) {
            s.set(q[0], q[1], q[2], Node::fixed, 0.0);
        }
    }
    if (targets == 0) throw DegenerateInput("obstacle covers no cell centre at this resolution");
    s.finalize();
    const auto rhs = s.boundary_rhs();
    std::vector<double> x(rhs.size(), 0.0);
    long side = m.shape()[0];
    const auto rep = s.solve(rhs, x, {opt.tol, opt.max_iter > 0 ? opt.max_iter : 20 * side});
    return {s.dirichlet_energy(s.with_boundary_values(x)), dx, R, targets, rep};
}

inline NewtonCapacity newton_capacity(const Ball& b, double R, double dx, const NewtonOptions& opt = {}) {
    PointConfiguration cfg({b.center}, Box(3, b.center - Vec3{R, R, R}, b.center + Vec3{R, R, R}), 0.0, 0);
    return newton_capacity(build_balls_with_radii(cfg, {b.radius}), b.center, R, dx, opt);
}

/// 4π / (1/r - 1/R): ball of radius r inside a grounded sphere of radius R.
inline double ball_capacity_exact(double r, double R = std::numeric_limits<double>::infinity()) {
    return 4.0 * std::numbers::pi / (1.0 / r - 1.0 / R);
}

// ---------------------------------------------------------------------------
// Local capacity of a cube

struct CapacityOptions {
    double tol = 1e-10;
    long max_iter = 0;
    /// Initial guess on the cube grid (linear cell order); e.g. the minimizer
    /// for a larger obstacle set, which is admissible here.
    std::optional<std::vector<double>> initial;
};

struct CapacityEstimate {
    double value = 0.0;
    double dx = 0.0;
    Vec3 center{};
    double h = 0.0;
    double eps = 1.0;
    std::uint64_t seed = 0;
    SolveReport report;
    std::vector<double> minimizer; ///< on the cube grid, linear cell order
};

inline Box cube_at(const Vec3& x, double h, int dim) {
    const Vec3 half{0.5 * h, 0.5 * h, dim == 3 ? 0.5 * h : 0.0};
    return Box(dim, x - half, x + half);
}

/// Minimum of ∫_Q |∇v|^2 over v = 1 on ∂Q, v = 0 on hole cells of Q.
inline CapacityEstimate local_capacity(const PerforatedMask& mask, const Box& cube, const CapacityOptions& opt = {}) {
    const auto sub = restrict_to(mask, cube);
    CapacityEstimate out;
    out.dx = mask.dx();
    out.center = cube.center();
    out.h = cube.side(0);
    out.eps = mask.epsilon();
    const std::size_t holes = sub.count(CellFlag::hole);
    if (holes == 0) {
        out.minimizer.assign(sub.size(), 1.0);
        return out;
    }
    Stencil s(sub.dim(), sub.shape(), sub.dx(), 0.0, Node::face, 1.0);
    for (std::size_t idx = 0; idx < sub.size(); ++idx) {
        const auto q = sub.coords(idx);
        if (sub.flag(idx) == CellFlag::hole) s.set(q[0], q[1], q[2], Node::fixed, 0.0);
        else if (sub.flag(idx) == CellFlag::exterior) s.set(q[0], q[1], q[2], Node::face, 1.0);
    }
    s.finalize();
    if (opt.initial) detail::require(opt.initial->size() == sub.size(), "initial guess size mismatch");
    const auto rhs = s.boundary_rhs();
    std::vector<double> x(rhs.size(), 0.0);
    for (std::size_t idx = 0; idx < sub.size(); ++idx) {
        if (!sub.is_material(idx)) continue;
        const auto q = sub.coords(idx);
        x[s.at(q[0], q[1], q[2])] = opt.initial ? (*opt.initial)[idx] : 1.0;
    }
    out.report = s.solve(rhs, x, {opt.tol, detail::default_max_iter(sub, opt.max_iter)});
    const auto full = s.with_boundary_values(x);
    out.value = s.dirichlet_energy(full);
    out.minimizer = detail::from_padded(s, sub, full);
    return out;
}

inline CapacityEstimate local_capacity(const PerforatedMask& mask, const Vec3& x, double h,
                                       const CapacityOptions& opt = {}) {
    return local_capacity(mask, cube_at(x, h, mask.dim()), opt);
}

// ---------------------------------------------------------------------------
// Strange term c = lim_h lim_ε cap(x,h,ε,ω) / h^n

struct StrangeTermSpec {
    GeometryFamily family = BooleanFamily{};
    int dim = 3;
    Vec3 center{0.5, 0.5, 0.5};
    std::vector<double> h_values;
    std::vector<double> eps_values;
    int replicas = 1;
    std::uint64_t seed = 0;
    long cells_per_h = 32;                 ///< grid: dx = h / cells_per_h
    std::optional<double> bound_A;         ///< diagnostic threshold for cap/h^n
    double tol = 1e-10;
};

struct CapacityRow {
    double h = 0.0;
    double eps = 0.0;
    int replica = 0;
    std::uint64_t seed = 0;
    double cap = 0.0;
    double cap_per_volume = 0.0;
    long iterations = 0;
    double dx = 0.0;
    std::size_t hole_cells = 0;
};

struct StrangeTermResult {
    std::vector<CapacityRow> rows;
    double c = 0.0;                       ///< replica mean at (min h, min ε)
    double spread = 0.0;                  ///< replica standard deviation there
    std::vector<std::pair<double, double>> eps_first; ///< (h, mean at min ε), h decreasing
    std::vector<std::pair<double, double>> h_first;   ///< (ε, mean at min h), ε decreasing
    bool bound_violated = false;
    std::vector<std::string> warnings;
};

inline void validate_strange_term(const StrangeTermSpec& spec) {
    if (spec.dim != 3) throw UnsupportedDimension("the strange-term pipeline requires n = 3");
    detail::require(spec.h_values.size() >= 2, "at least two h values required");
    detail::require(spec.eps_values.size() >= 3, "at least three epsilon values required");
    detail::require(spec.replicas >= 1, "replicas must be >= 1");
    detail::require(spec.cells_per_h >= 2, "cells_per_h must be >= 2");
    for (double h : spec.h_values) detail::require(std::isfinite(h) && h > 0.0, "h must be > 0");
    for (double e : spec.eps_values) detail::require(std::isfinite(e) && e > 0.0, "epsilon must be > 0");
    const double hmin = *std::min_element(spec.h_values.begin(), spec.h_values.end());
    const double emax = *std::max_element(spec.eps_values.begin(), spec.eps_values.end());
    detail::require(emax < hmin / 4.0, "scale ordering violated: every epsilon must be < h/4 (epsilon << h)");
    validate_family(spec.family);
}

namespace detail {

inline double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

inline double stddev_of(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double m = mean_of(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
}

} // namespace detail

/// One realization per (ε, replica) over the largest cube, shared by all h
/// (common random numbers); replica seeds are derive_seed(seed, replica).
inline StrangeTermResult strange_term(const StrangeTermSpec& spec) {
    validate_strange_term(spec);
    StrangeTermResult out;
    auto hs = spec.h_values;
    auto es = spec.eps_values;
    std::sort(hs.begin(), hs.end(), std::greater<>());
    std::sort(es.begin(), es.end(), std::greater<>());
    const double hmax = hs.front();
    const int n = spec.dim;
    std::map<std::pair<double, double>, std::vector<double>> cell;
    for (double eps : es) {
        for (int rep = 0; rep < spec.replicas; ++rep) {
            const auto seed = derive_seed(spec.seed, static_cast<std::uint64_t>(rep));
            const auto obstacles = realize(spec.family, eps, cube_at(spec.center, hmax, n), seed);
            for (double h : hs) {
                const Box cube = cube_at(spec.center, h, n);
                const double dx = h / static_cast<double>(spec.cells_per_h);
                const auto m = rasterize(obstacles, cube, dx);
                for (const auto& w : m.warnings())
                    if (std::find(out.warnings.begin(), out.warnings.end(), w) == out.warnings.end())
                        out.warnings.push_back(w);
                auto est = local_capacity(m, cube, {spec.tol, 0, std::nullopt});
                CapacityRow row{h, eps, rep, seed, est.value, est.value / std::pow(h, n), est.report.iterations, dx,
                                m.count(CellFlag::hole)};
                if (spec.bound_A && row.cap_per_volume >= *spec.bound_A) out.bound_violated = true;
                cell[{h, eps}].push_back(row.cap_per_volume);
                out.rows.push_back(row);
            }
        }
    }
    const double hmin = hs.back(), emin = es.back();
    out.c = detail::mean_of(cell[{hmin, emin}]);
    out.spread = detail::stddev_of(cell[{hmin, emin}]);
    for (double h : hs) out.eps_first.emplace_back(h, detail::mean_of(cell[{h, emin}]));
    for (double e : es) out.h_first.emplace_back(e, detail::mean_of(cell[{hmin, e}]));
    return out;
}

// ---------------------------------------------------------------------------
// Penalized functional and conductivity tensor
//
// P(ξ) = min ∫_{Q∩G} |∇v|^2 + h^{-2-γ} |v - (x - z)·ξ|^2 over the material
// cells of the cube, no flux through ∂Q or hole faces. The first and last
// face of every grid line carry weight 3/2 so that the face sum integrates
// |∂_d v|^2 over the full cube length (the half cells at both ends are
// otherwise missing).

struct PenalizedOptions {
    double tol = 1e-11;
    long max_iter = 0;
};

struct PenalizedResult {
    double value = 0.0;
    std::vector<double> minimizer; ///< cube grid, linear order; 0 on holes
    SolveReport report;
};

namespace detail {

struct PenalizedSystem {
    PerforatedMask sub;
    Stencil stencil;
    double kappa;
    Vec3 z;
};

inline PenalizedSystem penalized_system(const PerforatedMask& mask, const Vec3& z, double h, double gamma) {
    detail::require(gamma > 0.0 && gamma < 2.0, "penalty exponent gamma must lie in (0,2)");
    detail::require(std::isfinite(h) && h > 0.0, "cube side must be > 0");
    auto sub = restrict_to(mask, cube_at(z, h, mask.dim()));
    if (sub.count(CellFlag::material) == 0) throw DegenerateInput("cube has no material cell");
    const double kappa = std::pow(h, -2.0 - gamma);
    Stencil s(sub.dim(), sub.shape(), sub.dx(), kappa, Node::insulated, 0.0);
    for (std::size_t idx = 0; idx < sub.size(); ++idx) {
        if (sub.is_material(idx)) continue;
        const auto q = sub.coords(idx);
        s.set(q[0], q[1], q[2], Node::insulated, 0.0);
    }
    for (int d = 0; d < sub.dim(); ++d) {
        const long nd = sub.shape()[d];
        std::vector<double> w(static_cast<std::size_t>(nd + 1), 1.0);
        if (nd >= 3) {
            w[1] = 1.5;
            w[static_cast<std::size_t>(nd - 1)] = 1.5;
        }
        s.set_face_weights(d, std::move(w));
    }
    s.finalize();
    return {std::move(sub), std::move(s), kappa, z};
}

inline std::vector<double> linear_target(const PenalizedSystem& sys, const Vec3& xi) {
    std::vector<double> l(sys.stencil.padded_size(), 0.0);
    for (std::size_t idx = 0; idx < sys.sub.size(); ++idx) {
        if (!sys.sub.is_material(idx)) continue;
        const auto q = sys.sub.coords(idx);
        l[sys.stencil.at(q[0], q[1], q[2])] = dot(sys.sub.center(idx) - sys.z, xi);
    }
    return l;
}

/// B(u,w) = dirichlet form + κ Σ (u - lu)(w - lw) dx^n over material cells.
inline double penalized_form(const PenalizedSystem& sys, const std::vector<double>& u, const std::vector<double>& lu,
                             const std::vector<double>& w, const std::vector<double>& lw) {
    const auto& s = sys.stencil;
    double mass = 0.0;
    for (std::size_t p = 0; p < u.size(); ++p)
        if (s.node(p) == Node::unknown) mass += (u[p] - lu[p]) * (w[p] - lw[p]);
    return s.dirichlet_form(u, w) + sys.kappa * mass * sys.sub.cell_volume();
}

inline PenalizedResult solve_penalized(const PenalizedSystem& sys, const Vec3& xi, const PenalizedOptions& opt,
                                       std::vector<double>* padded_out = nullptr,
                                       std::vector<double>* target_out = nullptr) {
    const auto l = linear_target(sys, xi);
    std::vector<double> rhs(l.size());
    for (std::size_t p = 0; p < l.size(); ++p) rhs[p] = sys.kappa * l[p];
    std::vector<double> x = l; // the hole-free minimizer away from ∂Q
    PenalizedResult out;
    out.report = sys.stencil.solve(rhs, x, {opt.tol, default_max_iter(sys.sub, opt.max_iter) * 5});
    out.value = penalized_form(sys, x, l, x, l);
    out.minimizer = from_padded(sys.stencil, sys.sub, x);
    if (padded_out) *padded_out = std::move(x);
    if (target_out) *target_out = l;
    return out;
}

} // namespace detail

inline PenalizedResult penalized_functional(const PerforatedMask& mask, const Vec3& z, double h, double gamma,
                                            const Vec3& xi, const PenalizedOptions& opt = {}) {
    for (int d = 0; d < 3; ++d) detail::require(std::isfinite(xi[d]), "direction must be finite");
    const auto sys = detail::penalized_system(mask, z, h, gamma);
    return detail::solve_penalized(sys, xi, opt);
}

struct ConductivityTensor {
    int dim = 3;
    std::array<std::array<double, 3>, 3> a{};
    double gamma = 1.0;
    Vec3 z{};
    double h = 0.0;
    double eps = 1.0;
    std::array<double, 3> eigenvalues{}; ///< ascending, first `dim` entries used

    /// ξ^T A ξ
    double quadratic(const Vec3& xi) const {
        double s = 0.0;
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j) s += a[i][j] * xi[i] * xi[j];
        return s;
    }
};

/// a_ij = B(v_i, v_j) with v_i the minimizer for ξ = e_i.
inline ConductivityTensor conductivity_tensor(const PerforatedMask& mask, const Vec3& z, double h, double gamma,
                                              const PenalizedOptions& opt = {}) {
    const auto sys = detail::penalized_system(mask, z, h, gamma);
    const int n = mask.dim();
    std::vector<std::vector<double>> v(n), l(n);
    for (int i = 0; i < n; ++i) {
        Vec3 e{0.0, 0.0, 0.0};
        e[i] = 1.0;
        detail::solve_penalized(sys, e, opt, &v[i], &l[i]);
    }
    ConductivityTensor t;
    t.dim = n;
    t.gamma = gamma;
    t.z = z;
    t.h = h;
    t.eps = mask.epsilon();
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) t.a[i][j] = t.a[j][i] = detail::penalized_form(sys, v[i], l[i], v[j], l[j]);
    Eigen::MatrixXd A(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) A(i, j) = t.a[i][j];
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A, Eigen::EigenvaluesOnly);
    for (int i = 0; i < n; ++i) t.eigenvalues[i] = es.eigenvalues()(i);
    return t;
}

} // namespace percohom
