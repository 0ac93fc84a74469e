#pragma once

// Dirichlet problems Δu - λu = f on perforated and unperforated grids.
//
// Sign convention: the coercive form (-Δ + λ) u = -f is what is assembled,
// so f <= 0 gives u >= 0. Holes are zero Dirichlet values at the hole cell
// centre; the boundary of D carries a zero Dirichlet value on the face.

#include <cmath>
#include <cstdint>
#include <cstring>
#include <functional>
#include <istream>
#include <memory>
#include <numbers>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "cg.hpp"
#include "errors.hpp"
#include "expression.hpp"
#include "mask.hpp"
#include "stencil.hpp"

namespace percohom {

using MaskPtr = std::shared_ptr<const PerforatedMask>;

/// Values on the cells of a mask; hole and exterior entries are exactly 0.
class GridField {
  public:
    GridField() = default;
    explicit GridField(MaskPtr mask) : mask_(std::move(mask)) {
        detail::require(mask_ != nullptr, "grid field needs a mask");
        values_.assign(mask_->size(), 0.0);
    }
    GridField(MaskPtr mask, std::vector<double> values) : mask_(std::move(mask)), values_(std::move(values)) {
        detail::require(mask_ != nullptr, "grid field needs a mask");
        detail::require(values_.size() == mask_->size(), "field size does not match mask");
        for (std::size_t i = 0; i < values_.size(); ++i) {
            detail::require(std::isfinite(values_[i]), "field values must be finite");
            if (!mask_->is_material(i)) values_[i] = 0.0;
        }
    }

    /// Samples fn at centres of material cells.
    static GridField sample(MaskPtr mask, const std::function<double(const Vec3&)>& fn) {
        GridField g(std::move(mask));
        for (std::size_t i = 0; i < g.values_.size(); ++i)
            if (g.mask_->is_material(i)) g.values_[i] = fn(g.mask_->center(i));
        return g;
    }

    const PerforatedMask& mask() const { return *mask_; }
    const MaskPtr& mask_ptr() const noexcept { return mask_; }
    const std::vector<double>& values() const noexcept { return values_; }
    std::size_t size() const noexcept { return values_.size(); }
    double operator[](std::size_t i) const noexcept { return values_[i]; }

    /// Writes a material cell (non-material writes are ignored).
    void set(std::size_t i, double v) noexcept {
        if (mask_->is_material(i)) values_[i] = v;
    }

  private:
    MaskPtr mask_;
    std::vector<double> values_;
};

/// Source term: closed-form in the coordinates, or per-cell values on a grid
/// with the same geometry as the solve.
class Source {
  public:
    Source(double constant) : fn_([constant](const Vec3&) { return constant; }), text_(detail::fmt17(constant)) {}
    Source(std::function<double(const Vec3&)> fn, std::string text = "<function>")
        : fn_(std::move(fn)), text_(std::move(text)) {}
    Source(const Expression& e) : fn_([e](const Vec3& x) { return e(x); }), text_(e.text()) {}
    Source(const GridField& g) : grid_(std::make_shared<GridField>(g)), text_("<grid>") {}

    /// Value on cell idx of `m`; grid sources must share the grid geometry.
    std::vector<double> on(const PerforatedMask& m) const {
        std::vector<double> f(m.size(), 0.0);
        if (grid_) {
            detail::require(grid_->mask().same_grid(m), "source grid does not match the solve grid");
            for (std::size_t i = 0; i < f.size(); ++i)
                if (m.flag(i) != CellFlag::exterior) f[i] = grid_->values()[i];
            return f;
        }
        for (std::size_t i = 0; i < f.size(); ++i)
            if (m.flag(i) != CellFlag::exterior) f[i] = fn_(m.center(i));
        return f;
    }
    const std::string& text() const noexcept { return text_; }

  private:
    std::function<double(const Vec3&)> fn_;
    std::shared_ptr<GridField> grid_;
    std::string text_;
};

struct SolveOptions {
    double tol = 1e-8;
    long max_iter = 0; ///< 0: 20 * (largest grid side)
};

struct SolveResult {
    GridField u;
    SolveReport report;
};

namespace detail {

inline long default_max_iter(const PerforatedMask& m, long requested) {
    if (requested > 0) return requested;
    long side = 1;
    for (int d = 0; d < m.dim(); ++d) side = std::max(side, m.shape()[d]);
    return 20 * side;
}

/// Stencil for a mask: material unknown, hole fixed 0, exterior and padding
/// zero on the face.
inline Stencil mask_stencil(const PerforatedMask& m, double reaction) {
    Stencil s(m.dim(), m.shape(), m.dx(), reaction);
    for (std::size_t idx = 0; idx < m.size(); ++idx) {
        const auto c = m.coords(idx);
        if (m.flag(idx) == CellFlag::hole) s.set(c[0], c[1], c[2], Node::fixed, 0.0);
        else if (m.flag(idx) == CellFlag::exterior) s.set(c[0], c[1], c[2], Node::face, 0.0);
    }
    s.finalize();
    return s;
}

inline std::vector<double> to_padded(const Stencil& s, const PerforatedMask& m, const std::vector<double>& cells) {
    std::vector<double> p(s.padded_size(), 0.0);
    for (std::size_t idx = 0; idx < m.size(); ++idx) {
        const auto c = m.coords(idx);
        p[s.at(c[0], c[1], c[2])] = cells[idx];
    }
    return p;
}

inline std::vector<double> from_padded(const Stencil& s, const PerforatedMask& m, const std::vector<double>& p) {
    std::vector<double> cells(m.size(), 0.0);
    for (std::size_t idx = 0; idx < m.size(); ++idx) {
        const auto c = m.coords(idx);
        cells[idx] = p[s.at(c[0], c[1], c[2])];
    }
    return cells;
}

inline void require_material(const PerforatedMask& m) {
    if (m.count(CellFlag::material) == 0) throw DegenerateInput("mask has no material cell");
}

} // namespace detail

/// Solves Δu - λu = f on the material cells with u = 0 on holes and on ∂D.
inline SolveResult solve_dirichlet_perforated(MaskPtr mask, double reaction, const Source& f,
                                              const SolveOptions& opt = {}) {
    detail::require(mask != nullptr, "mask required");
    detail::require(std::isfinite(reaction) && reaction >= 0.0, "reaction coefficient must be >= 0");
    detail::require(opt.tol > 0.0, "tolerance must be > 0");
    detail::require_material(*mask);
    const auto s = detail::mask_stencil(*mask, reaction);
    auto fc = f.on(*mask);
    for (std::size_t i = 0; i < fc.size(); ++i) fc[i] = mask->is_material(i) ? -fc[i] : 0.0;
    const auto rhs = detail::to_padded(s, *mask, fc);
    std::vector<double> x(rhs.size(), 0.0);
    const auto rep = s.solve(rhs, x, {opt.tol, detail::default_max_iter(*mask, opt.max_iter)});
    return {GridField(mask, detail::from_padded(s, *mask, x)), rep};
}

/// Hole-free mask over `domain` with spacing dx.
inline MaskPtr plain_mask(const Box& domain, double dx) {
    auto m = std::make_shared<PerforatedMask>(domain, dx);
    return m;
}

/// Solves Δu - (λ + c)u = f on the unperforated grid.
inline SolveResult solve_homogenized(const Box& domain, double reaction, double c, const Source& f, double dx,
                                     const SolveOptions& opt = {}) {
    detail::require(std::isfinite(c) && c >= 0.0, "strange term c must be >= 0");
    return solve_dirichlet_perforated(plain_mask(domain, dx), reaction + c, f, opt);
}

inline SolveResult solve_homogenized(MaskPtr plain, double reaction, double c, const Source& f,
                                     const SolveOptions& opt = {}) {
    detail::require(std::isfinite(c) && c >= 0.0, "strange term c must be >= 0");
    return solve_dirichlet_perforated(std::move(plain), reaction + c, f, opt);
}

// ---------------------------------------------------------------------------
// Norms and energies (all with the zero extension over D)

namespace detail {

inline void require_same_grid(const GridField& u, const GridField& v) {
    detail::require(u.mask().same_grid(v.mask()), "fields live on different grids");
}

} // namespace detail

inline double l2_norm(const GridField& u) {
    double s = 0.0;
    for (double x : u.values()) s += x * x;
    return std::sqrt(s * u.mask().cell_volume());
}

inline double l2_norm(const std::vector<double>& cells, const PerforatedMask& m) {
    double s = 0.0;
    for (std::size_t i = 0; i < cells.size(); ++i)
        if (m.flag(i) != CellFlag::exterior) s += cells[i] * cells[i];
    return std::sqrt(s * m.cell_volume());
}

/// sqrt(Σ (u - v)^2 dx^n) over all cells of D.
inline double l2_distance(const GridField& u, const GridField& v) {
    detail::require_same_grid(u, v);
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double d = u[i] - v[i];
        s += d * d;
    }
    return std::sqrt(s * u.mask().cell_volume());
}

/// ∫|∇u|^2 with face differences; hole faces see 0 at the hole centre, the
/// boundary of D sees 0 on the face.
inline double dirichlet_energy(const GridField& u) {
    const auto s = detail::mask_stencil(u.mask(), 0.0);
    return s.dirichlet_energy(s.with_boundary_values(detail::to_padded(s, u.mask(), u.values())));
}

/// Γ[u] = ∫ |∇u|^2 + λ u^2 + 2 f u.
inline double energy_gamma(const GridField& u, double reaction, const Source& f) {
    const auto fc = f.on(u.mask());
    double mass = 0.0, work = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        mass += u[i] * u[i];
        work += fc[i] * u[i];
    }
    const double vol = u.mask().cell_volume();
    return dirichlet_energy(u) + reaction * mass * vol + 2.0 * work * vol;
}

inline double h1_norm(const GridField& u) {
    const double l2 = l2_norm(u);
    return std::sqrt(l2 * l2 + dirichlet_energy(u));
}

struct FriedrichsEstimate {
    double constant = 0.0;     ///< C_D = 1 / sqrt(lambda_min)
    double lambda_min = 0.0;   ///< smallest eigenvalue of -Δ_h
    long iterations = 0;
    GridField eigenfunction;   ///< unit L2 norm, positive
};

/// Smallest Dirichlet eigenvalue of -Δ_h on the mask by inverse power
/// iteration (CG inner solves), giving ||u|| <= C_D ||∇u||.
inline FriedrichsEstimate friedrichs_constant(MaskPtr mask, double rel_tol = 1e-10, long max_outer = 200) {
    detail::require_material(*mask);
    const auto s = detail::mask_stencil(*mask, 0.0);
    std::vector<double> x(s.padded_size(), 0.0);
    // positive start: product of sines over the grid box
    const Box& g = mask->grid_box();
    for (std::size_t idx = 0; idx < mask->size(); ++idx) {
        if (!mask->is_material(idx)) continue;
        const auto c = mask->center(idx);
        double v = 1.0;
        for (int d = 0; d < mask->dim(); ++d) v *= std::sin(std::numbers::pi * (c[d] - g.lower()[d]) / g.side(d));
        const auto q = mask->coords(idx);
        x[s.at(q[0], q[1], q[2])] = v;
    }
    auto normalize = [](std::vector<double>& v) {
        const double n = std::sqrt(detail::blocked_dot(v, v));
        for (auto& e : v) e /= n;
    };
    normalize(x);
    std::vector<double> ax, y;
    double rq_prev = 0.0, rq = 0.0;
    long it = 0;
    const CgOptions inner{1e-12, detail::default_max_iter(*mask, 0) * 5};
    for (it = 1; it <= max_outer; ++it) {
        s.apply(x, ax);
        rq = detail::blocked_dot(x, ax);
        if (it > 1 && std::fabs(rq - rq_prev) <= rel_tol * rq) break;
        rq_prev = rq;
        y = x;
        s.solve(x, y, inner);
        normalize(y);
        x.swap(y);
    }
    auto cells = detail::from_padded(s, *mask, x);
    const double scale = 1.0 / std::sqrt(mask->cell_volume());
    for (auto& v : cells) v *= scale;
    return {1.0 / std::sqrt(rq), rq, it, GridField(mask, std::move(cells))};
}

// ---------------------------------------------------------------------------
// GridField file: mask header and flags, then
//   values <count>
//   <count little-endian float64 for material cells, linear order>

inline void write_field(std::ostream& os, const GridField& u) {
    detail::write_mask_header(os, u.mask(), "percohom-field");
    const auto& m = u.mask();
    os << "values " << m.count(CellFlag::material) << '\n';
    for (std::size_t i = 0; i < u.size(); ++i) {
        if (!m.is_material(i)) continue;
        const double v = u[i];
        unsigned char bytes[8];
        std::uint64_t bits;
        std::memcpy(&bits, &v, 8);
        for (int b = 0; b < 8; ++b) bytes[b] = static_cast<unsigned char>(bits >> (8 * b));
        os.write(reinterpret_cast<const char*>(bytes), 8);
    }
}

inline GridField read_field(std::istream& is) {
    auto m = std::make_shared<PerforatedMask>(detail::read_mask_header(is, "percohom-field"));
    const std::size_t count = std::stoull(detail::expect_line(is, "values "));
    if (count != m->count(CellFlag::material)) throw InvalidArgument("field file: value count mismatch");
    std::vector<double> values(m->size(), 0.0);
    for (std::size_t i = 0; i < m->size(); ++i) {
        if (!m->is_material(i)) continue;
        unsigned char bytes[8];
        if (!is.read(reinterpret_cast<char*>(bytes), 8)) throw InvalidArgument("field file: truncated values");
        std::uint64_t bits = 0;
        for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(bytes[b]) << (8 * b);
        std::memcpy(&values[i], &bits, 8);
    }
    return GridField(std::move(m), std::move(values));
}

} // namespace percohom
