#pragma once

// Cell-centred rasterization of obstacle sets onto a uniform grid.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "errors.hpp"
#include "point_process.hpp"
#include "random_geometry.hpp"
#include "rng.hpp"

namespace percohom {

enum class CellFlag : std::uint8_t { material = 0, hole = 1, exterior = 2 };

/// Uniform grid over `grid_box` with spacing dx. Cells whose centres lie
/// outside `domain` are exterior; inside, a cell is a hole iff its centre is
/// in the obstacle set. Linear index: i + nx * (j + ny * k).
class PerforatedMask {
  public:
    PerforatedMask() = default;

    PerforatedMask(const Box& grid_box, double dx) : grid_(grid_box), domain_(grid_box), dx_(dx) {
        detail::require(std::isfinite(dx) && dx > 0.0, "grid spacing must be > 0");
        shape_ = detail::partition_counts(grid_box, dx);
        flags_.assign(static_cast<std::size_t>(shape_[0] * shape_[1] * shape_[2]), CellFlag::material);
    }

    int dim() const noexcept { return grid_.dim(); }
    double dx() const noexcept { return dx_; }
    const Box& grid_box() const noexcept { return grid_; }
    const Box& domain() const noexcept { return domain_; }
    const std::array<long, 3>& shape() const noexcept { return shape_; }
    std::size_t size() const noexcept { return flags_.size(); }
    double cell_volume() const noexcept { return std::pow(dx_, dim()); }

    CellFlag flag(std::size_t idx) const noexcept { return flags_[idx]; }
    CellFlag flag(long i, long j, long k = 0) const noexcept { return flags_[index(i, j, k)]; }
    void set_flag(std::size_t idx, CellFlag f) noexcept { flags_[idx] = f; }
    const std::vector<CellFlag>& flags() const noexcept { return flags_; }

    bool is_material(std::size_t idx) const noexcept { return flags_[idx] == CellFlag::material; }
    bool is_hole(std::size_t idx) const noexcept { return flags_[idx] == CellFlag::hole; }

    std::size_t index(long i, long j, long k = 0) const noexcept {
        return static_cast<std::size_t>(i + shape_[0] * (j + shape_[1] * k));
    }
    std::array<long, 3> coords(std::size_t idx) const noexcept {
        const long nx = shape_[0], ny = shape_[1];
        const long l = static_cast<long>(idx);
        return {l % nx, (l / nx) % ny, l / (nx * ny)};
    }

    /// Centre of cell (i,j,k); the single definition used everywhere.
    Vec3 center(long i, long j, long k = 0) const noexcept {
        Vec3 c{0.0, 0.0, 0.0};
        const long ijk[3] = {i, j, k};
        for (int d = 0; d < dim(); ++d) c[d] = grid_.lower()[d] + (static_cast<double>(ijk[d]) + 0.5) * dx_;
        return c;
    }
    Vec3 center(std::size_t idx) const noexcept {
        const auto c = coords(idx);
        return center(c[0], c[1], c[2]);
    }

    std::size_t count(CellFlag f) const noexcept {
        return static_cast<std::size_t>(std::count(flags_.begin(), flags_.end(), f));
    }

    double epsilon() const noexcept { return eps_; }
    const std::string& kind() const noexcept { return kind_; }
    const std::string& provenance() const noexcept { return provenance_; }
    const std::vector<std::string>& warnings() const noexcept { return warnings_; }

    /// Sets D; with `reflag`, cells with centres outside D become exterior.
    void set_domain(const Box& d, bool reflag = true) {
        detail::require(grid_.encloses(d), "domain must lie inside the grid box");
        domain_ = d;
        if (!reflag) return;
        for (std::size_t idx = 0; idx < flags_.size(); ++idx) {
            if (!domain_.contains_closed(center(idx))) flags_[idx] = CellFlag::exterior;
            else if (flags_[idx] == CellFlag::exterior) flags_[idx] = CellFlag::material;
        }
    }
    void set_provenance(std::string kind, std::string text, double eps) {
        kind_ = std::move(kind);
        provenance_ = std::move(text);
        eps_ = eps;
    }
    void add_warning(std::string w) { warnings_.push_back(std::move(w)); }

    /// Same grid geometry (shape, spacing, box), flags may differ.
    bool same_grid(const PerforatedMask& o) const noexcept {
        return shape_ == o.shape_ && dx_ == o.dx_ && grid_ == o.grid_;
    }

    friend bool operator==(const PerforatedMask& a, const PerforatedMask& b) {
        return a.same_grid(b) && a.domain_ == b.domain_ && a.flags_ == b.flags_ && a.eps_ == b.eps_ &&
               a.kind_ == b.kind_;
    }

  private:
    Box grid_;
    Box domain_;
    double dx_ = 1.0;
    std::array<long, 3> shape_{1, 1, 1};
    std::vector<CellFlag> flags_;
    double eps_ = 1.0;
    std::string kind_ = "none";
    std::string provenance_;
    std::vector<std::string> warnings_;
};

namespace detail {

/// Cell index range [lo, hi) along axis d whose centres may lie in [a, b].
inline std::pair<long, long> center_range(const PerforatedMask& m, int d, double a, double b) {
    const double x0 = m.grid_box().lower()[d];
    const long n = m.shape()[d];
    long lo = static_cast<long>(std::floor((a - x0) / m.dx() - 0.5)) - 1;
    long hi = static_cast<long>(std::ceil((b - x0) / m.dx() - 0.5)) + 2;
    return {std::clamp(lo, 0L, n), std::clamp(hi, 0L, n)};
}

/// Calls mark(idx) for every non-exterior cell whose centre satisfies inside(c).
template <class Inside, class Mark>
void for_cells_in_bounds(const PerforatedMask& m, const Vec3& lo, const Vec3& hi, Inside&& inside, Mark&& mark) {
    std::array<std::pair<long, long>, 3> r{{{0, 1}, {0, 1}, {0, 1}}};
    for (int d = 0; d < m.dim(); ++d) r[d] = center_range(m, d, lo[d], hi[d]);
    for (long k = r[2].first; k < r[2].second; ++k)
        for (long j = r[1].first; j < r[1].second; ++j)
            for (long i = r[0].first; i < r[0].second; ++i) {
                const auto idx = m.index(i, j, k);
                if (m.flag(idx) == CellFlag::exterior) continue;
                if (inside(m.center(i, j, k))) mark(idx);
            }
}

} // namespace detail

/// Flags every cell whose centre lies in F as a hole. `grid_box` defaults to
/// the domain; cells of a larger grid box outside the domain are exterior.
/// Resolution loss (dx above the smallest feature diameter, or primitives
/// covering no cell centre) is recorded as a warning, never an error.
inline PerforatedMask rasterize(const ObstacleSet& obs, const Box& domain, double dx,
                                std::optional<Box> grid_box = std::nullopt) {
    detail::require(obs.empty() || obs.dim() == domain.dim(), "obstacle/domain dimension mismatch");
    PerforatedMask m(grid_box.value_or(domain), dx);
    if (grid_box) m.set_domain(domain);
    const int n = domain.dim();
    std::size_t lost = 0;
    for (const auto& b : obs.balls()) {
        Vec3 lo = b.center, hi = b.center;
        for (int d = 0; d < n; ++d) {
            lo[d] -= b.radius;
            hi[d] += b.radius;
        }
        const double r2 = b.radius * b.radius;
        bool hit = false;
        detail::for_cells_in_bounds(
            m, lo, hi, [&](const Vec3& c) { return norm2(c - b.center) <= r2; },
            [&](std::size_t idx) {
                m.set_flag(idx, CellFlag::hole);
                hit = true;
            });
        if (!hit && domain.contains_closed(b.center)) ++lost;
    }
    for (const auto& c : obs.capsules()) {
        Vec3 lo{}, hi{};
        for (int d = 0; d < 3; ++d) {
            lo[d] = std::min(c.a[d], c.b[d]) - c.radius;
            hi[d] = std::max(c.a[d], c.b[d]) + c.radius;
        }
        const double r2 = c.radius * c.radius;
        bool hit = false;
        detail::for_cells_in_bounds(
            m, lo, hi, [&](const Vec3& x) { return detail::point_segment_distance2(x, c.a, c.b) <= r2; },
            [&](std::size_t idx) {
                m.set_flag(idx, CellFlag::hole);
                hit = true;
            });
        if (!hit && domain.contains_closed(0.5 * (c.a + c.b))) ++lost;
    }
    const std::string kind = obs.empty() ? "none" : (obs.kind() == ObstacleSet::Kind::balls ? "balls" : "tubes");
    m.set_provenance(kind, obs.description(), obs.scale_applied());
    for (const auto& w : obs.warnings()) m.add_warning(w);
    if (!obs.empty() && dx > 2.0 * obs.min_radius())
        m.add_warning("resolution-loss: dx " + detail::fmt17(dx) + " exceeds smallest feature diameter " +
                      detail::fmt17(2.0 * obs.min_radius()));
    if (lost > 0) m.add_warning("resolution-loss: " + std::to_string(lost) + " primitives cover no cell centre");
    return m;
}

/// (#hole) / (#hole + #material).
inline double volume_fraction(const PerforatedMask& m) {
    const auto holes = m.count(CellFlag::hole);
    const auto total = holes + m.count(CellFlag::material);
    detail::require(total > 0, "mask has no interior cells");
    return static_cast<double>(holes) / static_cast<double>(total);
}

struct DensityRatio {
    double min_ratio = 0.0;
    double max_ratio = 0.0;
    bool condition_holds = false; ///< min_ratio > 0
};

/// Over `probes` random centres x, extremes of |B(x,r) ∩ F| / (r^n |F|) with
/// volumes measured on the mask. Centres are uniform in the domain shrunk by
/// `margin` on every side (margin 0: the whole domain).
inline DensityRatio density_ratio_check(const PerforatedMask& m, double r, std::size_t probes, std::uint64_t seed,
                                        double margin = 0.0) {
    detail::require(std::isfinite(r) && r > 0.0, "probe radius must be > 0");
    detail::require(probes > 0, "probe count must be > 0");
    detail::require(margin >= 0.0, "margin must be >= 0");
    const double cellv = m.cell_volume();
    const double total = static_cast<double>(m.count(CellFlag::hole)) * cellv;
    if (!(total > 0.0)) throw DegenerateInput("density ratio undefined: obstacle set has zero measure on the mask");
    const Box& D = m.domain();
    const int n = m.dim();
    for (int d = 0; d < n; ++d) detail::require(D.side(d) > 2.0 * margin, "margin leaves no probe region");
    Rng rng(derive_seed(seed, Stream::probes));
    DensityRatio out{std::numeric_limits<double>::infinity(), 0.0, false};
    const double denom = std::pow(r, n) * total;
    for (std::size_t p = 0; p < probes; ++p) {
        Vec3 x{0.0, 0.0, 0.0};
        for (int d = 0; d < n; ++d) x[d] = rng.uniform(D.lower()[d] + margin, D.upper()[d] - margin);
        Vec3 lo = x, hi = x;
        for (int d = 0; d < n; ++d) {
            lo[d] -= r;
            hi[d] += r;
        }
        std::size_t hits = 0;
        detail::for_cells_in_bounds(
            m, lo, hi, [&](const Vec3& c) { return norm2(c - x) <= r * r; },
            [&](std::size_t idx) { hits += m.is_hole(idx); });
        const double ratio = static_cast<double>(hits) * cellv / denom;
        out.min_ratio = std::min(out.min_ratio, ratio);
        out.max_ratio = std::max(out.max_ratio, ratio);
    }
    out.condition_holds = out.min_ratio > 0.0;
    return out;
}

/// Cells of `m` whose centres lie in `cube`, as a stand-alone mask over the
/// cube. The cube must be aligned with the grid.
inline PerforatedMask restrict_to(const PerforatedMask& m, const Box& cube) {
    detail::require(cube.dim() == m.dim(), "cube dimension mismatch");
    detail::require(m.domain().encloses(cube, 1e-9), "cube must lie inside the domain");
    PerforatedMask out(cube, m.dx());
    std::array<long, 3> off{0, 0, 0};
    for (int d = 0; d < m.dim(); ++d) {
        const double q = (cube.lower()[d] - m.grid_box().lower()[d]) / m.dx();
        const double r = std::round(q);
        detail::require(std::fabs(q - r) <= 1e-9 * std::max(1.0, std::fabs(r)), "cube is not aligned with the grid");
        off[d] = static_cast<long>(r);
    }
    const auto& s = out.shape();
    for (long k = 0; k < s[2]; ++k)
        for (long j = 0; j < s[1]; ++j)
            for (long i = 0; i < s[0]; ++i) out.set_flag(out.index(i, j, k), m.flag(i + off[0], j + off[1], k + off[2]));
    out.set_provenance(m.kind(), m.provenance(), m.epsilon());
    return out;
}

// ---------------------------------------------------------------------------
// Mask file format (text header, run-length flag stream):
//
//   percohom-mask
//   format_version 1
//   dim 3
//   shape 96 96 96
//   dx 0.010416666666666666
//   grid 0 0 0..1 1 1
//   domain 0 0 0..1 1 1
//   eps 0.03125
//   kind balls
//   rle 17
//   0 1203
//   1 4
//   ...

namespace detail {

inline void write_box(std::ostream& os, const Box& b) {
    for (int d = 0; d < b.dim(); ++d) os << ' ' << fmt17(b.lower()[d]);
    os << "..";
    for (int d = 0; d < b.dim(); ++d) os << (d ? " " : "") << fmt17(b.upper()[d]);
}

inline Box read_box(const std::string& rest, int dim) {
    const auto pos = rest.find("..");
    if (pos == std::string::npos) throw InvalidArgument("mask file: box needs 'lo..hi'");
    std::istringstream a(rest.substr(0, pos)), b(rest.substr(pos + 2));
    Vec3 lo{0, 0, 0}, hi{0, 0, 0};
    for (int d = 0; d < dim; ++d) a >> lo[d];
    for (int d = 0; d < dim; ++d) b >> hi[d];
    if (!a || !b) throw InvalidArgument("mask file: bad box");
    return Box(dim, lo, hi);
}

inline std::string expect_line(std::istream& is, const std::string& key) {
    std::string line;
    if (!std::getline(is, line)) throw InvalidArgument("mask file: missing '" + key + "'");
    if (line.rfind(key, 0) != 0) throw InvalidArgument("mask file: expected '" + key + "', got '" + line + "'");
    return line.substr(key.size());
}

inline void write_mask_header(std::ostream& os, const PerforatedMask& m, const char* magic) {
    os << magic << "\nformat_version 1\ndim " << m.dim() << "\nshape";
    for (int d = 0; d < m.dim(); ++d) os << ' ' << m.shape()[d];
    os << "\ndx " << fmt17(m.dx()) << "\ngrid";
    write_box(os, m.grid_box());
    os << "\ndomain";
    write_box(os, m.domain());
    os << "\neps " << fmt17(m.epsilon()) << "\nkind " << m.kind() << '\n';
    std::vector<std::pair<int, std::size_t>> runs;
    for (auto f : m.flags()) {
        const int v = static_cast<int>(f);
        if (!runs.empty() && runs.back().first == v) ++runs.back().second;
        else runs.emplace_back(v, 1);
    }
    os << "rle " << runs.size() << '\n';
    for (const auto& [v, c] : runs) os << v << ' ' << c << '\n';
}

inline PerforatedMask read_mask_header(std::istream& is, const char* magic) {
    std::string line;
    if (!std::getline(is, line) || line != magic) throw InvalidArgument(std::string("expected '") + magic + "' header");
    if (std::stoi(expect_line(is, "format_version ")) != 1) throw InvalidArgument("unsupported format_version");
    const int dim = std::stoi(expect_line(is, "dim "));
    if (dim != 2 && dim != 3) throw InvalidArgument("mask file: bad dim");
    std::array<long, 3> shape{1, 1, 1};
    {
        std::istringstream in(expect_line(is, "shape"));
        for (int d = 0; d < dim; ++d) in >> shape[d];
        if (!in) throw InvalidArgument("mask file: bad shape");
    }
    const double dx = std::stod(expect_line(is, "dx "));
    const Box grid = read_box(expect_line(is, "grid"), dim);
    const Box domain = read_box(expect_line(is, "domain"), dim);
    const double eps = std::stod(expect_line(is, "eps "));
    const std::string kind = expect_line(is, "kind ");
    PerforatedMask m(grid, dx);
    if (m.shape() != shape) throw InvalidArgument("mask file: shape disagrees with grid box and dx");
    const std::size_t nruns = std::stoull(expect_line(is, "rle "));
    std::size_t pos = 0;
    for (std::size_t r = 0; r < nruns; ++r) {
        int v = -1;
        std::size_t c = 0;
        if (!std::getline(is, line)) throw InvalidArgument("mask file: truncated run list");
        std::istringstream in(line);
        in >> v >> c;
        if (!in || v < 0 || v > 2 || pos + c > m.size()) throw InvalidArgument("mask file: bad run '" + line + "'");
        for (std::size_t t = 0; t < c; ++t) m.set_flag(pos++, static_cast<CellFlag>(v));
    }
    if (pos != m.size()) throw InvalidArgument("mask file: run lengths do not cover the grid");
    // flags already carry the exterior cells
    m.set_domain(domain, false);
    m.set_provenance(kind, "", eps);
    return m;
}

} // namespace detail

inline void write_mask(std::ostream& os, const PerforatedMask& m) { detail::write_mask_header(os, m, "percohom-mask"); }

inline PerforatedMask read_mask(std::istream& is) { return detail::read_mask_header(is, "percohom-mask"); }

} // namespace percohom
