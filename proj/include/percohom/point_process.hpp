#pragma once

// Homogeneous Poisson point processes in axis-aligned boxes.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "rng.hpp"

namespace percohom {

/// Coordinates in up to three dimensions; unused trailing entries are zero.
using Vec3 = std::array<double, 3>;

inline Vec3 operator+(const Vec3& a, const Vec3& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
inline Vec3 operator-(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
inline Vec3 operator*(double s, const Vec3& a) { return {s * a[0], s * a[1], s * a[2]}; }
inline double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
inline double norm2(const Vec3& a) { return dot(a, a); }
inline double distance(const Vec3& a, const Vec3& b) { return std::sqrt(norm2(a - b)); }

class Box {
  public:
    Box() = default;

    Box(int dim, const Vec3& lower, const Vec3& upper) : dim_(dim), lower_(lower), upper_(upper) {
        detail::require(dim == 2 || dim == 3, "box dimension must be 2 or 3");
        for (int d = 0; d < dim; ++d) {
            detail::require(std::isfinite(lower[d]) && std::isfinite(upper[d]), "box corners must be finite");
            detail::require(upper[d] > lower[d], "box must have upper > lower on every axis");
        }
        for (int d = dim; d < 3; ++d) lower_[d] = upper_[d] = 0.0;
    }

    static Box cube(int dim, double lo, double hi) { return Box(dim, {lo, lo, lo}, {hi, hi, hi}); }

    int dim() const noexcept { return dim_; }
    const Vec3& lower() const noexcept { return lower_; }
    const Vec3& upper() const noexcept { return upper_; }
    double side(int d) const noexcept { return upper_[d] - lower_[d]; }

    double volume() const noexcept {
        double v = 1.0;
        for (int d = 0; d < dim_; ++d) v *= side(d);
        return v;
    }

    /// Half-open membership [lower, upper) on every axis.
    bool contains(const Vec3& p) const noexcept {
        for (int d = 0; d < dim_; ++d)
            if (!(p[d] >= lower_[d] && p[d] < upper_[d])) return false;
        return true;
    }

    bool contains_closed(const Vec3& p) const noexcept {
        for (int d = 0; d < dim_; ++d)
            if (!(p[d] >= lower_[d] && p[d] <= upper_[d])) return false;
        return true;
    }

    /// True if `inner` lies within this box up to a relative tolerance.
    bool encloses(const Box& inner, double rel_tol = 1e-12) const noexcept {
        if (inner.dim_ != dim_) return false;
        for (int d = 0; d < dim_; ++d) {
            const double tol = rel_tol * std::max(1.0, std::fabs(side(d)));
            if (inner.lower_[d] < lower_[d] - tol || inner.upper_[d] > upper_[d] + tol) return false;
        }
        return true;
    }

    double diameter() const noexcept {
        double s = 0.0;
        for (int d = 0; d < dim_; ++d) s += side(d) * side(d);
        return std::sqrt(s);
    }

    Vec3 center() const noexcept { return 0.5 * (lower_ + upper_); }

    Box translated(const Vec3& v) const { return Box(dim_, lower_ + v, upper_ + v); }
    Box scaled(double f) const { return Box(dim_, f * lower_, f * upper_); }

    friend bool operator==(const Box& a, const Box& b) {
        return a.dim_ == b.dim_ && a.lower_ == b.lower_ && a.upper_ == b.upper_;
    }

  private:
    int dim_ = 2;
    Vec3 lower_{0.0, 0.0, 0.0};
    Vec3 upper_{1.0, 1.0, 0.0};
};

/// A finite realization of a point process inside a box.
class PointConfiguration {
  public:
    PointConfiguration() = default;
    PointConfiguration(std::vector<Vec3> points, Box box, double intensity, std::uint64_t seed)
        : points_(std::move(points)), box_(box), intensity_(intensity), seed_(seed) {}

    const std::vector<Vec3>& points() const noexcept { return points_; }
    std::size_t size() const noexcept { return points_.size(); }
    bool empty() const noexcept { return points_.empty(); }
    const Vec3& operator[](std::size_t i) const noexcept { return points_[i]; }
    const Box& box() const noexcept { return box_; }
    int dim() const noexcept { return box_.dim(); }
    double intensity() const noexcept { return intensity_; }
    std::uint64_t seed() const noexcept { return seed_; }

    friend bool operator==(const PointConfiguration& a, const PointConfiguration& b) {
        return a.points_ == b.points_ && a.box_ == b.box_ && a.intensity_ == b.intensity_ &&
               a.seed_ == b.seed_;
    }

  private:
    std::vector<Vec3> points_;
    Box box_;
    double intensity_ = 0.0;
    std::uint64_t seed_ = 0;
};

/// Homogeneous Poisson process: Poisson(intensity * volume) points placed
/// i.i.d. uniformly. Deterministic in (box, intensity, seed).
inline PointConfiguration sample_poisson(const Box& box, double intensity, std::uint64_t seed) {
    detail::require(std::isfinite(intensity) && intensity >= 0.0, "intensity must be finite and >= 0");
    detail::require(box.volume() > 0.0 && std::isfinite(box.volume()), "box must have positive finite volume");
    Rng rng(derive_seed(seed, Stream::points));
    const auto count = rng.poisson(intensity * box.volume());
    std::vector<Vec3> pts;
    pts.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) {
        Vec3 p{0.0, 0.0, 0.0};
        for (int d = 0; d < box.dim(); ++d) {
            // guard against rounding onto the open upper face
            double x = box.lower()[d] + box.side(d) * rng.uniform();
            if (x >= box.upper()[d]) x = std::nextafter(box.upper()[d], box.lower()[d]);
            p[d] = x;
        }
        pts.push_back(p);
    }
    return {std::move(pts), box, intensity, seed};
}

inline PointConfiguration translate(const PointConfiguration& cfg, const Vec3& shift) {
    std::vector<Vec3> pts;
    pts.reserve(cfg.size());
    for (const auto& p : cfg.points()) pts.push_back(p + shift);
    return {std::move(pts), cfg.box().translated(shift), cfg.intensity(), cfg.seed()};
}

/// Multiplies points and box by `factor`; the recorded intensity becomes
/// intensity / factor^n so that it stays the points-per-volume of the result.
inline PointConfiguration scale(const PointConfiguration& cfg, double factor) {
    detail::require(std::isfinite(factor) && factor > 0.0, "scale factor must be > 0");
    std::vector<Vec3> pts;
    pts.reserve(cfg.size());
    for (const auto& p : cfg.points()) pts.push_back(factor * p);
    return {std::move(pts), cfg.box().scaled(factor), cfg.intensity() / std::pow(factor, cfg.dim()),
            cfg.seed()};
}

/// Number of points in the half-open region [lower, upper).
inline std::size_t count_in(const PointConfiguration& cfg, const Box& region) {
    detail::require(region.dim() == cfg.dim(), "region dimension mismatch");
    detail::require(cfg.box().encloses(region, 1e-12), "region escapes the configuration box");
    std::size_t n = 0;
    for (const auto& p : cfg.points())
        if (region.contains(p)) ++n;
    return n;
}

namespace detail {

/// Number of cells of side `cell` along each axis, or throws if the box
/// does not split into whole cells (relative tolerance `rel_tol`).
inline std::array<long, 3> partition_counts(const Box& box, double cell, double rel_tol = 1e-9) {
    require(std::isfinite(cell) && cell > 0.0, "cell size must be > 0");
    std::array<long, 3> n{1, 1, 1};
    for (int d = 0; d < box.dim(); ++d) {
        const double q = box.side(d) / cell;
        const double r = std::round(q);
        require(r >= 1.0 && std::fabs(q - r) <= rel_tol * std::max(1.0, r),
                "box side is not an integer multiple of the cell size");
        n[d] = static_cast<long>(r);
    }
    return n;
}

} // namespace detail

/// Fraction of grid cells of side `cell_size` that contain no point.
inline double empty_cell_frequency(const PointConfiguration& cfg, double cell_size) {
    const Box& box = cfg.box();
    const auto n = detail::partition_counts(box, cell_size);
    const std::size_t total = static_cast<std::size_t>(n[0] * n[1] * n[2]);
    std::vector<unsigned char> occupied(total, 0);
    for (const auto& p : cfg.points()) {
        std::array<long, 3> idx{0, 0, 0};
        for (int d = 0; d < box.dim(); ++d) {
            long i = static_cast<long>(std::floor((p[d] - box.lower()[d]) / cell_size));
            idx[d] = std::clamp(i, 0L, n[d] - 1);
        }
        occupied[static_cast<std::size_t>(idx[0] + n[0] * (idx[1] + n[1] * idx[2]))] = 1;
    }
    std::size_t empty = 0;
    for (auto o : occupied) empty += (o == 0);
    return static_cast<double>(empty) / static_cast<double>(total);
}

// ---------------------------------------------------------------------------
// Text format
//
//   dim 2; box 0 0..1 1; intensity 1; seed 42
//   0.12345678901234567 0.5
//   ...
//
// Doubles are written with 17 significant digits so files round-trip exactly.

namespace detail {

inline std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

} // namespace detail

inline void write_points(std::ostream& os, const PointConfiguration& cfg) {
    const int dim = cfg.dim();
    os << "dim " << dim << "; box";
    for (int d = 0; d < dim; ++d) os << ' ' << detail::fmt17(cfg.box().lower()[d]);
    os << "..";
    for (int d = 0; d < dim; ++d) os << (d ? " " : "") << detail::fmt17(cfg.box().upper()[d]);
    os << "; intensity " << detail::fmt17(cfg.intensity()) << "; seed " << cfg.seed() << '\n';
    for (const auto& p : cfg.points()) {
        for (int d = 0; d < dim; ++d) os << (d ? " " : "") << detail::fmt17(p[d]);
        os << '\n';
    }
}

inline PointConfiguration read_points(std::istream& is) {
    std::string header;
    if (!std::getline(is, header)) throw InvalidArgument("point file: missing header");
    // split on ';'
    std::vector<std::string> fields;
    {
        std::stringstream ss(header);
        std::string f;
        while (std::getline(ss, f, ';')) fields.push_back(f);
    }
    if (fields.size() != 4) throw InvalidArgument("point file: header must have 4 ';'-separated fields");
    auto expect_key = [](std::istringstream& in, const char* key) {
        std::string k;
        in >> k;
        if (k != key) throw InvalidArgument(std::string("point file: expected '") + key + "'");
    };
    int dim = 0;
    {
        std::istringstream in(fields[0]);
        expect_key(in, "dim");
        in >> dim;
        if (!in || (dim != 2 && dim != 3)) throw InvalidArgument("point file: bad dim");
    }
    Vec3 lo{0, 0, 0}, hi{0, 0, 0};
    {
        std::string f = fields[1];
        const auto pos = f.find("..");
        if (pos == std::string::npos) throw InvalidArgument("point file: box needs 'lo..hi'");
        std::istringstream a(f.substr(0, pos)), b(f.substr(pos + 2));
        expect_key(a, "box");
        for (int d = 0; d < dim; ++d) a >> lo[d];
        for (int d = 0; d < dim; ++d) b >> hi[d];
        if (!a || !b) throw InvalidArgument("point file: bad box");
    }
    double intensity = 0.0;
    {
        std::istringstream in(fields[2]);
        expect_key(in, "intensity");
        in >> intensity;
        if (!in) throw InvalidArgument("point file: bad intensity");
    }
    std::uint64_t seed = 0;
    {
        std::istringstream in(fields[3]);
        expect_key(in, "seed");
        in >> seed;
        if (!in) throw InvalidArgument("point file: bad seed");
    }
    Box box(dim, lo, hi);
    std::vector<Vec3> pts;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream in(line);
        Vec3 p{0, 0, 0};
        for (int d = 0; d < dim; ++d) in >> p[d];
        if (!in) throw InvalidArgument("point file: bad coordinate line '" + line + "'");
        pts.push_back(p);
    }
    return {std::move(pts), box, intensity, seed};
}

} // namespace percohom
