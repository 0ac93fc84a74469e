#pragma once

// Tables and plot data. Numbers are written with 17 significant digits, so
// equal runs give byte-identical files.

#include <cmath>
#include <cstdint>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "capacity.hpp"
#include "homogenization.hpp"
#include "parallel.hpp"
#include "point_process.hpp"
#include "stats.hpp"

namespace percohom {

inline constexpr int format_version = 1;

// ---------------------------------------------------------------------------
// Poisson law: counts over many seeds

struct PoissonLawCheck {
    std::vector<std::size_t> counts;   ///< per seed: N(box)
    std::vector<double> empty_fraction; ///< per seed: empty-cell frequency (NaN if not requested)
    std::vector<std::size_t> histogram; ///< k = 0..kmax, then the tail k > kmax
    double chi_square = 0.0;
    double p_value = 0.0;
    double empty_mean = 0.0;            ///< pooled empty-cell frequency
    double empty_sigma = 0.0;           ///< binomial std of the pooled frequency
    double empty_expected = 0.0;        ///< e^{-intensity cell^n}
};

/// Seeds derive_seed(seed, i), i < replicas. χ² over k = 0..kmax plus the
/// pooled tail (kmax + 1 degrees of freedom). Empty cells are counted when
/// cell_size > 0.
inline PoissonLawCheck poisson_law_check(const Box& box, double intensity, std::size_t replicas, std::uint64_t seed,
                                         int kmax = 5, double cell_size = 0.0, int threads = 1) {
    detail::require(replicas >= 1, "replicas must be >= 1");
    detail::require(kmax >= 1, "kmax must be >= 1");
    PoissonLawCheck out;
    out.counts.resize(replicas);
    out.empty_fraction.assign(replicas, std::numeric_limits<double>::quiet_NaN());
    parallel_for(replicas, threads, [&](std::size_t i) {
        const auto cfg = sample_poisson(box, intensity, derive_seed(seed, i));
        out.counts[i] = cfg.size();
        if (cell_size > 0.0) out.empty_fraction[i] = empty_cell_frequency(cfg, cell_size);
    });
    const double mu = intensity * box.volume();
    out.histogram.assign(static_cast<std::size_t>(kmax) + 2, 0);
    for (auto c : out.counts) ++out.histogram[std::min<std::size_t>(c, static_cast<std::size_t>(kmax) + 1)];
    double pk = std::exp(-mu), cum = 0.0;
    for (int k = 0; k <= kmax + 1; ++k) {
        const double p = k <= kmax ? pk : 1.0 - cum;
        const double expected = p * static_cast<double>(replicas);
        const double diff = static_cast<double>(out.histogram[static_cast<std::size_t>(k)]) - expected;
        out.chi_square += diff * diff / expected;
        cum += pk;
        pk *= mu / (k + 1);
    }
    out.p_value = stats::chi_square_sf(out.chi_square, kmax + 1);
    if (cell_size > 0.0) {
        const auto cells = detail::partition_counts(box, cell_size);
        double ncell = 1.0;
        for (int d = 0; d < box.dim(); ++d) ncell *= static_cast<double>(cells[d]);
        out.empty_mean = stats::mean(out.empty_fraction);
        out.empty_expected = std::exp(-intensity * std::pow(cell_size, box.dim()));
        const double p = out.empty_expected;
        out.empty_sigma = std::sqrt(p * (1.0 - p) / (ncell * static_cast<double>(replicas)));
    }
    return out;
}

// ---------------------------------------------------------------------------
// CSV writers

namespace detail {

inline std::string fmt_opt(double x) { return std::isfinite(x) ? fmt17(x) : std::string(); }

} // namespace detail

inline void write_poisson_csv(std::ostream& os, const PoissonLawCheck& c) {
    os << "replica,count,empty_fraction\n";
    for (std::size_t i = 0; i < c.counts.size(); ++i)
        os << i << ',' << c.counts[i] << ',' << detail::fmt_opt(c.empty_fraction[i]) << '\n';
}

inline void write_newton_csv(std::ostream& os, const std::vector<NewtonCapacity>& rows, double exact) {
    os << "dx,outer_radius,capacity,exact,rel_error,iterations\n";
    for (const auto& r : rows)
        os << detail::fmt17(r.dx) << ',' << detail::fmt17(r.outer_radius) << ',' << detail::fmt17(r.value) << ','
           << detail::fmt17(exact) << ',' << detail::fmt17((r.value - exact) / exact) << ',' << r.report.iterations
           << '\n';
}

inline void write_capacity_csv(std::ostream& os, const StrangeTermResult& res) {
    os << "h,eps,replica,seed,cap,cap_per_volume,iterations,dx,hole_cells\n";
    for (const auto& r : res.rows)
        os << detail::fmt17(r.h) << ',' << detail::fmt17(r.eps) << ',' << r.replica << ',' << r.seed << ','
           << detail::fmt17(r.cap) << ',' << detail::fmt17(r.cap_per_volume) << ',' << r.iterations << ','
           << detail::fmt17(r.dx) << ',' << r.hole_cells << '\n';
}

inline void write_sweep_csv(std::ostream& os, const HomogenizationReport& rep, const std::vector<double>& h_values) {
    os << "eps,replica,seed,volume_fraction,hole_cells";
    for (double h : h_values) os << ",cap_per_volume_h" << detail::fmt17(h);
    os << ",h1,gamma,energy,u_l2,l2_error,iterations,empty_cell_frequency,boolean_C,resolved,error\n";
    for (const auto& r : rep.rows) {
        os << detail::fmt17(r.eps) << ',' << r.replica << ',' << r.seed << ',' << detail::fmt17(r.volume_fraction)
           << ',' << r.hole_cells;
        for (std::size_t i = 0; i < h_values.size(); ++i)
            os << ',' << (i < r.cap_per_volume.size() ? detail::fmt17(r.cap_per_volume[i]) : std::string());
        std::string err = r.error;
        for (auto& ch : err)
            if (ch == ',' || ch == '\n') ch = ';';
        os << ',' << detail::fmt17(r.h1) << ',' << detail::fmt17(r.gamma) << ',' << detail::fmt17(r.energy) << ','
           << detail::fmt17(r.u_l2) << ',' << detail::fmt17(r.l2_error) << ',' << r.iterations << ','
           << detail::fmt_opt(r.empty_cell_frequency) << ',' << detail::fmt_opt(r.boolean_C) << ','
           << (r.resolved ? 1 : 0) << ',' << err << '\n';
    }
}

inline void write_ergodic_csv(std::ostream& os, const ErgodicResult& res) {
    os << "t,replica,seed,value,per_volume,iterations\n";
    for (const auto& r : res.rows)
        os << detail::fmt17(r.t) << ',' << r.replica << ',' << r.seed << ',' << detail::fmt17(r.value) << ','
           << detail::fmt17(r.per_volume) << ',' << r.iterations << '\n';
}

inline void write_ergodic_levels_csv(std::ostream& os, const ErgodicResult& res) {
    os << "t,mean,rel_std\n";
    for (const auto& l : res.levels)
        os << detail::fmt17(l.t) << ',' << detail::fmt17(l.mean) << ',' << detail::fmt17(l.rel_std) << '\n';
}

/// Two-column plot data.
inline void write_plot_data(std::ostream& os, const std::vector<std::pair<double, double>>& xy) {
    for (const auto& [x, y] : xy) os << detail::fmt17(x) << ' ' << detail::fmt17(y) << '\n';
}

} // namespace percohom
