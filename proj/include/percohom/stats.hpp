#pragma once

// Small statistics helpers: moments, correlation, chi-square tail.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "errors.hpp"

namespace percohom::stats {

inline double mean(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

/// Sample standard deviation; exactly 0 when all values are equal.
inline double stddev(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    if (std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); })) return 0.0;
    const double m = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
}

/// std / |mean|; 0 for a constant sample, +inf for a zero mean with spread.
inline double rel_std(const std::vector<double>& v) {
    const double s = stddev(v);
    if (s == 0.0) return 0.0;
    const double m = std::fabs(mean(v));
    return m > 0.0 ? s / m : std::numeric_limits<double>::infinity();
}

/// Pearson correlation; 0 if either sample is constant.
inline double correlation(const std::vector<double>& a, const std::vector<double>& b) {
    detail::require(a.size() == b.size() && a.size() >= 2, "correlation needs two equal samples of size >= 2");
    const double ma = mean(a), mb = mean(b);
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    if (saa == 0.0 || sbb == 0.0) return 0.0;
    return sab / std::sqrt(saa * sbb);
}

/// Upper tail P(X >= x) of a chi-square variable with k degrees of freedom.
inline double chi_square_sf(double x, double k) {
    detail::require(k > 0.0, "degrees of freedom must be > 0");
    if (x <= 0.0) return 1.0;
    return boost::math::gamma_q(0.5 * k, 0.5 * x);
}

/// Least-squares slope of log y against log x (all values must be > 0).
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    detail::require(x.size() == y.size() && x.size() >= 2, "slope needs at least two points");
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < x.size(); ++i) {
        detail::require(x[i] > 0.0 && y[i] > 0.0, "log-log slope needs positive data");
        lx.push_back(std::log(x[i]));
        ly.push_back(std::log(y[i]));
    }
    const double mx = mean(lx), my = mean(ly);
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxy += (lx[i] - mx) * (ly[i] - my);
        sxx += (lx[i] - mx) * (lx[i] - mx);
    }
    return sxy / sxx;
}

} // namespace percohom::stats
