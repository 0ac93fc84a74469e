#pragma once

// Preconditioned conjugate gradients over std::vector<double>, with a fixed
// summation order so that results are bit-stable.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"

namespace percohom {

struct SolveReport {
    long iterations = 0;
    double relative_residual = 0.0;
    double wall_seconds = 0.0;
};

struct CgOptions {
    double tol = 1e-8;   ///< on ||b - A x|| / ||b||
    long max_iter = 1000;
};

namespace detail {

/// Dot product summed in fixed blocks of 1024, block sums added in order.
inline double blocked_dot(const std::vector<double>& a, const std::vector<double>& b) {
    constexpr std::size_t block = 1024;
    double total = 0.0;
    const std::size_t n = a.size();
    for (std::size_t s = 0; s < n; s += block) {
        const std::size_t e = std::min(n, s + block);
        double part = 0.0;
        for (std::size_t i = s; i < e; ++i) part += a[i] * b[i];
        total += part;
    }
    return total;
}

} // namespace detail

/// Solves A x = b for SPD A. `apply(x, y)` writes y = A x; `precondition(r, z)`
/// writes z = M^{-1} r. `x` holds the initial guess on entry. Throws
/// SolverFailure (with the residual history) on breakdown or when max_iter
/// is reached above tolerance.
template <class Apply, class Precondition>
SolveReport cg_solve(Apply&& apply, Precondition&& precondition, const std::vector<double>& b,
                     std::vector<double>& x, const CgOptions& opt) {
    detail::require(opt.tol > 0.0, "tolerance must be > 0");
    detail::require(opt.max_iter > 0, "max_iter must be > 0");
    detail::require(x.size() == b.size(), "initial guess size mismatch");
    const auto t0 = std::chrono::steady_clock::now();
    auto elapsed = [&] {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    };
    const std::size_t n = b.size();
    const double bnorm = std::sqrt(detail::blocked_dot(b, b));
    if (bnorm == 0.0) {
        std::fill(x.begin(), x.end(), 0.0);
        return {0, 0.0, elapsed()};
    }
    std::vector<double> r(n), z(n), p(n), q(n);
    apply(x, q);
    for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - q[i];
    std::vector<double> history;
    double rel = std::sqrt(detail::blocked_dot(r, r)) / bnorm;
    history.push_back(rel);
    if (rel <= opt.tol) return {0, rel, elapsed()};
    precondition(r, z);
    p = z;
    double rz = detail::blocked_dot(r, z);
    for (long it = 1; it <= opt.max_iter; ++it) {
        apply(p, q);
        const double pq = detail::blocked_dot(p, q);
        if (!(pq > 0.0) || !std::isfinite(pq))
            throw SolverFailure("cg breakdown: p^T A p = " + std::to_string(pq), history);
        const double alpha = rz / pq;
        for (std::size_t i = 0; i < n; ++i) {
            x[i] += alpha * p[i];
            r[i] -= alpha * q[i];
        }
        rel = std::sqrt(detail::blocked_dot(r, r)) / bnorm;
        history.push_back(rel);
        if (!std::isfinite(rel)) throw SolverFailure("cg produced a non-finite residual", history);
        if (rel <= opt.tol) return {it, rel, elapsed()};
        precondition(r, z);
        const double rz_new = detail::blocked_dot(r, z);
        const double beta = rz_new / rz;
        rz = rz_new;
        for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }
    throw SolverFailure("cg did not reach tolerance " + std::to_string(opt.tol) + " in " +
                            std::to_string(opt.max_iter) + " iterations (residual " + std::to_string(rel) + ")",
                        history);
}

/// Unpreconditioned variant.
template <class Apply>
SolveReport cg_solve(Apply&& apply, const std::vector<double>& b, std::vector<double>& x, const CgOptions& opt) {
    return cg_solve(std::forward<Apply>(apply), [](const std::vector<double>& r, std::vector<double>& z) { z = r; },
                    b, x, opt);
}

} // namespace percohom
