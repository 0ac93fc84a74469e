#pragma once

// Matrix-free (2n+1)-point operator -Δ_h + κ on a cell-centred grid with one
// layer of padding. Every padded node has a role:
//
//   unknown    solved for
//   fixed      Dirichlet value at the node centre (holes, capacity targets)
//   face       Dirichlet value on the shared face: the half-cell distance
//              doubles the coupling (domain and cube boundaries)
//   insulated  no flux through the shared face
//
// The discrete Dirichlet energy dx^{n-2} Σ_faces c_f (u_a - u_b)^2 uses the
// same couplings, so the operator is exactly half its gradient divided by dx^n.

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "cg.hpp"
#include "errors.hpp"

namespace percohom {

enum class Node : std::uint8_t { unknown = 0, fixed = 1, face = 2, insulated = 3 };

class Stencil {
  public:
    Stencil(int dim, std::array<long, 3> shape, double dx, double reaction, Node pad = Node::face,
            double pad_value = 0.0)
        : dim_(dim), n_(shape), dx_(dx), reaction_(reaction) {
        if (dim != 2 && dim != 3) throw UnsupportedDimension("stencil dimension must be 2 or 3");
        detail::require(std::isfinite(dx) && dx > 0.0, "grid spacing must be > 0");
        detail::require(std::isfinite(reaction) && reaction >= 0.0, "reaction coefficient must be >= 0");
        if (dim == 2) n_[2] = 1;
        for (int d = 0; d < dim; ++d) detail::require(n_[d] >= 1, "grid shape must be positive");
        p_[0] = n_[0] + 2;
        p_[1] = n_[1] + 2;
        p_[2] = dim == 3 ? n_[2] + 2 : 1;
        off_ = dim == 3 ? 1 : 0;
        const auto total = static_cast<std::size_t>(p_[0] * p_[1] * p_[2]);
        node_.assign(total, pad);
        value_.assign(total, pad_value);
        for (long k = 0; k < n_[2]; ++k)
            for (long j = 0; j < n_[1]; ++j)
                for (long i = 0; i < n_[0]; ++i) {
                    node_[at(i, j, k)] = Node::unknown;
                    value_[at(i, j, k)] = 0.0;
                }
        for (int d = 0; d < 3; ++d) weight_[d].assign(static_cast<std::size_t>(n_[d] + 1), 1.0);
    }

    int dim() const noexcept { return dim_; }
    const std::array<long, 3>& shape() const noexcept { return n_; }
    double dx() const noexcept { return dx_; }
    double reaction() const noexcept { return reaction_; }
    std::size_t padded_size() const noexcept { return node_.size(); }

    /// Padded index of cell (i,j,k); i ranges over [-1, n] on padded axes.
    std::size_t at(long i, long j, long k = 0) const noexcept {
        return static_cast<std::size_t>((i + 1) + p_[0] * ((j + 1) + p_[1] * (k + off_)));
    }

    Node node(std::size_t p) const noexcept { return node_[p]; }
    double value(std::size_t p) const noexcept { return value_[p]; }
    void set(long i, long j, long k, Node role, double value = 0.0) {
        const auto p = at(i, j, k);
        node_[p] = role;
        value_[p] = value;
        finalized_ = false;
    }
    /// Sets role and value of every padding node.
    void set_padding(Node role, double value) {
        for_each_pad([&](std::size_t p) {
            node_[p] = role;
            value_[p] = value;
        });
        finalized_ = false;
    }

    /// Coupling multipliers for the n+1 faces along `axis`; face f separates
    /// cells f-1 and f (cell -1 and cell n are padding).
    void set_face_weights(int axis, std::vector<double> w) {
        detail::require(axis >= 0 && axis < dim_, "axis out of range");
        detail::require(w.size() == static_cast<std::size_t>(n_[axis] + 1), "face weight count must be n+1");
        weight_[axis] = std::move(w);
        finalized_ = false;
    }

    /// Computes the diagonal; throws DegenerateInput if an unknown has no
    /// coupling at all (singular system).
    void finalize() {
        diag_.assign(node_.size(), 0.0);
        inv_diag_.assign(node_.size(), 0.0);
        const double h2 = 1.0 / (dx_ * dx_);
        for_each_cell([&](long i, long j, long k, std::size_t p) {
            if (node_[p] != Node::unknown) return;
            double s = 0.0;
            for_each_neighbor(i, j, k, [&](std::size_t q, double w) { s += coupling(q) * w; });
            const double d = reaction_ + h2 * s;
            if (!(d > 0.0)) throw DegenerateInput("unknown cell without coupling and zero reaction");
            diag_[p] = d;
            inv_diag_[p] = 1.0 / d;
        });
        finalized_ = true;
    }

    /// y = A x on unknowns, 0 elsewhere. Entries of x off the unknowns must be 0.
    void apply(const std::vector<double>& x, std::vector<double>& y) const {
        ensure_finalized();
        y.assign(x.size(), 0.0);
        const double h2 = 1.0 / (dx_ * dx_);
        const long sx = 1, sy = p_[0], sz = p_[0] * p_[1];
        const auto& wx = weight_[0];
        const auto& wy = weight_[1];
        const auto& wz = weight_[2];
        for (long k = 0; k < n_[2]; ++k)
            for (long j = 0; j < n_[1]; ++j) {
                const std::size_t row = at(0, j, k);
                for (long i = 0; i < n_[0]; ++i) {
                    const std::size_t p = row + static_cast<std::size_t>(i);
                    const double d = diag_[p];
                    if (d == 0.0) continue;
                    double s = wx[static_cast<std::size_t>(i)] * x[p - sx] + wx[static_cast<std::size_t>(i + 1)] * x[p + sx] +
                               wy[static_cast<std::size_t>(j)] * x[p - sy] + wy[static_cast<std::size_t>(j + 1)] * x[p + sy];
                    if (dim_ == 3)
                        s += wz[static_cast<std::size_t>(k)] * x[p - sz] + wz[static_cast<std::size_t>(k + 1)] * x[p + sz];
                    y[p] = d * x[p] - h2 * s;
                }
            }
    }

    void jacobi(const std::vector<double>& r, std::vector<double>& z) const {
        z.resize(r.size());
        for (std::size_t i = 0; i < r.size(); ++i) z[i] = inv_diag_[i] * r[i];
    }

    /// Contribution of fixed and face values to the right-hand side.
    std::vector<double> boundary_rhs() const {
        ensure_finalized();
        std::vector<double> b(node_.size(), 0.0);
        const double h2 = 1.0 / (dx_ * dx_);
        for_each_cell([&](long i, long j, long k, std::size_t p) {
            if (node_[p] != Node::unknown) return;
            double s = 0.0;
            for_each_neighbor(i, j, k, [&](std::size_t q, double w) {
                if (node_[q] == Node::fixed || node_[q] == Node::face) s += coupling(q) * w * value_[q];
            });
            b[p] = h2 * s;
        });
        return b;
    }

    /// Copy of x with the prescribed values written on fixed and face nodes.
    std::vector<double> with_boundary_values(const std::vector<double>& x) const {
        std::vector<double> u = x;
        for (std::size_t p = 0; p < u.size(); ++p)
            if (node_[p] == Node::fixed || node_[p] == Node::face) u[p] = value_[p];
            else if (node_[p] == Node::insulated) u[p] = 0.0;
        return u;
    }

    /// dx^{n-2} Σ_faces c_f (u_a - u_b)^2 for a padded field u holding values
    /// on every node (see with_boundary_values).
    double dirichlet_energy(const std::vector<double>& u) const { return dirichlet_form(u, u); }

    /// Bilinear form behind dirichlet_energy: dx^{n-2} Σ_faces c_f Δu Δw.
    double dirichlet_form(const std::vector<double>& u, const std::vector<double>& w) const {
        double e = 0.0;
        for (int d = 0; d < dim_; ++d) {
            const long stride = d == 0 ? 1 : (d == 1 ? p_[0] : p_[0] * p_[1]);
            std::array<long, 3> lo{0, 0, 0};
            lo[d] = -1;
            for (long k = lo[2]; k < n_[2]; ++k)
                for (long j = lo[1]; j < n_[1]; ++j) {
                    double line = 0.0;
                    for (long i = lo[0]; i < n_[0]; ++i) {
                        const std::size_t a = at(i, j, k);
                        const std::size_t b = a + static_cast<std::size_t>(stride);
                        const double c = pair_coupling(a, b);
                        if (c == 0.0) continue;
                        const long f = (d == 0 ? i : (d == 1 ? j : k)) + 1;
                        line += c * weight_[d][static_cast<std::size_t>(f)] * (u[a] - u[b]) * (w[a] - w[b]);
                    }
                    e += line;
                }
        }
        return e * std::pow(dx_, dim_ - 2);
    }

    /// Solves A x = rhs (rhs already includes boundary_rhs if wanted).
    SolveReport solve(const std::vector<double>& rhs, std::vector<double>& x, const CgOptions& opt) const {
        ensure_finalized();
        if (x.size() != rhs.size()) x.assign(rhs.size(), 0.0);
        return cg_solve([this](const std::vector<double>& v, std::vector<double>& y) { apply(v, y); },
                        [this](const std::vector<double>& r, std::vector<double>& z) { jacobi(r, z); }, rhs, x,
                        opt);
    }

    template <class Fn>
    void for_each_cell(Fn&& fn) const {
        for (long k = 0; k < n_[2]; ++k)
            for (long j = 0; j < n_[1]; ++j)
                for (long i = 0; i < n_[0]; ++i) fn(i, j, k, at(i, j, k));
    }

  private:
    static double coupling(Node q) noexcept {
        switch (q) {
        case Node::unknown:
        case Node::fixed: return 1.0;
        case Node::face: return 2.0;
        default: return 0.0;
        }
    }
    double coupling(std::size_t q) const noexcept { return coupling(node_[q]); }

    /// Multiplier of a face between nodes a and b in the energy.
    double pair_coupling(std::size_t a, std::size_t b) const noexcept {
        const Node na = node_[a], nb = node_[b];
        if (na == Node::insulated || nb == Node::insulated) return 0.0;
        if (na == Node::face && nb == Node::face) return 0.0;
        if (na == Node::face || nb == Node::face) return 2.0;
        return 1.0;
    }

    template <class Fn>
    void for_each_neighbor(long i, long j, long k, Fn&& fn) const {
        fn(at(i - 1, j, k), weight_[0][static_cast<std::size_t>(i)]);
        fn(at(i + 1, j, k), weight_[0][static_cast<std::size_t>(i + 1)]);
        fn(at(i, j - 1, k), weight_[1][static_cast<std::size_t>(j)]);
        fn(at(i, j + 1, k), weight_[1][static_cast<std::size_t>(j + 1)]);
        if (dim_ == 3) {
            fn(at(i, j, k - 1), weight_[2][static_cast<std::size_t>(k)]);
            fn(at(i, j, k + 1), weight_[2][static_cast<std::size_t>(k + 1)]);
        }
    }

    template <class Fn>
    void for_each_pad(Fn&& fn) const {
        const long klo = dim_ == 3 ? -1 : 0, khi = dim_ == 3 ? n_[2] : 0;
        for (long k = klo; k <= khi; ++k)
            for (long j = -1; j <= n_[1]; ++j)
                for (long i = -1; i <= n_[0]; ++i) {
                    const bool pad = i < 0 || i >= n_[0] || j < 0 || j >= n_[1] || (dim_ == 3 && (k < 0 || k >= n_[2]));
                    if (pad) fn(at(i, j, k));
                }
    }

    void ensure_finalized() const {
        if (!finalized_) throw InvalidArgument("stencil used before finalize()");
    }

    int dim_;
    std::array<long, 3> n_;
    std::array<long, 3> p_{};
    long off_ = 1;
    double dx_;
    double reaction_;
    std::vector<Node> node_;
    std::vector<double> value_;
    std::array<std::vector<double>, 3> weight_;
    std::vector<double> diag_;
    std::vector<double> inv_diag_;
    bool finalized_ = false;
};

} // namespace percohom
