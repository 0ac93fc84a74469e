// Acceptance runner: `acceptance [N ...] [--threads T] [--seed S]`.
// Prints one line per criterion; exits 1 if any selected criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <thread>

#include "percohom/percohom.hpp"

using namespace percohom;
using std::numbers::pi;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

struct Settings {
    int threads = 4;
    std::uint64_t seed = 20240601;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---------------------------------------------------------------------------
// 1: Poisson law

std::string poisson_csv(const Settings& s, int threads, PoissonLawCheck* out = nullptr) {
    auto c = poisson_law_check(Box::cube(3, 0.0, 1.0), 1.0, 10000, s.seed, 5, 1.0, threads);
    std::ostringstream os;
    write_poisson_csv(os, c);
    if (out) *out = std::move(c);
    return os.str();
}

Outcome criterion_1(const Settings& s) {
    const auto t0 = std::chrono::steady_clock::now();
    PoissonLawCheck c;
    poisson_csv(s, s.threads, &c);
    const double secs = seconds_since(t0);
    const double dev = std::fabs(c.empty_mean - std::exp(-1.0));
    const bool ok = c.p_value > 0.001 && dev <= 3 * c.empty_sigma && secs < 10.0;
    return {ok, fmt("chi2=%.3f p=%.4f empty=%.5f (e^-1=%.5f, 3sigma=%.5f) %.1fs", c.chi_square, c.p_value,
                    c.empty_mean, std::exp(-1.0), 3 * c.empty_sigma, secs)};
}

// ---------------------------------------------------------------------------
// 2, 3: Newton capacity

Outcome criterion_2(const Settings&) {
    const auto t0 = std::chrono::steady_clock::now();
    const double exact = 4 * pi / (1 / 0.1 - 1 / 1.0);
    const double coarse = newton_capacity(Ball{{0, 0, 0}, 0.1}, 1.0, 1.0 / 24).value;
    const double fine = newton_capacity(Ball{{0, 0, 0}, 0.1}, 1.0, 1.0 / 48).value;
    const double secs = seconds_since(t0);
    const double e24 = std::fabs(coarse - exact) / exact, e48 = std::fabs(fine - exact) / exact;
    const bool ok = e48 <= 0.10 && e48 < e24 && secs < 120.0;
    return {ok, fmt("exact=%.4f cap(1/24)=%.4f (%.2f%%) cap(1/48)=%.4f (%.2f%%) %.1fs", exact, coarse, 100 * e24, fine,
                    100 * e48, secs)};
}

Outcome criterion_3(const Settings&) {
    // r -> r/2 with R -> R/2, once on a shared grid and once with the grid scaled too
    const double dx = 1.0 / 48;
    const double big = newton_capacity(Ball{{0, 0, 0}, 0.2}, 1.0, dx).value;
    const double small = newton_capacity(Ball{{0, 0, 0}, 0.1}, 0.5, dx).value;
    const double shared = small / big;
    const double scaled = newton_capacity(Ball{{0, 0, 0}, 0.1}, 0.5, dx / 2).value / big;
    const bool ok = std::fabs(shared - 0.5) <= 0.05 * 0.5 && std::fabs(scaled - 0.5) <= 0.05 * 0.5;
    return {ok, fmt("cap(r=0.1,R=0.5)/cap(r=0.2,R=1): shared grid 1/48 %.4f, scaled grid %.4f", shared, scaled)};
}

// ---------------------------------------------------------------------------
// 4: monotonicity under nested holes

Outcome criterion_4(const Settings& s) {
    int violations = 0, with_holes = 0;
    double worst = -1e300;
    for (int k = 0; k < 20; ++k) {
        const int dim = k < 10 ? 2 : 3;
        const double dx = dim == 2 ? 1.0 / 64 : 1.0 / 32;
        const Box D = Box::cube(dim, 0.0, 1.0);
        const std::uint64_t seed = derive_seed(s.seed, static_cast<std::uint64_t>(k));
        const auto pts = sample_poisson(D, dim == 2 ? 40.0 : 60.0, seed);
        Rng rng(derive_seed(seed, Stream::radii));
        const double r1 = rng.uniform(0.02, 0.05);
        const double r2 = r1 * rng.uniform(1.05, 2.0);
        const auto small = rasterize(build_balls(pts, FixedRadius{r1}), D, dx);
        const auto large = rasterize(build_balls(pts, FixedRadius{r2}), D, dx);
        for (std::size_t i = 0; i < small.size(); ++i)
            if (small.is_hole(i) && !large.is_hole(i)) return {false, fmt("pair %d not nested", k)};
        Vec3 x{0.5, 0.5, dim == 3 ? 0.5 : 0.0};
        const auto cl = local_capacity(large, x, 0.5);
        CapacityOptions opt;
        opt.initial = cl.minimizer;
        const auto cs = local_capacity(small, x, 0.5, opt);
        with_holes += cs.value > 0.0;
        if (!(cs.value <= cl.value)) ++violations;
        worst = std::max(worst, cs.value - cl.value);
    }
    return {violations == 0,
            fmt("20 pairs (%d with holes), violations=%d, max cap(small)-cap(large)=%.3e", with_holes, violations, worst)};
}

// ---------------------------------------------------------------------------
// 5: conductivity tensor

Outcome criterion_5(const Settings& s) {
    const double h = 1e-4, dx = h / 32;
    const Vec3 z{0.5, 0.5, 0.5};
    const Box cube = cube_at(z, h, 3);
    const double vol = h * h * h;

    const auto plain = conductivity_tensor(PerforatedMask(cube, dx), z, h, 1.0);
    double diag_err = 0.0;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) diag_err = std::max(diag_err, std::fabs(plain.a[i][j] - (i == j ? vol : 0.0)) / vol);

    const auto holes = rasterize(realize(LatticeFamily{0.3, 1.0}, h / 4, cube, s.seed), cube, dx);
    const auto t = conductivity_tensor(holes, z, h, 1.0);
    Rng rng(derive_seed(s.seed, Stream::probes));
    double quad_err = 0.0;
    for (int k = 0; k < 20; ++k) {
        const Vec3 xi{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
        const double P = penalized_functional(holes, z, h, 1.0, xi).value;
        quad_err = std::max(quad_err, std::fabs(P - t.quadratic(xi)) / (norm2(xi) * vol));
    }
    bool sym_psd = true;
    for (const auto* a : {&plain, &t}) {
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) sym_psd &= a->a[i][j] == a->a[j][i];
        sym_psd &= a->eigenvalues[0] >= -1e-12 * vol;
    }
    const bool ok = diag_err <= 0.02 && quad_err <= 1e-6 && sym_psd && holes.count(CellFlag::hole) > 0;
    return {ok, fmt("hole-free max|a/h^3-I|=%.4f, max|P-xAx|/(|xi|^2 h^3)=%.2e, lambda_min(perforated)/h^3=%.4f, "
                    "symmetric psd=%s",
                    diag_err, quad_err, t.eigenvalues[0] / vol, sym_psd ? "yes" : "no")};
}

// ---------------------------------------------------------------------------
// 6: ergodic averaging

ErgodicSpec ergodic_2d(const Settings& s, int threads) {
    ErgodicSpec e;
    BooleanFamily b;
    b.r0 = 0.25;
    b.exponent = 1.0;
    e.family = b;
    e.dim = 2;
    e.t_values = {2, 4, 8};
    e.replicas = 16;
    e.cells_per_unit = 16;
    e.seed = s.seed;
    e.threads = threads;
    return e;
}

std::string ergodic_csv(const ErgodicResult& r) {
    std::ostringstream os;
    write_ergodic_csv(os, r);
    write_ergodic_levels_csv(os, r);
    return os.str();
}

Outcome criterion_6(const Settings& s) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto r2 = ergodic_average_experiment(ergodic_2d(s, s.threads));
    const double secs = seconds_since(t0);
    const double ratio2 = r2.levels.back().rel_std / r2.levels.front().rel_std;

    auto e3 = ergodic_2d(s, s.threads);
    e3.dim = 3;
    e3.t_values = {1.5, 3, 6};
    e3.cells_per_unit = 8; // t = 6 -> 48^3
    const auto r3 = ergodic_average_experiment(e3);
    const double ratio3 = r3.levels.back().rel_std / r3.levels.front().rel_std;

    const bool ok = ratio2 <= 0.6 && ratio3 <= 0.6 && secs < 300.0;
    return {ok, fmt("2D rel_std t=2: %.4f t=8: %.4f ratio=%.3f (%.1fs); 3D 48^3 rel_std t=1.5: %.4f t=6: %.4f ratio=%.3f",
                    r2.levels.front().rel_std, r2.levels.back().rel_std, ratio2, secs, r3.levels.front().rel_std,
                    r3.levels.back().rel_std, ratio3)};
}

// ---------------------------------------------------------------------------
// 7, 8: energy inequalities and the uniform H1 bound on a resolved sweep

SweepSpec bounded_sweep(const Settings& s) {
    SweepSpec w;
    BooleanFamily b;
    b.r0 = 0.3;
    b.exponent = 1.0;
    w.family = b;
    w.dim = 3;
    w.domain = Box::cube(3, 0.0, 1.0);
    w.eps_values = {1.0 / 8, 1.0 / 16, 1.0 / 32};
    w.h_values = {0.75, 0.625};
    w.cells = 96;
    w.replicas = 2;
    w.seed = s.seed;
    w.threads = s.threads;
    return w;
}

const HomogenizationReport& bounded_report(const Settings& s) {
    static const HomogenizationReport rep = run_sweep(bounded_sweep(s));
    return rep;
}

Outcome criterion_7(const Settings& s) {
    const auto& rep = bounded_report(s);
    const double f = rep.summary.f_l2;
    std::size_t solved = 0, bad = 0;
    double worst_gamma = -1e300, worst_ratio = 0.0;
    for (const auto& r : rep.rows) {
        if (!r.error.empty()) continue;
        ++solved;
        const double scale = std::max(r.energy, 1e-300);
        const bool g_ok = r.gamma <= 1e-8 * scale;
        const double rhs = 2 * r.u_l2 * f;
        const bool e_ok = r.energy <= rhs * (1 + 1e-8);
        bad += !(g_ok && e_ok && r.gamma_nonpositive && r.energy_bound);
        worst_gamma = std::max(worst_gamma, r.gamma);
        worst_ratio = std::max(worst_ratio, r.energy / rhs);
    }
    const bool ok = solved == rep.rows.size() && solved > 0 && bad == 0;
    return {ok, fmt("%zu/%zu rows solved, violations=%zu, max Gamma=%.4e, max energy/(2|u||f|)=%.4f", solved,
                    rep.rows.size(), bad, worst_gamma, worst_ratio)};
}

Outcome criterion_8(const Settings& s) {
    const auto& rep = bounded_report(s);
    const auto& sm = rep.summary;
    std::vector<double> per_eps;
    for (double e : bounded_sweep(s).eps_values) {
        double mx = 0.0;
        for (const auto& r : rep.rows)
            if (r.eps == e) mx = std::max(mx, r.h1);
        per_eps.push_back(mx);
    }
    const double first = per_eps.front();
    const double mx = *std::max_element(per_eps.begin(), per_eps.end());
    const double ceiling = h1_ceiling(sm.friedrichs_C, sm.f_l2);
    const bool ok = mx <= 1.5 * first && mx <= ceiling && sm.h1_audit && sm.h1_audit->pass;
    return {ok, fmt("H1 eps=1/8: %.5f 1/16: %.5f 1/32: %.5f, max/first=%.4f, ceiling=%.5f (C_D=%.5f)", per_eps[0],
                    per_eps[1], per_eps[2], mx / first, ceiling, sm.friedrichs_C)};
}

// ---------------------------------------------------------------------------
// 9: main convergence at the critical exponent

SweepSpec critical_sweep(const Settings& s, int threads) {
    SweepSpec w;
    BooleanFamily b;
    b.intensity = 1.0;
    b.r0 = 0.2;
    b.exponent = 3.0;
    w.family = b;
    w.dim = 3;
    w.domain = Box::cube(3, 0.0, 1.0);
    w.eps_values = {1.0 / 8, 1.0 / 16, 1.0 / 32};
    w.h_values = {0.75, 0.625};
    w.cells = 96;
    w.replicas = 1;
    w.seed = s.seed;
    w.threads = threads;
    return w;
}

std::string sweep_csv(const HomogenizationReport& rep, const SweepSpec& spec) {
    std::ostringstream os;
    write_sweep_csv(os, rep, spec.h_values);
    return os.str();
}

Outcome criterion_9(const Settings& s) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto rep = run_sweep(critical_sweep(s, s.threads));
    const double secs = seconds_since(t0);
    const auto& sm = rep.summary;
    const double e_first = sm.error_by_eps.front().second, e_last = sm.error_by_eps.back().second;
    std::size_t holes = 0;
    for (const auto& r : rep.rows) holes += r.hole_cells;
    const bool ratio_ok = e_first > 0.0 && e_last <= 0.5 * e_first;
    const bool ok = ratio_ok && sm.nondegenerate && secs < 600.0;
    return {ok, fmt("L2 err eps=1/8: %.3e eps=1/32: %.3e, c=%.4e, boolean C=%.4f, hole cells=%zu, nondegenerate=%s, "
                    "%.0fs",
                    e_first, e_last, sm.c, sm.boolean_C, holes, sm.nondegenerate ? "yes" : "no", secs)};
}

// ---------------------------------------------------------------------------
// 10: corrector admissibility

Outcome criterion_10(const Settings& s) {
    std::vector<MaskPtr> masks;
    for (int k = 0; k < 3; ++k) {
        auto m = std::make_shared<PerforatedMask>(Box::cube(2, 0.0, 1.0), 1.0 / 64);
        Rng rng(derive_seed(s.seed, static_cast<std::uint64_t>(100 + k)));
        for (std::size_t i = 0; i < m->size(); ++i)
            if (rng.uniform() < 0.02) m->set_flag(i, CellFlag::hole);
        masks.push_back(m);
    }
    BooleanFamily b;
    b.r0 = 0.3;
    b.exponent = 1.0;
    for (int k = 0; k < 2; ++k) {
        const Box D = Box::cube(2, 0.0, 1.0);
        masks.push_back(std::make_shared<PerforatedMask>(
            rasterize(realize(b, 1.0 / 8, D, derive_seed(s.seed, static_cast<std::uint64_t>(200 + k))), D, 1.0 / 128)));
    }
    const Box D3 = Box::cube(3, 0.0, 1.0);
    masks.push_back(
        std::make_shared<PerforatedMask>(rasterize(realize(LatticeFamily{0.3, 1.0}, 0.125, D3, s.seed), D3, 1.0 / 64)));

    const Source f(-1.0);
    std::size_t hole_cells = 0, nonzero = 0, energy_bad = 0;
    for (const auto& m : masks) {
        const double h = 0.25, r = 0.0625;
        const auto pou = build_partition_of_unity(*m, h, r);
        const auto u = solve_dirichlet_perforated(m, 1.0, f, {1e-12, 0}).u;
        const auto hom = solve_homogenized(plain_mask(m->domain(), m->dx()), 1.0, 0.0, f, {1e-12, 0}).u;
        const auto res = build_corrector(m, Source(hom), pou, 1.0, 0.0, f);
        std::size_t nz = 0, hc = 0;
        for (std::size_t i = 0; i < m->size(); ++i)
            if (m->is_hole(i)) {
                ++hc;
                nz += res.field[i] != 0.0;
            }
        hole_cells += hc;
        nonzero += nz;
        const double gu = energy_gamma(u, 1.0, f);
        energy_bad += !(gu <= res.gamma_corrector + 1e-8 * std::fabs(res.gamma_corrector));
    }
    const bool ok = hole_cells > 0 && nonzero == 0 && energy_bad == 0;
    return {ok, fmt("%zu masks, %zu hole cells, corrector nonzero on %zu, energy violations=%zu", masks.size(),
                    hole_cells, nonzero, energy_bad)};
}

// ---------------------------------------------------------------------------
// 11: manufactured solution

Outcome criterion_11(const Settings&) {
    const auto ex = [](const Vec3& x) { return std::sin(pi * x[0]) * std::sin(pi * x[1]); };
    const double lambda = 1.0;
    std::vector<double> err;
    for (double dx : {1.0 / 16, 1.0 / 32, 1.0 / 64, 1.0 / 128}) {
        const auto m = plain_mask(Box::cube(2, 0.0, 1.0), dx);
        const Source f([&](const Vec3& x) { return -(2 * pi * pi + lambda) * ex(x); });
        const auto u = solve_dirichlet_perforated(m, lambda, f, {1e-12, 0}).u;
        err.push_back(l2_distance(u, GridField::sample(m, ex)));
    }
    bool ok = true;
    std::string orders;
    for (std::size_t i = 1; i < err.size(); ++i) {
        const double p = std::log2(err[i - 1] / err[i]);
        ok &= p >= 1.7 && p <= 2.3;
        orders += fmt(" %.3f", p);
    }
    return {ok, "orders:" + orders};
}

// ---------------------------------------------------------------------------
// 12: determinism across thread counts

Outcome criterion_12(const Settings& s) {
    const int t = std::max(2, s.threads);
    std::string detail;
    bool ok = true;
    auto compare = [&](const char* name, const std::string& a, const std::string& b) {
        const bool same = !a.empty() && a == b;
        ok &= same;
        detail += fmt("%s %s (%zu bytes); ", name, same ? "identical" : "DIFFERS", a.size());
    };
    compare("poisson.csv", poisson_csv(s, 1), poisson_csv(s, t));
    compare("ergodic.csv", ergodic_csv(ergodic_average_experiment(ergodic_2d(s, 1))),
            ergodic_csv(ergodic_average_experiment(ergodic_2d(s, t))));
    const auto a = critical_sweep(s, 1), b = critical_sweep(s, t);
    compare("sweep.csv", sweep_csv(run_sweep(a), a), sweep_csv(run_sweep(b), b));
    detail += fmt("threads 1 vs %d", t);
    return {ok, detail};
}

} // namespace

int main(int argc, char** argv) {
    Settings s;
    s.threads = static_cast<int>(std::clamp(std::thread::hardware_concurrency(), 2u, 8u));
    std::set<int> which;
    for (int i = 1; i < argc; ++i) {
        const std::string a = argv[i];
        if (a == "--threads" && i + 1 < argc) s.threads = std::max(1, std::stoi(argv[++i]));
        else if (a == "--seed" && i + 1 < argc) s.seed = std::stoull(argv[++i]);
        else {
            const int n = std::stoi(a);
            if (n < 1 || n > 12) {
                std::fprintf(stderr, "criterion must be 1..12\n");
                return 2;
            }
            which.insert(n);
        }
    }
    if (which.empty())
        for (int n = 1; n <= 12; ++n) which.insert(n);

    const std::function<Outcome(const Settings&)> table[] = {
        criterion_1, criterion_2, criterion_3, criterion_4,  criterion_5,  criterion_6,
        criterion_7, criterion_8, criterion_9, criterion_10, criterion_11, criterion_12};
    int failures = 0;
    for (int n : which) {
        Outcome o;
        try {
            o = table[n - 1](s);
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        failures += !o.pass;
        std::printf("criterion %d: %s  %s\n", n, o.pass ? "PASS" : "FAIL", o.detail.c_str());
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
