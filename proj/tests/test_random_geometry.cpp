#include <cmath>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "percohom/mask.hpp"
#include "percohom/random_geometry.hpp"
#include "percohom/rng.hpp"

using namespace percohom;

namespace {

constexpr double pi = 3.14159265358979323846;

PointConfiguration pts(int dim, std::vector<Vec3> p, double side = 10.0) {
    return PointConfiguration(std::move(p), Box::cube(dim, 0.0, side), 1.0, 0);
}

// Closed-form capsule membership, written out independently of the library.
bool in_capsule(const Vec3& x, const Vec3& a, const Vec3& b, double r) {
    Vec3 ab{b[0] - a[0], b[1] - a[1], b[2] - a[2]};
    Vec3 ax{x[0] - a[0], x[1] - a[1], x[2] - a[2]};
    const double L2 = ab[0] * ab[0] + ab[1] * ab[1] + ab[2] * ab[2];
    double t = L2 > 0 ? (ax[0] * ab[0] + ax[1] * ab[1] + ax[2] * ab[2]) / L2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    double d2 = 0;
    for (int i = 0; i < 3; ++i) d2 += (ax[i] - t * ab[i]) * (ax[i] - t * ab[i]);
    return d2 <= r * r;
}

// Transitive closure by repeated relaxation over the adjacency matrix.
std::set<std::set<std::uint32_t>> brute_components(std::size_t n, const EdgeSet& e) {
    std::vector<std::vector<bool>> reach(n, std::vector<bool>(n, false));
    for (std::size_t i = 0; i < n; ++i) reach[i][i] = true;
    for (const auto& [i, j] : e.edges) reach[i][j] = reach[j][i] = true;
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t i = 0; i < n; ++i)
            if (reach[i][k])
                for (std::size_t j = 0; j < n; ++j)
                    if (reach[k][j]) reach[i][j] = true;
    std::set<std::set<std::uint32_t>> out;
    for (std::size_t i = 0; i < n; ++i) {
        std::set<std::uint32_t> c;
        for (std::size_t j = 0; j < n; ++j)
            if (reach[i][j]) c.insert(static_cast<std::uint32_t>(j));
        out.insert(c);
    }
    return out;
}

} // namespace

TEST(Connectivity, AnnulusIndicator) {
    const auto g = ConnectivityFunction::annulus(1.0, 2.0);
    EXPECT_EQ(g(0.5), 0.0);
    EXPECT_EQ(g(1.0), 1.0);
    EXPECT_EQ(g(1.5), 1.0);
    EXPECT_EQ(g(2.0), 1.0);
    EXPECT_EQ(g(2.5), 0.0);
    EXPECT_THROW(ConnectivityFunction::annulus(2.0, 1.0), InvalidArgument);
}

TEST(Connectivity, GeneralTableValidated) {
    EXPECT_THROW(ConnectivityFunction::general({{0.0, 0.5}, {1.0, 0.8}}), InvalidArgument);
    EXPECT_THROW(ConnectivityFunction::general({{0.0, 1.5}}), InvalidArgument);
    const auto g = ConnectivityFunction::general({{0.0, 1.0}, {2.0, 0.0}});
    EXPECT_DOUBLE_EQ(g(1.0), 0.5);
    EXPECT_GE(g(5.0), 0.0);
    EXPECT_LE(g(0.0), 1.0);
}

TEST(RcmEdges, MidAnnulusPairConnected) {
    const auto cfg = pts(3, {{1, 1, 1}, {2.5, 1, 1}});
    const auto e = build_rcm_edges(cfg, ConnectivityFunction::annulus(1.0, 2.0), 1);
    ASSERT_EQ(e.size(), 1u);
    EXPECT_EQ(e.edges[0], std::make_pair(0u, 1u));
}

TEST(RcmEdges, AllPairsBeyondC2GiveNoEdges) {
    const auto cfg = pts(2, {{0, 0, 0}, {5, 0, 0}, {0, 5, 0}, {5, 5, 0}});
    EXPECT_TRUE(build_rcm_edges(cfg, ConnectivityFunction::annulus(1.0, 2.0), 1).empty());
}

TEST(RcmEdges, CertainConnectionGivesCompleteGraph) {
    const auto cfg = sample_poisson(Box::cube(2, 0.0, 4.0), 1.0, 3);
    const auto e = build_rcm_edges(cfg, ConnectivityFunction::general({{0.0, 1.0}}), 9);
    const std::size_t n = cfg.size();
    EXPECT_EQ(e.size(), n * (n - 1) / 2);
}

TEST(RcmEdges, AnnulusMatchesPairwiseDefinitionAndIgnoresSeed) {
    const auto cfg = sample_poisson(Box::cube(3, 0.0, 6.0), 1.0, 11); // > 64 points: cell-list path
    ASSERT_GT(cfg.size(), 64u);
    const auto g = ConnectivityFunction::annulus(0.5, 1.2);
    const auto e1 = build_rcm_edges(cfg, g, 1);
    const auto e2 = build_rcm_edges(cfg, g, 999);
    EXPECT_EQ(e1.edges, e2.edges);
    std::set<std::pair<std::uint32_t, std::uint32_t>> expect;
    for (std::uint32_t i = 0; i < cfg.size(); ++i)
        for (std::uint32_t j = i + 1; j < cfg.size(); ++j) {
            const double d = distance(cfg[i], cfg[j]);
            if (d >= 0.5 && d <= 1.2) expect.insert({i, j});
        }
    EXPECT_EQ((std::set<std::pair<std::uint32_t, std::uint32_t>>(e1.edges.begin(), e1.edges.end())), expect);
    for (const auto& [i, j] : e1.edges) EXPECT_LT(i, j);
}

TEST(RcmEdges, GeneralKindSeededAndReproducible) {
    const auto cfg = sample_poisson(Box::cube(2, 0.0, 5.0), 2.0, 4);
    const auto g = ConnectivityFunction::general({{0.0, 0.5}, {2.0, 0.0}});
    EXPECT_EQ(build_rcm_edges(cfg, g, 5).edges, build_rcm_edges(cfg, g, 5).edges);
    EXPECT_NE(build_rcm_edges(cfg, g, 5).edges, build_rcm_edges(cfg, g, 6).edges);
}

TEST(Tubes, CapsuleMembershipAgreesWithClosedForm) {
    const auto cfg = pts(3, {{0.3, 0.4, 0.5}, {0.7, 0.6, 0.45}}, 1.0);
    EdgeSet e;
    e.edges = {{0, 1}};
    const double rho = 0.1;
    const auto obs = build_tubes(cfg, e, rho);
    Rng rng(77);
    std::size_t inside = 0;
    const std::size_t probes = 100000;
    for (std::size_t i = 0; i < probes; ++i) {
        const Vec3 x{rng.uniform(), rng.uniform(), rng.uniform()};
        const bool ref = in_capsule(x, cfg[0], cfg[1], rho);
        ASSERT_EQ(obs.contains(x), ref);
        inside += ref;
    }
    const double L = distance(cfg[0], cfg[1]);
    const double vol = pi * rho * rho * L + 4.0 / 3.0 * pi * rho * rho * rho;
    const double p = vol;
    EXPECT_NEAR(static_cast<double>(inside) / probes, vol, 4.0 * std::sqrt(p * (1 - p) / probes));
}

TEST(Tubes, EmptyEdgeSetIsEmptyObstacle) {
    const auto cfg = pts(3, {{1, 1, 1}, {9, 9, 9}});
    const auto obs = build_tubes(cfg, EdgeSet{}, 0.2);
    EXPECT_TRUE(obs.empty());
    EXPECT_EQ(obs.indicator({1, 1, 1}), 1.0);
}

TEST(Tubes, EndpointInside) {
    const auto cfg = pts(3, {{1, 1, 1}, {2, 1, 1}});
    EdgeSet e;
    e.edges = {{0, 1}};
    const auto obs = build_tubes(cfg, e, 0.1);
    EXPECT_TRUE(obs.contains({1, 1, 1}));
    EXPECT_TRUE(obs.contains({2, 1, 1}));
    EXPECT_EQ(obs.indicator({2, 1, 1}), 0.0);
}

TEST(Tubes, WideRadiusWarnsOnly) {
    const auto cfg = pts(3, {{1, 1, 1}, {2, 1, 1}});
    EdgeSet e;
    e.edges = {{0, 1}};
    const auto obs = build_tubes(cfg, e, 0.6, 1.0);
    EXPECT_FALSE(obs.warnings().empty());
    EXPECT_TRUE(build_tubes(cfg, e, 0.5, 1.0).warnings().empty());
}

TEST(Tubes, RandomRadiiWithinRange) {
    const auto cfg = sample_poisson(Box::cube(3, 0.0, 4.0), 1.0, 2);
    const auto e = build_rcm_edges(cfg, ConnectivityFunction::annulus(0.5, 1.5), 0);
    const auto obs = build_tubes(cfg, e, 0.1, 0.2, 3);
    for (const auto& c : obs.capsules()) {
        EXPECT_GE(c.radius, 0.1);
        EXPECT_LE(c.radius, 0.2);
    }
}

TEST(Balls, HalfMinDistanceTangent) {
    const auto cfg = pts(2, {{1, 1, 0}, {3, 1, 0}});
    const auto obs = build_balls(cfg, MinDistanceFraction{0.5});
    ASSERT_EQ(obs.balls().size(), 2u);
    EXPECT_DOUBLE_EQ(obs.balls()[0].radius, 1.0);
    EXPECT_DOUBLE_EQ(obs.balls()[1].radius, 1.0);
    EXPECT_EQ(ball_overlap_pairs(obs), 0u);
}

TEST(Balls, FixedRadiusBelowHalfSpacingDisjoint) {
    const auto cfg = sample_poisson(Box::cube(3, 0.0, 5.0), 1.0, 8);
    const double r = 0.49 * min_pairwise_distance(cfg);
    const auto obs = build_balls(cfg, FixedRadius{r});
    EXPECT_EQ(ball_overlap_pairs(obs), 0u);
}

TEST(Balls, IidCappedNeverOverlapExhaustive) {
    for (std::uint64_t s = 0; s < 100; ++s) {
        const auto cfg = sample_poisson(Box::cube(3, 0.0, 3.0), 1.0, s);
        if (cfg.size() < 2) continue;
        const auto obs = build_balls(cfg, IidCappedRadius{0.5}, s);
        const auto& b = obs.balls();
        for (std::size_t i = 0; i < b.size(); ++i) {
            EXPECT_GT(b[i].radius, 0.0);
            for (std::size_t j = i + 1; j < b.size(); ++j)
                ASSERT_GE(distance(b[i].center, b[j].center), b[i].radius + b[j].radius) << "seed " << s;
        }
    }
}

TEST(Balls, SinglePointMinDistanceIsDegenerate) {
    const auto cfg = pts(3, {{1, 1, 1}});
    EXPECT_THROW(build_balls(cfg, MinDistanceFraction{0.5}), DegenerateInput);
    EXPECT_THROW(build_balls(cfg, IidCappedRadius{0.5}), DegenerateInput);
    EXPECT_NO_THROW(build_balls(cfg, FixedRadius{0.3}));
}

TEST(ScaleObstacles, IdentityAndInvalid) {
    const auto cfg = sample_poisson(Box::cube(3, 0.0, 3.0), 1.0, 5);
    const auto obs = build_balls(cfg, MinDistanceFraction{0.5});
    const auto same = scale_obstacles(obs, 1.0);
    ASSERT_EQ(same.balls().size(), obs.balls().size());
    for (std::size_t i = 0; i < obs.balls().size(); ++i) {
        EXPECT_EQ(same.balls()[i].center, obs.balls()[i].center);
        EXPECT_EQ(same.balls()[i].radius, obs.balls()[i].radius);
    }
    EXPECT_THROW(scale_obstacles(obs, 0.0), InvalidArgument);
    EXPECT_THROW(scale_obstacles(obs, -1.0), InvalidArgument);
}

TEST(ScaleObstacles, CapsuleVolumeScalesAsEpsCubed) {
    const auto cfg = sample_poisson(Box::cube(3, 0.0, 4.0), 1.0, 6);
    const auto e = build_rcm_edges(cfg, ConnectivityFunction::annulus(0.5, 1.5), 0);
    const auto obs = build_tubes(cfg, e, 0.25);
    const double eps = 0.25;
    const auto s = scale_obstacles(obs, eps);
    EXPECT_EQ(s.scale_applied(), eps);
    auto vol = [](const ObstacleSet& o) {
        double v = 0;
        for (const auto& c : o.capsules())
            v += pi * c.radius * c.radius * distance(c.a, c.b) + 4.0 / 3.0 * pi * std::pow(c.radius, 3);
        return v;
    };
    EXPECT_NEAR(vol(s), eps * eps * eps * vol(obs), 1e-12 * vol(obs));
}

TEST(ScaleObstacles, EdgesCommuteWithScaling) {
    const auto cfg = sample_poisson(Box::cube(2, 0.0, 4.0), 2.0, 12);
    const double eps = 0.5;
    const auto e = build_rcm_edges(cfg, ConnectivityFunction::annulus(0.5, 1.0), 0);
    const auto es = build_rcm_edges(scale(cfg, eps), ConnectivityFunction::annulus(0.25, 0.5), 0);
    EXPECT_EQ(e.edges, es.edges);
}

TEST(Components, NoEdgesSingletons) {
    const auto cfg = sample_poisson(Box::cube(2, 0.0, 3.0), 1.0, 1);
    EXPECT_EQ(connected_components(cfg, EdgeSet{}).size(), cfg.size());
}

TEST(Components, PathGraphOneComponent) {
    std::vector<Vec3> p;
    EdgeSet e;
    for (std::uint32_t i = 0; i < 10; ++i) {
        p.push_back({0.5 + i, 1, 0});
        if (i) e.edges.push_back({i - 1, i});
    }
    EXPECT_EQ(connected_components(pts(2, p, 12.0), e).size(), 1u);
}

TEST(Components, MatchesBruteForceClosure) {
    int checked = 0;
    for (std::uint64_t s = 0; s < 40; ++s) {
        const auto cfg = sample_poisson(Box::cube(2, 0.0, 5.0), 1.2, s);
        if (cfg.size() > 50 || cfg.empty()) continue;
        const auto e = build_rcm_edges(cfg, ConnectivityFunction::annulus(0.3, 0.9), 0);
        const auto comps = connected_components(cfg, e);
        std::set<std::set<std::uint32_t>> got;
        for (const auto& c : comps) got.insert(std::set<std::uint32_t>(c.begin(), c.end()));
        EXPECT_EQ(got, brute_components(cfg.size(), e));
        EXPECT_GE(comps.size() + e.size(), cfg.size());
        ++checked;
    }
    EXPECT_GT(checked, 20);
}

TEST(Rasterize, EmptyObstacleAllMaterial) {
    const auto cfg = pts(2, {{0.5, 0.5, 0}, {0.6, 0.5, 0}}, 1.0);
    const auto obs = build_tubes(cfg, EdgeSet{}, 0.1);
    const auto m = rasterize(obs, Box::cube(2, 0.0, 1.0), 1.0 / 16);
    EXPECT_EQ(m.count(CellFlag::hole), 0u);
    EXPECT_EQ(volume_fraction(m), 0.0);
}

TEST(Rasterize, DiskAreaWithinPerimeterBand) {
    const auto cfg = pts(2, {{0.5, 0.5, 0}}, 1.0);
    const auto obs = build_balls(cfg, FixedRadius{0.25});
    const double dx = 1.0 / 256;
    const auto m = rasterize(obs, Box::cube(2, 0.0, 1.0), dx);
    const double area = m.count(CellFlag::hole) * dx * dx;
    EXPECT_NEAR(area, pi * 0.0625, 2 * dx * 2 * pi * 0.25);
}

TEST(Rasterize, IndicatorConsistencyAndRefinement) {
    const auto cfg = sample_poisson(Box::cube(2, 0.0, 1.0), 20.0, 3);
    const auto obs = build_balls(cfg, MinDistanceFraction{0.5});
    const auto coarse = rasterize(obs, Box::cube(2, 0.0, 1.0), 1.0 / 32);
    for (std::size_t i = 0; i < coarse.size(); ++i)
        ASSERT_EQ(coarse.is_hole(i), obs.contains(coarse.center(i)));
    const auto fine = rasterize(obs, Box::cube(2, 0.0, 1.0), 1.0 / 64);
    for (std::size_t i = 0; i < fine.size(); ++i) ASSERT_EQ(fine.is_hole(i), obs.contains(fine.center(i)));
}

TEST(Rasterize, ResolutionLossWarns) {
    const auto cfg = pts(3, {{0.5, 0.5, 0.5}}, 1.0);
    const auto obs = build_balls(cfg, FixedRadius{0.01});
    const auto m = rasterize(obs, Box::cube(3, 0.0, 1.0), 1.0 / 8);
    EXPECT_FALSE(m.warnings().empty());
}

TEST(Rasterize, ScalingCommutesWithGrid) {
    const auto cfg = sample_poisson(Box::cube(2, 0.0, 4.0), 3.0, 21);
    const auto obs = build_balls(cfg, MinDistanceFraction{0.4});
    const double eps = 0.25;
    const auto a = rasterize(obs, Box::cube(2, 0.0, 4.0), 1.0 / 16);
    const auto b = rasterize(scale_obstacles(obs, eps), Box::cube(2, 0.0, 1.0), eps / 16);
    EXPECT_EQ(a.flags(), b.flags());
}

TEST(VolumeFraction, AllHoleIsOne) {
    const auto cfg = pts(2, {{0.5, 0.5, 0}}, 1.0);
    const auto m = rasterize(build_balls(cfg, FixedRadius{2.0}), Box::cube(2, 0.0, 1.0), 0.125);
    EXPECT_EQ(volume_fraction(m), 1.0);
}

TEST(VolumeFraction, SupercriticalExponentDecreasesAlongEps) {
    // points on spacing-ε lattice with radii r0 ε^s, s = 2 > 1, averaged over jittered lattices
    double prev = 2.0;
    // k <= 4 keeps r above the grid spacing
    for (int k = 1; k <= 4; ++k) {
        const double eps = std::ldexp(1.0, -k);
        const double r = 0.3 * eps * eps;
        std::vector<Vec3> p;
        for (int i = 0; i < (1 << k); ++i)
            for (int j = 0; j < (1 << k); ++j) p.push_back({(i + 0.5) * eps, (j + 0.5) * eps, 0});
        const auto obs = build_balls(pts(2, p, 1.0), FixedRadius{r});
        const auto m = rasterize(obs, Box::cube(2, 0.0, 1.0), 1.0 / 2048);
        const double f = volume_fraction(m);
        EXPECT_LT(f, prev) << "eps 2^-" << k;
        prev = f;
    }
}

TEST(DensityRatio, LargeProbeRadiusGivesConstantRatio) {
    const auto cfg = pts(2, {{0.2, 0.2, 0}, {0.7, 0.6, 0}}, 1.0);
    const auto m = rasterize(build_balls(cfg, FixedRadius{0.1}), Box::cube(2, 0.0, 1.0), 1.0 / 64);
    const double r = 2.0;
    const auto d = density_ratio_check(m, r, 50, 1);
    EXPECT_NEAR(d.min_ratio, 1.0 / (r * r), 1e-12);
    EXPECT_NEAR(d.max_ratio, 1.0 / (r * r), 1e-12);
}

TEST(DensityRatio, PeriodicBallsNearUniform) {
    std::vector<Vec3> p;
    for (int i = 0; i < 40; ++i)
        for (int j = 0; j < 40; ++j) p.push_back({(i + 0.5) / 40, (j + 0.5) / 40, 0});
    const auto m = rasterize(build_balls(pts(2, p, 1.0), FixedRadius{0.008}), Box::cube(2, 0.0, 1.0), 1.0 / 800);
    const auto d = density_ratio_check(m, 10.0 / 40, 40, 2, 10.0 / 40);
    EXPECT_TRUE(d.condition_holds);
    EXPECT_GE(d.min_ratio / d.max_ratio, 0.5);
}

TEST(DensityRatio, CornerSetFailsCondition) {
    const auto cfg = pts(2, {{0.05, 0.05, 0}}, 1.0);
    const auto m = rasterize(build_balls(cfg, FixedRadius{0.04}), Box::cube(2, 0.0, 1.0), 1.0 / 128);
    const auto d = density_ratio_check(m, 0.05, 200, 3);
    EXPECT_EQ(d.min_ratio, 0.0);
    EXPECT_FALSE(d.condition_holds);
}

TEST(DensityRatio, EmptyHoleSetDegenerate) {
    const auto m = rasterize(build_tubes(pts(2, {{0.5, 0.5, 0}}, 1.0), EdgeSet{}, 0.1), Box::cube(2, 0.0, 1.0), 0.125);
    EXPECT_THROW(density_ratio_check(m, 0.1, 10, 1), DegenerateInput);
}

TEST(MaskFile, RoundTrip) {
    const auto cfg = sample_poisson(Box::cube(3, 0.0, 1.0), 30.0, 9);
    const auto m = rasterize(build_balls(cfg, MinDistanceFraction{0.5}), Box::cube(3, 0.0, 1.0), 1.0 / 16);
    std::stringstream ss;
    write_mask(ss, m);
    const auto back = read_mask(ss);
    EXPECT_TRUE(back == m);
}
