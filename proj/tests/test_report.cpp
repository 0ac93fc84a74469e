#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "percohom/report.hpp"

using namespace percohom;

TEST(Stats, MeanStddevRelStd) {
    EXPECT_DOUBLE_EQ(stats::mean({1, 2, 3, 4}), 2.5);
    EXPECT_NEAR(stats::stddev({1, 2, 3, 4}), std::sqrt(5.0 / 3.0), 1e-15);
    EXPECT_EQ(stats::stddev({0.1, 0.1, 0.1}), 0.0);
    EXPECT_EQ(stats::rel_std({0.3, 0.3, 0.3, 0.3}), 0.0);
}

TEST(Stats, CorrelationEdgeCases) {
    EXPECT_NEAR(stats::correlation({1, 2, 3}, {2, 4, 6}), 1.0, 1e-15);
    EXPECT_NEAR(stats::correlation({1, 2, 3}, {3, 2, 1}), -1.0, 1e-15);
    EXPECT_EQ(stats::correlation({1, 1, 1}, {1, 2, 3}), 0.0);
}

TEST(Stats, ChiSquareSurvival) {
    // two degrees of freedom: sf(x) = exp(-x/2)
    for (double x : {0.5, 2.0, 7.0}) EXPECT_NEAR(stats::chi_square_sf(x, 2), std::exp(-x / 2), 1e-14);
    // one degree of freedom: sf(x) = erfc(sqrt(x/2))
    EXPECT_NEAR(stats::chi_square_sf(3.0, 1), std::erfc(std::sqrt(1.5)), 1e-14);
}

TEST(Stats, LogLogSlope) {
    EXPECT_NEAR(stats::loglog_slope({0.5, 0.25, 0.125}, {0.25, 0.0625, 0.015625}), 2.0, 1e-14);
}

TEST(PoissonLaw, UnitCubeMatchesPmfAndEmptyCells) {
    const auto c = poisson_law_check(Box::cube(3, 0.0, 1.0), 1.0, 10000, 1, 5, 0.25);
    EXPECT_GT(c.p_value, 0.001);
    EXPECT_EQ(c.histogram.size(), 7u);
    std::size_t total = 0;
    for (auto h : c.histogram) total += h;
    EXPECT_EQ(total, 10000u);
    EXPECT_NEAR(c.empty_expected, std::exp(-1.0 / 64), 1e-15);
    EXPECT_LE(std::fabs(c.empty_mean - c.empty_expected), 3 * c.empty_sigma);
}

TEST(PoissonLaw, ThreadCountDoesNotChangeCounts) {
    const auto a = poisson_law_check(Box::cube(2, 0.0, 2.0), 1.5, 500, 3, 5, 0.5, 1);
    const auto b = poisson_law_check(Box::cube(2, 0.0, 2.0), 1.5, 500, 3, 5, 0.5, 4);
    std::ostringstream sa, sb;
    write_poisson_csv(sa, a);
    write_poisson_csv(sb, b);
    EXPECT_EQ(sa.str(), sb.str());
}

TEST(PoissonLaw, WrongIntensityRejected) {
    // sampling at intensity 1.3 tested against the unit law fails the χ² test
    const auto c = poisson_law_check(Box::cube(3, 0.0, 1.0), 1.3, 10000, 1, 5);
    double chi = 0.0, pk = std::exp(-1.0), cum = 0.0;
    for (int k = 0; k <= 6; ++k) {
        const double p = k <= 5 ? pk : 1 - cum;
        const double e = p * 10000;
        chi += (c.histogram[static_cast<std::size_t>(k)] - e) * (c.histogram[static_cast<std::size_t>(k)] - e) / e;
        cum += pk;
        pk /= (k + 1);
    }
    EXPECT_LT(stats::chi_square_sf(chi, 6), 0.001);
}

TEST(Csv, SweepHeaderAndRowCount) {
    SweepSpec s;
    s.family = LatticeFamily{0.2, 1.0};
    s.dim = 2;
    s.domain = Box::cube(2, 0.0, 1.0);
    s.eps_values = {0.25, 0.125, 0.0625};
    s.cells = 32;
    s.c_override = 1.0;
    const auto rep = run_sweep(s);
    std::ostringstream os;
    write_sweep_csv(os, rep, {});
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    EXPECT_EQ(line, "eps,replica,seed,volume_fraction,hole_cells,h1,gamma,energy,u_l2,l2_error,iterations,"
                    "empty_cell_frequency,boolean_C,resolved,error");
    int rows = 0;
    while (std::getline(is, line)) ++rows;
    EXPECT_EQ(rows, 3);
}

TEST(Csv, PlotDataTwoColumns) {
    std::ostringstream os;
    write_plot_data(os, {{0.125, 0.5}, {0.0625, 0.25}});
    EXPECT_EQ(os.str(), "0.125 0.5\n0.0625 0.25\n");
}

TEST(Csv, NewtonRows) {
    NewtonCapacity r;
    r.dx = 0.5;
    r.outer_radius = 1;
    r.value = 1.5;
    std::ostringstream os;
    write_newton_csv(os, {r}, 1.0);
    EXPECT_EQ(os.str(), "dx,outer_radius,capacity,exact,rel_error,iterations\n0.5,1,1.5,1,0.5,0\n");
}
