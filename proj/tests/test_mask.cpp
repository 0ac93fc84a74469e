#include <gtest/gtest.h>

#include "percohom/mask.hpp"

using namespace percohom;

TEST(Mask, ShapeAndPartition) {
    const PerforatedMask m(Box(3, {0, 0, 0}, {1, 0.5, 0.25}), 0.125);
    EXPECT_EQ(m.shape(), (std::array<long, 3>{8, 4, 2}));
    EXPECT_EQ(m.size(), 64u);
    EXPECT_EQ(m.count(CellFlag::material) + m.count(CellFlag::hole) + m.count(CellFlag::exterior), m.size());
    EXPECT_THROW(PerforatedMask(Box::cube(2, 0.0, 1.0), 0.3), InvalidArgument);
    EXPECT_THROW(PerforatedMask(Box::cube(2, 0.0, 1.0), 0.0), InvalidArgument);
}

TEST(Mask, IndexCoordsCentreRoundTrip) {
    const PerforatedMask m(Box(3, {-1, 0, 2}, {1, 1, 3}), 0.25);
    for (std::size_t idx = 0; idx < m.size(); ++idx) {
        const auto c = m.coords(idx);
        EXPECT_EQ(m.index(c[0], c[1], c[2]), idx);
        const auto x = m.center(idx);
        for (int d = 0; d < 3; ++d) EXPECT_DOUBLE_EQ(x[d], m.grid_box().lower()[d] + (c[d] + 0.5) * 0.25);
    }
}

TEST(Mask, SetDomainFlagsExteriorAndBack) {
    PerforatedMask m(Box::cube(2, 0.0, 1.0), 0.25);
    m.set_flag(m.index(1, 1), CellFlag::hole);
    m.set_domain(Box(2, {0, 0, 0}, {0.5, 1, 0}));
    EXPECT_EQ(m.count(CellFlag::exterior), 8u);
    EXPECT_EQ(m.flag(1, 1), CellFlag::hole);
    m.set_domain(Box::cube(2, 0.0, 1.0));
    EXPECT_EQ(m.count(CellFlag::exterior), 0u);
    EXPECT_THROW(m.set_domain(Box::cube(2, 0.0, 2.0)), InvalidArgument);
}

TEST(Mask, SameGridIgnoresFlags) {
    PerforatedMask a(Box::cube(2, 0.0, 1.0), 0.25), b(Box::cube(2, 0.0, 1.0), 0.25);
    b.set_flag(0, CellFlag::hole);
    EXPECT_TRUE(a.same_grid(b));
    EXPECT_FALSE(a == b);
    EXPECT_FALSE(a.same_grid(PerforatedMask(Box::cube(2, 0.0, 1.0), 0.125)));
}

TEST(Mask, RestrictCopiesAlignedCube) {
    PerforatedMask m(Box::cube(2, 0.0, 1.0), 0.125);
    m.set_flag(m.index(3, 4), CellFlag::hole);
    const auto sub = restrict_to(m, Box(2, {0.25, 0.5, 0}, {0.5, 0.75, 0}));
    EXPECT_EQ(sub.shape()[0], 2);
    EXPECT_EQ(sub.shape()[1], 2);
    EXPECT_EQ(sub.flag(1, 0), CellFlag::hole);
    EXPECT_EQ(sub.count(CellFlag::hole), 1u);
}

TEST(Mask, RestrictRejectsMisalignedOrOutside) {
    const PerforatedMask m(Box::cube(2, 0.0, 1.0), 0.125);
    EXPECT_THROW(restrict_to(m, Box(2, {0.1, 0.1, 0}, {0.35, 0.35, 0})), InvalidArgument);
    EXPECT_THROW(restrict_to(m, Box(2, {0.75, 0.75, 0}, {1.25, 1.25, 0})), InvalidArgument);
    EXPECT_THROW(restrict_to(m, Box::cube(3, 0.0, 0.5)), InvalidArgument);
}

TEST(Mask, VolumeFractionCountsInteriorOnly) {
    PerforatedMask m(Box::cube(2, 0.0, 1.0), 0.25);
    m.set_domain(Box(2, {0, 0, 0}, {0.5, 1, 0}));
    m.set_flag(m.index(0, 0), CellFlag::hole);
    EXPECT_DOUBLE_EQ(volume_fraction(m), 1.0 / 8);
}
