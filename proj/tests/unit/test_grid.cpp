#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "psamp/grid.hpp"
#include "psamp/tpa.hpp"

using namespace psamp;

TEST(Grid, NinePointsUnitSpacing) {
  const auto g = make_qgrid(9, 4.0);
  EXPECT_EQ(g.size(), 9u);
  EXPECT_DOUBLE_EQ(g.spacing(), 1.0);
  for (std::size_t j = 0; j < 9; ++j) EXPECT_DOUBLE_EQ(g[j], -4.0 + static_cast<double>(j));
}

TEST(Grid, EndpointsMirrorExactly) {
  const auto g = make_qgrid(513, 4.712388980384690e5);
  for (std::size_t j = 0; j < g.size(); ++j) EXPECT_EQ(g[j], -g[g.mirror(j)]);
  EXPECT_EQ(g[0], -g.half_extent());
  EXPECT_EQ(g[g.size() - 1], g.half_extent());
}

TEST(Grid, OddCountContainsOrigin) {
  const auto g = make_qgrid(513, 3.0 * phase_matching_bandwidth(CrystalPumpConfig{}));
  ASSERT_TRUE(g.has_center());
  EXPECT_EQ(g[g.center_index()], 0.0);
}

TEST(Grid, EvenCountStraddlesOrigin) {
  const auto g = make_qgrid(10, 1.0);
  EXPECT_FALSE(g.has_center());
  EXPECT_DOUBLE_EQ(g[4], -g[5]);
  EXPECT_GT(g[5], 0.0);
}

TEST(Grid, SamplesStrictlyIncreasing) {
  const auto xs = make_qgrid(64, 2.5).samples();
  for (std::size_t j = 1; j < xs.size(); ++j) EXPECT_GT(xs[j], xs[j - 1]);
}

TEST(Grid, RejectsTooFewPoints) { EXPECT_THROW(make_qgrid(7, 4.0), InvalidArgument); }

TEST(Grid, RejectsNonPositiveExtent) {
  EXPECT_THROW(make_qgrid(9, 0.0), InvalidArgument);
  EXPECT_THROW(make_qgrid(9, -1.0), InvalidArgument);
  EXPECT_THROW(make_qgrid(9, std::nan("")), InvalidArgument);
}

TEST(Grid, ConjugateExtent) {
  const std::size_t n = 257;
  const double q_max = 3.0;
  const auto g = make_qgrid(n, q_max);
  const RGrid r = conjugate_grid(g);
  EXPECT_EQ(r.size(), n);
  EXPECT_NEAR(r.spacing() * g.spacing() * static_cast<double>(n), 2.0 * std::numbers::pi, 1e-12);
  const double approx = std::numbers::pi * static_cast<double>(n - 1) / (2.0 * q_max);
  EXPECT_NEAR(r.half_extent() / approx, 1.0, 1.0 / static_cast<double>(n));
}

TEST(Grid, ConjugateOfConjugateIsOriginal) {
  const auto g = make_qgrid(33, 5.0);
  const QGrid back = conjugate_grid(conjugate_grid(g));
  EXPECT_NEAR(back.spacing(), g.spacing(), 1e-14);
  EXPECT_NEAR(back.half_extent(), g.half_extent(), 1e-13);
}
