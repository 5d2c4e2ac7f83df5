#include <gtest/gtest.h>

#include <cmath>

#include "pdc/topology.hpp"

using namespace pdc;

namespace {

constexpr std::size_t N = 64;

template <class F>
Grid2D<double> paint(F f) {
  Grid2D<double> g(N, N);
  for (std::size_t r = 0; r < N; ++r) {
    for (std::size_t c = 0; c < N; ++c) {
      g(r, c) = f(static_cast<double>(r) - 32.0, static_cast<double>(c) - 32.0);
    }
  }
  return g;
}

Grid2D<double> near_mismatch() { return paint([](double, double) { return 0.5; }); }

}  // namespace

TEST(Superlevel, DiskIsOneComponentWithoutHoles) {
  const auto g = paint([](double y, double x) { return std::exp(-(x * x + y * y) / 100.0); });
  const auto s = analyze_superlevel_set(g, 0.5);
  EXPECT_EQ(s.components, 1u);
  EXPECT_EQ(s.holes, 0u);
  EXPECT_FALSE(s.touches_boundary);
}

TEST(Superlevel, AnnulusHasOneHole) {
  const auto g = paint([](double y, double x) {
    const double r = std::hypot(x, y) - 15.0;
    return std::exp(-r * r / 8.0);
  });
  const auto s = analyze_superlevel_set(g, 0.5);
  EXPECT_EQ(s.components, 1u);
  EXPECT_EQ(s.holes, 1u);
}

TEST(Superlevel, DiagonalTouchDoesNotJoinComponents) {
  Grid2D<double> g(N, N);
  g(10, 10) = 1.0;
  g(11, 11) = 1.0;
  EXPECT_EQ(analyze_superlevel_set(g, 0.5).components, 2u);
}

TEST(Superlevel, HoleThroughDiagonalGapStillClosed) {
  // 4-connected ring of cells whose complement leaks only diagonally
  Grid2D<double> g(N, N);
  for (std::size_t i = 20; i <= 30; ++i) {
    g(20, i) = g(30, i) = g(i, 20) = g(i, 30) = 1.0;
  }
  auto s = analyze_superlevel_set(g, 0.5);
  EXPECT_EQ(s.components, 1u);
  EXPECT_EQ(s.holes, 1u);
}

TEST(Superlevel, BoundaryContactDetected) {
  const auto g = paint([](double y, double) { return std::exp(-y * y / 50.0); });
  EXPECT_TRUE(analyze_superlevel_set(g, 0.5).touches_boundary);
}

TEST(Classify, SpotRingOtherNone) {
  const auto spot = paint([](double y, double x) { return std::exp(-(x * x + y * y) / 100.0); });
  const auto ring = paint([](double y, double x) {
    const double r = std::hypot(x, y) - 15.0;
    return std::exp(-r * r / 8.0);
  });
  const auto pair = paint([](double y, double x) {
    return std::exp(-((x - 12) * (x - 12) + y * y) / 10.0) + std::exp(-((x + 12) * (x + 12) + y * y) / 10.0);
  });
  const auto m = near_mismatch();
  EXPECT_EQ(classify_topology(spot, m), Topology::Spot);
  EXPECT_EQ(classify_topology(ring, m), Topology::Ring);
  EXPECT_EQ(classify_topology(pair, m), Topology::Other);
  const auto far = paint([](double, double) { return 4.0; });
  EXPECT_EQ(classify_topology(spot, far), Topology::None);
}

TEST(Classify, EvanescentCellsIgnoredForNone) {
  auto m = paint([](double, double) { return NAN; });
  m(5, 5) = -3.0;
  const auto spot = paint([](double y, double x) { return std::exp(-(x * x + y * y) / 100.0); });
  EXPECT_EQ(classify_topology(spot, m), Topology::Spot);
  m(5, 5) = -3.2;
  EXPECT_EQ(classify_topology(spot, m), Topology::None);
}

TEST(Classify, Names) {
  EXPECT_EQ(to_string(Topology::Spot), "spot");
  EXPECT_EQ(to_string(Topology::Ring), "ring");
  EXPECT_EQ(to_string(Topology::None), "none");
  EXPECT_EQ(to_string(Topology::Other), "other");
}
