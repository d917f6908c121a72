#include <cmath>
#include <set>

#include <gtest/gtest.h>

#include "bubbledyn/lattice.hpp"

using namespace bubbledyn;

TEST(Lattice, RejectsBadSides) {
  EXPECT_THROW(LatticeGeometry(3, 4), std::invalid_argument);
  EXPECT_THROW(LatticeGeometry(1, 1), std::invalid_argument);
  EXPECT_THROW(build_lattice(4, 6), std::invalid_argument);
  EXPECT_NO_THROW(LatticeGeometry(8, 2));
}

TEST(Lattice, BondCountOpenBoundaries) {
  for (auto [w, h] : {std::pair{2, 2}, {4, 4}, {8, 4}, {16, 16}}) {
    const LatticeGeometry g(w, h);
    EXPECT_EQ(static_cast<int>(g.bonds().size()), (w - 1) * h + w * (h - 1));
    std::set<std::pair<int, int>> seen;
    for (const auto& b : g.bonds()) {
      EXPECT_LT(b.a, b.b);
      EXPECT_TRUE(seen.insert({b.a, b.b}).second);
      const GridPoint p = g.point(b.a), q = g.point(b.b);
      EXPECT_EQ(std::abs(p.x - q.x) + std::abs(p.y - q.y), 1);
    }
  }
}

TEST(Lattice, Neighbors) {
  const LatticeGeometry g(4, 4);
  EXPECT_EQ(neighbors(g, {0, 0}).size(), 2u);
  EXPECT_EQ(neighbors(g, {1, 0}).size(), 3u);
  EXPECT_EQ(neighbors(g, {1, 2}).size(), 4u);
  EXPECT_THROW(neighbors(g, {4, 0}), std::invalid_argument);
}

TEST(Lattice, CanonicalIndexIsRowMajor) {
  const LatticeGeometry g(4, 2);
  EXPECT_EQ(g.site({3, 1}), 7);
  EXPECT_EQ(g.point(5), (GridPoint{1, 1}));
}

TEST(Hilbert, TwoByTwoOrder) {
  const auto ord = hilbert_ordering(LatticeGeometry(2, 2));
  const std::vector<GridPoint> expect{{0, 0}, {0, 1}, {1, 1}, {1, 0}};
  for (int i = 0; i < 4; ++i) EXPECT_EQ(ord.to_grid(i), expect[static_cast<std::size_t>(i)]);
}

TEST(Hilbert, BijectiveAndLocal) {
  for (int n : {2, 4, 8, 16, 32}) {
    const LatticeGeometry g(n, n);
    const auto ord = hilbert_ordering(g);
    std::set<GridPoint> seen;
    for (int i = 0; i < ord.size(); ++i) {
      const GridPoint p = ord.to_grid(i);
      EXPECT_TRUE(seen.insert(p).second);
      EXPECT_EQ(ord.to_linear(p), i);
      EXPECT_EQ(ord.leaf_of_site(ord.site_of_leaf(i)), i);
      if (i > 0) {
        const GridPoint q = ord.to_grid(i - 1);
        EXPECT_EQ(std::abs(p.x - q.x) + std::abs(p.y - q.y), 1) << "n=" << n << " i=" << i;
      }
    }
    EXPECT_EQ(ord.to_grid(0), (GridPoint{0, 0}));
    EXPECT_EQ(ord.to_grid(ord.size() - 1), (GridPoint{n - 1, 0}));
  }
}

TEST(Hilbert, AlignedBlocksAreSubtrees) {
  // Every run of 4^k consecutive leaves starting at a multiple of 4^k covers a square block.
  const LatticeGeometry g(16, 16);
  const auto ord = hilbert_ordering(g);
  for (int block = 4; block <= 256; block *= 4) {
    const int side = static_cast<int>(std::lround(std::sqrt(block)));
    for (int start = 0; start < 256; start += block) {
      int x0 = 99, y0 = 99, x1 = -1, y1 = -1;
      for (int i = start; i < start + block; ++i) {
        const GridPoint p = ord.to_grid(i);
        x0 = std::min(x0, p.x); y0 = std::min(y0, p.y);
        x1 = std::max(x1, p.x); y1 = std::max(y1, p.y);
      }
      EXPECT_EQ(x1 - x0 + 1, side);
      EXPECT_EQ(y1 - y0 + 1, side);
    }
  }
}

TEST(SiteOrdering, RejectsNonBijection) {
  const LatticeGeometry g(2, 2);
  EXPECT_THROW(SiteOrdering(g, {{0, 0}, {0, 0}, {1, 1}, {1, 0}}), std::invalid_argument);
  EXPECT_THROW(SiteOrdering(g, {{0, 0}, {0, 1}, {1, 1}}), std::invalid_argument);
  EXPECT_THROW(hilbert_ordering(LatticeGeometry(4, 2)), std::invalid_argument);
}
