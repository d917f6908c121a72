#include <filesystem>
#include <fstream>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "bubbledyn/shapes.hpp"

using namespace bubbledyn;

namespace {

// Independent brute-force counts over all bonds / sites.
int brute_bonds(const ShapeMask& m) {
  int n = 0;
  for (const auto& b : m.geometry().bonds()) n += m.occupied(b.a) != m.occupied(b.b);
  return n;
}

int brute_sites(const ShapeMask& m) {
  const auto& g = m.geometry();
  int n = 0;
  for (int s = 0; s < g.num_sites(); ++s) {
    if (!m.occupied(s)) continue;
    const GridPoint p = g.point(s);
    bool edge = false;
    for (GridPoint d : {GridPoint{1, 0}, {-1, 0}, {0, 1}, {0, -1}}) {
      const GridPoint q{p.x + d.x, p.y + d.y};
      if (g.contains(q) && !m.occupied(q)) edge = true;
    }
    n += edge;
  }
  return n;
}

ShapeMask shape(ShapeKind kind, int a, int b, GridPoint c, int side = 16) {
  return make_shape(ShapeSpec{kind, a, b, c, {}}, LatticeGeometry(side, side));
}

}  // namespace

TEST(Shapes, SmallExamples) {
  const auto sq1 = shape(ShapeKind::square, 1, 1, {8, 8});
  EXPECT_EQ(sq1.area(), 1);
  EXPECT_EQ(bond_perimeter(sq1), 4);
  EXPECT_EQ(site_perimeter(sq1), 1);
  const auto d2 = shape(ShapeKind::diamond, 2, 0, {8, 8});
  EXPECT_EQ(bond_perimeter(d2), 20);
  EXPECT_EQ(site_perimeter(d2), 8);
  const auto sq3 = shape(ShapeKind::square, 3, 0, {8, 8});
  EXPECT_EQ(site_perimeter(sq3), 8);
  EXPECT_EQ(bond_perimeter(sq3), 12);  // same P_s as the r=2 diamond, different P_b
}

TEST(Shapes, EvenSquarePlacement) {
  const auto sq = shape(ShapeKind::square, 2, 0, {2, 2}, 4);
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 4; ++x) EXPECT_EQ(sq.occupied(GridPoint{x, y}), x >= 1 && x <= 2 && y >= 1 && y <= 2);
  EXPECT_EQ(rotate90(sq), sq);
}

TEST(Shapes, ClosedForms) {
  for (int L = 1; L <= 8; ++L) {
    const auto m = shape(ShapeKind::square, L, 0, {8, 8});
    EXPECT_EQ(bond_perimeter(m), 4 * L);
    EXPECT_EQ(site_perimeter(m), L == 1 ? 1 : 4 * L - 4);
    EXPECT_EQ(bounding_patch(m), (Patch{8 - L / 2, 8 - L / 2, L, L}));
  }
  for (int r = 1; r <= 4; ++r) {
    const auto m = shape(ShapeKind::diamond, r, 0, {8, 8});
    EXPECT_EQ(bond_perimeter(m), 8 * r + 4);
    EXPECT_EQ(site_perimeter(m), 4 * r);
    EXPECT_EQ(m.area(), 2 * r * r + 2 * r + 1);
    EXPECT_EQ(bounding_patch(m), (Patch{8 - r, 8 - r, 2 * r + 1, 2 * r + 1}));
  }
}

TEST(Shapes, RandomMasksMatchBruteForce) {
  std::mt19937_64 rng(2024);
  const LatticeGeometry g(8, 8);
  for (int trial = 0; trial < 200; ++trial) {
    ShapeMask m(g);
    std::bernoulli_distribution fill(0.1 + 0.8 * (trial % 10) / 9.0);
    for (int s = 0; s < g.num_sites(); ++s) m.set(s, fill(rng));
    EXPECT_EQ(bond_perimeter(m), brute_bonds(m));
    EXPECT_EQ(site_perimeter(m), brute_sites(m));
    if (!m.empty()) {
      EXPECT_GE(site_perimeter(m), 1);
      // symmetric under the lattice symmetries
      EXPECT_EQ(bond_perimeter(rotate90(m)), bond_perimeter(m));
      EXPECT_EQ(site_perimeter(rotate90(m)), site_perimeter(m));
      EXPECT_EQ(bond_perimeter(reflect_x(m)), bond_perimeter(m));
      EXPECT_EQ(site_perimeter(reflect_x(m)), site_perimeter(m));
    }
    // broken bonds are shared by a mask and its complement
    EXPECT_EQ(bond_perimeter(complement(m)), bond_perimeter(m));
    for (const auto& moved : corner_moves(m)) EXPECT_EQ(bond_perimeter(moved), bond_perimeter(m));
  }
}

TEST(Shapes, CornerMovesOfTwoByTwo) {
  // Flipping any site of the block keeps P_b = 8; no exterior site touches
  // two occupied sites, so there are no grow moves.
  const auto sq = shape(ShapeKind::square, 2, 0, {8, 8});
  const auto moves = corner_moves(sq);
  ASSERT_EQ(moves.size(), 4u);
  for (const auto& m : moves) {
    EXPECT_EQ(m.area(), 3);
    EXPECT_EQ(bond_perimeter(m), 8);
  }
}

TEST(Shapes, CornerMovesNeverEmptyTheMask) {
  const auto one = shape(ShapeKind::square, 1, 0, {8, 8});
  for (const auto& m : corner_moves(one)) EXPECT_FALSE(m.empty());
}

TEST(Shapes, ReachableSetSharesPerimeterAndStaysInPatch) {
  for (int r = 1; r <= 3; ++r) {
    const auto d = shape(ShapeKind::diamond, r, 0, {8, 8});
    const Patch patch = bounding_patch(d);
    EXPECT_TRUE(corner_closure_confined(patch, d.geometry()));
    // r = 3 has far too many states to enumerate; sample the first 100k
    const auto closure = corner_reachable_set(d, r < 3 ? 1'000'000 : 100'000);
    EXPECT_EQ(closure.truncated, r == 3);
    EXPECT_EQ(closure.masks.front(), d);
    for (const auto& m : closure.masks) {
      EXPECT_EQ(bond_perimeter(m), bond_perimeter(d));
      const Patch p = bounding_patch(m);
      EXPECT_GE(p.x0, patch.x0);
      EXPECT_GE(p.y0, patch.y0);
      EXPECT_LE(p.x0 + p.width, patch.x0 + patch.width);
      EXPECT_LE(p.y0 + p.height, patch.y0 + patch.height);
    }
  }
}

TEST(Shapes, ReachableSetSizes) {
  EXPECT_EQ(corner_reachable_set(shape(ShapeKind::diamond, 1, 0, {8, 8}), 1000).masks.size(), 122u);
}

TEST(Shapes, ConfinementCertificate) {
  const LatticeGeometry g(8, 8);
  EXPECT_TRUE(corner_closure_confined(Patch{2, 2, 3, 3}, g));
  EXPECT_TRUE(corner_closure_confined(Patch{0, 0, 3, 3}, g));
  // the corner site (0,0) has degree 2 and one neighbour in this patch
  EXPECT_FALSE(corner_closure_confined(Patch{0, 1, 3, 3}, g));
}

TEST(Shapes, ReachableSetCap) {
  const auto d = shape(ShapeKind::diamond, 3, 0, {8, 8});
  const auto capped = corner_reachable_set(d, 5);
  EXPECT_TRUE(capped.truncated);
  EXPECT_EQ(capped.masks.size(), 5u);
}

TEST(Shapes, CrossAndRectangle) {
  const auto cross = shape(ShapeKind::cross, 5, 1, {8, 8});
  EXPECT_EQ(cross.area(), 9);
  EXPECT_EQ(rotate90(rotate90(rotate90(rotate90(cross)))), cross);
  const auto rect = shape(ShapeKind::rectangle, 3, 5, {8, 8});
  EXPECT_EQ(rect.area(), 15);
  EXPECT_EQ(bond_perimeter(rect), 16);
  EXPECT_EQ(bounding_patch(rect), (Patch{7, 6, 3, 5}));
}

TEST(Shapes, RejectsOversizedShapes) {
  EXPECT_THROW(shape(ShapeKind::square, 6, 0, {2, 2}, 4), std::invalid_argument);
  EXPECT_THROW(shape(ShapeKind::diamond, 2, 0, {1, 1}, 4), std::invalid_argument);
  EXPECT_THROW(bounding_patch(ShapeMask(LatticeGeometry(4, 4))), std::invalid_argument);
}

TEST(Shapes, EmptyKind) {
  const auto e = shape(ShapeKind::empty, 0, 0, {2, 2}, 4);
  EXPECT_TRUE(e.empty());
  const auto st = shape_stats(e);
  EXPECT_EQ(st.bond_perimeter, 0);
  EXPECT_EQ(st.patch, Patch{});
  EXPECT_EQ(parse_shape_label("empty").kind, ShapeKind::empty);
}

TEST(Shapes, LabelsRoundTrip) {
  for (const std::string label : {"square:8", "rectangle:3x5", "diamond:2", "cross:5x1", "custom:masks/l.txt"}) {
    EXPECT_EQ(shape_label(parse_shape_label(label)), label);
  }
  const auto list = parse_shape_list("square:2; diamond:1 ;cross:3x1");
  ASSERT_EQ(list.size(), 3u);
  EXPECT_EQ(list[1].kind, ShapeKind::diamond);
  EXPECT_THROW(parse_shape_label("blob:3"), std::invalid_argument);
  EXPECT_THROW(parse_shape_label("square"), std::invalid_argument);
  EXPECT_THROW(parse_shape_label("rectangle:3"), std::invalid_argument);
}

TEST(Shapes, MaskFileRoundTrip) {
  const auto dir = std::filesystem::temp_directory_path() / "bubbledyn_mask_test";
  std::filesystem::create_directories(dir);
  const auto cross = shape(ShapeKind::cross, 5, 1, {4, 4}, 8);
  write_mask_file(dir / "cross.txt", cross);
  // a lattice-sized mask file is placed as is
  const auto back = make_shape(ShapeSpec{ShapeKind::custom, 0, 0, {4, 4}, (dir / "cross.txt").string()}, LatticeGeometry(8, 8));
  EXPECT_EQ(back, cross);
  // a smaller one is centred
  {
    std::ofstream f(dir / "l.txt");
    f << "#.\n#.\n##\n";
  }
  const auto l = make_shape(ShapeSpec{ShapeKind::custom, 0, 0, {4, 4}, (dir / "l.txt").string()}, LatticeGeometry(8, 8));
  EXPECT_EQ(l.area(), 4);
  EXPECT_TRUE(l.occupied(GridPoint{3, 3}));
  EXPECT_TRUE(l.occupied(GridPoint{4, 5}));
  EXPECT_EQ(mask_to_ascii(l).substr(0, 9), "........\n");
  {
    std::ofstream f(dir / "bad.txt");
    f << "#x\n";
  }
  EXPECT_THROW(read_mask_rows(dir / "bad.txt"), std::invalid_argument);
  {
    std::ofstream f(dir / "ragged.txt");
    f << "##\n#\n";
  }
  EXPECT_THROW(read_mask_rows(dir / "ragged.txt"), std::invalid_argument);
  std::filesystem::remove_all(dir);
}
