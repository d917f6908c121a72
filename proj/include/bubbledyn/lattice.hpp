#pragma once

#include <compare>
#include <vector>

namespace bubbledyn {

struct GridPoint {
  int x = 0;
  int y = 0;

  auto operator<=>(const GridPoint&) const = default;
};

/// Nearest-neighbour bond between two canonical site indices, a < b.
struct Bond {
  int a = 0;
  int b = 0;

  bool operator==(const Bond&) const = default;
};

/// Open-boundary square lattice. Canonical site index is x + width * y.
class LatticeGeometry {
 public:
  LatticeGeometry(int width, int height);

  int width() const { return width_; }
  int height() const { return height_; }
  int num_sites() const { return width_ * height_; }
  const std::vector<Bond>& bonds() const { return bonds_; }

  bool contains(GridPoint p) const {
    return p.x >= 0 && p.y >= 0 && p.x < width_ && p.y < height_;
  }
  int site(GridPoint p) const { return p.x + width_ * p.y; }
  GridPoint point(int site) const { return {site % width_, site / width_}; }

  bool operator==(const LatticeGeometry& o) const {
    return width_ == o.width_ && height_ == o.height_;
  }

 private:
  int width_;
  int height_;
  std::vector<Bond> bonds_;
};

/// Rejects sides that are smaller than two or not a power of two.
LatticeGeometry build_lattice(int width, int height);

std::vector<GridPoint> neighbors(const LatticeGeometry& geometry, GridPoint site);

/// Bijection between grid coordinates and leaf positions [0, N) of the tree.
class SiteOrdering {
 public:
  SiteOrdering(LatticeGeometry geometry, std::vector<GridPoint> path);

  const LatticeGeometry& geometry() const { return geometry_; }
  int size() const { return static_cast<int>(path_.size()); }

  int to_linear(GridPoint p) const;
  GridPoint to_grid(int leaf) const { return path_.at(leaf); }

  int leaf_of_site(int site) const { return leaf_of_site_.at(site); }
  int site_of_leaf(int leaf) const { return geometry_.site(path_.at(leaf)); }

 private:
  LatticeGeometry geometry_;
  std::vector<GridPoint> path_;
  std::vector<int> leaf_of_site_;
};

/// Hilbert curve starting at (0,0), first step along +y, ending at (L-1,0).
SiteOrdering hilbert_ordering(const LatticeGeometry& geometry);

}  // namespace bubbledyn
