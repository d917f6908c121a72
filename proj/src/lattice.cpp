#include "bubbledyn/lattice.hpp"

#include <bit>
#include <stdexcept>
#include <string>
#include <utility>

namespace bubbledyn {

namespace {

bool valid_side(int n) { return n >= 2 && std::has_single_bit(static_cast<unsigned>(n)); }

// Classic iterative Hilbert index -> (x, y) conversion on an n x n grid.
GridPoint hilbert_point(int n, int index) {
  int x = 0;
  int y = 0;
  int t = index;
  for (int s = 1; s < n; s *= 2) {
    const int rx = 1 & (t / 2);
    const int ry = 1 & (t ^ rx);
    if (ry == 0) {
      if (rx == 1) {
        x = s - 1 - x;
        y = s - 1 - y;
      }
      std::swap(x, y);
    }
    x += s * rx;
    y += s * ry;
    t /= 4;
  }
  return {x, y};
}

}  // namespace

LatticeGeometry::LatticeGeometry(int width, int height) : width_(width), height_(height) {
  if (!valid_side(width) || !valid_side(height)) {
    throw std::invalid_argument("lattice sides must be powers of two >= 2, got " +
                                std::to_string(width) + "x" + std::to_string(height));
  }
  bonds_.reserve(static_cast<std::size_t>(width * (height - 1) + height * (width - 1)));
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const int s = site({x, y});
      if (x + 1 < width) bonds_.push_back({s, site({x + 1, y})});
      if (y + 1 < height) bonds_.push_back({s, site({x, y + 1})});
    }
  }
}

LatticeGeometry build_lattice(int width, int height) { return LatticeGeometry(width, height); }

std::vector<GridPoint> neighbors(const LatticeGeometry& geometry, GridPoint site) {
  if (!geometry.contains(site)) {
    throw std::invalid_argument("site (" + std::to_string(site.x) + "," +
                                std::to_string(site.y) + ") outside the lattice");
  }
  std::vector<GridPoint> out;
  out.reserve(4);
  for (const GridPoint d : {GridPoint{-1, 0}, GridPoint{1, 0}, GridPoint{0, -1}, GridPoint{0, 1}}) {
    const GridPoint q{site.x + d.x, site.y + d.y};
    if (geometry.contains(q)) out.push_back(q);
  }
  return out;
}

SiteOrdering::SiteOrdering(LatticeGeometry geometry, std::vector<GridPoint> path)
    : geometry_(std::move(geometry)), path_(std::move(path)) {
  if (static_cast<int>(path_.size()) != geometry_.num_sites()) {
    throw std::invalid_argument("site ordering must visit every site exactly once");
  }
  leaf_of_site_.assign(path_.size(), -1);
  for (int leaf = 0; leaf < size(); ++leaf) {
    const GridPoint p = path_[leaf];
    if (!geometry_.contains(p) || leaf_of_site_[geometry_.site(p)] != -1) {
      throw std::invalid_argument("site ordering is not a bijection");
    }
    leaf_of_site_[geometry_.site(p)] = leaf;
  }
}

int SiteOrdering::to_linear(GridPoint p) const {
  if (!geometry_.contains(p)) throw std::invalid_argument("grid point outside the lattice");
  return leaf_of_site_[geometry_.site(p)];
}

SiteOrdering hilbert_ordering(const LatticeGeometry& geometry) {
  if (geometry.width() != geometry.height()) {
    throw std::invalid_argument("Hilbert ordering requires a square lattice");
  }
  const int n = geometry.width();
  std::vector<GridPoint> path;
  path.reserve(static_cast<std::size_t>(n * n));
  for (int d = 0; d < n * n; ++d) path.push_back(hilbert_point(n, d));
  return SiteOrdering(geometry, std::move(path));
}

}  // namespace bubbledyn
