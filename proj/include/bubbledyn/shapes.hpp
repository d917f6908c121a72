#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "bubbledyn/lattice.hpp"

namespace bubbledyn {

/// Occupancy grid of the spin-down (true vacuum) domain on a lattice.
class ShapeMask {
 public:
  explicit ShapeMask(const LatticeGeometry& geometry);

  const LatticeGeometry& geometry() const { return geometry_; }
  const std::vector<bool>& cells() const { return cells_; }

  bool occupied(int site) const { return cells_[static_cast<std::size_t>(site)]; }
  bool occupied(GridPoint p) const { return geometry_.contains(p) && occupied(geometry_.site(p)); }
  void set(int site, bool value) { cells_[static_cast<std::size_t>(site)] = value; }
  void set(GridPoint p, bool value) { set(geometry_.site(p), value); }
  void flip(int site) { cells_[static_cast<std::size_t>(site)] = !cells_[static_cast<std::size_t>(site)]; }

  int area() const;
  bool empty() const { return area() == 0; }

  bool operator==(const ShapeMask& o) const {
    return geometry_ == o.geometry_ && cells_ == o.cells_;
  }

 private:
  LatticeGeometry geometry_;
  std::vector<bool> cells_;
};

struct ShapeMaskHash {
  std::size_t operator()(const ShapeMask& m) const { return std::hash<std::vector<bool>>{}(m.cells()); }
};

/// Axis-aligned rectangle of sites [x0, x0 + width) x [y0, y0 + height).
struct Patch {
  int x0 = 0;
  int y0 = 0;
  int width = 0;
  int height = 0;

  bool contains(GridPoint p) const {
    return p.x >= x0 && p.y >= y0 && p.x < x0 + width && p.y < y0 + height;
  }
  bool operator==(const Patch&) const = default;
};

struct ShapeStats {
  int area = 0;
  int bond_perimeter = 0;
  int site_perimeter = 0;
  Patch patch;
};

enum class ShapeKind { square, rectangle, diamond, cross, custom, empty };

/// Parameters of a catalog shape.
///   square:    size_a = side L
///   rectangle: size_a = width, size_b = height
///   diamond:   size_a = radius r, mask is |x-cx| + |y-cy| <= r
///   cross:     size_a = arm length, size_b = arm thickness
///   custom:    mask_file, centred on `center`
///   empty:     no sites (background runs)
/// Even extents start at center - extent/2.
struct ShapeSpec {
  ShapeKind kind = ShapeKind::square;
  int size_a = 1;
  int size_b = 1;
  GridPoint center;
  std::string mask_file;
};

std::string to_string(ShapeKind kind);
ShapeKind shape_kind_from_string(const std::string& name);

/// Compact label such as "square:8", "rectangle:3x5", "custom:masks/l.txt".
std::string shape_label(const ShapeSpec& spec);

/// Parses a label produced by shape_label; the centre is left at (0,0).
ShapeSpec parse_shape_label(const std::string& label);

/// Parses a ';'-separated list of labels.
std::vector<ShapeSpec> parse_shape_list(const std::string& list);

ShapeMask make_shape(const ShapeSpec& spec, const LatticeGeometry& geometry);

int bond_perimeter(const ShapeMask& mask);
int site_perimeter(const ShapeMask& mask);
Patch bounding_patch(const ShapeMask& mask);
ShapeStats shape_stats(const ShapeMask& mask);

/// Single-site flips that leave the bond perimeter unchanged. In the bulk
/// these are exactly the sites with two occupied neighbours.
std::vector<ShapeMask> corner_moves(const ShapeMask& mask);

struct ReachableSet {
  std::vector<ShapeMask> masks;  // BFS order, masks[0] is the seed
  bool truncated = false;
};

ReachableSet corner_reachable_set(const ShapeMask& mask, std::size_t max_states);

/// True when no corner move can ever occupy a site outside `patch`, for any
/// mask reachable from one contained in it: every outside site has fewer
/// than half of its neighbours inside the patch, so by induction it never
/// reaches the flip condition. Covers closures too large to enumerate.
bool corner_closure_confined(const Patch& patch, const LatticeGeometry& geometry);

/// Quarter turn about the lattice centre, (x, y) -> (L-1-y, x). Square lattices only.
ShapeMask rotate90(const ShapeMask& mask);
/// Mirror x -> Lx-1-x.
ShapeMask reflect_x(const ShapeMask& mask);
/// Occupied <-> empty everywhere.
ShapeMask complement(const ShapeMask& mask);

/// '#' occupied, '.' empty, one row per line, first line is y = 0.
std::vector<std::vector<bool>> read_mask_rows(const std::filesystem::path& path);
void write_mask_file(const std::filesystem::path& path, const ShapeMask& mask);
std::string mask_to_ascii(const ShapeMask& mask);

}  // namespace bubbledyn
