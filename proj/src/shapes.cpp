#include "bubbledyn/shapes.hpp"

#include <algorithm>
#include <cstdlib>
#include <deque>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

namespace bubbledyn {

ShapeMask::ShapeMask(const LatticeGeometry& geometry)
    : geometry_(geometry), cells_(static_cast<std::size_t>(geometry.num_sites()), false) {}

int ShapeMask::area() const { return static_cast<int>(std::count(cells_.begin(), cells_.end(), true)); }

std::string to_string(ShapeKind kind) {
  switch (kind) {
    case ShapeKind::square: return "square";
    case ShapeKind::rectangle: return "rectangle";
    case ShapeKind::diamond: return "diamond";
    case ShapeKind::cross: return "cross";
    case ShapeKind::custom: return "custom";
    case ShapeKind::empty: return "empty";
  }
  return "unknown";
}

ShapeKind shape_kind_from_string(const std::string& name) {
  for (auto k : {ShapeKind::square, ShapeKind::rectangle, ShapeKind::diamond, ShapeKind::cross,
                 ShapeKind::custom, ShapeKind::empty}) {
    if (to_string(k) == name) return k;
  }
  throw std::invalid_argument("unknown shape kind '" + name + "'");
}

std::string shape_label(const ShapeSpec& spec) {
  const std::string kind = to_string(spec.kind);
  switch (spec.kind) {
    case ShapeKind::square:
    case ShapeKind::diamond:
      return kind + ":" + std::to_string(spec.size_a);
    case ShapeKind::rectangle:
    case ShapeKind::cross:
      return kind + ":" + std::to_string(spec.size_a) + "x" + std::to_string(spec.size_b);
    case ShapeKind::custom:
      return kind + ":" + spec.mask_file;
    case ShapeKind::empty:
      break;
  }
  return kind;
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

int parse_positive(const std::string& text, const std::string& label) {
  std::size_t used = 0;
  int v = 0;
  try {
    v = std::stoi(text, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument("bad size in shape label '" + label + "'");
  }
  if (used != text.size() || v < 0) throw std::invalid_argument("bad size in shape label '" + label + "'");
  return v;
}

}  // namespace

ShapeSpec parse_shape_label(const std::string& raw) {
  const std::string label = trim(raw);
  const auto colon = label.find(':');
  if (label == "empty") return ShapeSpec{ShapeKind::empty, 0, 0, {}, {}};
  if (colon == std::string::npos) throw std::invalid_argument("shape label '" + label + "' lacks ':'");
  ShapeSpec spec;
  spec.kind = shape_kind_from_string(trim(label.substr(0, colon)));
  const std::string args = trim(label.substr(colon + 1));
  switch (spec.kind) {
    case ShapeKind::square:
    case ShapeKind::diamond:
      spec.size_a = parse_positive(args, label);
      break;
    case ShapeKind::rectangle:
    case ShapeKind::cross: {
      const auto x = args.find('x');
      if (x == std::string::npos) throw std::invalid_argument("shape label '" + label + "' needs AxB");
      spec.size_a = parse_positive(args.substr(0, x), label);
      spec.size_b = parse_positive(args.substr(x + 1), label);
      break;
    }
    case ShapeKind::custom:
      spec.mask_file = args;
      break;
    case ShapeKind::empty:
      break;
  }
  return spec;
}

std::vector<ShapeSpec> parse_shape_list(const std::string& list) {
  std::vector<ShapeSpec> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ';')) {
    if (!trim(item).empty()) out.push_back(parse_shape_label(item));
  }
  return out;
}

namespace {

void fill_rect(ShapeMask& mask, int x0, int y0, int w, int h) {
  const auto& g = mask.geometry();
  if (w <= 0 || h <= 0) throw std::invalid_argument("shape extents must be positive");
  if (x0 < 0 || y0 < 0 || x0 + w > g.width() || y0 + h > g.height()) {
    throw std::invalid_argument("shape exceeds the lattice");
  }
  for (int y = y0; y < y0 + h; ++y)
    for (int x = x0; x < x0 + w; ++x) mask.set(GridPoint{x, y}, true);
}

}  // namespace

ShapeMask make_shape(const ShapeSpec& spec, const LatticeGeometry& geometry) {
  ShapeMask mask(geometry);
  const GridPoint c = spec.center;
  switch (spec.kind) {
    case ShapeKind::square:
      fill_rect(mask, c.x - spec.size_a / 2, c.y - spec.size_a / 2, spec.size_a, spec.size_a);
      break;
    case ShapeKind::rectangle:
      fill_rect(mask, c.x - spec.size_a / 2, c.y - spec.size_b / 2, spec.size_a, spec.size_b);
      break;
    case ShapeKind::cross:
      fill_rect(mask, c.x - spec.size_a / 2, c.y - spec.size_b / 2, spec.size_a, spec.size_b);
      fill_rect(mask, c.x - spec.size_b / 2, c.y - spec.size_a / 2, spec.size_b, spec.size_a);
      break;
    case ShapeKind::diamond: {
      const int r = spec.size_a;
      if (r < 0 || !geometry.contains({c.x - r, c.y}) || !geometry.contains({c.x + r, c.y}) ||
          !geometry.contains({c.x, c.y - r}) || !geometry.contains({c.x, c.y + r})) {
        throw std::invalid_argument("shape exceeds the lattice");
      }
      for (int y = c.y - r; y <= c.y + r; ++y)
        for (int x = c.x - r; x <= c.x + r; ++x)
          if (std::abs(x - c.x) + std::abs(y - c.y) <= r) mask.set(GridPoint{x, y}, true);
      break;
    }
    case ShapeKind::custom: {
      const auto rows = read_mask_rows(spec.mask_file);
      const int h = static_cast<int>(rows.size());
      const int w = h == 0 ? 0 : static_cast<int>(rows.front().size());
      int x0 = 0;
      int y0 = 0;
      if (w != geometry.width() || h != geometry.height()) {
        x0 = c.x - w / 2;
        y0 = c.y - h / 2;
      }
      if (x0 < 0 || y0 < 0 || x0 + w > geometry.width() || y0 + h > geometry.height()) {
        throw std::invalid_argument("mask file '" + spec.mask_file + "' exceeds the lattice");
      }
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
          if (rows[y][x]) mask.set(GridPoint{x0 + x, y0 + y}, true);
      break;
    }
    case ShapeKind::empty:
      break;
  }
  return mask;
}

int bond_perimeter(const ShapeMask& mask) {
  int count = 0;
  for (const Bond& b : mask.geometry().bonds()) {
    if (mask.occupied(b.a) != mask.occupied(b.b)) ++count;
  }
  return count;
}

int site_perimeter(const ShapeMask& mask) {
  const auto& g = mask.geometry();
  int count = 0;
  for (int s = 0; s < g.num_sites(); ++s) {
    if (!mask.occupied(s)) continue;
    for (const GridPoint q : neighbors(g, g.point(s))) {
      if (!mask.occupied(q)) {
        ++count;
        break;
      }
    }
  }
  return count;
}

Patch bounding_patch(const ShapeMask& mask) {
  const auto& g = mask.geometry();
  int x0 = g.width(), y0 = g.height(), x1 = -1, y1 = -1;
  for (int s = 0; s < g.num_sites(); ++s) {
    if (!mask.occupied(s)) continue;
    const GridPoint p = g.point(s);
    x0 = std::min(x0, p.x);
    y0 = std::min(y0, p.y);
    x1 = std::max(x1, p.x);
    y1 = std::max(y1, p.y);
  }
  if (x1 < 0) throw std::invalid_argument("bounding patch of an empty mask");
  return {x0, y0, x1 - x0 + 1, y1 - y0 + 1};
}

ShapeStats shape_stats(const ShapeMask& mask) {
  ShapeStats st;
  st.area = mask.area();
  st.bond_perimeter = bond_perimeter(mask);
  st.site_perimeter = site_perimeter(mask);
  if (st.area > 0) st.patch = bounding_patch(mask);
  return st;
}

std::vector<ShapeMask> corner_moves(const ShapeMask& mask) {
  const auto& g = mask.geometry();
  const int area = mask.area();
  std::vector<ShapeMask> out;
  for (int s = 0; s < g.num_sites(); ++s) {
    const auto nb = neighbors(g, g.point(s));
    int occupied = 0;
    for (const GridPoint q : nb) occupied += mask.occupied(q) ? 1 : 0;
    // Flipping s turns its occupied-neighbour bonds into broken ones and
    // vice versa, so the perimeter changes by |nb| - 2 * occupied.
    if (2 * occupied != static_cast<int>(nb.size())) continue;
    if (mask.occupied(s) && area == 1) continue;
    ShapeMask next = mask;
    next.flip(s);
    out.push_back(std::move(next));
  }
  return out;
}

ReachableSet corner_reachable_set(const ShapeMask& mask, std::size_t max_states) {
  ReachableSet result;
  if (max_states == 0) {
    result.truncated = true;
    return result;
  }
  std::unordered_set<ShapeMask, ShapeMaskHash> seen;
  std::deque<std::size_t> frontier;
  seen.insert(mask);
  result.masks.push_back(mask);
  frontier.push_back(0);
  while (!frontier.empty()) {
    const std::size_t idx = frontier.front();
    frontier.pop_front();
    for (ShapeMask& next : corner_moves(result.masks[idx])) {
      if (seen.contains(next)) continue;
      if (result.masks.size() >= max_states) {
        result.truncated = true;
        return result;
      }
      seen.insert(next);
      result.masks.push_back(std::move(next));
      frontier.push_back(result.masks.size() - 1);
    }
  }
  return result;
}

bool corner_closure_confined(const Patch& patch, const LatticeGeometry& g) {
  auto inside = [&](GridPoint p) {
    return p.x >= patch.x0 && p.x < patch.x0 + patch.width && p.y >= patch.y0 && p.y < patch.y0 + patch.height;
  };
  for (int s = 0; s < g.num_sites(); ++s) {
    const GridPoint p = g.point(s);
    if (inside(p)) continue;
    const auto nb = neighbors(g, p);
    int in = 0;
    for (const GridPoint q : nb) in += inside(q) ? 1 : 0;
    if (2 * in >= static_cast<int>(nb.size())) return false;
  }
  return true;
}

ShapeMask rotate90(const ShapeMask& mask) {
  const auto& g = mask.geometry();
  if (g.width() != g.height()) throw std::invalid_argument("rotate90 needs a square lattice");
  const int n = g.width();
  ShapeMask out(g);
  for (int s = 0; s < g.num_sites(); ++s) {
    if (!mask.occupied(s)) continue;
    const GridPoint p = g.point(s);
    out.set(GridPoint{n - 1 - p.y, p.x}, true);
  }
  return out;
}

ShapeMask reflect_x(const ShapeMask& mask) {
  const auto& g = mask.geometry();
  ShapeMask out(g);
  for (int s = 0; s < g.num_sites(); ++s) {
    if (!mask.occupied(s)) continue;
    const GridPoint p = g.point(s);
    out.set(GridPoint{g.width() - 1 - p.x, p.y}, true);
  }
  return out;
}

ShapeMask complement(const ShapeMask& mask) {
  ShapeMask out = mask;
  for (int s = 0; s < mask.geometry().num_sites(); ++s) out.flip(s);
  return out;
}

std::vector<std::vector<bool>> read_mask_rows(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open mask file '" + path.string() + "'");
  std::vector<std::vector<bool>> rows;
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty()) continue;
    std::vector<bool> row;
    for (char ch : line) {
      if (ch == '#') row.push_back(true);
      else if (ch == '.') row.push_back(false);
      else throw std::invalid_argument("mask file '" + path.string() + "': unexpected character '" +
                                       std::string(1, ch) + "'");
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw std::invalid_argument("mask file '" + path.string() + "': ragged rows");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::invalid_argument("mask file '" + path.string() + "' is empty");
  return rows;
}

std::string mask_to_ascii(const ShapeMask& mask) {
  const auto& g = mask.geometry();
  std::string out;
  for (int y = 0; y < g.height(); ++y) {
    for (int x = 0; x < g.width(); ++x) out += mask.occupied(GridPoint{x, y}) ? '#' : '.';
    out += '\n';
  }
  return out;
}

void write_mask_file(const std::filesystem::path& path, const ShapeMask& mask) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write mask file '" + path.string() + "'");
  out << mask_to_ascii(mask);
}

}  // namespace bubbledyn
