#include "bubbledyn/config.hpp"

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

namespace bubbledyn {

namespace pt = boost::property_tree;

std::string to_string(Backend b) { return b == Backend::ttn ? "ttn" : "exact"; }

Backend backend_from_string(const std::string& name) {
  if (name == "ttn") return Backend::ttn;
  if (name == "exact") return Backend::exact;
  throw std::invalid_argument("unknown backend '" + name + "' (expected ttn or exact)");
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double to_double(const std::string& s, const std::string& what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument(what + ": '" + s + "' is not a number");
  }
  if (used != s.size()) throw std::invalid_argument(what + ": '" + s + "' is not a number");
  return v;
}

int to_int(const std::string& s, const std::string& what) {
  const double v = to_double(s, what);
  if (v != static_cast<int>(v)) throw std::invalid_argument(what + ": '" + s + "' is not an integer");
  return static_cast<int>(v);
}

bool to_bool(const std::string& s, const std::string& what) {
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw std::invalid_argument(what + ": '" + s + "' is not a boolean");
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string join(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + fmt(v[i]);
  return out;
}

std::string join(const std::vector<int>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + std::to_string(v[i]);
  return out;
}

std::string join(const std::vector<GridPoint>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "; " : "") + std::to_string(v[i].x) + ":" + std::to_string(v[i].y);
  return out;
}

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys{
      {"lattice", {"width", "height"}},
      {"shape", {"kind", "L", "r", "size_a", "size_b", "center_x", "center_y", "mask_file"}},
      {"hamiltonian", {"J", "h_perp", "h_par"}},
      {"tdvp", {"dt", "chi", "krylov_dim", "krylov_tol", "svd_cutoff"}},
      {"run", {"t_max", "snapshot_times", "backend", "out_dir", "checkpoint"}},
      {"classify", {"window_fraction", "threshold"}},
      {"scan", {"sizes", "shapes", "h_par_values", "h_perp_values", "probes_inside", "probes_outside", "chis", "dts"}},
  };
  return keys;
}

}  // namespace

std::vector<double> parse_number_list(const std::string& text) {
  std::vector<double> out;
  for (const auto& item : split(text, ',')) out.push_back(to_double(item, "number list"));
  return out;
}

std::vector<GridPoint> parse_point_list(const std::string& text) {
  std::vector<GridPoint> out;
  for (const auto& item : split(text, ';')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw std::invalid_argument("point '" + item + "' must be x:y");
    out.push_back({to_int(trim(item.substr(0, colon)), "point"), to_int(trim(item.substr(colon + 1)), "point")});
  }
  return out;
}

QuenchConfig parse_config(std::istream& in, const std::filesystem::path& base_dir) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  for (const auto& [section, body] : tree) {
    const auto it = known_keys().find(section);
    if (it == known_keys().end()) throw std::invalid_argument("config: unknown section [" + section + "]");
    if (!body.data().empty()) throw std::invalid_argument("config: key '" + section + "' outside a section");
    for (const auto& [key, value] : body) {
      if (!it->second.count(key)) throw std::invalid_argument("config: unknown key '" + key + "' in [" + section + "]");
    }
  }
  auto get = [&](const std::string& path) -> std::optional<std::string> {
    const auto v = tree.get_optional<std::string>(pt::ptree::path_type(path, '.'));
    if (!v) return std::nullopt;
    return trim(*v);
  };

  QuenchConfig c;
  if (auto v = get("lattice.width")) c.width = to_int(*v, "lattice.width");
  if (auto v = get("lattice.height")) c.height = to_int(*v, "lattice.height");

  if (auto v = get("shape.kind")) c.shape.kind = shape_kind_from_string(*v);
  if (auto v = get("shape.L")) c.shape.size_a = to_int(*v, "shape.L");
  if (auto v = get("shape.r")) c.shape.size_a = to_int(*v, "shape.r");
  if (auto v = get("shape.size_a")) c.shape.size_a = to_int(*v, "shape.size_a");
  if (auto v = get("shape.size_b")) c.shape.size_b = to_int(*v, "shape.size_b");
  c.shape.center = {c.width / 2, c.height / 2};
  if (auto v = get("shape.center_x")) c.shape.center.x = to_int(*v, "shape.center_x");
  if (auto v = get("shape.center_y")) c.shape.center.y = to_int(*v, "shape.center_y");
  if (auto v = get("shape.mask_file")) {
    std::filesystem::path p(*v);
    if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
    c.shape.mask_file = p.string();
    if (!get("shape.kind")) c.shape.kind = ShapeKind::custom;
  }
  if (c.shape.kind == ShapeKind::empty) c.shape.size_a = c.shape.size_b = 0;

  if (auto v = get("hamiltonian.J")) c.params.J = to_double(*v, "hamiltonian.J");
  if (auto v = get("hamiltonian.h_perp")) c.params.h_perp = to_double(*v, "hamiltonian.h_perp");
  if (auto v = get("hamiltonian.h_par")) c.params.h_par = to_double(*v, "hamiltonian.h_par");

  if (auto v = get("tdvp.dt")) c.tdvp.dt = to_double(*v, "tdvp.dt");
  if (auto v = get("tdvp.chi")) c.tdvp.chi = to_int(*v, "tdvp.chi");
  if (auto v = get("tdvp.krylov_dim")) c.tdvp.krylov_dim = to_int(*v, "tdvp.krylov_dim");
  if (auto v = get("tdvp.krylov_tol")) c.tdvp.krylov_tol = to_double(*v, "tdvp.krylov_tol");
  if (auto v = get("tdvp.svd_cutoff")) c.tdvp.svd_cutoff = to_double(*v, "tdvp.svd_cutoff");

  if (auto v = get("run.t_max")) c.t_max = to_double(*v, "run.t_max");
  if (auto v = get("run.snapshot_times")) c.snapshot_times = parse_number_list(*v);
  if (auto v = get("run.backend")) c.backend = backend_from_string(*v);
  if (auto v = get("run.out_dir")) c.out_dir = *v;  // relative to the working directory
  if (auto v = get("run.checkpoint")) c.checkpoint = to_bool(*v, "run.checkpoint");

  if (auto v = get("classify.window_fraction")) c.window_fraction = to_double(*v, "classify.window_fraction");
  if (auto v = get("classify.threshold")) c.threshold = to_double(*v, "classify.threshold");

  if (auto v = get("scan.sizes")) {
    for (double x : parse_number_list(*v)) c.scan.sizes.push_back(to_int(fmt(x), "scan.sizes"));
  }
  if (auto v = get("scan.shapes")) {
    c.scan.shapes = parse_shape_list(*v);
    for (auto& s : c.scan.shapes) {
      s.center = c.shape.center;
      if (s.kind == ShapeKind::custom) {
        std::filesystem::path p(s.mask_file);
        if (p.is_relative() && !base_dir.empty()) s.mask_file = (base_dir / p).string();
      }
    }
  }
  if (auto v = get("scan.h_par_values")) c.scan.h_par_values = parse_number_list(*v);
  if (auto v = get("scan.h_perp_values")) c.scan.h_perp_values = parse_number_list(*v);
  if (auto v = get("scan.probes_inside")) c.scan.probes_inside = parse_point_list(*v);
  if (auto v = get("scan.probes_outside")) c.scan.probes_outside = parse_point_list(*v);
  if (auto v = get("scan.chis")) {
    for (double x : parse_number_list(*v)) c.scan.chis.push_back(to_int(fmt(x), "scan.chis"));
  }
  if (auto v = get("scan.dts")) c.scan.dts = parse_number_list(*v);

  c.validate();
  return c;
}

QuenchConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config '" + path.string() + "'");
  return parse_config(in, path.parent_path());
}

void QuenchConfig::validate() const {
  const LatticeGeometry g = geometry();  // checks the lattice sides
  tdvp.validate();
  if (!(t_max >= 0.0)) throw std::invalid_argument("run.t_max must be nonnegative");
  for (double t : snapshot_times) {
    if (t < 0.0 || t > t_max + 1e-12) throw std::invalid_argument("snapshot time " + fmt(t) + " outside [0, t_max]");
  }
  if (!(window_fraction > 0.0 && window_fraction <= 1.0)) {
    throw std::invalid_argument("classify.window_fraction must be in (0, 1]");
  }
  if (!(threshold >= 0.0)) throw std::invalid_argument("classify.threshold must be nonnegative");
  if (!(params.J > 0.0)) throw std::invalid_argument("hamiltonian.J must be positive");
  if (shape.kind == ShapeKind::custom && !std::filesystem::exists(shape.mask_file)) {
    throw std::invalid_argument("mask file '" + shape.mask_file + "' does not exist");
  }
  for (const auto& s : scan.shapes) {
    if (s.kind == ShapeKind::custom && !std::filesystem::exists(s.mask_file)) {
      throw std::invalid_argument("mask file '" + s.mask_file + "' does not exist");
    }
  }
  for (int chi : scan.chis)
    if (chi < 1) throw std::invalid_argument("scan.chis entries must be >= 1");
  for (double dt : scan.dts)
    if (!(dt > 0.0)) throw std::invalid_argument("scan.dts entries must be positive");
  (void)make_shape(shape, g);  // the shape must fit
}

std::string to_ini(const QuenchConfig& c) {
  std::ostringstream o;
  o << "[lattice]\nwidth = " << c.width << "\nheight = " << c.height << "\n\n";
  o << "[shape]\nkind = " << to_string(c.shape.kind) << "\n";
  switch (c.shape.kind) {
    case ShapeKind::square: o << "L = " << c.shape.size_a << "\n"; break;
    case ShapeKind::diamond: o << "r = " << c.shape.size_a << "\n"; break;
    case ShapeKind::rectangle:
    case ShapeKind::cross: o << "size_a = " << c.shape.size_a << "\nsize_b = " << c.shape.size_b << "\n"; break;
    case ShapeKind::custom: o << "mask_file = " << c.shape.mask_file << "\n"; break;
    case ShapeKind::empty: break;
  }
  o << "center_x = " << c.shape.center.x << "\ncenter_y = " << c.shape.center.y << "\n\n";
  o << "[hamiltonian]\nJ = " << fmt(c.params.J) << "\nh_perp = " << fmt(c.params.h_perp)
    << "\nh_par = " << fmt(c.params.h_par) << "\n\n";
  o << "[tdvp]\ndt = " << fmt(c.tdvp.dt) << "\nchi = " << c.tdvp.chi << "\nkrylov_dim = " << c.tdvp.krylov_dim
    << "\nkrylov_tol = " << fmt(c.tdvp.krylov_tol) << "\nsvd_cutoff = " << fmt(c.tdvp.svd_cutoff) << "\n\n";
  o << "[run]\nt_max = " << fmt(c.t_max) << "\nsnapshot_times = " << join(c.snapshot_times)
    << "\nbackend = " << to_string(c.backend) << "\nout_dir = " << c.out_dir.string()
    << "\ncheckpoint = " << (c.checkpoint ? "true" : "false") << "\n\n";
  o << "[classify]\nwindow_fraction = " << fmt(c.window_fraction) << "\nthreshold = " << fmt(c.threshold) << "\n";

  const auto& s = c.scan;
  std::ostringstream scan;
  if (!s.sizes.empty()) scan << "sizes = " << join(s.sizes) << "\n";
  if (!s.shapes.empty()) {
    scan << "shapes = ";
    for (std::size_t i = 0; i < s.shapes.size(); ++i) scan << (i ? "; " : "") << shape_label(s.shapes[i]);
    scan << "\n";
  }
  if (!s.h_par_values.empty()) scan << "h_par_values = " << join(s.h_par_values) << "\n";
  if (!s.h_perp_values.empty()) scan << "h_perp_values = " << join(s.h_perp_values) << "\n";
  if (!s.probes_inside.empty()) scan << "probes_inside = " << join(s.probes_inside) << "\n";
  if (!s.probes_outside.empty()) scan << "probes_outside = " << join(s.probes_outside) << "\n";
  if (!s.chis.empty()) scan << "chis = " << join(s.chis) << "\n";
  if (!s.dts.empty()) scan << "dts = " << join(s.dts) << "\n";
  if (!scan.str().empty()) o << "\n[scan]\n" << scan.str();
  return o.str();
}

std::string config_hash(const QuenchConfig& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : to_ini(config)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace bubbledyn
