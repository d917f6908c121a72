// Command-line driver: single quenches, parameter scans and the shape catalog.
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "bubbledyn/config.hpp"
#include "bubbledyn/experiment.hpp"
#include "bubbledyn/result_io.hpp"
#include "bubbledyn/scans.hpp"
#include "bubbledyn/shapes.hpp"

using namespace bubbledyn;
namespace fs = std::filesystem;

namespace {

struct Common {
  std::string config;
  std::string out;
  std::string backend;
  int jobs = 1;
};

void add_common(CLI::App* cmd, Common& c, bool need_config) {
  auto* opt = cmd->add_option("--config", c.config, "INI experiment description");
  if (need_config) opt->required()->check(CLI::ExistingFile);
  cmd->add_option("--out", c.out, "output directory (overrides [run] out_dir)");
  cmd->add_option("--backend", c.backend, "ttn or exact (overrides [run] backend)")
      ->check(CLI::IsMember({"ttn", "exact"}));
  cmd->add_option("--jobs", c.jobs, "concurrent runs in a scan")->check(CLI::PositiveNumber);
}

QuenchConfig load(const Common& c) {
  QuenchConfig cfg = load_config(c.config);
  if (!c.out.empty()) cfg.out_dir = c.out;
  if (!c.backend.empty()) cfg.backend = backend_from_string(c.backend);
  cfg.validate();
  return cfg;
}

void print_run(const QuenchResult& r, const fs::path& dir) {
  std::printf("%s  fate=%s  window_mean=%+.4f  steps=%zu  wall=%.1fs  -> %s\n", r.shape_label.c_str(),
              to_string(r.fate).c_str(), r.window_mean, r.series.size(), r.provenance.wall_time_s,
              dir.string().c_str());
  if (r.provenance.failed) std::printf("run stopped early: %s\n", r.provenance.failure.c_str());
}

int cmd_run(const Common& c) {
  const QuenchConfig cfg = load(c);
  const QuenchResult r = run_and_persist(cfg);
  print_run(r, cfg.out_dir);
  return r.provenance.failed ? 2 : 0;
}

int cmd_scan_size(const Common& c) {
  const QuenchConfig cfg = load(c);
  const SizeScan scan = critical_size_scan(cfg, cfg.scan.sizes, {c.jobs, true});
  write_json(to_json(scan, cfg), cfg.out_dir / "scan_size.json");
  for (const auto& r : scan.rows) std::printf("L=%-3d %-10s %+.4f%s\n", r.L, to_string(r.fate).c_str(), r.window_mean, r.failed ? "  (failed)" : "");
  if (scan.critical_size) std::printf("L_c = %d\n", *scan.critical_size);
  else std::printf("L_c not determined (fates %s)\n", scan.monotone ? "show no expansion" : "not monotone in L");
  return 0;
}

int cmd_scan_shapes(const Common& c) {
  const QuenchConfig cfg = load(c);
  if (cfg.scan.shapes.empty()) throw std::invalid_argument("[scan] shapes is empty");
  const auto scan = shape_scatter_scan(cfg, cfg.scan.shapes, cfg.scan.h_par_values, {c.jobs, true});
  write_json(to_json(scan, cfg), cfg.out_dir / "scan_shapes.json");
  for (const auto& d : scan) {
    std::printf("h_par=%g\n", d.h_par);
    for (const auto& p : d.points) {
      std::printf("  %-20s P_s=%-3d P_b=%-3d %-10s %+.4f\n", p.shape_id.c_str(), p.stats.site_perimeter,
                  p.stats.bond_perimeter, to_string(p.fate).c_str(), p.window_mean);
    }
  }
  return 0;
}

int cmd_scan_patch(const Common& c) {
  const QuenchConfig cfg = load(c);
  const auto scan = patch_confinement_scan(cfg, cfg.scan.h_perp_values, cfg.scan.probes_inside,
                                           cfg.scan.probes_outside, {c.jobs, true});
  write_json(to_json(scan, cfg), cfg.out_dir / "scan_patch.json");
  for (const auto& r : scan.rows) std::printf("h_perp=%-6g outside deviation=%.3e\n", r.h_perp, r.metric);
  return 0;
}

int cmd_scan_convergence(const Common& c) {
  const QuenchConfig cfg = load(c);
  const auto scan = convergence_scan(cfg, cfg.scan.chis, cfg.scan.dts, {c.jobs, true});
  write_json(to_json(scan, cfg), cfg.out_dir / "scan_convergence.json");
  for (std::size_t i = 0; i < scan.settings.size(); ++i) {
    const auto& s = scan.settings[i];
    std::printf("chi=%-4d dt=%-7g C4 spread=%.2e", s.chi, s.dt, s.c4_asymmetry);
    if (i > 0) std::printf("  diff to previous=%.3e", scan.differences[i - 1]);
    std::printf("\n");
  }
  return 0;
}

int cmd_scan_background(const Common& c) {
  const QuenchConfig cfg = load(c);
  const auto rows = background_scan(cfg, cfg.scan.h_perp_values, {c.jobs, true});
  write_json(to_json(rows, cfg), cfg.out_dir / "scan_background.json");
  for (const auto& r : rows) std::printf("h_perp=%-6g long-time mean=%+.4f\n", r.h_perp, r.long_time_mean);
  return 0;
}

struct CatalogArgs {
  std::string lattice = "16x16";
  std::string shapes;
  std::string center;
  std::string masks;
};

int cmd_shapes(const Common& c, const CatalogArgs& a) {
  LatticeGeometry g(16, 16);
  std::vector<ShapeSpec> specs;
  GridPoint center{-1, -1};
  fs::path out;
  if (!c.config.empty()) {
    const QuenchConfig cfg = load(c);
    g = cfg.geometry();
    specs = cfg.scan.shapes.empty() ? std::vector<ShapeSpec>{cfg.shape} : cfg.scan.shapes;
    center = cfg.shape.center;
    if (!c.out.empty()) out = c.out;
  } else {
    const auto x = a.lattice.find('x');
    if (x == std::string::npos) throw std::invalid_argument("--lattice must be WxH");
    g = LatticeGeometry(std::stoi(a.lattice.substr(0, x)), std::stoi(a.lattice.substr(x + 1)));
    out = c.out;
  }
  if (!a.shapes.empty()) specs = parse_shape_list(a.shapes);
  if (!a.center.empty()) {
    const auto pts = parse_point_list(a.center);
    if (pts.size() != 1) throw std::invalid_argument("--center takes one x:y point");
    center = pts.front();
  }
  if (center.x < 0) center = {g.width() / 2, g.height() / 2};
  if (specs.empty()) throw std::invalid_argument("no shapes given (--shapes or [scan] shapes)");

  nlohmann::json catalog = nlohmann::json::array();
  for (auto spec : specs) {
    spec.center = center;
    const ShapeMask mask = make_shape(spec, g);
    nlohmann::json params = nlohmann::json::object();
    switch (spec.kind) {
      case ShapeKind::square: params["L"] = spec.size_a; break;
      case ShapeKind::diamond: params["r"] = spec.size_a; break;
      case ShapeKind::rectangle:
      case ShapeKind::cross: params["a"] = spec.size_a; params["b"] = spec.size_b; break;
      case ShapeKind::custom: params["mask_file"] = spec.mask_file; break;
      case ShapeKind::empty: break;
    }
    params["center_x"] = spec.center.x;
    params["center_y"] = spec.center.y;
    nlohmann::json rec = shape_stats_json(shape_stats(mask));
    rec["kind"] = to_string(spec.kind);
    rec["params"] = params;
    rec["label"] = shape_label(spec);
    catalog.push_back(rec);
    if (!a.masks.empty()) {
      fs::create_directories(a.masks);
      write_mask_file(fs::path(a.masks) / (label_slug(shape_label(spec)) + ".txt"), mask);
    }
  }
  const nlohmann::json doc = {{"lattice", {{"width", g.width()}, {"height", g.height()}}}, {"shapes", catalog}};
  if (out.empty()) {
    std::cout << doc.dump(2) << "\n";
  } else {
    write_json(doc, out / "shapes.json");
    std::printf("%zu shapes -> %s\n", catalog.size(), (out / "shapes.json").string().c_str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"False-vacuum bubble dynamics in the 2D transverse/longitudinal-field Ising model"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(BUBBLEDYN_VERSION));

  Common common;
  CatalogArgs catalog;
  auto* run = app.add_subcommand("run", "single quench");
  auto* size = app.add_subcommand("scan-size", "square bubbles of every L in [scan] sizes; critical size");
  auto* shapes = app.add_subcommand("scan-shapes", "fates of [scan] shapes for each [scan] h_par_values entry");
  auto* patch = app.add_subcommand("scan-patch", "diamond confinement versus [scan] h_perp_values");
  auto* conv = app.add_subcommand("scan-convergence", "successive (chi, dt) settings from [scan] chis / dts");
  auto* bg = app.add_subcommand("scan-background", "empty-lattice magnetization for [scan] h_perp_values");
  auto* cat = app.add_subcommand("shapes", "area, P_b, P_s and patch of catalog shapes");
  for (auto* cmd : {run, size, shapes, patch, conv, bg}) add_common(cmd, common, true);
  add_common(cat, common, false);
  cat->add_option("--lattice", catalog.lattice, "WxH when no config is given")->capture_default_str();
  cat->add_option("--shapes", catalog.shapes, "labels such as \"square:4; diamond:2; cross:5x1\"");
  cat->add_option("--center", catalog.center, "x:y center for every shape");
  cat->add_option("--masks", catalog.masks, "also write one ASCII mask per shape into this directory");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run) return cmd_run(common);
    if (*size) return cmd_scan_size(common);
    if (*shapes) return cmd_scan_shapes(common);
    if (*patch) return cmd_scan_patch(common);
    if (*conv) return cmd_scan_convergence(common);
    if (*bg) return cmd_scan_background(common);
    if (*cat) return cmd_shapes(common, catalog);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
