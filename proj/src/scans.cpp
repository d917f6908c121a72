#include "bubbledyn/scans.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <exception>
#include <map>
#include <stdexcept>

#include "bubbledyn/result_io.hpp"

namespace bubbledyn {

using nlohmann::json;

namespace {

std::string num_tag(const char* prefix, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s%g", prefix, v);
  return buf;
}

json base_json(const QuenchConfig& base, const char* scan) {
  return {{"scan", scan},
          {"config_hash", config_hash(base)},
          {"code_version", BUBBLEDYN_VERSION},
          {"lattice", {{"width", base.width}, {"height", base.height}}},
          {"hamiltonian", {{"J", base.params.J}, {"h_perp", base.params.h_perp}, {"h_par", base.params.h_par}}},
          {"backend", to_string(base.backend)},
          {"dt", base.tdvp.dt},
          {"chi", base.tdvp.chi},
          {"t_max", base.t_max}};
}

std::vector<double> times_of(const QuenchResult& r) {
  std::vector<double> t;
  for (const auto& p : r.series) t.push_back(p.t);
  return t;
}

}  // namespace

std::string label_slug(const std::string& label) {
  std::string out;
  for (char c : label) {
    if (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '.') out += c;
    else out += '_';
  }
  return out;
}

std::vector<QuenchResult> run_jobs(const std::vector<QuenchConfig>& configs, const ScanOptions& options) {
  const int n = static_cast<int>(configs.size());
  std::vector<std::optional<QuenchResult>> slots(configs.size());
  std::vector<std::exception_ptr> errors(configs.size());
  for (const auto& c : configs) c.validate();
#pragma omp parallel for schedule(dynamic, 1) num_threads(std::max(1, options.jobs))
  for (int i = 0; i < n; ++i) {
    try {
      const auto& c = configs[static_cast<std::size_t>(i)];
      slots[static_cast<std::size_t>(i)] = options.persist_runs ? run_and_persist(c) : run_quench(c);
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  std::vector<QuenchResult> out;
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

// --- critical size -----------------------------------------------------------

SizeScan summarize_sizes(std::vector<SizeScanRow> rows) {
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.L < b.L; });
  SizeScan scan;
  scan.rows = std::move(rows);
  const auto first = std::find_if(scan.rows.begin(), scan.rows.end(),
                                  [](const auto& r) { return r.fate == Fate::expanding; });
  const bool below = std::all_of(scan.rows.begin(), first, [](const auto& r) { return r.fate == Fate::shrinking; });
  const bool above = std::all_of(first, scan.rows.end(), [](const auto& r) { return r.fate == Fate::expanding; });
  scan.monotone = below && above;
  if (scan.monotone && first != scan.rows.end()) scan.critical_size = first->L;
  return scan;
}

SizeScan critical_size_scan(const QuenchConfig& base, const std::vector<int>& sizes, const ScanOptions& options) {
  std::vector<QuenchConfig> configs;
  for (int L : sizes) {
    QuenchConfig c = base;
    c.shape.kind = ShapeKind::square;
    c.shape.size_a = L;
    c.out_dir = base.out_dir / ("L" + std::to_string(L));
    configs.push_back(std::move(c));
  }
  const auto results = run_jobs(configs, options);
  std::vector<SizeScanRow> rows;
  for (std::size_t i = 0; i < results.size(); ++i) {
    rows.push_back({sizes[i], results[i].fate, results[i].window_mean, results[i].provenance.failed});
  }
  return summarize_sizes(std::move(rows));
}

json to_json(const SizeScan& scan, const QuenchConfig& base) {
  json doc = base_json(base, "critical_size");
  json rows = json::array();
  for (const auto& r : scan.rows) {
    rows.push_back({{"L", r.L}, {"fate", to_string(r.fate)}, {"window_mean", r.window_mean}, {"failed", r.failed}});
  }
  doc["rows"] = rows;
  doc["monotone"] = scan.monotone;
  doc["L_c"] = scan.critical_size ? json(*scan.critical_size) : json(nullptr);
  return doc;
}

// --- shape scatter -------------------------------------------------------------

std::vector<ShapeDataset> shape_scatter_scan(const QuenchConfig& base, const std::vector<ShapeSpec>& shapes,
                                             const std::vector<double>& h_par_values, const ScanOptions& options) {
  const std::vector<double> fields = h_par_values.empty() ? std::vector<double>{base.params.h_par} : h_par_values;
  std::vector<QuenchConfig> configs;
  for (double h : fields) {
    for (const auto& s : shapes) {
      QuenchConfig c = base;
      c.shape = s;
      c.params.h_par = h;
      c.out_dir = base.out_dir / num_tag("h_par_", h) / label_slug(shape_label(s));
      configs.push_back(std::move(c));
    }
  }
  const auto results = run_jobs(configs, options);
  std::vector<ShapeDataset> out;
  std::size_t k = 0;
  for (double h : fields) {
    ShapeDataset d{h, {}};
    for (const auto& s : shapes) {
      const auto& r = results[k++];
      d.points.push_back({shape_label(s), r.shape, r.fate, r.window_mean, r.provenance.failed});
    }
    out.push_back(std::move(d));
  }
  return out;
}

json to_json(const std::vector<ShapeDataset>& scan, const QuenchConfig& base) {
  json doc = base_json(base, "shape_scatter");
  doc["axes"] = {{"x", "P_s"}, {"y", "P_b"}};
  doc["colors"] = {{"expanding", "green"}, {"shrinking", "red"}, {"undecided", "gray"}};
  json sets = json::array();
  for (const auto& d : scan) {
    json pts = json::array();
    for (const auto& p : d.points) {
      json e = shape_stats_json(p.stats);
      e["shape_id"] = p.shape_id;
      e["fate"] = to_string(p.fate);
      e["window_mean"] = p.window_mean;
      e["failed"] = p.failed;
      pts.push_back(e);
    }
    sets.push_back({{"h_par", d.h_par}, {"points", pts}});
  }
  doc["datasets"] = sets;
  return doc;
}

// --- patch confinement ------------------------------------------------------------

PatchScan patch_confinement_scan(const QuenchConfig& base, const std::vector<double>& h_perp_values,
                                 std::vector<GridPoint> inside, std::vector<GridPoint> outside,
                                 const ScanOptions& options) {
  if (base.shape.kind != ShapeKind::diamond) throw std::invalid_argument("patch scan needs a diamond shape");
  const LatticeGeometry g = base.geometry();
  const ShapeMask mask = make_shape(base.shape, g);
  PatchScan scan;
  scan.patch = bounding_patch(mask);
  if (inside.empty()) {
    for (int s = 0; s < g.num_sites(); ++s)
      if (scan.patch.contains(g.point(s))) inside.push_back(g.point(s));
  }
  if (outside.empty()) {
    // Sites touching the patch respond to its boundary at first order in
    // h_perp, so by default only sites at least two steps away are probed.
    std::vector<GridPoint> touching;
    for (int s = 0; s < g.num_sites(); ++s) {
      const GridPoint p = g.point(s);
      if (scan.patch.contains(p)) continue;
      bool adjacent = false;
      for (const GridPoint q : neighbors(g, p)) adjacent = adjacent || scan.patch.contains(q);
      (adjacent ? touching : outside).push_back(p);
    }
    if (outside.empty()) outside = touching;
  }
  for (const auto& p : inside) {
    if (!g.contains(p)) throw std::invalid_argument("probe outside the lattice");
    if (!scan.patch.contains(p)) throw std::invalid_argument("inside probe is not in the patch");
  }
  for (const auto& p : outside) {
    if (!g.contains(p)) throw std::invalid_argument("probe outside the lattice");
    if (scan.patch.contains(p)) throw std::invalid_argument("outside probe lies in the patch");
  }

  std::vector<QuenchConfig> configs;
  for (double h : h_perp_values) {
    QuenchConfig bubble = base;
    bubble.params.h_perp = h;
    bubble.out_dir = base.out_dir / num_tag("h_perp_", h) / "bubble";
    QuenchConfig reference = bubble;
    reference.shape = ShapeSpec{ShapeKind::empty, 0, 0, base.shape.center, {}};
    reference.out_dir = base.out_dir / num_tag("h_perp_", h) / "reference";
    configs.push_back(std::move(bubble));
    configs.push_back(std::move(reference));
  }
  const auto results = run_jobs(configs, options);
  for (std::size_t i = 0; i < h_perp_values.size(); ++i) {
    const auto& b = results[2 * i];
    const auto& ref = results[2 * i + 1];
    PatchRow row;
    row.h_perp = h_perp_values[i];
    row.times = times_of(b);
    row.failed = b.provenance.failed || ref.provenance.failed;
    const std::size_t steps = std::min(b.local_x.size(), ref.local_x.size());
    auto trace = [&](GridPoint p, bool in) {
      ProbeTrace t{p, in, {}, {}};
      const auto s = static_cast<std::size_t>(g.site(p));
      for (std::size_t k = 0; k < steps; ++k) {
        t.values.push_back(b.local_x[k][s]);
        t.reference.push_back(ref.local_x[k][s]);
        if (!in) row.metric = std::max(row.metric, std::abs(t.values.back() - t.reference.back()));
      }
      row.probes.push_back(std::move(t));
    };
    for (const auto& p : inside) trace(p, true);
    for (const auto& p : outside) trace(p, false);
    scan.rows.push_back(std::move(row));
  }
  return scan;
}

json to_json(const PatchScan& scan, const QuenchConfig& base) {
  json doc = base_json(base, "patch_confinement");
  doc["patch"] = {{"x0", scan.patch.x0}, {"y0", scan.patch.y0}, {"width", scan.patch.width}, {"height", scan.patch.height}};
  json rows = json::array();
  for (const auto& r : scan.rows) {
    json probes = json::array();
    for (const auto& p : r.probes) {
      probes.push_back({{"x", p.site.x}, {"y", p.site.y}, {"inside", p.inside}, {"values", p.values},
                        {"reference", p.reference}});
    }
    rows.push_back({{"h_perp", r.h_perp}, {"metric", r.metric}, {"failed", r.failed}, {"times", r.times},
                    {"probes", probes}});
  }
  doc["rows"] = rows;
  return doc;
}

// --- convergence ------------------------------------------------------------------

double max_local_difference(const QuenchResult& a, const QuenchResult& b) {
  std::map<long long, std::size_t> index;
  for (std::size_t k = 0; k < a.series.size(); ++k) index[std::llround(a.series[k].t * 1e9)] = k;
  double worst = 0.0;
  for (std::size_t k = 0; k < b.series.size() && k < b.local_x.size(); ++k) {
    const auto it = index.find(std::llround(b.series[k].t * 1e9));
    if (it == index.end() || it->second >= a.local_x.size()) continue;
    const auto& xa = a.local_x[it->second];
    const auto& xb = b.local_x[k];
    if (xa.size() != xb.size()) throw std::invalid_argument("results differ in lattice size");
    for (std::size_t s = 0; s < xa.size(); ++s) worst = std::max(worst, std::abs(xa[s] - xb[s]));
  }
  return worst;
}

ConvergenceScan convergence_scan(const QuenchConfig& base, const std::vector<int>& chis,
                                 const std::vector<double>& dts, const ScanOptions& options) {
  const std::vector<int> chi_list = chis.empty() ? std::vector<int>{base.tdvp.chi} : chis;
  const std::vector<double> dt_list = dts.empty() ? std::vector<double>{base.tdvp.dt} : dts;
  if (chi_list.size() * dt_list.size() < 2) throw std::invalid_argument("convergence scan needs at least two settings");

  const LatticeGeometry g = base.geometry();
  const ShapeMask mask = make_shape(base.shape, g);
  ConvergenceScan scan;
  scan.symmetric = g.width() == g.height() && rotate90(mask) == mask;

  std::vector<QuenchConfig> configs;
  for (int chi : chi_list) {
    for (double dt : dt_list) {
      QuenchConfig c = base;
      c.tdvp.chi = chi;
      c.tdvp.dt = dt;
      c.out_dir = base.out_dir / (num_tag("chi_", chi) + num_tag("_dt_", dt));
      configs.push_back(std::move(c));
    }
  }
  const auto results = run_jobs(configs, options);
  for (std::size_t i = 0; i < results.size(); ++i) {
    ConvergenceSetting s{configs[i].tdvp.chi, configs[i].tdvp.dt, 0.0, results[i].provenance.failed};
    if (g.width() == g.height()) {
      for (const auto& xs : results[i].local_x) s.c4_asymmetry = std::max(s.c4_asymmetry, c4_asymmetry(xs, g));
    }
    scan.settings.push_back(s);
    if (i > 0) scan.differences.push_back(max_local_difference(results[i - 1], results[i]));
  }
  return scan;
}

json to_json(const ConvergenceScan& scan, const QuenchConfig& base) {
  json doc = base_json(base, "convergence");
  doc["symmetric"] = scan.symmetric;
  json settings = json::array();
  for (const auto& s : scan.settings) {
    settings.push_back({{"chi", s.chi}, {"dt", s.dt}, {"c4_asymmetry", s.c4_asymmetry}, {"failed", s.failed}});
  }
  doc["settings"] = settings;
  doc["differences"] = scan.differences;
  return doc;
}

// --- background -------------------------------------------------------------------

std::vector<BackgroundRow> background_scan(const QuenchConfig& base, const std::vector<double>& h_perp_values,
                                           const ScanOptions& options) {
  if (base.shape.kind != ShapeKind::empty) throw std::invalid_argument("background scan needs the empty shape");
  if (base.params.h_par != 0.0) throw std::invalid_argument("background scan needs h_par = 0");
  std::vector<QuenchConfig> configs;
  for (double h : h_perp_values) {
    QuenchConfig c = base;
    c.params.h_perp = h;
    c.out_dir = base.out_dir / num_tag("h_perp_", h);
    configs.push_back(std::move(c));
  }
  const auto results = run_jobs(configs, options);
  std::vector<BackgroundRow> rows;
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& r = results[i];
    BackgroundRow row;
    row.h_perp = h_perp_values[i];
    row.failed = r.provenance.failed;
    for (const auto& p : r.series) {
      row.times.push_back(p.t);
      row.avg_x.push_back(p.avg_x);
    }
    if (!r.series.empty()) {
      const double window = std::min(r.window, r.series.back().t - r.series.front().t);
      (void)classify_fate(r.series, window, 0.0, &row.long_time_mean);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

json to_json(const std::vector<BackgroundRow>& scan, const QuenchConfig& base) {
  json doc = base_json(base, "background");
  json rows = json::array();
  for (const auto& r : scan) {
    rows.push_back({{"h_perp", r.h_perp}, {"long_time_mean", r.long_time_mean}, {"failed", r.failed},
                    {"times", r.times}, {"avg_x", r.avg_x}});
  }
  doc["rows"] = rows;
  return doc;
}

}  // namespace bubbledyn
