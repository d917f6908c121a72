#include "bubbledyn/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

#include "bubbledyn/oracle.hpp"
#include "bubbledyn/result_io.hpp"
#include "bubbledyn/tdvp.hpp"

namespace bubbledyn {

std::string to_string(Fate f) {
  switch (f) {
    case Fate::expanding: return "expanding";
    case Fate::shrinking: return "shrinking";
    case Fate::undecided: return "undecided";
  }
  return "undecided";
}

Fate fate_from_string(const std::string& name) {
  for (auto f : {Fate::expanding, Fate::shrinking, Fate::undecided})
    if (to_string(f) == name) return f;
  throw std::invalid_argument("unknown fate '" + name + "'");
}

bool operator==(const QuenchResult& a, const QuenchResult& b) {
  return a.width == b.width && a.height == b.height && a.shape_label == b.shape_label &&
         a.shape.area == b.shape.area && a.shape.bond_perimeter == b.shape.bond_perimeter &&
         a.shape.site_perimeter == b.shape.site_perimeter && a.shape.patch == b.shape.patch &&
         a.params.J == b.params.J && a.params.h_perp == b.params.h_perp && a.params.h_par == b.params.h_par &&
         a.backend == b.backend && a.series == b.series && a.local_x == b.local_x && a.snapshots == b.snapshots &&
         a.fate == b.fate && a.window_mean == b.window_mean && a.window == b.window && a.threshold == b.threshold &&
         a.provenance == b.provenance;
}

Fate classify_fate(const std::vector<SeriesPoint>& series, double window, double threshold, double* window_mean) {
  if (series.empty()) throw std::invalid_argument("cannot classify an empty series");
  if (window < 0.0) throw std::invalid_argument("classification window must be nonnegative");
  const double t_end = series.back().t;
  if (window > t_end - series.front().t + 1e-9) throw std::invalid_argument("classification window exceeds the series");
  double sum = 0.0;
  int count = 0;
  for (const auto& p : series) {
    if (p.t >= t_end - window - 1e-9) {
      sum += p.avg_x;
      ++count;
    }
  }
  const double mean = sum / count;
  if (window_mean) *window_mean = mean;
  if (mean > threshold) return Fate::shrinking;
  if (mean < -threshold) return Fate::expanding;
  return Fate::undecided;
}

double c4_asymmetry(const std::vector<double>& values, const LatticeGeometry& g) {
  if (g.width() != g.height()) throw std::invalid_argument("C4 asymmetry needs a square lattice");
  if (static_cast<int>(values.size()) != g.num_sites()) throw std::invalid_argument("field does not match the lattice");
  const int n = g.width();
  double worst = 0.0;
  for (int s = 0; s < g.num_sites(); ++s) {
    GridPoint p = g.point(s);
    double lo = values[static_cast<std::size_t>(s)];
    double hi = lo;
    for (int k = 0; k < 3; ++k) {
      p = {n - 1 - p.y, p.x};
      const double v = values[static_cast<std::size_t>(g.site(p))];
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    worst = std::max(worst, hi - lo);
  }
  return worst;
}

namespace {

// Tree-edge subsystems used for the entropy column of the exact backend.
std::vector<std::vector<int>> tree_subsystems(const LatticeGeometry& g) {
  std::vector<std::vector<int>> out;
  if (g.width() != g.height()) return out;
  const SiteOrdering ord = hilbert_ordering(g);
  const TreeTopology topo(ord.size());
  for (int h = 1; h < topo.num_nodes(); ++h) {
    const auto [lo, hi] = topo.leaf_range(h);
    std::vector<int> sites;
    for (int leaf = lo; leaf < hi; ++leaf) sites.push_back(ord.site_of_leaf(leaf));
    out.push_back(std::move(sites));
  }
  return out;
}

}  // namespace

QuenchResult run_quench(const QuenchConfig& config, std::optional<TreeState>* final_state) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  const LatticeGeometry g = config.geometry();
  const ShapeMask mask = make_shape(config.shape, g);
  const TermList terms = build_terms(g, config.params);
  const double dt = config.tdvp.dt;

  QuenchResult r;
  r.width = g.width();
  r.height = g.height();
  r.shape_label = shape_label(config.shape);
  r.shape = shape_stats(mask);
  r.params = config.params;
  r.backend = config.backend;
  r.threshold = config.threshold;
  r.provenance.config_hash = config_hash(config);
  r.provenance.code_version = BUBBLEDYN_VERSION;

  const long steps = std::lround(config.t_max / dt);
  if (std::abs(static_cast<double>(steps) * dt - config.t_max) > 1e-9 * std::max(1.0, config.t_max)) {
    throw std::invalid_argument("run.t_max must be a multiple of tdvp.dt");
  }
  std::vector<std::pair<long, double>> snaps;
  for (double t : config.snapshot_times) {
    const long k = std::lround(t / dt);
    if (std::abs(static_cast<double>(k) * dt - t) > 1e-9 * std::max(1.0, t)) {
      throw std::invalid_argument("snapshot times must be multiples of tdvp.dt");
    }
    snaps.emplace_back(k, t);
  }
  if (config.backend == Backend::ttn && g.width() != g.height()) {
    throw std::invalid_argument("the ttn backend needs a square lattice");
  }

  auto record = [&](long k, const std::vector<double>& xs, double energy, double norm, double entropy) {
    SeriesPoint p;
    p.t = static_cast<double>(k) * dt;
    double sum = 0.0;
    for (double v : xs) sum += v;
    p.avg_x = sum / static_cast<double>(xs.size());
    p.energy = energy;
    p.norm = norm;
    p.max_entropy = entropy;
    r.series.push_back(p);
    r.local_x.push_back(xs);
    for (const auto& [ks, t] : snaps) {
      if (ks == k) r.snapshots.push_back({t, g.width(), g.height(), xs});
    }
  };

  try {
    if (config.backend == Backend::ttn) {
      TreeState state = product_state(hilbert_ordering(g), mask, config.tdvp.chi);
      TdvpEngine engine(terms, config.tdvp);
      engine.prepare(state);
      auto sample = [&](long k) {
        const auto s = bond_entropies(state);
        record(k, local_x_all(state), engine.energy(state), std::exp(state.log_norm()),
               *std::max_element(s.begin(), s.end()));
      };
      sample(0);
      for (long k = 1; k <= steps; ++k) {
        engine.sweep(state);
        sample(k);
      }
      if (final_state) final_state->emplace(std::move(state));
    } else {
      const auto subsystems = tree_subsystems(g);
      const ExactPropagator prop(terms);
      DenseState psi = DenseState::product(mask);
      auto sample = [&](long k) {
        double s_max = 0.0;
        for (const auto& sub : subsystems) s_max = std::max(s_max, dense_entropy(psi, sub));
        record(k, local_x_all(psi.amplitudes(), psi.num_sites()), prop.energy(psi), psi.norm(), s_max);
      };
      sample(0);
      for (long k = 1; k <= steps; ++k) {
        psi = prop.advance(psi, dt);
        sample(k);
      }
    }
  } catch (const std::exception& e) {
    r.provenance.failed = true;
    r.provenance.failure = e.what();
  }

  r.window = config.window_fraction * config.t_max;
  const double covered = r.series.empty() ? -1.0 : r.series.back().t - r.series.front().t;
  if (!r.series.empty() && r.window <= covered + 1e-9 && !r.provenance.failed) {
    r.fate = classify_fate(r.series, r.window, config.threshold, &r.window_mean);
  } else {
    r.fate = Fate::undecided;
    r.window_mean = r.series.empty() ? 0.0 : r.series.back().avg_x;
  }
  r.provenance.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

QuenchResult run_and_persist(const QuenchConfig& config) {
  std::optional<TreeState> state;
  QuenchResult r = run_quench(config, config.checkpoint ? &state : nullptr);
  write_result(r, config.out_dir);
  if (state) save_checkpoint(*state, config.out_dir / "state.ttn");
  return r;
}

}  // namespace bubbledyn
