// Acceptance suite: one PASS/FAIL line per criterion, tolerances fixed below.
// Exit status is nonzero when any criterion fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <string>

#include <CLI11.hpp>

#include "bubbledyn/experiment.hpp"
#include "bubbledyn/result_io.hpp"
#include "bubbledyn/scans.hpp"
#include "bubbledyn/tdvp.hpp"

using namespace bubbledyn;

namespace {

// Pinned tolerances.
constexpr double kOracleTol = 5e-3;
constexpr double kNormDriftTol = 1e-9;
constexpr double kEnergyDriftTol = 1e-6;
constexpr double kOrderRatio = 2.0;
constexpr double kRoundoffFloor = 1e-9;  // deviations below this carry no dt dependence
constexpr double kC4ExactTol = 1e-6;
constexpr double kC4TdvpTol = 1e-4;
constexpr int kRandomMasks = 200;
constexpr std::size_t kClosureSample = 200'000;

const IsingParams kBench{1.0, 1.2, -0.15};

int failures = 0;

void report(int id, const char* name, bool ok, const std::string& detail) {
  std::printf("%s [%d] %s: %s\n", ok ? "PASS" : "FAIL", id, name, detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

void progress(const std::string& what) {
  static const auto start = std::chrono::steady_clock::now();
  const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::fprintf(stderr, "[%7.1fs] %s\n", s, what.c_str());
}

QuenchConfig quench(int n, ShapeSpec shape, IsingParams p, Backend backend, double dt, int chi, double t_max) {
  QuenchConfig c;
  c.width = c.height = n;
  c.shape = shape;
  c.params = p;
  c.backend = backend;
  c.tdvp.dt = dt;
  c.tdvp.chi = chi;
  c.t_max = t_max;
  return c;
}

// The 2x2 benchmark flips one spin; the 4x4 one starts from the centred 2x2 bubble.
ShapeSpec one_spin() { return {ShapeKind::square, 1, 0, {1, 1}, {}}; }
ShapeSpec central_square() { return {ShapeKind::square, 2, 0, {2, 2}, {}}; }

QuenchResult run(const QuenchConfig& c, const char* label) {
  progress(std::string("start ") + label);
  QuenchResult r = run_quench(c);
  progress(fmt("done  %s (%.1fs)%s", label, r.provenance.wall_time_s, r.provenance.failed ? " FAILED" : ""));
  if (r.provenance.failed) throw std::runtime_error(std::string(label) + ": " + r.provenance.failure);
  return r;
}

double max_c4(const QuenchResult& r, double t_max) {
  const LatticeGeometry g(r.width, r.height);
  double worst = 0.0;
  for (std::size_t k = 0; k < r.series.size(); ++k)
    if (r.series[k].t <= t_max + 1e-9) worst = std::max(worst, c4_asymmetry(r.local_x[k], g));
  return worst;
}

// --- geometry brute force ---------------------------------------------------------

int brute_bonds(const ShapeMask& m) {
  int n = 0;
  const auto& g = m.geometry();
  for (int y = 0; y < g.height(); ++y)
    for (int x = 0; x < g.width(); ++x) {
      if (x + 1 < g.width()) n += m.occupied(GridPoint{x, y}) != m.occupied(GridPoint{x + 1, y});
      if (y + 1 < g.height()) n += m.occupied(GridPoint{x, y}) != m.occupied(GridPoint{x, y + 1});
    }
  return n;
}

int brute_sites(const ShapeMask& m) {
  const auto& g = m.geometry();
  int n = 0;
  for (int y = 0; y < g.height(); ++y)
    for (int x = 0; x < g.width(); ++x) {
      if (!m.occupied(GridPoint{x, y})) continue;
      bool edge = false;
      for (auto [dx, dy] : {std::pair{1, 0}, {-1, 0}, {0, 1}, {0, -1}}) {
        const GridPoint q{x + dx, y + dy};
        edge = edge || (g.contains(q) && !m.occupied(q));
      }
      n += edge;
    }
  return n;
}

// --- criteria -----------------------------------------------------------------------

struct Shared {
  std::optional<QuenchResult> long_tdvp;  // 4x4, chi=256, dt=0.05, t=10
};

void oracle_equivalence(const std::string& samples) {
  const auto small_t = run(quench(2, one_spin(), kBench, Backend::ttn, 0.01, 4, 3.0), "2x2 ttn dt=0.01");
  const auto small_e = run(quench(2, one_spin(), kBench, Backend::exact, 0.01, 4, 3.0), "2x2 exact dt=0.01");
  const auto big_t = run(quench(4, central_square(), kBench, Backend::ttn, 0.01, 256, 3.0), "4x4 ttn chi=256 dt=0.01");
  const auto big_e = run(quench(4, central_square(), kBench, Backend::exact, 0.01, 256, 3.0), "4x4 exact dt=0.01");
  const double d2 = max_local_difference(small_t, small_e);
  const double d4 = max_local_difference(big_t, big_e);
  report(1, "oracle equivalence", d2 < kOracleTol && d4 < kOracleTol,
         fmt("max|dX| 2x2 chi=4: %.2e, 4x4 chi=256: %.2e (tol %.0e, dt=0.01, t<=3)", d2, d4, kOracleTol));
  if (!samples.empty()) {
    write_result(big_t, std::filesystem::path(samples) / "oracle_4x4_ttn");
    write_result(big_e, std::filesystem::path(samples) / "oracle_4x4_exact");
  }
}

void conservation(Shared& shared, const std::string& samples) {
  shared.long_tdvp = run(quench(4, central_square(), kBench, Backend::ttn, 0.05, 256, 10.0), "4x4 ttn chi=256 dt=0.05 t=10");
  const auto& r = *shared.long_tdvp;
  double norm_drift = 0.0, energy_drift = 0.0;
  const double e0 = r.series.front().energy;
  for (const auto& p : r.series) {
    norm_drift = std::max(norm_drift, std::abs(p.norm - 1.0));
    energy_drift = std::max(energy_drift, std::abs(p.energy - e0) / std::abs(e0));
  }
  report(2, "conservation", norm_drift < kNormDriftTol && energy_drift < kEnergyDriftTol,
         fmt("norm drift %.2e (tol %.0e), relative energy drift %.2e (tol %.0e), %zu steps", norm_drift, kNormDriftTol,
             energy_drift, kEnergyDriftTol, r.series.size() - 1));
  if (!samples.empty()) write_result(r, std::filesystem::path(samples) / "conservation_4x4_ttn");
}

void integrator_order() {
  auto deviation = [](double dt) {
    const auto t = run(quench(2, one_spin(), kBench, Backend::ttn, dt, 4, 3.0), "2x2 ttn chi=4");
    const auto e = run(quench(2, one_spin(), kBench, Backend::exact, dt, 4, 3.0), "2x2 exact");
    return max_local_difference(t, e);
  };
  const double coarse = deviation(0.02), fine = deviation(0.01);
  const double ratio = coarse / fine;
  std::string detail = fmt("max|dX| dt=0.02: %.2e, dt=0.01: %.2e, ratio %.2f", coarse, fine, ratio);
  if (ratio >= kOrderRatio) {
    report(3, "integrator order", true, detail);
    return;
  }
  if (coarse >= kRoundoffFloor || fine >= kRoundoffFloor) {
    report(3, "integrator order", false, detail + fmt(" (need >= %.0f)", kOrderRatio));
    return;
  }
  // At exact bond dimension the projected flow is the exact flow and both
  // deviations are round-off. Measure the order on a truncated manifold
  // (chi=2) against a fine-step TDVP reference instead, starting from a
  // full-rank state: padded product states have zero singular values, where
  // the projected flow is not smooth.
  const LatticeGeometry g(2, 2);
  const TermList terms = build_terms(g, kBench);
  std::mt19937_64 rng(12345);
  const TreeState start = random_state(hilbert_ordering(g), 2, rng);
  auto samples = [&](double dt) {
    TreeState s = start;
    TdvpConfig cfg;
    cfg.dt = dt;
    cfg.chi = 2;
    std::vector<std::vector<double>> out;
    const long stride = std::lround(0.02 / dt);
    long k = 0;
    evolve(s, terms, cfg, 3.0, [&](double, const TreeState& st, double) {
      if (k++ % stride == 0) out.push_back(local_x_all(st));
    });
    return out;
  };
  progress("chi=2 self-convergence");
  const auto ref = samples(0.0025), c = samples(0.02), f = samples(0.01);
  auto dev = [&](const std::vector<std::vector<double>>& a) {
    double worst = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k)
      for (std::size_t i = 0; i < a[k].size(); ++i) worst = std::max(worst, std::abs(a[k][i] - ref.at(k)[i]));
    return worst;
  };
  const double dc = dev(c), df = dev(f);
  report(3, "integrator order", dc / df >= kOrderRatio,
         detail + fmt("; both at round-off (< %.0e), so measured on a truncated chi=2 manifold from a full-rank "
                      "state vs dt=0.0025: %.2e -> %.2e, ratio %.2f (need >= %.0f)",
                      kRoundoffFloor, dc, df, dc / df, kOrderRatio));
}

void geometry_oracle() {
  std::mt19937_64 rng(20240607);
  const LatticeGeometry g8(8, 8);
  int mismatches = 0, moves = 0, move_breaks = 0;
  for (int trial = 0; trial < kRandomMasks; ++trial) {
    ShapeMask m(g8);
    std::bernoulli_distribution fill(0.05 + 0.9 * (trial % 20) / 19.0);
    for (int s = 0; s < g8.num_sites(); ++s) m.set(s, fill(rng));
    mismatches += bond_perimeter(m) != brute_bonds(m);
    mismatches += site_perimeter(m) != brute_sites(m);
    for (const auto& next : corner_moves(m)) {
      ++moves;
      move_breaks += bond_perimeter(next) != bond_perimeter(m);
    }
  }
  const LatticeGeometry g(32, 32);
  int closed_bad = 0;
  for (int L = 1; L <= 8; ++L) {
    const ShapeMask sq = make_shape({ShapeKind::square, L, 0, {16, 16}, {}}, g);
    closed_bad += bond_perimeter(sq) != 4 * L;
    // a single site has no interior, so 4L-4 applies from L = 2
    closed_bad += site_perimeter(sq) != (L == 1 ? 1 : 4 * L - 4);
    for (const auto& next : corner_moves(sq)) {
      ++moves;
      move_breaks += bond_perimeter(next) != bond_perimeter(sq);
    }
  }
  for (int r = 1; r <= 4; ++r) {
    const ShapeMask d = make_shape({ShapeKind::diamond, r, 0, {16, 16}, {}}, g);
    closed_bad += bond_perimeter(d) != 8 * r + 4;
    closed_bad += site_perimeter(d) != 4 * r;
    for (const auto& next : corner_moves(d)) {
      ++moves;
      move_breaks += bond_perimeter(next) != bond_perimeter(d);
    }
  }
  report(4, "geometry oracle", mismatches == 0 && closed_bad == 0 && move_breaks == 0,
         fmt("%d random 8x8 masks: %d count mismatches; closed forms L<=8, r<=4: %d violations; "
             "%d corner moves: %d change P_b",
             kRandomMasks, mismatches, closed_bad, moves, move_breaks));
}

void corner_confinement() {
  const LatticeGeometry g(16, 16);
  bool ok = true;
  std::string detail;
  for (int r = 1; r <= 3; ++r) {
    const ShapeMask d = make_shape({ShapeKind::diamond, r, 0, {8, 8}, {}}, g);
    const Patch patch = bounding_patch(d);
    const bool certified = corner_closure_confined(patch, g);
    const auto closure = corner_reachable_set(d, kClosureSample);
    int escaped = 0, perimeter_changes = 0;
    for (const auto& m : closure.masks) {
      const Patch p = bounding_patch(m);
      escaped += p.x0 < patch.x0 || p.y0 < patch.y0 || p.x0 + p.width > patch.x0 + patch.width ||
                 p.y0 + p.height > patch.y0 + patch.height;
      perimeter_changes += bond_perimeter(m) != bond_perimeter(d);
    }
    ok = ok && certified && escaped == 0 && perimeter_changes == 0 && patch.width == 2 * r + 1;
    detail += fmt("%sr=%d: %zu masks%s, %d outside %dx%d, invariant %s", r > 1 ? "; " : "", r, closure.masks.size(),
                  closure.truncated ? " (BFS prefix)" : " (complete)", escaped, 2 * r + 1, 2 * r + 1,
                  certified ? "holds" : "FAILS");
  }
  report(5, "corner-flip confinement", ok, detail);
}

void c4_symmetry(const Shared& shared) {
  const auto exact = run(quench(4, central_square(), kBench, Backend::exact, 0.05, 256, 5.0), "4x4 exact dt=0.05 t=5");
  const double se = max_c4(exact, 5.0);
  const double st = shared.long_tdvp ? max_c4(*shared.long_tdvp, 5.0) : INFINITY;
  report(6, "C4 symmetry", se < kC4ExactTol && st < kC4TdvpTol,
         fmt("orbit spread t<=5: exact %.2e (tol %.0e), TDVP chi=256 %.2e (tol %.0e)", se, kC4ExactTol, st, kC4TdvpTol));
}

void desk_trend(const std::string& samples) {
  const auto strong = run(quench(4, central_square(), {1.0, 1.2, -0.25}, Backend::exact, 0.05, 256, 6.0), "4x4 exact h_par=-0.25");
  const auto weak = run(quench(4, central_square(), {1.0, 1.2, -0.05}, Backend::exact, 0.05, 256, 6.0), "4x4 exact h_par=-0.05");
  report(7, "desk-scale trend", strong.window_mean < weak.window_mean,
         fmt("final-window <X> (last %.1f of t=6): h_par=-0.25 %+.4f, h_par=-0.05 %+.4f", strong.window,
             strong.window_mean, weak.window_mean));
  if (!samples.empty()) {
    write_result(strong, std::filesystem::path(samples) / "trend_h_par_-0.25");
    write_result(weak, std::filesystem::path(samples) / "trend_h_par_-0.05");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bubbledyn acceptance suite"};
  std::set<int> only;
  std::string samples;
  app.add_option("--only", only, "run only these criteria (1-7)")->check(CLI::Range(1, 7));
  app.add_option("--samples", samples, "also write the desk-scale runs as result directories here");
  CLI11_PARSE(app, argc, argv);
  auto want = [&](int id) { return only.empty() || only.contains(id); };

  Shared shared;
  const std::vector<std::pair<int, std::function<void()>>> criteria{
      {4, geometry_oracle},
      {5, corner_confinement},
      {7, [&] { desk_trend(samples); }},
      {1, [&] { oracle_equivalence(samples); }},
      {3, integrator_order},
      {2, [&] { conservation(shared, samples); }},
      {6, [&] {
         if (!shared.long_tdvp)
           shared.long_tdvp = run(quench(4, central_square(), kBench, Backend::ttn, 0.05, 256, 5.0), "4x4 ttn chi=256 t=5");
         c4_symmetry(shared);
       }},
  };
  for (const auto& [id, fn] : criteria) {
    if (!want(id)) continue;
    try {
      fn();
    } catch (const std::exception& e) {
      report(id, "criterion", false, std::string("error: ") + e.what());
    }
  }
  std::printf("%s: %d failing criteria\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
