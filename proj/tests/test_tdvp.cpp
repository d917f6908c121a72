#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "bubbledyn/kernels.hpp"
#include "bubbledyn/krylov.hpp"
#include "bubbledyn/oracle.hpp"
#include "bubbledyn/tdvp.hpp"

using namespace bubbledyn;

namespace {

const IsingParams kBench{1.0, 1.2, -0.15};

ShapeMask centered_square(const LatticeGeometry& g, int L) {
  return make_shape(ShapeSpec{ShapeKind::square, L, 0, {g.width() / 2, g.height() / 2}, {}}, g);
}

TdvpConfig config(double dt, int chi) {
  TdvpConfig c;
  c.dt = dt;
  c.chi = chi;
  return c;
}

// Max over steps and sites of |<X>_TDVP - <X>_exact|.
double oracle_deviation(int n, const IsingParams& p, const ShapeMask& mask, double dt, int chi, double t_max) {
  const LatticeGeometry g(n, n);
  const TermList terms = build_terms(g, p);
  TreeState s = product_state(hilbert_ordering(g), mask, chi);
  const ExactPropagator prop(terms);
  DenseState psi = DenseState::product(mask);
  double worst = 0.0;
  evolve(s, terms, config(dt, chi), t_max, [&](double t, const TreeState& st, double) {
    if (t > 0) psi = prop.advance(psi, dt);
    const auto a = local_x_all(st);
    const auto b = local_x_all(psi.amplitudes(), g.num_sites());
    for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  });
  return worst;
}

}  // namespace

TEST(TdvpConfig, Validation) {
  EXPECT_NO_THROW(TdvpConfig{}.validate());
  EXPECT_THROW(config(0.0, 4).validate(), std::invalid_argument);
  EXPECT_THROW(config(0.1, 0).validate(), std::invalid_argument);
  TdvpConfig c;
  c.krylov_dim = 1;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(Tdvp, ZeroCouplingsLeaveProductState) {
  const LatticeGeometry g(4, 4);
  TermList terms = build_terms(g, kBench);
  for (auto& t : terms.two_site) t.coeff = 0.0;
  for (auto& t : terms.one_site) t.coeff = 0.0;
  const ShapeMask m = centered_square(g, 2);
  TreeState s = product_state(hilbert_ordering(g), m, 8);
  const Eigen::VectorXcd before = flatten(s);
  TdvpEngine engine(terms, config(0.1, 8));
  engine.prepare(s);
  for (int k = 0; k < 3; ++k) engine.sweep(s);
  EXPECT_LT((flatten(s) - before).norm(), 1e-12);
}

TEST(Tdvp, SweepPreservesNormAndGauge) {
  const LatticeGeometry g(4, 4);
  TreeState s = product_state(hilbert_ordering(g), centered_square(g, 2), 16);
  TdvpEngine engine(build_terms(g, kBench), config(0.05, 16));
  engine.prepare(s);
  for (int k = 0; k < 5; ++k) {
    engine.sweep(s);
    EXPECT_NEAR(engine.last_stats().norm_before_normalize, 1.0, 1e-10);
    EXPECT_NEAR(s.log_norm(), 0.0, 1e-10);
    EXPECT_EQ(s.center(), 0);
    EXPECT_LT(isometry_defect(s), 1e-10);
  }
  EXPECT_GT(engine.last_stats().exponentials, 0);
}

TEST(Tdvp, EnvironmentsAreConsistent) {
  const LatticeGeometry g(4, 4);
  const TermList terms = build_terms(g, kBench);
  TreeState s = product_state(hilbert_ordering(g), centered_square(g, 2), 12);
  TdvpEngine engine(terms, config(0.05, 12));
  engine.prepare(s);
  for (int k = 0; k < 4; ++k) engine.sweep(s);
  const double e = engine.energy(s);
  const CompiledHamiltonian h(terms);
  const Eigen::VectorXcd v = flatten(s);
  Eigen::VectorXcd hv;
  h.apply(v, hv);
  EXPECT_NEAR(e, v.dot(hv).real() / v.squaredNorm(), 1e-10);
  for (double ei : engine.edge_energies(s)) EXPECT_NEAR(ei, e, 1e-10);
  EXPECT_EQ(s.center(), 0);
}

TEST(Tdvp, TwoByTwoTracksOracle) {
  const LatticeGeometry g(2, 2);
  ShapeMask m(g);
  m.set(0, true);
  EXPECT_LT(oracle_deviation(2, kBench, m, 0.01, 4, 5.0), 2e-3);
}

TEST(Tdvp, TruncatedManifoldConservesEnergy) {
  const LatticeGeometry g(4, 4);
  const TermList terms = build_terms(g, kBench);
  TreeState s = product_state(hilbert_ordering(g), centered_square(g, 2), 4);
  const auto traj = evolve(s, terms, config(0.05, 4), 2.0);
  ASSERT_EQ(traj.times.size(), 41u);
  for (double e : traj.energies) EXPECT_NEAR(e, traj.energies.front(), 1e-8 * std::abs(traj.energies.front()));
  for (double nrm : traj.norms) EXPECT_NEAR(nrm, 1.0, 1e-9);
  EXPECT_LE(s.max_bond_dim(), 4);
}

TEST(Evolve, ZeroDurationSamplesInitialStateOnly) {
  const LatticeGeometry g(2, 2);
  TreeState s = product_state(hilbert_ordering(g), centered_square(g, 2), 4);
  int calls = 0;
  const auto traj = evolve(s, build_terms(g, kBench), config(0.1, 4), 0.0, [&](double t, const TreeState& st, double) {
    ++calls;
    EXPECT_EQ(t, 0.0);
    for (double x : local_x_all(st)) EXPECT_NEAR(x, -1.0, 1e-13);
  });
  EXPECT_EQ(calls, 1);
  EXPECT_EQ(traj.times, std::vector<double>{0.0});
  EXPECT_THROW(evolve(s, build_terms(g, kBench), config(0.1, 4), 0.25), std::invalid_argument);
}

TEST(Evolve, NoTransverseFieldKeepsX) {
  const LatticeGeometry g(4, 4);
  const ShapeMask m = centered_square(g, 2);
  TreeState s = product_state(hilbert_ordering(g), m, 8);
  evolve(s, build_terms(g, {1.0, 0.0, -0.25}), config(0.1, 8), 1.0, [&](double, const TreeState& st, double) {
    const auto x = local_x_all(st);
    for (int i = 0; i < 16; ++i) EXPECT_NEAR(x[i], m.occupied(i) ? -1.0 : 1.0, 1e-10);
  });
}

TEST(Tdvp, StepIsTimeReversible) {
  // A step with -H undoes a step with H to round-off, also on a truncated manifold.
  const LatticeGeometry g(4, 4);
  const TermList h = build_terms(g, kBench);
  TermList minus = h;
  for (auto& t : minus.two_site) t.coeff = -t.coeff;
  for (auto& t : minus.one_site) t.coeff = -t.coeff;
  TreeState s = product_state(hilbert_ordering(g), centered_square(g, 2), 3);
  TdvpEngine fwd(h, config(0.05, 3));
  fwd.prepare(s);
  for (int k = 0; k < 3; ++k) fwd.sweep(s);
  const Eigen::VectorXcd before = flatten(s);
  fwd.sweep(s);
  EXPECT_GT((flatten(s) - before).norm(), 1e-3);
  TdvpEngine back(minus, config(0.05, 3));
  back.prepare(s);
  back.sweep(s);
  EXPECT_LT((flatten(s) - before).norm(), 1e-10);
}

TEST(Tdvp, SecondOrderOnTruncatedManifold) {
  const LatticeGeometry g(2, 2);
  const TermList terms = build_terms(g, kBench);
  std::mt19937_64 rng(12345);
  const TreeState start = random_state(hilbert_ordering(g), 2, rng);
  auto final_x = [&](double dt) {
    TreeState s = start;
    evolve(s, terms, config(dt, 2), 1.0);
    return local_x_all(s);
  };
  const auto ref = final_x(0.00125);
  auto dev = [&](double dt) {
    const auto x = final_x(dt);
    double worst = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) worst = std::max(worst, std::abs(x[i] - ref[i]));
    return worst;
  };
  const double ratio = dev(0.02) / dev(0.01);
  EXPECT_GT(ratio, 3.0);
  EXPECT_LT(ratio, 5.0);
}
