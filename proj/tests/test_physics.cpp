#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "bubbledyn/hamiltonian.hpp"
#include "bubbledyn/kernels.hpp"
#include "bubbledyn/krylov.hpp"
#include "bubbledyn/oracle.hpp"

using namespace bubbledyn;
using Eigen::VectorXcd;

namespace {

VectorXcd random_vector(Eigen::Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  VectorXcd v(n);
  for (auto& c : v) c = {g(rng), g(rng)};
  return v.normalized();
}

const IsingParams kBench{1.0, 1.2, -0.15};

ShapeMask centered_square(const LatticeGeometry& g, int L) {
  return make_shape(ShapeSpec{ShapeKind::square, L, 0, {g.width() / 2, g.height() / 2}, {}}, g);
}

// exp(-iHt) v through a full eigendecomposition.
VectorXcd dense_propagate(const Eigen::MatrixXcd& h, const VectorXcd& v, double t) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
  const VectorXcd phases = (es.eigenvalues().cast<std::complex<double>>() * std::complex<double>(0, -t)).array().exp();
  return es.eigenvectors() * (phases.asDiagonal() * (es.eigenvectors().adjoint() * v));
}

}  // namespace

TEST(Hamiltonian, TermCounts) {
  const LatticeGeometry g(4, 4);
  const TermList t = build_terms(g, kBench);
  EXPECT_EQ(t.num_sites, 16);
  EXPECT_EQ(t.two_site.size(), 24u);
  EXPECT_EQ(t.one_site.size(), 32u);
  for (const auto& term : t.two_site) EXPECT_DOUBLE_EQ(term.coeff, -1.0);
}

TEST(Hamiltonian, DenseMatrixIsHermitianAndMatchesKernel) {
  for (auto [w, h] : {std::pair{2, 2}, {4, 2}, {4, 4}}) {
    const TermList terms = build_terms(LatticeGeometry(w, h), kBench);
    const Eigen::SparseMatrix<double> m = dense_hamiltonian(terms);
    EXPECT_NEAR((Eigen::SparseMatrix<double>(m.transpose()) - m).norm(), 0.0, 1e-12);
    const CompiledHamiltonian k(terms);
    const VectorXcd v = random_vector(static_cast<Eigen::Index>(k.dimension()), 7);
    VectorXcd a, b;
    k.apply(v, a);
    k.apply_reference(v, b);
    const VectorXcd c = m.cast<std::complex<double>>() * v;
    EXPECT_LT((a - c).norm(), 1e-11);
    EXPECT_LT((b - c).norm(), 1e-11);
  }
}

TEST(Hamiltonian, ClassicalEnergyOfProductStates) {
  const LatticeGeometry g(4, 4);
  const TermList terms = build_terms(g, kBench);
  const CompiledHamiltonian k(terms);
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    ShapeMask m(g);
    for (int s = 0; s < 16; ++s) m.set(s, rng() % 3 == 0);
    const DenseState psi = DenseState::product(m);
    VectorXcd hv;
    k.apply(psi.amplitudes(), hv);
    EXPECT_NEAR(psi.amplitudes().dot(hv).real(), classical_energy(m, kBench), 1e-11);
    // broken bonds cost 2J each; the rest is the field term
    EXPECT_NEAR(classical_energy(m, kBench), -24.0 + 2.0 * bond_perimeter(m) + 0.15 * (16 - 2 * m.area()), 1e-12);
  }
}

TEST(Kernels, LocalXMatchesReference) {
  const VectorXcd v = random_vector(1 << 10, 11);
  const auto a = local_x_all(v, 10);
  const auto b = local_x_all_reference(v, 10);
  for (int s = 0; s < 10; ++s) EXPECT_NEAR(a[s], b[s], 1e-13);
  const auto z = local_z_all(v, 10);
  for (int s = 0; s < 10; ++s) EXPECT_LE(a[s] * a[s] + z[s] * z[s], 1.0 + 1e-12);
}

TEST(Krylov, DiagonalPhases) {
  const LinearMap diag = [](const VectorXcd& in, VectorXcd& out) {
    out = in;
    out[1] *= 2.0;
  };
  VectorXcd v(2);
  v << std::complex<double>(0.6, 0), std::complex<double>(0, 0.8);
  const VectorXcd w = krylov_expm_apply(diag, v, std::numbers::pi);
  EXPECT_NEAR(std::abs(w[0] + v[0]), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(w[1] - v[1]), 0.0, 1e-12);
}

TEST(Krylov, PrecessingSpin) {
  for (double h : {0.3, 1.0, 2.5}) {
    const LinearMap hz = [h](const VectorXcd& in, VectorXcd& out) {
      out.resize(2);
      out[0] = h * in[0];
      out[1] = -h * in[1];
    };
    VectorXcd plus(2);
    plus << M_SQRT1_2, M_SQRT1_2;
    for (double t : {0.1, 0.7, 3.0}) {
      const VectorXcd w = krylov_expm_apply(hz, plus, t);
      const double x = 2.0 * (std::conj(w[0]) * w[1]).real();
      EXPECT_NEAR(x, std::cos(2.0 * h * t), 1e-10);
    }
  }
}

TEST(Krylov, ZeroMapIsIdentity) {
  const LinearMap zero = [](const VectorXcd& in, VectorXcd& out) { out = VectorXcd::Zero(in.size()); };
  const VectorXcd v = random_vector(50, 1);
  KrylovStats st;
  const VectorXcd w = krylov_expm_apply(zero, v, 4.0, {}, &st);
  EXPECT_LT((w - v).norm(), 1e-14);
  EXPECT_TRUE(st.breakdown);
}

TEST(Krylov, MatchesDenseExponentialWithSubsteps) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  Eigen::MatrixXcd a(120, 120);
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = {g(rng), g(rng)};
  const Eigen::MatrixXcd h = (a + a.adjoint()) / 2.0;
  const LinearMap map = [&](const VectorXcd& in, VectorXcd& out) { out = h * in; };
  const VectorXcd v = random_vector(120, 9);
  KrylovStats st;
  const VectorXcd w = krylov_expm_apply(map, v, 2.0, {20, 1e-12, 4096}, &st);
  EXPECT_GT(st.substeps, 1);
  EXPECT_LT((w - dense_propagate(h, v, 2.0)).norm(), 1e-9);
  EXPECT_NEAR(w.norm(), 1.0, 1e-12);
  EXPECT_THROW(krylov_expm_apply(map, v, 50.0, {4, 1e-14, 2}), KrylovError);
}

TEST(Oracle, MethodsAgree) {
  const LatticeGeometry g(4, 2);
  const TermList terms = build_terms(g, kBench);
  const DenseState psi0 = DenseState::product(centered_square(g, 2));
  const std::vector<double> times{0.0, 0.5, 1.3, 2.0};
  const auto a = evolve_exact(psi0, terms, times, {});
  ExactOptions eig;
  eig.method = ExactMethod::eigen;
  const auto b = evolve_exact(psi0, terms, times, eig);
  ASSERT_EQ(a.size(), times.size());
  EXPECT_LT((a[0].amplitudes() - psi0.amplitudes()).norm(), 1e-14);
  for (std::size_t i = 0; i < times.size(); ++i) EXPECT_LT((a[i].amplitudes() - b[i].amplitudes()).norm(), 1e-9);
  const Eigen::MatrixXcd h = Eigen::MatrixXd(dense_hamiltonian(terms)).cast<std::complex<double>>();
  EXPECT_LT((a[2].amplitudes() - dense_propagate(h, psi0.amplitudes(), 1.3)).norm(), 1e-9);
}

TEST(Oracle, NormConservedOverManySteps) {
  const LatticeGeometry g(4, 4);
  const ExactPropagator prop(build_terms(g, kBench));
  DenseState psi = DenseState::product(centered_square(g, 2));
  const double e0 = prop.energy(psi);
  for (int k = 0; k < 1000; ++k) psi = prop.advance(psi, 0.05);
  EXPECT_LT(std::abs(psi.norm() - 1.0), 1e-10);
  EXPECT_LT(std::abs(prop.energy(psi) - e0) / std::abs(e0), 1e-8);
}

TEST(Oracle, NoTransverseFieldFreezesX) {
  const LatticeGeometry g(4, 4);
  const ExactPropagator prop(build_terms(g, {1.0, 0.0, -0.2}));
  const ShapeMask m = centered_square(g, 2);
  DenseState psi = DenseState::product(m);
  for (int k = 0; k < 20; ++k) psi = prop.advance(psi, 0.1);
  const auto x = local_x_all(psi.amplitudes(), 16);
  for (int s = 0; s < 16; ++s) EXPECT_NEAR(x[s], m.occupied(s) ? -1.0 : 1.0, 1e-10);
}

TEST(Oracle, ObservablesAndEntropy) {
  const LatticeGeometry g(2, 2);
  const TermList terms = build_terms(g, kBench);
  ShapeMask m(g);
  m.set(0, true);
  const DenseState psi0 = DenseState::product(m);
  EXPECT_NEAR(observables_exact(psi0, Observable::local_x(0)), -1.0, 1e-14);
  EXPECT_NEAR(observables_exact(psi0, Observable::average_x()), 0.5, 1e-14);
  EXPECT_NEAR(observables_exact(psi0, Observable::local_z(2)), 0.0, 1e-14);
  const std::vector<int> half{0, 1};
  EXPECT_NEAR(dense_entropy(psi0, half), 0.0, 1e-12);

  // Bell pair on sites 0 and 1: ln 2
  VectorXcd bell = VectorXcd::Zero(16);
  bell[0] = bell[3] = M_SQRT1_2;
  const DenseState b(4, bell);
  EXPECT_NEAR(dense_entropy(b, std::vector<int>{0}), std::log(2.0), 1e-12);
  EXPECT_NEAR(dense_entropy(b, std::vector<int>{0, 1}), 0.0, 1e-12);

  const auto later = evolve_exact(psi0, terms, std::vector<double>{0.8}).front();
  double sum = 0.0;
  for (double v : local_x_all(later.amplitudes(), 4)) sum += v;
  EXPECT_NEAR(observables_exact(later, Observable::average_x()), sum / 4.0, 1e-12);
  EXPECT_NEAR(dense_entropy(later, std::vector<int>{0, 1}), dense_entropy(later, std::vector<int>{2, 3}), 1e-10);
  EXPECT_NEAR(observables_exact(later, Observable::bond_energy(0, 1, -1.0)),
              -observables_exact(later, Observable::product({0, 1}, {pauli_matrix(Pauli::X), pauli_matrix(Pauli::X)})),
              1e-12);
}

TEST(Oracle, RejectsTooManySites) {
  const TermList big = build_terms(LatticeGeometry(8, 4), kBench);
  ExactOptions eig;
  eig.method = ExactMethod::eigen;
  EXPECT_THROW(ExactPropagator(big, eig), std::invalid_argument);
}
