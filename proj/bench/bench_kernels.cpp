// OpenMP kernels against their serial references on dense states.
#include <random>

#include <benchmark/benchmark.h>

#include "bubbledyn/hamiltonian.hpp"
#include "bubbledyn/kernels.hpp"

using namespace bubbledyn;

namespace {

struct Problem {
  CompiledHamiltonian h;
  Eigen::VectorXcd psi;
};

// side x side lattice, or side x 2 when `thin`.
Problem make_problem(int side, bool thin) {
  const LatticeGeometry g(side, thin ? 2 : side);
  const TermList terms = build_terms(g, {1.0, 1.2, -0.15});
  std::mt19937_64 rng(7);
  std::normal_distribution<double> d;
  Eigen::VectorXcd psi(Eigen::Index{1} << g.num_sites());
  for (Eigen::Index i = 0; i < psi.size(); ++i) psi[i] = {d(rng), d(rng)};
  psi.normalize();
  return {CompiledHamiltonian(terms), std::move(psi)};
}

const Problem& problem(int which) {
  static const Problem p8 = make_problem(4, true);   // 8 sites
  static const Problem p16 = make_problem(4, false); // 16 sites
  return which == 8 ? p8 : p16;
}

void BM_apply(benchmark::State& state) {
  const auto& p = problem(static_cast<int>(state.range(0)));
  Eigen::VectorXcd out;
  for (auto _ : state) {
    p.h.apply(p.psi, out);
    benchmark::DoNotOptimize(out.data());
  }
}

void BM_apply_reference(benchmark::State& state) {
  const auto& p = problem(static_cast<int>(state.range(0)));
  Eigen::VectorXcd out;
  for (auto _ : state) {
    p.h.apply_reference(p.psi, out);
    benchmark::DoNotOptimize(out.data());
  }
}

void BM_local_x(benchmark::State& state) {
  const auto& p = problem(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(local_x_all(p.psi, p.h.num_sites()));
}

void BM_local_x_reference(benchmark::State& state) {
  const auto& p = problem(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(local_x_all_reference(p.psi, p.h.num_sites()));
}

}  // namespace

BENCHMARK(BM_apply)->Arg(8)->Arg(16)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_apply_reference)->Arg(8)->Arg(16)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_local_x)->Arg(8)->Arg(16)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_local_x_reference)->Arg(8)->Arg(16)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
