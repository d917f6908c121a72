#pragma once

#include <memory>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "bubbledyn/hamiltonian.hpp"
#include "bubbledyn/kernels.hpp"
#include "bubbledyn/krylov.hpp"
#include "bubbledyn/observable.hpp"
#include "bubbledyn/shapes.hpp"

namespace bubbledyn {

/// Full state vector in the Z-product basis, canonical site order (bit s <-> site s).
class DenseState {
 public:
  DenseState(int num_sites, Eigen::VectorXcd amplitudes);

  /// |+x> on empty sites, |-x> on occupied ones.
  static DenseState product(const ShapeMask& mask);

  int num_sites() const { return num_sites_; }
  const Eigen::VectorXcd& amplitudes() const { return amplitudes_; }
  Eigen::VectorXcd& amplitudes() { return amplitudes_; }
  double norm() const { return amplitudes_.norm(); }

 private:
  int num_sites_;
  Eigen::VectorXcd amplitudes_;
};

enum class ExactMethod { krylov, eigen };

struct ExactOptions {
  ExactMethod method = ExactMethod::krylov;
  double max_substep = 0.05;                 // krylov: longest single exponential
  KrylovOptions krylov{40, 1e-12, 4096};
};

inline constexpr int kMaxEigenSites = 12;

/// Reusable exp(-iHt) for one Hamiltonian.
class ExactPropagator {
 public:
  ExactPropagator(const TermList& terms, ExactOptions options = {});

  DenseState advance(const DenseState& psi, double dt) const;
  double energy(const DenseState& psi) const;
  const CompiledHamiltonian& hamiltonian() const { return hamiltonian_; }

 private:
  ExactOptions options_;
  CompiledHamiltonian hamiltonian_;
  std::shared_ptr<const Eigen::MatrixXd> eigenvectors_;
  Eigen::VectorXd eigenvalues_;
};

/// psi(t) = exp(-iHt) psi0 for every t in `times` (sorted, nonnegative).
std::vector<DenseState> evolve_exact(const DenseState& psi0, const TermList& terms,
                                     std::span<const double> times, const ExactOptions& options = {});

double observables_exact(const DenseState& psi, const Observable& obs);

/// Von Neumann entropy (natural log) of the reduced state on `subsystem`.
double dense_entropy(const DenseState& psi, std::span<const int> subsystem);

}  // namespace bubbledyn
