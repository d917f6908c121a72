#pragma once

// Data-parallel kernels for state vectors in the Z-product basis. Every
// OpenMP kernel has a serial *_reference twin that evaluates the same
// quantity term by term; tests compare the two and bench/ times them.

#include <complex>
#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "bubbledyn/hamiltonian.hpp"

namespace bubbledyn {

/// TermList lowered to a diagonal plus a list of bit-flip patterns.
class CompiledHamiltonian {
 public:
  explicit CompiledHamiltonian(const TermList& terms);

  int num_sites() const { return num_sites_; }
  std::uint64_t dimension() const { return std::uint64_t{1} << num_sites_; }

  /// out = H in. OpenMP over basis states; each output entry is gathered by a
  /// single thread so the result does not depend on the thread count.
  void apply(const Eigen::VectorXcd& in, Eigen::VectorXcd& out) const;

  /// Same product, computed serially one Pauli term at a time.
  void apply_reference(const Eigen::VectorXcd& in, Eigen::VectorXcd& out) const;

  const std::vector<double>& diagonal() const { return diagonal_; }

 private:
  struct FlipTerm {
    std::uint64_t flip = 0;   // X positions
    std::uint64_t zmask = 0;  // Z positions, sign taken on the input index
    double coeff = 0.0;
  };

  int num_sites_;
  TermList terms_;
  std::vector<double> diagonal_;
  std::vector<FlipTerm> flips_;
};

/// <X_s> for every canonical site s.
std::vector<double> local_x_all(const Eigen::VectorXcd& psi, int num_sites);
std::vector<double> local_x_all_reference(const Eigen::VectorXcd& psi, int num_sites);

/// <Z_s> for every canonical site s.
std::vector<double> local_z_all(const Eigen::VectorXcd& psi, int num_sites);

}  // namespace bubbledyn
