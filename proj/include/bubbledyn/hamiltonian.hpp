#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <vector>

#include <Eigen/Sparse>

#include "bubbledyn/lattice.hpp"
#include "bubbledyn/shapes.hpp"

namespace bubbledyn {

/// Couplings of H = -J sum_<rr'> X_r X_r' - h_perp sum_r Z_r - h_par sum_r X_r,
/// in units where J = 1 unless stated otherwise.
struct IsingParams {
  double J = 1.0;
  double h_perp = 0.0;
  double h_par = 0.0;
};

// Reference values, not enforced anywhere.
inline constexpr double kQuantumCriticalField = 3.04;
inline constexpr double kDynamicalCriticalField = 2.0;

enum class Pauli : std::uint8_t { X, Z };

/// 2x2 matrix of a Pauli operator in the Z eigenbasis (|0> has Z = +1).
std::array<std::complex<double>, 4> pauli_matrix(Pauli p);

struct OneSiteTerm {
  int site = 0;
  Pauli op = Pauli::Z;
  double coeff = 0.0;
};

struct TwoSiteTerm {
  int site_a = 0;
  int site_b = 0;
  Pauli op_a = Pauli::X;
  Pauli op_b = Pauli::X;
  double coeff = 0.0;
};

/// Sum of real-coefficient Pauli products on canonical sites.
struct TermList {
  int num_sites = 0;
  std::vector<TwoSiteTerm> two_site;
  std::vector<OneSiteTerm> one_site;
};

/// One XX term per bond (coupling -J), then per site -h_perp Z and -h_par X.
TermList build_terms(const LatticeGeometry& geometry, const IsingParams& params);

/// <psi|H|psi> for the X-basis product state with spins down on the mask.
double classical_energy(const ShapeMask& mask, const IsingParams& params);

inline constexpr int kMaxDenseSites = 20;

/// Explicit matrix in the Z-product basis; bit s of the basis index is 1 when
/// site s has Z = -1. Stored sparse, so N up to 20 remains addressable.
Eigen::SparseMatrix<double> dense_hamiltonian(const TermList& terms);

}  // namespace bubbledyn
