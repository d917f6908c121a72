#pragma once

#include <array>
#include <complex>
#include <vector>

namespace bubbledyn {

using LocalMatrix = std::array<std::complex<double>, 4>;  // row-major 2x2

enum class ObservableKind { local_x, local_z, average_x, bond_energy, subtree_entropy, product };

/// Quantity measured on a state. Sites are canonical lattice indices.
struct Observable {
  ObservableKind kind = ObservableKind::average_x;
  std::vector<int> sites;
  int node = -1;        // tree edge (heap index) for subtree_entropy
  double coeff = 1.0;   // bond_energy: -J
  std::vector<LocalMatrix> factors;  // product: one 2x2 operator per entry of `sites`

  static Observable local_x(int site);
  static Observable local_z(int site);
  static Observable average_x();
  /// coeff * <X_a X_b>; pass coeff = -J for the bond's energy contribution.
  static Observable bond_energy(int a, int b, double coeff);
  /// Entropy of the subsystem below tree edge `node`, whose sites are given.
  static Observable subtree_entropy(int node, std::vector<int> subsystem_sites);
  /// Product of single-site operators on distinct sites.
  static Observable product(std::vector<int> sites, std::vector<LocalMatrix> factors);
};

bool is_hermitian(const LocalMatrix& m, double tol = 1e-12);

/// Throws std::invalid_argument for malformed supports or non-Hermitian factors.
void validate(const Observable& obs, int num_sites);

/// Expands the observable into its single-site factors (sites, matrices).
/// Not defined for average_x and subtree_entropy.
std::vector<std::pair<int, LocalMatrix>> product_factors(const Observable& obs);

}  // namespace bubbledyn
