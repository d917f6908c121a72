#include "bubbledyn/hamiltonian.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>

namespace bubbledyn {

std::array<std::complex<double>, 4> pauli_matrix(Pauli p) {
  // row-major {00, 01, 10, 11}
  switch (p) {
    case Pauli::X: return {0.0, 1.0, 1.0, 0.0};
    case Pauli::Z: return {1.0, 0.0, 0.0, -1.0};
  }
  throw std::logic_error("unknown Pauli");
}

TermList build_terms(const LatticeGeometry& geometry, const IsingParams& params) {
  if (!(params.J > 0.0)) throw std::invalid_argument("the Ising coupling J must be positive");
  TermList terms;
  terms.num_sites = geometry.num_sites();
  terms.two_site.reserve(geometry.bonds().size());
  for (const Bond& b : geometry.bonds()) {
    terms.two_site.push_back({b.a, b.b, Pauli::X, Pauli::X, -params.J});
  }
  terms.one_site.reserve(static_cast<std::size_t>(2 * geometry.num_sites()));
  for (int s = 0; s < geometry.num_sites(); ++s) {
    terms.one_site.push_back({s, Pauli::Z, -params.h_perp});
    terms.one_site.push_back({s, Pauli::X, -params.h_par});
  }
  return terms;
}

double classical_energy(const ShapeMask& mask, const IsingParams& params) {
  const auto& g = mask.geometry();
  const double bonds = static_cast<double>(g.bonds().size());
  const double sites = static_cast<double>(g.num_sites());
  return -params.J * (bonds - 2.0 * bond_perimeter(mask)) - params.h_par * (sites - 2.0 * mask.area());
}

Eigen::SparseMatrix<double> dense_hamiltonian(const TermList& terms) {
  const int n = terms.num_sites;
  if (n < 1 || n > kMaxDenseSites) {
    throw std::invalid_argument("dense Hamiltonian limited to 1.." + std::to_string(kMaxDenseSites) +
                                " sites, got " + std::to_string(n));
  }
  const std::uint64_t dim = std::uint64_t{1} << n;
  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(dim * (1 + terms.two_site.size() + terms.one_site.size() / 2));

  // Column b maps to row b ^ flips with the Z sign evaluated on b.
  auto add_product = [&](std::uint64_t b, double coeff, int s1, Pauli p1, int s2, Pauli p2) {
    std::uint64_t row = b;
    double amp = coeff;
    for (auto [s, p] : {std::pair{s1, p1}, std::pair{s2, p2}}) {
      if (s < 0) continue;
      const bool bit = (b >> s) & 1U;
      if (p == Pauli::X) row ^= std::uint64_t{1} << s;
      else amp *= bit ? -1.0 : 1.0;
    }
    entries.emplace_back(static_cast<int>(row), static_cast<int>(b), amp);
  };

  for (std::uint64_t b = 0; b < dim; ++b) {
    for (const auto& t : terms.two_site) {
      if (t.coeff != 0.0) add_product(b, t.coeff, t.site_a, t.op_a, t.site_b, t.op_b);
    }
    for (const auto& t : terms.one_site) {
      if (t.coeff != 0.0) add_product(b, t.coeff, t.site, t.op, -1, Pauli::X);
    }
  }
  Eigen::SparseMatrix<double> h(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  h.setFromTriplets(entries.begin(), entries.end());
  return h;
}

}  // namespace bubbledyn
