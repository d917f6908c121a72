#include "bubbledyn/kernels.hpp"

#include <bit>
#include <map>
#include <stdexcept>

namespace bubbledyn {

CompiledHamiltonian::CompiledHamiltonian(const TermList& terms)
    : num_sites_(terms.num_sites), terms_(terms) {
  if (num_sites_ < 1 || num_sites_ > kMaxDenseSites) {
    throw std::invalid_argument("state-vector kernels limited to 1..20 sites");
  }
  const std::uint64_t dim = dimension();
  diagonal_.assign(dim, 0.0);

  std::map<std::pair<std::uint64_t, std::uint64_t>, double> merged;
  std::vector<std::pair<std::uint64_t, double>> diagonal_terms;
  auto lower = [&](double coeff, std::initializer_list<std::pair<int, Pauli>> factors) {
    std::uint64_t flip = 0;
    std::uint64_t zmask = 0;
    for (auto [s, p] : factors) {
      if (p == Pauli::X) flip |= std::uint64_t{1} << s;
      else zmask |= std::uint64_t{1} << s;
    }
    if (flip == 0) diagonal_terms.emplace_back(zmask, coeff);
    else merged[{flip, zmask}] += coeff;
  };
  for (const auto& t : terms.two_site) lower(t.coeff, {{t.site_a, t.op_a}, {t.site_b, t.op_b}});
  for (const auto& t : terms.one_site) lower(t.coeff, {{t.site, t.op}});

  for (auto [zmask, coeff] : diagonal_terms) {
    if (coeff == 0.0) continue;
#pragma omp parallel for schedule(static)
    for (std::int64_t b = 0; b < static_cast<std::int64_t>(dim); ++b) {
      const bool odd = std::popcount(static_cast<std::uint64_t>(b) & zmask) & 1;
      diagonal_[static_cast<std::size_t>(b)] += odd ? -coeff : coeff;
    }
  }
  for (const auto& [key, coeff] : merged) {
    if (coeff != 0.0) flips_.push_back({key.first, key.second, coeff});
  }
}

void CompiledHamiltonian::apply(const Eigen::VectorXcd& in, Eigen::VectorXcd& out) const {
  const auto dim = static_cast<std::int64_t>(dimension());
  if (in.size() != dim) throw std::invalid_argument("state dimension mismatch");
  out.resize(dim);
  const std::complex<double>* src = in.data();
  std::complex<double>* dst = out.data();
#pragma omp parallel for schedule(static)
  for (std::int64_t b = 0; b < dim; ++b) {
    const auto ub = static_cast<std::uint64_t>(b);
    std::complex<double> acc = diagonal_[static_cast<std::size_t>(b)] * src[b];
    for (const FlipTerm& f : flips_) {
      const std::uint64_t from = ub ^ f.flip;
      // sign of Z factors acts on the pre-flip index
      const bool odd = std::popcount(from & f.zmask) & 1;
      acc += (odd ? -f.coeff : f.coeff) * src[from];
    }
    dst[b] = acc;
  }
}

void CompiledHamiltonian::apply_reference(const Eigen::VectorXcd& in, Eigen::VectorXcd& out) const {
  const std::uint64_t dim = dimension();
  if (static_cast<std::uint64_t>(in.size()) != dim) throw std::invalid_argument("state dimension mismatch");
  out = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(dim));
  // Applies one Pauli factor to the basis state |b> given amplitude a.
  auto act = [](Pauli p, int site, std::uint64_t& b, std::complex<double>& a) {
    const auto m = pauli_matrix(p);
    const int bit = static_cast<int>((b >> site) & 1U);
    for (int row = 0; row < 2; ++row) {
      const std::complex<double> e = m[static_cast<std::size_t>(2 * row + bit)];
      if (e != 0.0) {
        a *= e;
        b = (b & ~(std::uint64_t{1} << site)) | (static_cast<std::uint64_t>(row) << site);
        return;
      }
    }
  };
  for (const auto& t : terms_.two_site) {
    for (std::uint64_t b = 0; b < dim; ++b) {
      std::uint64_t target = b;
      std::complex<double> a = in[static_cast<Eigen::Index>(b)] * t.coeff;
      act(t.op_b, t.site_b, target, a);
      act(t.op_a, t.site_a, target, a);
      out[static_cast<Eigen::Index>(target)] += a;
    }
  }
  for (const auto& t : terms_.one_site) {
    for (std::uint64_t b = 0; b < dim; ++b) {
      std::uint64_t target = b;
      std::complex<double> a = in[static_cast<Eigen::Index>(b)] * t.coeff;
      act(t.op, t.site, target, a);
      out[static_cast<Eigen::Index>(target)] += a;
    }
  }
}

std::vector<double> local_x_all(const Eigen::VectorXcd& psi, int num_sites) {
  const auto dim = static_cast<std::int64_t>(psi.size());
  if (dim != (std::int64_t{1} << num_sites)) throw std::invalid_argument("state dimension mismatch");
  std::vector<double> out(static_cast<std::size_t>(num_sites), 0.0);
  const std::complex<double>* a = psi.data();
#pragma omp parallel for schedule(static)
  for (int s = 0; s < num_sites; ++s) {
    const std::int64_t m = std::int64_t{1} << s;
    double acc = 0.0;
    for (std::int64_t b = 0; b < dim; ++b) acc += (std::conj(a[b]) * a[b ^ m]).real();
    out[static_cast<std::size_t>(s)] = acc;
  }
  return out;
}

std::vector<double> local_x_all_reference(const Eigen::VectorXcd& psi, int num_sites) {
  std::vector<double> out(static_cast<std::size_t>(num_sites), 0.0);
  for (int s = 0; s < num_sites; ++s) {
    TermList single;
    single.num_sites = num_sites;
    single.one_site.push_back({s, Pauli::X, 1.0});
    Eigen::VectorXcd x_psi;
    CompiledHamiltonian(single).apply_reference(psi, x_psi);
    out[static_cast<std::size_t>(s)] = psi.dot(x_psi).real();
  }
  return out;
}

std::vector<double> local_z_all(const Eigen::VectorXcd& psi, int num_sites) {
  const auto dim = static_cast<std::int64_t>(psi.size());
  if (dim != (std::int64_t{1} << num_sites)) throw std::invalid_argument("state dimension mismatch");
  std::vector<double> out(static_cast<std::size_t>(num_sites), 0.0);
  const std::complex<double>* a = psi.data();
#pragma omp parallel for schedule(static)
  for (int s = 0; s < num_sites; ++s) {
    double acc = 0.0;
    for (std::int64_t b = 0; b < dim; ++b) acc += ((b >> s) & 1 ? -1.0 : 1.0) * std::norm(a[b]);
    out[static_cast<std::size_t>(s)] = acc;
  }
  return out;
}

}  // namespace bubbledyn
