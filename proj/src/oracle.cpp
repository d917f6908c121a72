#include "bubbledyn/oracle.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Eigenvalues>

namespace bubbledyn {

DenseState::DenseState(int num_sites, Eigen::VectorXcd amplitudes)
    : num_sites_(num_sites), amplitudes_(std::move(amplitudes)) {
  if (num_sites_ < 1 || num_sites_ > kMaxDenseSites) {
    throw std::invalid_argument("dense states limited to 1.." + std::to_string(kMaxDenseSites) + " sites");
  }
  if (amplitudes_.size() != (Eigen::Index{1} << num_sites_)) {
    throw std::invalid_argument("amplitude count does not match 2^N");
  }
}

DenseState DenseState::product(const ShapeMask& mask) {
  const int n = mask.geometry().num_sites();
  if (n > kMaxDenseSites) throw std::invalid_argument("dense states limited to 20 sites");
  std::uint64_t down = 0;
  for (int s = 0; s < n; ++s)
    if (mask.occupied(s)) down |= std::uint64_t{1} << s;
  const Eigen::Index dim = Eigen::Index{1} << n;
  const double amp = std::pow(2.0, -0.5 * n);
  Eigen::VectorXcd psi(dim);
  for (Eigen::Index b = 0; b < dim; ++b) {
    const bool odd = std::popcount(static_cast<std::uint64_t>(b) & down) & 1;
    psi[b] = odd ? -amp : amp;
  }
  return DenseState(n, std::move(psi));
}

ExactPropagator::ExactPropagator(const TermList& terms, ExactOptions options)
    : options_(options), hamiltonian_(terms) {
  if (options_.method == ExactMethod::eigen) {
    if (terms.num_sites > kMaxEigenSites) {
      throw std::invalid_argument("eigendecomposition backend limited to " + std::to_string(kMaxEigenSites) +
                                  " sites");
    }
    const Eigen::MatrixXd h = Eigen::MatrixXd(dense_hamiltonian(terms));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(h);
    eigenvalues_ = eig.eigenvalues();
    eigenvectors_ = std::make_shared<const Eigen::MatrixXd>(eig.eigenvectors());
  }
  if (!(options_.max_substep > 0.0)) throw std::invalid_argument("max_substep must be positive");
}

DenseState ExactPropagator::advance(const DenseState& psi, double dt) const {
  if (psi.num_sites() != hamiltonian_.num_sites()) throw std::invalid_argument("state/Hamiltonian size mismatch");
  if (dt == 0.0) return psi;
  if (options_.method == ExactMethod::eigen) {
    const Eigen::MatrixXcd v = eigenvectors_->cast<std::complex<double>>();
    Eigen::VectorXcd coeff = v.adjoint() * psi.amplitudes();
    for (Eigen::Index k = 0; k < coeff.size(); ++k) coeff[k] *= std::polar(1.0, -eigenvalues_[k] * dt);
    return DenseState(psi.num_sites(), v * coeff);
  }
  const auto apply = [this](const Eigen::VectorXcd& in, Eigen::VectorXcd& out) { hamiltonian_.apply(in, out); };
  const int pieces = std::max(1, static_cast<int>(std::ceil(std::abs(dt) / options_.max_substep - 1e-12)));
  const double h = dt / pieces;
  Eigen::VectorXcd x = psi.amplitudes();
  for (int k = 0; k < pieces; ++k) x = krylov_expm_apply(apply, x, h, options_.krylov);
  return DenseState(psi.num_sites(), std::move(x));
}

double ExactPropagator::energy(const DenseState& psi) const {
  Eigen::VectorXcd h_psi;
  hamiltonian_.apply(psi.amplitudes(), h_psi);
  return psi.amplitudes().dot(h_psi).real() / psi.amplitudes().squaredNorm();
}

std::vector<DenseState> evolve_exact(const DenseState& psi0, const TermList& terms,
                                     std::span<const double> times, const ExactOptions& options) {
  if (terms.num_sites > kMaxDenseSites) throw std::invalid_argument("exact evolution limited to 20 sites");
  double prev = 0.0;
  for (double t : times) {
    if (t < prev) throw std::invalid_argument("times must be sorted and nonnegative");
    prev = t;
  }
  const ExactPropagator prop(terms, options);
  std::vector<DenseState> out;
  out.reserve(times.size());
  DenseState psi = psi0;
  prev = 0.0;
  for (double t : times) {
    psi = prop.advance(psi, t - prev);
    prev = t;
    out.push_back(psi);
  }
  return out;
}

namespace {

// Applies a product of single-site 2x2 operators to psi.
Eigen::VectorXcd apply_product(const DenseState& psi, const std::vector<std::pair<int, LocalMatrix>>& factors) {
  Eigen::VectorXcd x = psi.amplitudes();
  for (const auto& [site, m] : factors) {
    Eigen::VectorXcd y(x.size());
    const Eigen::Index mask = Eigen::Index{1} << site;
    for (Eigen::Index b = 0; b < x.size(); ++b) {
      const int row = (b & mask) ? 1 : 0;
      const Eigen::Index b0 = b & ~mask;
      y[b] = m[static_cast<std::size_t>(2 * row)] * x[b0] + m[static_cast<std::size_t>(2 * row + 1)] * x[b0 | mask];
    }
    x.swap(y);
  }
  return x;
}

}  // namespace

double observables_exact(const DenseState& psi, const Observable& obs) {
  validate(obs, psi.num_sites());
  const double norm2 = psi.amplitudes().squaredNorm();
  switch (obs.kind) {
    case ObservableKind::average_x: {
      const auto xs = local_x_all(psi.amplitudes(), psi.num_sites());
      double sum = 0.0;
      for (double v : xs) sum += v;
      return sum / psi.num_sites() / norm2;
    }
    case ObservableKind::subtree_entropy:
      return dense_entropy(psi, obs.sites);
    default: {
      const Eigen::VectorXcd o_psi = apply_product(psi, product_factors(obs));
      return psi.amplitudes().dot(o_psi).real() / norm2;
    }
  }
}

double dense_entropy(const DenseState& psi, std::span<const int> subsystem) {
  const int n = psi.num_sites();
  std::vector<bool> in_a(static_cast<std::size_t>(n), false);
  for (int s : subsystem) {
    if (s < 0 || s >= n || in_a[static_cast<std::size_t>(s)]) throw std::invalid_argument("bad subsystem");
    in_a[static_cast<std::size_t>(s)] = true;
  }
  const int na = static_cast<int>(subsystem.size());
  const int nb = n - na;
  if (na == 0 || nb == 0) return 0.0;
  Eigen::MatrixXcd m(Eigen::Index{1} << na, Eigen::Index{1} << nb);
  const auto& a = psi.amplitudes();
  for (Eigen::Index b = 0; b < a.size(); ++b) {
    Eigen::Index ia = 0, ib = 0;
    int ka = 0, kb = 0;
    for (int s = 0; s < n; ++s) {
      const Eigen::Index bit = (b >> s) & 1;
      if (in_a[static_cast<std::size_t>(s)]) ia |= bit << ka++;
      else ib |= bit << kb++;
    }
    m(ia, ib) = a[b];
  }
  const Eigen::MatrixXcd rho = na <= nb ? Eigen::MatrixXcd(m * m.adjoint()) : Eigen::MatrixXcd(m.adjoint() * m);
  const Eigen::VectorXd p = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>(rho, Eigen::EigenvaluesOnly).eigenvalues();
  const double total = p.sum();
  double s = 0.0;
  for (Eigen::Index k = 0; k < p.size(); ++k) {
    const double q = p[k] / total;
    if (q > 1e-300) s -= q * std::log(q);
  }
  return s;
}

}  // namespace bubbledyn
