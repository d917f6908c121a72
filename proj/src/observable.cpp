#include "bubbledyn/observable.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace bubbledyn {

namespace {
constexpr LocalMatrix kX{0.0, 1.0, 1.0, 0.0};
constexpr LocalMatrix kZ{1.0, 0.0, 0.0, -1.0};
}  // namespace

Observable Observable::local_x(int site) { return {ObservableKind::local_x, {site}, -1, 1.0, {}}; }
Observable Observable::local_z(int site) { return {ObservableKind::local_z, {site}, -1, 1.0, {}}; }
Observable Observable::average_x() { return {ObservableKind::average_x, {}, -1, 1.0, {}}; }

Observable Observable::bond_energy(int a, int b, double coeff) {
  return {ObservableKind::bond_energy, {a, b}, -1, coeff, {}};
}

Observable Observable::subtree_entropy(int node, std::vector<int> subsystem_sites) {
  return {ObservableKind::subtree_entropy, std::move(subsystem_sites), node, 1.0, {}};
}

Observable Observable::product(std::vector<int> sites, std::vector<LocalMatrix> factors) {
  return {ObservableKind::product, std::move(sites), -1, 1.0, std::move(factors)};
}

bool is_hermitian(const LocalMatrix& m, double tol) {
  return std::abs(m[0].imag()) <= tol && std::abs(m[3].imag()) <= tol &&
         std::abs(m[1] - std::conj(m[2])) <= tol;
}

void validate(const Observable& obs, int num_sites) {
  for (int s : obs.sites) {
    if (s < 0 || s >= num_sites) throw std::invalid_argument("observable support outside the lattice");
  }
  const std::set<int> distinct(obs.sites.begin(), obs.sites.end());
  if (distinct.size() != obs.sites.size()) throw std::invalid_argument("observable support repeats a site");
  switch (obs.kind) {
    case ObservableKind::local_x:
    case ObservableKind::local_z:
      if (obs.sites.size() != 1) throw std::invalid_argument("local observable needs one site");
      break;
    case ObservableKind::bond_energy:
      if (obs.sites.size() != 2) throw std::invalid_argument("bond observable needs two sites");
      break;
    case ObservableKind::average_x:
      break;
    case ObservableKind::subtree_entropy:
      if (obs.sites.empty()) throw std::invalid_argument("entropy needs a nonempty subsystem");
      break;
    case ObservableKind::product:
      if (obs.factors.size() != obs.sites.size() || obs.sites.empty()) {
        throw std::invalid_argument("product observable needs one factor per site");
      }
      for (const auto& f : obs.factors) {
        if (!is_hermitian(f)) throw std::invalid_argument("non-Hermitian operator inserted");
      }
      break;
  }
}

std::vector<std::pair<int, LocalMatrix>> product_factors(const Observable& obs) {
  switch (obs.kind) {
    case ObservableKind::local_x: return {{obs.sites.at(0), kX}};
    case ObservableKind::local_z: return {{obs.sites.at(0), kZ}};
    case ObservableKind::bond_energy: {
      LocalMatrix scaled = kX;
      for (auto& e : scaled) e *= obs.coeff;
      return {{obs.sites.at(0), scaled}, {obs.sites.at(1), kX}};
    }
    case ObservableKind::product: {
      std::vector<std::pair<int, LocalMatrix>> out;
      for (std::size_t i = 0; i < obs.sites.size(); ++i) out.emplace_back(obs.sites[i], obs.factors[i]);
      return out;
    }
    default:
      throw std::invalid_argument("observable is not a product of local operators");
  }
}

}  // namespace bubbledyn
