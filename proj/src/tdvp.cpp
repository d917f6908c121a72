#include "bubbledyn/tdvp.hpp"

#include <cmath>
#include <stdexcept>

namespace bubbledyn {

using tensor_ops::apply_leg;
using tensor_ops::apply_leg_add;
using tensor_ops::contract_except;

void TdvpConfig::validate() const {
  if (!(dt > 0.0)) throw std::invalid_argument("tdvp dt must be positive");
  if (chi < 1) throw std::invalid_argument("tdvp chi must be >= 1");
  if (krylov_dim < 2) throw std::invalid_argument("krylov_dim must be >= 2");
  if (!(krylov_tol > 0.0)) throw std::invalid_argument("krylov_tol must be positive");
  if (svd_cutoff < 0.0) throw std::invalid_argument("svd_cutoff must be nonnegative");
}

const Environment::BoundaryOp* Environment::find(int site, Pauli op) const {
  for (const auto& b : ops)
    if (b.site == site && b.op == op) return &b;
  return nullptr;
}

namespace {

Eigen::MatrixXcd pauli2(Pauli p) {
  const auto m = pauli_matrix(p);
  Eigen::MatrixXcd out(2, 2);
  out << m[0], m[1], m[2], m[3];
  return out;
}

bool is_trivial(const Environment& e) { return e.block.rows() == 1 && e.block(0, 0) == 0.0; }

}  // namespace

// ---------------------------------------------------------------------------

EnvironmentCache::EnvironmentCache(const TreeTopology& topology, const SiteOrdering& ordering, const TermList& terms)
    : topology_(topology), num_sites_(ordering.size()) {
  if (terms.num_sites != num_sites_) throw std::invalid_argument("terms and state differ in size");
  heap_of_site_.resize(static_cast<std::size_t>(num_sites_));
  for (int s = 0; s < num_sites_; ++s) heap_of_site_[static_cast<std::size_t>(s)] = topology.heap_of_leaf(ordering.leaf_of_site(s));

  partners_.resize(static_cast<std::size_t>(num_sites_));
  for (const auto& t : terms.two_site) {
    if (t.site_a == t.site_b) throw std::invalid_argument("two-site term on a single site");
    partners_[static_cast<std::size_t>(t.site_a)].push_back({t.op_a, t.site_b, t.op_b, t.coeff});
    partners_[static_cast<std::size_t>(t.site_b)].push_back({t.op_b, t.site_a, t.op_a, t.coeff});
  }

  const int heap = topology.num_heap();
  in_subtree_.assign(static_cast<std::size_t>(heap), std::vector<char>(static_cast<std::size_t>(num_sites_), 0));
  outside_.assign(static_cast<std::size_t>(heap), std::vector<char>(static_cast<std::size_t>(num_sites_), 1));
  nowhere_.assign(static_cast<std::size_t>(num_sites_), 0);
  for (int h = 0; h < heap; ++h) {
    const auto [lo, hi] = topology.leaf_range(h);
    for (int leaf = lo; leaf < hi; ++leaf) {
      const int s = ordering.site_of_leaf(leaf);
      in_subtree_[static_cast<std::size_t>(h)][static_cast<std::size_t>(s)] = 1;
      outside_[static_cast<std::size_t>(h)][static_cast<std::size_t>(s)] = 0;
    }
  }

  empty_.block = Eigen::MatrixXcd::Zero(1, 1);
  up_.assign(static_cast<std::size_t>(heap), empty_);
  down_.assign(static_cast<std::size_t>(heap), empty_);

  for (int s = 0; s < num_sites_; ++s) {
    Environment& e = up_[static_cast<std::size_t>(heap_of_site_[static_cast<std::size_t>(s)])];
    e.block = Eigen::MatrixXcd::Zero(2, 2);
    for (const auto& t : terms.one_site) {
      if (t.site < 0 || t.site >= num_sites_) throw std::invalid_argument("one-site term out of range");
      if (t.site == s) e.block += t.coeff * pauli2(t.op);
    }
    for (const auto& p : partners_[static_cast<std::size_t>(s)]) {
      if (!e.find(s, p.op)) e.ops.push_back({s, p.op, pauli2(p.op)});
    }
  }
}

const std::vector<char>& EnvironmentCache::node_region(int node, int leg) const {
  if (leg == 2) return outside_.at(static_cast<std::size_t>(node));
  return in_subtree_.at(static_cast<std::size_t>(TreeTopology::child(node, leg)));
}

const std::vector<char>& EnvironmentCache::bond_region(int h, int leg) const {
  if (leg == 0) return in_subtree_.at(static_cast<std::size_t>(h));
  if (leg == 1) return outside_.at(static_cast<std::size_t>(h));
  return nowhere_;
}

std::array<const Environment*, 3> EnvironmentCache::node_envs(int node) const {
  return {&up(TreeTopology::child(node, 0)), &up(TreeTopology::child(node, 1)), node == 0 ? &empty_ : &down(node)};
}

std::array<const Environment*, 3> EnvironmentCache::bond_envs(int h) const { return {&up(h), &down(h), &empty_}; }

Environment EnvironmentCache::combine(const Tensor3& a, int out_leg, int node) const {
  auto envs = node_envs(node);
  std::array<const std::vector<char>*, 3> regions{&node_region(node, 0), &node_region(node, 1), &node_region(node, 2)};
  const std::vector<char>& target = *regions[static_cast<std::size_t>(out_leg)];
  envs[static_cast<std::size_t>(out_leg)] = &empty_;
  regions[static_cast<std::size_t>(out_leg)] = &nowhere_;

  Environment out;
  const LocalOperator op(envs, regions, *this);
  const Eigen::MatrixXcd block = contract_except(a, op.apply(a), out_leg);
  out.block = 0.5 * (block + block.adjoint());

  for (int leg = 0; leg < 3; ++leg) {
    if (leg == out_leg) continue;
    for (const auto& b : envs[static_cast<std::size_t>(leg)]->ops) {
      bool crosses = false;
      for (const auto& p : partners(b.site)) {
        if (p.op == b.op && target[static_cast<std::size_t>(p.other)]) {
          crosses = true;
          break;
        }
      }
      if (!crosses) continue;
      const Eigen::MatrixXcd m = contract_except(a, apply_leg(b.matrix, leg, a), out_leg);
      out.ops.push_back({b.site, b.op, 0.5 * (m + m.adjoint())});
    }
  }
  return out;
}

void EnvironmentCache::update_up(const TreeState& state, int node) {
  if (node <= 0 || node >= topology_.num_nodes()) throw std::invalid_argument("update_up needs a non-root internal node");
  up_[static_cast<std::size_t>(node)] = combine(state.tensor(node), 2, node);
}

void EnvironmentCache::update_down(const TreeState& state, int child) {
  if (child <= 0) throw std::invalid_argument("the root has no parent bond");
  const int n = TreeTopology::parent(child);
  down_[static_cast<std::size_t>(child)] = combine(state.tensor(n), TreeTopology::side(child), n);
}

void EnvironmentCache::rebuild_up(const TreeState& state) {
  if (state.center() != 0) throw std::logic_error("environment rebuild expects the center at the root");
  for (int n = topology_.num_nodes() - 1; n >= 1; --n) update_up(state, n);
}

// ---------------------------------------------------------------------------

LocalOperator::LocalOperator(const std::array<const Environment*, 3>& envs,
                             const std::array<const std::vector<char>*, 3>& regions, const EnvironmentCache& cache)
    : envs_(envs) {
  // Terms crossing two legs are grouped by the single-site factor on the leg
  // with fewer distinct factors; the other leg's factors are summed per group.
  auto count_keys = [&](int la, int lb) {
    int n = 0;
    for (const auto& b : envs[static_cast<std::size_t>(la)]->ops) {
      for (const auto& p : cache.partners(b.site)) {
        if (p.op == b.op && (*regions[static_cast<std::size_t>(lb)])[static_cast<std::size_t>(p.other)]) {
          ++n;
          break;
        }
      }
    }
    return n;
  };
  for (int la = 0; la < 3; ++la) {
    for (int lb = la + 1; lb < 3; ++lb) {
      int a = la;
      int b = lb;
      if (count_keys(lb, la) < count_keys(la, lb)) std::swap(a, b);
      const Environment& ea = *envs[static_cast<std::size_t>(a)];
      const Environment& eb = *envs[static_cast<std::size_t>(b)];
      const std::vector<char>& region_b = *regions[static_cast<std::size_t>(b)];
      for (const auto& oa : ea.ops) {
        Eigen::MatrixXcd sum;
        for (const auto& p : cache.partners(oa.site)) {
          if (p.op != oa.op || !region_b[static_cast<std::size_t>(p.other)]) continue;
          const auto* ob = eb.find(p.other, p.other_op);
          if (!ob) throw std::logic_error("environment is missing a boundary operator");
          if (sum.size() == 0) sum = Eigen::MatrixXcd::Zero(ob->matrix.rows(), ob->matrix.cols());
          sum += p.coeff * ob->matrix;
        }
        if (sum.size() != 0) cross_.push_back({a, oa.matrix, b, std::move(sum)});
      }
    }
  }
}

Tensor3 LocalOperator::apply(const Tensor3& t) const {
  Tensor3 out(t.dims[0], t.dims[1], t.dims[2]);
  for (int leg = 0; leg < 3; ++leg) {
    const Environment& e = *envs_[static_cast<std::size_t>(leg)];
    if (!is_trivial(e)) apply_leg_add(e.block, leg, t, out);
  }
  for (const auto& c : cross_) apply_leg_add(c.op_a, c.leg_a, apply_leg(c.op_b, c.leg_b, t), out);
  return out;
}

double LocalOperator::expectation(const Tensor3& t) const {
  return t.data.dot(apply(t).data).real() / t.data.squaredNorm();
}

// ---------------------------------------------------------------------------

TdvpEngine::TdvpEngine(const TermList& terms, TdvpConfig config) : terms_(terms), config_(config) {
  config_.validate();
}

void TdvpEngine::prepare(TreeState& state) {
  if (terms_.num_sites != state.num_sites()) throw std::invalid_argument("terms and state differ in size");
  pad_bonds(state, config_.chi);
  move_center(state, 0);
  normalize(state);
  state.set_log_norm(0.0);
  cache_ = std::make_unique<EnvironmentCache>(state.topology(), state.ordering(), terms_);
  cache_->rebuild_up(state);
}

Eigen::VectorXcd TdvpEngine::exponentiate(const LocalOperator& op, const Tensor3& shape, const Eigen::VectorXcd& v,
                                          double tau) {
  Tensor3 work(shape.dims[0], shape.dims[1], shape.dims[2]);
  const LinearMap apply = [&](const Eigen::VectorXcd& in, Eigen::VectorXcd& out) {
    work.data = in;
    out = op.apply(work).data;
  };
  KrylovStats ks;
  const KrylovOptions opts{config_.krylov_dim, config_.krylov_tol, 4096};
  Eigen::VectorXcd result = krylov_expm_apply(apply, v, tau, opts, &ks);
  ++stats_.exponentials;
  stats_.applications += ks.applications;
  stats_.substeps += ks.substeps;
  stats_.krylov_error += ks.error_estimate;
  return result;
}

void TdvpEngine::evolve_node(TreeState& state, int node, double tau) {
  const auto& c = *cache_;
  const LocalOperator op(c.node_envs(node), {&c.node_region(node, 0), &c.node_region(node, 1), &c.node_region(node, 2)},
                         c);
  Tensor3& a = state.tensor(node);
  a.data = exponentiate(op, a, a.data, tau);
}

// `bond` is indexed (subtree basis, complement basis); evolved backward in time.
Eigen::MatrixXcd TdvpEngine::evolve_bond(int h, const Eigen::MatrixXcd& bond, double tau) {
  const auto& c = *cache_;
  const LocalOperator op(c.bond_envs(h), {&c.bond_region(h, 0), &c.bond_region(h, 1), &c.bond_region(h, 2)}, c);
  const Tensor3 shape(bond.rows(), bond.cols(), 1);
  const Eigen::VectorXcd flat = Eigen::Map<const Eigen::VectorXcd>(bond.data(), bond.size());
  const Eigen::VectorXcd out = exponentiate(op, shape, flat, -tau);
  return Eigen::Map<const Eigen::MatrixXcd>(out.data(), bond.rows(), bond.cols());
}

void TdvpEngine::forward(TreeState& state, int node, double tau) {
  const auto& topo = state.topology();
  for (int which = 0; which < 2; ++which) {
    const int c = TreeTopology::child(node, which);
    if (topo.is_leaf(c)) continue;
    Eigen::MatrixXcd r = tensor_ops::qr_split(state.tensor(node), which);
    cache_->update_down(state, c);
    state.tensor(c) = apply_leg(r, 2, state.tensor(c));
    state.set_center(c);

    forward(state, c, tau);
    evolve_node(state, c, tau);

    r = tensor_ops::qr_split(state.tensor(c), 2);
    cache_->update_up(state, c);
    const Eigen::MatrixXcd bond = evolve_bond(c, r, tau);
    state.tensor(node) = apply_leg(bond, which, state.tensor(node));
    state.set_center(node);
  }
}

void TdvpEngine::reverse(TreeState& state, int node, double tau) {
  const auto& topo = state.topology();
  for (int which = 1; which >= 0; --which) {
    const int c = TreeTopology::child(node, which);
    if (topo.is_leaf(c)) continue;
    const Eigen::MatrixXcd r = tensor_ops::qr_split(state.tensor(node), which);
    cache_->update_down(state, c);
    const Eigen::MatrixXcd bond = evolve_bond(c, r.transpose(), tau);
    state.tensor(c) = apply_leg(bond.transpose(), 2, state.tensor(c));
    state.set_center(c);

    evolve_node(state, c, tau);
    reverse(state, c, tau);

    const Eigen::MatrixXcd up = tensor_ops::qr_split(state.tensor(c), 2);
    cache_->update_up(state, c);
    state.tensor(node) = apply_leg(up, which, state.tensor(node));
    state.set_center(node);
  }
}

void TdvpEngine::sweep(TreeState& state) {
  if (!cache_) throw std::logic_error("TdvpEngine::sweep before prepare");
  if (state.center() != 0) throw std::logic_error("sweep expects the center at the root");
  stats_ = {};
  const double half = 0.5 * config_.dt;
  forward(state, 0, half);
  evolve_node(state, 0, config_.dt);  // the two root half-steps merged
  reverse(state, 0, half);
  stats_.norm_before_normalize = norm(state);
  normalize(state);
}

double TdvpEngine::energy(const TreeState& state) const {
  if (!cache_) throw std::logic_error("TdvpEngine::energy before prepare");
  if (state.center() != 0) throw std::logic_error("energy expects the center at the root");
  const auto& c = *cache_;
  const LocalOperator op(c.node_envs(0), {&c.node_region(0, 0), &c.node_region(0, 1), &c.node_region(0, 2)}, c);
  return op.expectation(state.tensor(0));
}

void TdvpEngine::visit_energies(TreeState& state, int node, std::vector<double>& out) {
  const auto& topo = state.topology();
  const auto& cache = *cache_;
  for (int which = 0; which < 2; ++which) {
    const int c = TreeTopology::child(node, which);
    if (topo.is_leaf(c)) continue;
    const Eigen::MatrixXcd r = tensor_ops::qr_split(state.tensor(node), which);
    cache_->update_down(state, c);
    const Eigen::MatrixXcd bond = r.transpose();
    Tensor3 t(bond.rows(), bond.cols(), 1);
    t.data = Eigen::Map<const Eigen::VectorXcd>(bond.data(), bond.size());
    const LocalOperator op(cache.bond_envs(c), {&cache.bond_region(c, 0), &cache.bond_region(c, 1), &cache.bond_region(c, 2)},
                           cache);
    out[static_cast<std::size_t>(c)] = op.expectation(t);
    state.tensor(c) = apply_leg(r, 2, state.tensor(c));
    state.set_center(c);

    visit_energies(state, c, out);

    const Eigen::MatrixXcd up = tensor_ops::qr_split(state.tensor(c), 2);
    cache_->update_up(state, c);
    state.tensor(node) = apply_leg(up, which, state.tensor(node));
    state.set_center(node);
  }
}

std::vector<double> TdvpEngine::edge_energies(TreeState& state) {
  std::vector<double> out(static_cast<std::size_t>(state.topology().num_nodes()), 0.0);
  out[0] = energy(state);
  visit_energies(state, 0, out);
  return out;
}

// ---------------------------------------------------------------------------

Trajectory evolve(TreeState& state, const TermList& terms, const TdvpConfig& config, double t_max,
                  const StepCallback& callback) {
  if (t_max < 0.0) throw std::invalid_argument("t_max must be nonnegative");
  const long steps = std::lround(t_max / config.dt);
  if (std::abs(static_cast<double>(steps) * config.dt - t_max) > 1e-9 * std::max(1.0, t_max)) {
    throw std::invalid_argument("t_max must be a multiple of dt");
  }
  TdvpEngine engine(terms, config);
  engine.prepare(state);
  Trajectory traj;
  auto record = [&](double t) {
    const double e = engine.energy(state);
    traj.times.push_back(t);
    traj.energies.push_back(e);
    traj.norms.push_back(std::exp(state.log_norm()));
    if (callback) callback(t, state, e);
  };
  record(0.0);
  for (long k = 1; k <= steps; ++k) {
    engine.sweep(state);
    record(static_cast<double>(k) * config.dt);
  }
  return traj;
}

}  // namespace bubbledyn
