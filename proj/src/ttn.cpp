#include "bubbledyn/ttn.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace bubbledyn {

using tensor_ops::apply_leg;
using tensor_ops::contract_except;

// ---------------------------------------------------------------------------
// Topology

TreeTopology::TreeTopology(int num_leaves) : num_leaves_(num_leaves) {
  if (num_leaves < 2 || !std::has_single_bit(static_cast<unsigned>(num_leaves))) {
    throw std::invalid_argument("tree needs a power-of-two number of leaves >= 2");
  }
}

std::pair<int, int> TreeTopology::leaf_range(int h) const {
  if (h < 0 || h >= num_heap()) throw std::invalid_argument("heap id out of range");
  const int depth = std::bit_width(static_cast<unsigned>(h + 1)) - 1;
  const int pos = h - ((1 << depth) - 1);
  const int width = num_leaves_ >> depth;
  return {pos * width, (pos + 1) * width};
}

std::vector<int> TreeTopology::path(int from, int to) const {
  if (from < 0 || to < 0 || from >= num_nodes() || to >= num_nodes()) {
    throw std::invalid_argument("tree node out of range");
  }
  std::vector<int> up{from};
  std::vector<int> down{to};
  int a = from;
  int b = to;
  while (a != b) {
    if (a > b) {
      a = parent(a);
      up.push_back(a);
    } else {
      b = parent(b);
      down.push_back(b);
    }
  }
  // both vectors end in the common ancestor
  down.pop_back();
  up.insert(up.end(), down.rbegin(), down.rend());
  return up;
}

// ---------------------------------------------------------------------------
// State

TreeState::TreeState(SiteOrdering ordering, int chi_max)
    : ordering_(std::move(ordering)), topology_(ordering_.size()), chi_max_(chi_max) {
  if (chi_max < 1) throw std::invalid_argument("bond dimension cap must be >= 1");
  tensors_.resize(static_cast<std::size_t>(topology_.num_nodes()));
  for (int n = 0; n < topology_.num_nodes(); ++n) {
    const Eigen::Index d0 = topology_.is_leaf(TreeTopology::child(n, 0)) ? 2 : 1;
    const Eigen::Index d1 = topology_.is_leaf(TreeTopology::child(n, 1)) ? 2 : 1;
    tensors_[static_cast<std::size_t>(n)] = Tensor3(d0, d1, 1);
  }
}

Eigen::Index TreeState::bond_dim(int h) const {
  if (topology_.is_leaf(h)) return 2;
  return tensor(h).dim(2);
}

Eigen::Index TreeState::max_bond_dim() const {
  Eigen::Index m = 1;
  for (int n = 1; n < topology_.num_nodes(); ++n) m = std::max(m, tensor(n).dim(2));
  return m;
}

Eigen::Index TreeState::bond_dim_limit(int h, int chi) const {
  if (h == 0) return 1;
  if (topology_.is_leaf(h)) return 2;
  const auto [lo, hi] = topology_.leaf_range(h);
  const int below = hi - lo;
  const int above = num_sites() - below;
  auto pow2 = [](int e) -> Eigen::Index { return e >= 40 ? (Eigen::Index{1} << 40) : (Eigen::Index{1} << e); };
  return std::min<Eigen::Index>({static_cast<Eigen::Index>(chi), pow2(below), pow2(above)});
}

std::vector<int> TreeState::subtree_sites(int h) const {
  const auto [lo, hi] = topology_.leaf_range(h);
  std::vector<int> sites;
  for (int leaf = lo; leaf < hi; ++leaf) sites.push_back(ordering_.site_of_leaf(leaf));
  return sites;
}

// ---------------------------------------------------------------------------
// Construction

TreeState product_state(const SiteOrdering& ordering, const ShapeMask& mask, int chi_max) {
  if (!(mask.geometry() == ordering.geometry())) throw std::invalid_argument("mask and ordering differ in geometry");
  TreeState state(ordering, chi_max);
  const auto& topo = state.topology();
  const double r = 1.0 / std::sqrt(2.0);
  auto leaf_vector = [&](int h) {
    const bool down = mask.occupied(ordering.site_of_leaf(topo.leaf_of_heap(h)));
    return std::array<Complex, 2>{r, down ? -r : r};
  };
  for (int n = 0; n < topo.num_nodes(); ++n) {
    Tensor3& t = state.tensor(n);
    const int c0 = TreeTopology::child(n, 0);
    const int c1 = TreeTopology::child(n, 1);
    if (topo.is_leaf(c0)) {
      const auto a = leaf_vector(c0);
      const auto b = leaf_vector(c1);
      t = Tensor3(2, 2, 1);
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) t(i, j, 0) = a[static_cast<std::size_t>(i)] * b[static_cast<std::size_t>(j)];
    } else {
      t = Tensor3(1, 1, 1);
      t(0, 0, 0) = 1.0;
    }
  }
  state.set_center(0);
  return state;
}

TreeState random_state(const SiteOrdering& ordering, int chi, std::mt19937_64& rng) {
  TreeState state(ordering, chi);
  const auto& topo = state.topology();
  std::normal_distribution<double> gauss;
  for (int n = 0; n < topo.num_nodes(); ++n) {
    const Eigen::Index d0 = state.bond_dim_limit(TreeTopology::child(n, 0), chi);
    const Eigen::Index d1 = state.bond_dim_limit(TreeTopology::child(n, 1), chi);
    const Eigen::Index d2 = state.bond_dim_limit(n, chi);
    Tensor3 t(d0, d1, d2);
    for (Eigen::Index i = 0; i < t.size(); ++i) t.data[i] = Complex(gauss(rng), gauss(rng));
    state.tensor(n) = std::move(t);
  }
  for (int n = topo.num_nodes() - 1; n >= 1; --n) {
    const Eigen::MatrixXcd r = tensor_ops::qr_split(state.tensor(n), 2);
    Tensor3& parent = state.tensor(TreeTopology::parent(n));
    parent = apply_leg(r, TreeTopology::side(n), parent);
  }
  state.set_center(0);
  normalize(state);
  state.set_log_norm(0.0);
  return state;
}

void pad_bonds(TreeState& state, int chi) {
  move_center(state, 0);
  const auto& topo = state.topology();
  for (int n = topo.num_nodes() - 1; n >= 1; --n) {
    Tensor3& t = state.tensor(n);
    tensor_ops::extend_isometry(t, 2, state.bond_dim_limit(n, chi));
    tensor_ops::pad_leg(state.tensor(TreeTopology::parent(n)), TreeTopology::side(n), t.dim(2));
  }
}

// ---------------------------------------------------------------------------
// Gauge

namespace {

void step_center(TreeState& state, int from, int to) {
  if (to == TreeTopology::parent(from) && from != 0) {
    const Eigen::MatrixXcd r = tensor_ops::qr_split(state.tensor(from), 2);
    state.tensor(to) = apply_leg(r, TreeTopology::side(from), state.tensor(to));
  } else if (TreeTopology::parent(to) == from && to != 0) {
    const Eigen::MatrixXcd r = tensor_ops::qr_split(state.tensor(from), TreeTopology::side(to));
    state.tensor(to) = apply_leg(r, 2, state.tensor(to));
  } else {
    throw std::logic_error("center step between non-adjacent nodes");
  }
  state.set_center(to);
}

bool is_ancestor(int ancestor, int node) {
  while (node > ancestor) node = TreeTopology::parent(node);
  return node == ancestor;
}

// Leg of `node` that points toward `target` (node != target).
int leg_toward(int node, int target) {
  if (!is_ancestor(node, target)) return 2;
  int h = target;
  while (TreeTopology::parent(h) != node) h = TreeTopology::parent(h);
  return TreeTopology::side(h);
}

Eigen::MatrixXcd local_matrix(const LocalMatrix& m) {
  Eigen::MatrixXcd out(2, 2);
  out << m[0], m[1], m[2], m[3];
  return out;
}

const TreeState& centered_at_root(const TreeState& state, TreeState& scratch) {
  if (state.center() == 0) return state;
  scratch = state;
  move_center(scratch, 0);
  return scratch;
}

}  // namespace

void move_center(TreeState& state, int node) {
  const auto p = state.topology().path(state.center(), node);
  for (std::size_t i = 0; i + 1 < p.size(); ++i) step_center(state, p[i], p[i + 1]);
}

double norm(const TreeState& state) { return state.tensor(state.center()).data.norm(); }

void normalize(TreeState& state) {
  Tensor3& c = state.tensor(state.center());
  const double nrm = c.data.norm();
  if (nrm == 0.0) throw std::runtime_error("cannot normalise a zero state");
  c.data /= nrm;
  state.add_log_norm(std::log(nrm));
}

// ---------------------------------------------------------------------------
// Observables

std::vector<Eigen::MatrixXcd> edge_density_matrices(const TreeState& input) {
  TreeState scratch = TreeState(input.ordering(), input.chi_max());
  const TreeState& state = centered_at_root(input, scratch);
  const auto& topo = state.topology();
  std::vector<Eigen::MatrixXcd> rho(static_cast<std::size_t>(topo.num_heap()));
  const Tensor3& root = state.tensor(0);
  const double norm2 = root.data.squaredNorm();
  for (int which = 0; which < 2; ++which) {
    rho[static_cast<std::size_t>(TreeTopology::child(0, which))] =
        contract_except(root, root, which).transpose() / norm2;
  }
  for (int n = 1; n < topo.num_nodes(); ++n) {
    const Tensor3& a = state.tensor(n);
    const Tensor3 b = apply_leg(rho[static_cast<std::size_t>(n)].transpose(), 2, a);
    for (int which = 0; which < 2; ++which) {
      rho[static_cast<std::size_t>(TreeTopology::child(n, which))] = contract_except(a, b, which).transpose();
    }
  }
  return rho;
}

namespace {

std::vector<double> single_site_values(const TreeState& state, bool x_component) {
  const auto rho = edge_density_matrices(state);
  const auto& topo = state.topology();
  std::vector<double> out(static_cast<std::size_t>(state.num_sites()));
  for (int leaf = 0; leaf < topo.num_leaves(); ++leaf) {
    const Eigen::MatrixXcd& r = rho[static_cast<std::size_t>(topo.heap_of_leaf(leaf))];
    const double v = x_component ? 2.0 * r(0, 1).real() : (r(0, 0) - r(1, 1)).real();
    out[static_cast<std::size_t>(state.ordering().site_of_leaf(leaf))] = v;
  }
  return out;
}

double entropy_of(const Eigen::MatrixXcd& rho) {
  const Eigen::VectorXd p = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>(rho, Eigen::EigenvaluesOnly).eigenvalues();
  const double total = p.sum();
  double s = 0.0;
  for (Eigen::Index k = 0; k < p.size(); ++k) {
    const double q = p[k] / total;
    if (q > 1e-300) s -= q * std::log(q);
  }
  return s;
}

double product_expectation(const TreeState& input, const std::vector<std::pair<int, LocalMatrix>>& factors) {
  TreeState scratch = TreeState(input.ordering(), input.chi_max());
  const TreeState& state = centered_at_root(input, scratch);
  const auto& topo = state.topology();
  std::vector<Eigen::MatrixXcd> ops(static_cast<std::size_t>(topo.num_heap()));
  for (const auto& [site, m] : factors) {
    ops[static_cast<std::size_t>(topo.heap_of_leaf(state.ordering().leaf_of_site(site)))] = local_matrix(m);
  }
  for (int n = topo.num_nodes() - 1; n >= 0; --n) {
    const auto& op0 = ops[static_cast<std::size_t>(TreeTopology::child(n, 0))];
    const auto& op1 = ops[static_cast<std::size_t>(TreeTopology::child(n, 1))];
    if (op0.size() == 0 && op1.size() == 0 && n != 0) continue;
    const Tensor3& a = state.tensor(n);
    Tensor3 t = a;
    if (op0.size() != 0) t = apply_leg(op0, 0, t);
    if (op1.size() != 0) t = apply_leg(op1, 1, t);
    if (n == 0) return a.data.dot(t.data).real() / a.data.squaredNorm();
    ops[static_cast<std::size_t>(n)] = contract_except(a, t, 2);
  }
  return 0.0;
}

}  // namespace

std::vector<double> local_x_all(const TreeState& state) { return single_site_values(state, true); }
std::vector<double> local_z_all(const TreeState& state) { return single_site_values(state, false); }

double average_x(const TreeState& state) {
  const auto xs = local_x_all(state);
  double sum = 0.0;
  for (double v : xs) sum += v;
  return sum / static_cast<double>(xs.size());
}

double subtree_entropy(const TreeState& state, int h) {
  if (h < 0 || h >= state.topology().num_heap()) throw std::invalid_argument("heap id out of range");
  if (h == 0) return 0.0;
  return entropy_of(edge_density_matrices(state)[static_cast<std::size_t>(h)]);
}

std::vector<double> bond_entropies(const TreeState& state) {
  const auto rho = edge_density_matrices(state);
  std::vector<double> out(static_cast<std::size_t>(state.topology().num_nodes()), 0.0);
  for (int n = 1; n < state.topology().num_nodes(); ++n) {
    out[static_cast<std::size_t>(n)] = entropy_of(rho[static_cast<std::size_t>(n)]);
  }
  return out;
}

Observable subtree_entropy_observable(const TreeState& state, int h) {
  return Observable::subtree_entropy(h, state.subtree_sites(h));
}

double expectation(const TreeState& state, const Observable& obs) {
  validate(obs, state.num_sites());
  switch (obs.kind) {
    case ObservableKind::average_x:
      return average_x(state);
    case ObservableKind::subtree_entropy:
      if (obs.node < 0) throw std::invalid_argument("entropy observable needs a tree edge");
      return subtree_entropy(state, obs.node);
    default:
      return product_expectation(state, product_factors(obs));
  }
}

// ---------------------------------------------------------------------------
// Dense bridge

Eigen::VectorXcd flatten(const TreeState& state) {
  const int n = state.num_sites();
  if (n > kMaxFlattenSites) throw std::invalid_argument("flatten limited to 20 sites");
  const auto& topo = state.topology();
  std::vector<Eigen::MatrixXcd> basis(static_cast<std::size_t>(topo.num_heap()));
  for (int n_node = topo.num_nodes() - 1; n_node >= 0; --n_node) {
    auto child_basis = [&](int which) -> Eigen::MatrixXcd {
      const int c = TreeTopology::child(n_node, which);
      if (topo.is_leaf(c)) return Eigen::MatrixXcd::Identity(2, 2);
      Eigen::MatrixXcd b = std::move(basis[static_cast<std::size_t>(c)]);
      return b;
    };
    const Eigen::MatrixXcd left = child_basis(0);
    const Eigen::MatrixXcd right = child_basis(1);
    const Tensor3 t = apply_leg(right, 1, apply_leg(left, 0, state.tensor(n_node)));
    basis[static_cast<std::size_t>(n_node)] = tensor_ops::matricize(t, 2);
  }
  const Eigen::VectorXcd by_leaf = basis[0].col(0);
  Eigen::VectorXcd out(by_leaf.size());
  std::vector<int> site_of_leaf(static_cast<std::size_t>(n));
  for (int leaf = 0; leaf < n; ++leaf) site_of_leaf[static_cast<std::size_t>(leaf)] = state.ordering().site_of_leaf(leaf);
  for (Eigen::Index b = 0; b < by_leaf.size(); ++b) {
    Eigen::Index c = 0;
    for (int leaf = 0; leaf < n; ++leaf) {
      if ((b >> leaf) & 1) c |= Eigen::Index{1} << site_of_leaf[static_cast<std::size_t>(leaf)];
    }
    out[c] = by_leaf[b];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Truncation

namespace {

void truncate_below(TreeState& state, int node, int chi, double cutoff, TruncationResult& result) {
  const auto& topo = state.topology();
  for (int which = 0; which < 2; ++which) {
    const int c = TreeTopology::child(node, which);
    if (topo.is_leaf(c)) continue;
    Tensor3& a = state.tensor(node);
    const Eigen::MatrixXcd m = tensor_ops::matricize(a, which);
    Eigen::BDCSVD<Eigen::MatrixXcd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd s = svd.singularValues();
    const double total = s.squaredNorm();
    Eigen::Index keep = 0;
    while (keep < s.size() && keep < chi && s[keep] * s[keep] > cutoff * total) ++keep;
    keep = std::max<Eigen::Index>(keep, 1);
    result.discarded_weight += s.tail(s.size() - keep).squaredNorm() / total;
    result.max_bond = std::max(result.max_bond, keep);

    auto dims = a.dims;
    dims[static_cast<std::size_t>(which)] = keep;
    a = tensor_ops::unmatricize(svd.matrixU().leftCols(keep), which, dims);
    const Eigen::MatrixXcd carry = s.head(keep).asDiagonal() * svd.matrixV().leftCols(keep).adjoint();
    state.tensor(c) = apply_leg(carry, 2, state.tensor(c));
    state.set_center(c);
    truncate_below(state, c, chi, cutoff, result);
    move_center(state, node);
  }
}

}  // namespace

TruncationResult truncate(TreeState& state, int chi, double svd_cutoff) {
  if (chi < 1) throw std::invalid_argument("truncation bond dimension must be >= 1");
  move_center(state, 0);
  TruncationResult result;
  truncate_below(state, 0, chi, svd_cutoff, result);
  normalize(state);
  return result;
}

double isometry_defect(const TreeState& state) {
  double worst = 0.0;
  for (int n = 0; n < state.topology().num_nodes(); ++n) {
    if (n == state.center()) continue;
    const int leg = leg_toward(n, state.center());
    const Tensor3& a = state.tensor(n);
    const Eigen::MatrixXcd e = contract_except(a, a, leg);
    worst = std::max(worst, (e - Eigen::MatrixXcd::Identity(e.rows(), e.cols())).cwiseAbs().maxCoeff());
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Checkpoints

namespace {

constexpr char kMagic[8] = {'B', 'D', 'T', 'T', 'N', 'C', 'K', 'P'};
constexpr std::uint32_t kCheckpointVersion = 1;

template <typename T>
void put(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw std::runtime_error("truncated checkpoint");
  return v;
}

}  // namespace

void save_checkpoint(const TreeState& state, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint '" + path.string() + "'");
  out.write(kMagic, sizeof(kMagic));
  put(out, kCheckpointVersion);
  const auto& g = state.ordering().geometry();
  put<std::int32_t>(out, g.width());
  put<std::int32_t>(out, g.height());
  for (int leaf = 0; leaf < state.num_sites(); ++leaf) {
    const GridPoint p = state.ordering().to_grid(leaf);
    put<std::int32_t>(out, p.x);
    put<std::int32_t>(out, p.y);
  }
  put<std::int32_t>(out, state.chi_max());
  put<std::int32_t>(out, state.center());
  put<double>(out, state.log_norm());
  put<std::int32_t>(out, state.topology().num_nodes());
  for (int n = 0; n < state.topology().num_nodes(); ++n) {
    const Tensor3& t = state.tensor(n);
    for (auto d : t.dims) put<std::int64_t>(out, d);
    out.write(reinterpret_cast<const char*>(t.data.data()), static_cast<std::streamsize>(t.size() * sizeof(Complex)));
  }
  if (!out) throw std::runtime_error("failed writing checkpoint '" + path.string() + "'");
}

TreeState load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint '" + path.string() + "'");
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) throw std::runtime_error("not a tree-state checkpoint");
  if (get<std::uint32_t>(in) != kCheckpointVersion) throw std::runtime_error("unsupported checkpoint version");
  const int width = get<std::int32_t>(in);
  const int height = get<std::int32_t>(in);
  LatticeGeometry geometry(width, height);
  std::vector<GridPoint> path_points;
  for (int leaf = 0; leaf < geometry.num_sites(); ++leaf) {
    const int x = get<std::int32_t>(in);
    const int y = get<std::int32_t>(in);
    path_points.push_back({x, y});
  }
  const int chi_max = get<std::int32_t>(in);
  TreeState state(SiteOrdering(geometry, std::move(path_points)), chi_max);
  const int center = get<std::int32_t>(in);
  state.set_log_norm(get<double>(in));
  const int nodes = get<std::int32_t>(in);
  if (nodes != state.topology().num_nodes() || center < 0 || center >= nodes) {
    throw std::runtime_error("checkpoint topology mismatch");
  }
  state.set_center(center);
  for (int n = 0; n < nodes; ++n) {
    std::array<Eigen::Index, 3> dims{};
    for (auto& d : dims) d = static_cast<Eigen::Index>(get<std::int64_t>(in));
    Tensor3 t(dims[0], dims[1], dims[2]);
    in.read(reinterpret_cast<char*>(t.data.data()), static_cast<std::streamsize>(t.size() * sizeof(Complex)));
    if (!in) throw std::runtime_error("truncated checkpoint");
    state.tensor(n) = std::move(t);
  }
  return state;
}

}  // namespace bubbledyn
