#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "bubbledyn/lattice.hpp"
#include "bubbledyn/observable.hpp"
#include "bubbledyn/shapes.hpp"
#include "bubbledyn/tensor.hpp"

namespace bubbledyn {

/// Perfect binary tree in heap layout. Internal nodes are 0 .. L-2 (root 0),
/// heap ids L-1 .. 2L-2 are the physical leaves in ordering position order.
/// Edge h is the bond between heap id h and its parent.
class TreeTopology {
 public:
  explicit TreeTopology(int num_leaves);

  int num_leaves() const { return num_leaves_; }
  int num_nodes() const { return num_leaves_ - 1; }
  int num_heap() const { return 2 * num_leaves_ - 1; }

  static int parent(int h) { return (h - 1) / 2; }
  static int child(int node, int which) { return 2 * node + 1 + which; }
  /// 0 or 1: which child of its parent h is.
  static int side(int h) { return (h - 1) % 2; }

  bool is_leaf(int h) const { return h >= num_nodes(); }
  int leaf_of_heap(int h) const { return h - num_nodes(); }
  int heap_of_leaf(int leaf) const { return leaf + num_nodes(); }

  /// Leaf positions [first, last) below heap id h.
  std::pair<int, int> leaf_range(int h) const;
  bool in_subtree(int h, int leaf) const {
    const auto [lo, hi] = leaf_range(h);
    return leaf >= lo && leaf < hi;
  }

  /// Internal nodes from `from` to `to`, both included.
  std::vector<int> path(int from, int to) const;

 private:
  int num_leaves_;
};

/// Binary tree tensor network over Hilbert-ordered sites. Every tensor except
/// the one at center() is an isometry pointing toward the center.
class TreeState {
 public:
  TreeState(SiteOrdering ordering, int chi_max);

  const SiteOrdering& ordering() const { return ordering_; }
  const TreeTopology& topology() const { return topology_; }
  int num_sites() const { return ordering_.size(); }
  int chi_max() const { return chi_max_; }

  int center() const { return center_; }
  void set_center(int node) { center_ = node; }

  double log_norm() const { return log_norm_; }
  void add_log_norm(double v) { log_norm_ += v; }
  void set_log_norm(double v) { log_norm_ = v; }

  Tensor3& tensor(int node) { return tensors_.at(static_cast<std::size_t>(node)); }
  const Tensor3& tensor(int node) const { return tensors_.at(static_cast<std::size_t>(node)); }

  /// Dimension of edge h: 2 for a leaf, the parent leg of node h otherwise.
  Eigen::Index bond_dim(int h) const;
  Eigen::Index max_bond_dim() const;

  /// Largest useful dimension of edge h for a given cap.
  Eigen::Index bond_dim_limit(int h, int chi) const;

  /// Canonical sites under heap id h.
  std::vector<int> subtree_sites(int h) const;

 private:
  SiteOrdering ordering_;
  TreeTopology topology_;
  int chi_max_;
  int center_ = 0;
  double log_norm_ = 0.0;
  std::vector<Tensor3> tensors_;
};

/// Bond-dimension-1 state with |-x> on masked sites and |+x> elsewhere.
TreeState product_state(const SiteOrdering& ordering, const ShapeMask& mask, int chi_max);

/// Normalised state with random complex Gaussian tensors, center at the root.
TreeState random_state(const SiteOrdering& ordering, int chi, std::mt19937_64& rng);

/// Grows every bond to bond_dim_limit(h, chi) with orthonormal directions
/// that carry zero weight, so the represented vector is unchanged.
void pad_bonds(TreeState& state, int chi);

/// QR steps along the tree path; the state vector is unchanged.
void move_center(TreeState& state, int node);

double norm(const TreeState& state);
/// Rescales the center tensor to unit norm and records log(norm) in log_norm.
void normalize(TreeState& state);

double expectation(const TreeState& state, const Observable& obs);

/// <X_s> (or <Z_s>) for every canonical site, from single-site reduced density matrices.
std::vector<double> local_x_all(const TreeState& state);
std::vector<double> local_z_all(const TreeState& state);
double average_x(const TreeState& state);

/// Reduced density matrix on every edge h >= 1, in that edge's bond basis.
std::vector<Eigen::MatrixXcd> edge_density_matrices(const TreeState& state);

/// Entropy across the bond above heap id h (0 for the root).
double subtree_entropy(const TreeState& state, int h);
/// Entropies of all bonds between internal nodes, indexed by heap id (entry 0 is 0).
std::vector<double> bond_entropies(const TreeState& state);
Observable subtree_entropy_observable(const TreeState& state, int h);

inline constexpr int kMaxFlattenSites = 20;

/// Amplitudes in the Z-product basis, canonical site order (bit s <-> site s).
Eigen::VectorXcd flatten(const TreeState& state);

struct TruncationResult {
  double discarded_weight = 0.0;  // relative squared weight, summed over bonds
  Eigen::Index max_bond = 0;
};

/// SVD truncation of every bond to at most chi, dropping singular values
/// whose relative squared weight is below svd_cutoff. Ends normalised at the root.
TruncationResult truncate(TreeState& state, int chi, double svd_cutoff = 1e-10);

/// Largest deviation from the identity of A^dagger A over all non-center tensors.
double isometry_defect(const TreeState& state);

void save_checkpoint(const TreeState& state, const std::filesystem::path& path);
TreeState load_checkpoint(const std::filesystem::path& path);

}  // namespace bubbledyn
