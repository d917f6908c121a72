#pragma once

#include <array>
#include <functional>
#include <memory>
#include <vector>

#include <Eigen/Core>

#include "bubbledyn/hamiltonian.hpp"
#include "bubbledyn/krylov.hpp"
#include "bubbledyn/ttn.hpp"

namespace bubbledyn {

struct TdvpConfig {
  double dt = 0.05;
  int chi = 64;
  int krylov_dim = 25;
  double krylov_tol = 1e-10;
  double svd_cutoff = 1e-10;

  /// Throws std::invalid_argument unless dt > 0, chi >= 1 and krylov_dim >= 2.
  void validate() const;
};

/// Hamiltonian restricted to one side of a tree edge, in that edge's bond basis:
/// every term acting only inside the region, plus the single-site factors of
/// terms that cross the edge.
struct Environment {
  struct BoundaryOp {
    int site = 0;
    Pauli op = Pauli::X;
    Eigen::MatrixXcd matrix;
  };

  Eigen::MatrixXcd block;
  std::vector<BoundaryOp> ops;

  Eigen::Index dim() const { return block.rows(); }
  const BoundaryOp* find(int site, Pauli op) const;
};

/// Environments of both sides of every edge for a given TermList. up(h) is the
/// subtree below heap id h, down(h) its complement; both live in the basis of
/// edge h. Entries are valid only for the gauge they were computed in.
class EnvironmentCache {
 public:
  EnvironmentCache(const TreeTopology& topology, const SiteOrdering& ordering, const TermList& terms);

  const Environment& up(int h) const { return up_.at(static_cast<std::size_t>(h)); }
  const Environment& down(int h) const { return down_.at(static_cast<std::size_t>(h)); }

  /// Recomputes up(n) from node n, which must be an isometry toward its parent.
  void update_up(const TreeState& state, int node);
  /// Recomputes down(c) from its parent node, which must be an isometry toward c.
  void update_down(const TreeState& state, int child);
  /// Every up() entry, bottom-up; the state's center must be at the root.
  void rebuild_up(const TreeState& state);

  /// Environments seen by the three legs of internal node n.
  std::array<const Environment*, 3> node_envs(int node) const;
  /// Environments of bond h: subtree side on leg 0, complement on leg 1.
  std::array<const Environment*, 3> bond_envs(int h) const;

  int num_sites() const { return num_sites_; }
  const TreeTopology& topology() const { return topology_; }

  /// Sites (as 0/1 flags) in the region seen by a leg of node n, or by leg
  /// 0/1/2 of bond h (subtree, complement, nothing).
  const std::vector<char>& node_region(int node, int leg) const;
  const std::vector<char>& bond_region(int h, int leg) const;

  struct Partner {
    Pauli op;
    int other;
    Pauli other_op;
    double coeff;
  };
  const std::vector<Partner>& partners(int site) const { return partners_.at(static_cast<std::size_t>(site)); }

 private:
  Environment combine(const Tensor3& a, int out_leg, int node) const;

  TreeTopology topology_;
  int num_sites_;
  std::vector<int> heap_of_site_;
  std::vector<std::vector<Partner>> partners_;
  std::vector<std::vector<char>> in_subtree_;   // per heap id, indexed by site
  std::vector<std::vector<char>> outside_;      // complements of in_subtree_
  std::vector<char> nowhere_;
  std::vector<Environment> up_;
  std::vector<Environment> down_;
  Environment empty_;
};

/// H_eff on a tensor with one environment per leg; legs whose region is
/// empty carry a 1x1 zero block.
class LocalOperator {
 public:
  LocalOperator(const std::array<const Environment*, 3>& envs,
                const std::array<const std::vector<char>*, 3>& regions, const EnvironmentCache& cache);

  Tensor3 apply(const Tensor3& t) const;
  double expectation(const Tensor3& t) const;

 private:
  struct Cross {
    int leg_a;
    Eigen::MatrixXcd op_a;
    int leg_b;
    Eigen::MatrixXcd op_b;
  };
  std::array<const Environment*, 3> envs_;
  std::vector<Cross> cross_;
};

struct SweepStats {
  int exponentials = 0;
  int applications = 0;
  int substeps = 0;
  double krylov_error = 0.0;
  double norm_before_normalize = 1.0;
};

/// Second-order single-site TDVP: a depth-first forward traversal with dt/2,
/// then its mirror image with dt/2. Node tensors move forward in time, the
/// bond matrices between them backward.
class TdvpEngine {
 public:
  TdvpEngine(const TermList& terms, TdvpConfig config);

  /// Pads bonds to the configured chi, puts the center at the root,
  /// normalises (log_norm reset to 0) and builds the environments.
  void prepare(TreeState& state);

  /// One time step of length dt. Throws KrylovError on non-convergence.
  void sweep(TreeState& state);

  /// <psi|H|psi>/<psi|psi> from the cached environments (center at root).
  double energy(const TreeState& state) const;

  /// Energies obtained by contracting the environments of every bond with
  /// its bond matrix, indexed by heap id (entry 0 is the root tensor). All
  /// entries agree when the cache is consistent. The center ends back at the root.
  std::vector<double> edge_energies(TreeState& state);

  const TdvpConfig& config() const { return config_; }
  const SweepStats& last_stats() const { return stats_; }
  bool prepared() const { return cache_ != nullptr; }

 private:
  void forward(TreeState& state, int node, double tau);
  void reverse(TreeState& state, int node, double tau);
  void evolve_node(TreeState& state, int node, double tau);
  Eigen::MatrixXcd evolve_bond(int h, const Eigen::MatrixXcd& bond, double tau);
  Eigen::VectorXcd exponentiate(const LocalOperator& op, const Tensor3& shape, const Eigen::VectorXcd& v, double tau);
  void visit_energies(TreeState& state, int node, std::vector<double>& out);

  TermList terms_;
  TdvpConfig config_;
  std::unique_ptr<EnvironmentCache> cache_;
  SweepStats stats_;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<double> energies;
  std::vector<double> norms;  // exp(log_norm): accumulated norm drift
};

/// Called at t = 0 and after every step.
using StepCallback = std::function<void(double t, const TreeState& state, double energy)>;

/// round(t_max / dt) sweeps from the prepared state; t_max = 0 samples t = 0 only.
Trajectory evolve(TreeState& state, const TermList& terms, const TdvpConfig& config, double t_max,
                  const StepCallback& callback = {});

}  // namespace bubbledyn
