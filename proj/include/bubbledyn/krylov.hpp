#pragma once

#include <functional>
#include <stdexcept>

#include <Eigen/Core>

namespace bubbledyn {

/// out = H * in for a Hermitian H. `out` may arrive with any size.
using LinearMap = std::function<void(const Eigen::VectorXcd& in, Eigen::VectorXcd& out)>;

struct KrylovOptions {
  int max_dim = 25;
  double tol = 1e-10;      // relative residual estimate per (sub)step
  int max_substeps = 4096;
};

struct KrylovStats {
  int applications = 0;
  int substeps = 0;
  bool breakdown = false;
  double error_estimate = 0.0;  // sum over substeps
};

class KrylovError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// exp(-i H t) v by Lanczos with full reorthogonalisation. When the residual
/// estimate does not reach `tol` within max_dim vectors the step is split
/// into shorter substeps; an invariant subspace (zero beta) yields the exact
/// result. Throws KrylovError if max_substeps is exhausted.
Eigen::VectorXcd krylov_expm_apply(const LinearMap& apply_h, const Eigen::VectorXcd& v, double t,
                                   const KrylovOptions& options = {}, KrylovStats* stats = nullptr);

}  // namespace bubbledyn
