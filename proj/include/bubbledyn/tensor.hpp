#pragma once

#include <array>
#include <complex>

#include <Eigen/Core>

namespace bubbledyn {

using Complex = std::complex<double>;

/// Dense rank-3 tensor, column-major: element (i, j, k) sits at i + d0 * (j + d1 * k).
/// In the tree, legs 0 and 1 point to the children and leg 2 to the parent.
struct Tensor3 {
  std::array<Eigen::Index, 3> dims{1, 1, 1};
  Eigen::VectorXcd data = Eigen::VectorXcd::Zero(1);

  Tensor3() = default;
  Tensor3(Eigen::Index d0, Eigen::Index d1, Eigen::Index d2)
      : dims{d0, d1, d2}, data(Eigen::VectorXcd::Zero(d0 * d1 * d2)) {}

  Eigen::Index size() const { return dims[0] * dims[1] * dims[2]; }
  Eigen::Index dim(int leg) const { return dims[static_cast<std::size_t>(leg)]; }

  Complex& operator()(Eigen::Index i, Eigen::Index j, Eigen::Index k) {
    return data[i + dims[0] * (j + dims[1] * k)];
  }
  const Complex& operator()(Eigen::Index i, Eigen::Index j, Eigen::Index k) const {
    return data[i + dims[0] * (j + dims[1] * k)];
  }
};

namespace tensor_ops {

/// out(.., a', ..) = sum_a op(a', a) t(.., a, ..) on the given leg.
Tensor3 apply_leg(const Eigen::MatrixXcd& op, int leg, const Tensor3& t);

/// out += apply_leg(op, leg, t); out must already have the result shape.
void apply_leg_add(const Eigen::MatrixXcd& op, int leg, const Tensor3& t, Tensor3& out);

/// E(a, b) = sum over the other two legs of conj(bra(.., a, ..)) * ket(.., b, ..).
Eigen::MatrixXcd contract_except(const Tensor3& bra, const Tensor3& ket, int leg);

/// Matrix with rows = the other two legs (in order) and columns = `leg`.
Eigen::MatrixXcd matricize(const Tensor3& t, int leg);
Tensor3 unmatricize(const Eigen::MatrixXcd& m, int leg, std::array<Eigen::Index, 3> dims);

/// Thin QR across `leg`: t becomes an isometry over the other legs and the
/// returned R (new_dim x old_dim) carries the rest of the state along that leg.
Eigen::MatrixXcd qr_split(Tensor3& t, int leg);

/// Appends orthonormal directions to an isometry until `leg` has dimension
/// `new_dim` (bounded by the product of the other two dimensions).
void extend_isometry(Tensor3& t, int leg, Eigen::Index new_dim);

/// Zero-pads `leg` to `new_dim`.
void pad_leg(Tensor3& t, int leg, Eigen::Index new_dim);

}  // namespace tensor_ops
}  // namespace bubbledyn
