#include "bubbledyn/tensor.hpp"

#include <stdexcept>

#include <Eigen/QR>

namespace bubbledyn::tensor_ops {

namespace {

using MapM = Eigen::Map<Eigen::MatrixXcd>;
using CMapM = Eigen::Map<const Eigen::MatrixXcd>;

void check_leg(int leg) {
  if (leg < 0 || leg > 2) throw std::invalid_argument("tensor leg must be 0, 1 or 2");
}

}  // namespace

void apply_leg_add(const Eigen::MatrixXcd& op, int leg, const Tensor3& t, Tensor3& out) {
  check_leg(leg);
  const auto [d0, d1, d2] = t.dims;
  if (op.cols() != t.dim(leg)) throw std::invalid_argument("operator does not match tensor leg");
  auto expect = t.dims;
  expect[static_cast<std::size_t>(leg)] = op.rows();
  if (out.dims != expect) throw std::invalid_argument("output tensor has the wrong shape");

  if (leg == 0) {
    MapM(out.data.data(), op.rows(), d1 * d2).noalias() += op * CMapM(t.data.data(), d0, d1 * d2);
  } else if (leg == 2) {
    MapM(out.data.data(), d0 * d1, op.rows()).noalias() += CMapM(t.data.data(), d0 * d1, d2) * op.transpose();
  } else {
    const Eigen::Index n1 = op.rows();
#pragma omp parallel for schedule(static) if (d2 > 16 && d0 * d1 > 64)
    for (Eigen::Index k = 0; k < d2; ++k) {
      MapM(out.data.data() + k * d0 * n1, d0, n1).noalias() +=
          CMapM(t.data.data() + k * d0 * d1, d0, d1) * op.transpose();
    }
  }
}

Tensor3 apply_leg(const Eigen::MatrixXcd& op, int leg, const Tensor3& t) {
  check_leg(leg);
  auto dims = t.dims;
  dims[static_cast<std::size_t>(leg)] = op.rows();
  Tensor3 out(dims[0], dims[1], dims[2]);
  apply_leg_add(op, leg, t, out);
  return out;
}

Eigen::MatrixXcd contract_except(const Tensor3& bra, const Tensor3& ket, int leg) {
  check_leg(leg);
  for (int l = 0; l < 3; ++l) {
    if (l != leg && bra.dim(l) != ket.dim(l)) throw std::invalid_argument("contracted legs differ in size");
  }
  const auto [b0, b1, b2] = bra.dims;
  const auto [k0, k1, k2] = ket.dims;
  if (leg == 0) {
    return CMapM(bra.data.data(), b0, b1 * b2).conjugate() * CMapM(ket.data.data(), k0, k1 * k2).transpose();
  }
  if (leg == 2) {
    return CMapM(bra.data.data(), b0 * b1, b2).adjoint() * CMapM(ket.data.data(), k0 * k1, k2);
  }
  Eigen::MatrixXcd e = Eigen::MatrixXcd::Zero(b1, k1);
  for (Eigen::Index k = 0; k < b2; ++k) {
    e.noalias() += CMapM(bra.data.data() + k * b0 * b1, b0, b1).adjoint() *
                   CMapM(ket.data.data() + k * k0 * k1, k0, k1);
  }
  return e;
}

Eigen::MatrixXcd matricize(const Tensor3& t, int leg) {
  check_leg(leg);
  const auto [d0, d1, d2] = t.dims;
  if (leg == 2) return CMapM(t.data.data(), d0 * d1, d2);
  if (leg == 0) return CMapM(t.data.data(), d0, d1 * d2).transpose();
  Eigen::MatrixXcd m(d0 * d2, d1);
  for (Eigen::Index k = 0; k < d2; ++k)
    for (Eigen::Index j = 0; j < d1; ++j)
      for (Eigen::Index i = 0; i < d0; ++i) m(i + d0 * k, j) = t(i, j, k);
  return m;
}

Tensor3 unmatricize(const Eigen::MatrixXcd& m, int leg, std::array<Eigen::Index, 3> dims) {
  check_leg(leg);
  Tensor3 t(dims[0], dims[1], dims[2]);
  const auto [d0, d1, d2] = dims;
  if (m.cols() != dims[static_cast<std::size_t>(leg)] || m.rows() * m.cols() != t.size()) {
    throw std::invalid_argument("matrix shape does not match tensor");
  }
  if (leg == 2) {
    MapM(t.data.data(), d0 * d1, d2) = m;
  } else if (leg == 0) {
    MapM(t.data.data(), d0, d1 * d2) = m.transpose();
  } else {
    for (Eigen::Index k = 0; k < d2; ++k)
      for (Eigen::Index j = 0; j < d1; ++j)
        for (Eigen::Index i = 0; i < d0; ++i) t(i, j, k) = m(i + d0 * k, j);
  }
  return t;
}

Eigen::MatrixXcd qr_split(Tensor3& t, int leg) {
  const Eigen::MatrixXcd m = matricize(t, leg);
  const Eigen::Index k = std::min(m.rows(), m.cols());
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(m);
  Eigen::MatrixXcd q = qr.householderQ() * Eigen::MatrixXcd::Identity(m.rows(), k);
  Eigen::MatrixXcd r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
  auto dims = t.dims;
  dims[static_cast<std::size_t>(leg)] = k;
  t = unmatricize(q, leg, dims);
  return r;
}

void extend_isometry(Tensor3& t, int leg, Eigen::Index new_dim) {
  const Eigen::MatrixXcd m = matricize(t, leg);
  const Eigen::Index old_dim = m.cols();
  new_dim = std::min(new_dim, m.rows());
  if (new_dim <= old_dim) return;
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(m);
  const Eigen::MatrixXcd full = qr.householderQ();
  Eigen::MatrixXcd ext(m.rows(), new_dim);
  ext.leftCols(old_dim) = m;
  ext.rightCols(new_dim - old_dim) = full.middleCols(old_dim, new_dim - old_dim);
  auto dims = t.dims;
  dims[static_cast<std::size_t>(leg)] = new_dim;
  t = unmatricize(ext, leg, dims);
}

void pad_leg(Tensor3& t, int leg, Eigen::Index new_dim) {
  check_leg(leg);
  if (new_dim <= t.dim(leg)) return;
  auto dims = t.dims;
  dims[static_cast<std::size_t>(leg)] = new_dim;
  Tensor3 out(dims[0], dims[1], dims[2]);
  for (Eigen::Index k = 0; k < t.dims[2]; ++k)
    for (Eigen::Index j = 0; j < t.dims[1]; ++j)
      for (Eigen::Index i = 0; i < t.dims[0]; ++i) out(i, j, k) = t(i, j, k);
  t = std::move(out);
}

}  // namespace bubbledyn::tensor_ops
