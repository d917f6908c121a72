#include "bubbledyn/krylov.hpp"

#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

namespace bubbledyn {

namespace {

// Coefficients of exp(-i T t) e_1 for a real symmetric tridiagonal T.
Eigen::VectorXcd tridiagonal_exp(const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>& eig, double t) {
  const Eigen::MatrixXd& s = eig.eigenvectors();
  const Eigen::VectorXd& lambda = eig.eigenvalues();
  Eigen::VectorXcd phase(lambda.size());
  for (Eigen::Index k = 0; k < lambda.size(); ++k) {
    phase[k] = std::polar(s(0, k), -lambda[k] * t);
  }
  return s.cast<std::complex<double>>() * phase;
}

}  // namespace

Eigen::VectorXcd krylov_expm_apply(const LinearMap& apply_h, const Eigen::VectorXcd& v, double t,
                                   const KrylovOptions& options, KrylovStats* stats) {
  if (options.max_dim < 2) throw std::invalid_argument("Krylov dimension must be at least 2");
  KrylovStats local;
  KrylovStats& st = stats ? *stats : local;

  Eigen::VectorXcd x = v;
  double remaining = t;
  std::vector<Eigen::VectorXcd> basis;
  basis.reserve(static_cast<std::size_t>(options.max_dim));
  Eigen::VectorXcd w;

  while (remaining != 0.0) {
    const double beta0 = x.norm();
    if (beta0 == 0.0) return x;
    if (st.substeps >= options.max_substeps) {
      throw KrylovError("Krylov exponential did not converge within " +
                        std::to_string(options.max_substeps) + " substeps");
    }
    basis.clear();
    basis.push_back(x / beta0);
    std::vector<double> alpha;
    std::vector<double> beta;
    double scale = 0.0;
    double step = remaining;
    Eigen::VectorXcd coeff;

    for (int j = 0; j < options.max_dim; ++j) {
      apply_h(basis[static_cast<std::size_t>(j)], w);
      ++st.applications;
      const double a = basis[static_cast<std::size_t>(j)].dot(w).real();
      w -= a * basis[static_cast<std::size_t>(j)];
      if (j > 0) w -= beta.back() * basis[static_cast<std::size_t>(j - 1)];
      for (const auto& q : basis) w -= q.dot(w) * q;
      const double b = w.norm();
      alpha.push_back(a);
      scale = std::max(scale, std::abs(a) + b + (beta.empty() ? 0.0 : beta.back()));

      const int m = j + 1;
      Eigen::MatrixXd tri = Eigen::MatrixXd::Zero(m, m);
      for (int k = 0; k < m; ++k) tri(k, k) = alpha[static_cast<std::size_t>(k)];
      for (int k = 0; k + 1 < m; ++k) tri(k, k + 1) = tri(k + 1, k) = beta[static_cast<std::size_t>(k)];
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(tri);

      const bool invariant = b <= 1e-13 * std::max(scale, 1.0);
      coeff = tridiagonal_exp(eig, remaining);
      double err = b * std::abs(coeff[m - 1]);
      if (invariant) {
        st.breakdown = true;
        err = 0.0;
      }
      if (err <= options.tol) {
        st.error_estimate += err;
        break;
      }
      if (m == options.max_dim) {
        // Shorten the step until the same subspace is accurate enough.
        do {
          step *= 0.5;
          coeff = tridiagonal_exp(eig, step);
          err = b * std::abs(coeff[m - 1]);
        } while (err > options.tol && std::abs(step) > 1e-300);
        st.error_estimate += err;
        break;
      }
      beta.push_back(b);
      basis.push_back(w / b);
    }

    Eigen::VectorXcd next = Eigen::VectorXcd::Zero(x.size());
    for (Eigen::Index k = 0; k < coeff.size(); ++k) next += coeff[k] * basis[static_cast<std::size_t>(k)];
    x = beta0 * next;
    remaining -= step;
    ++st.substeps;
  }
  return x;
}

}  // namespace bubbledyn
