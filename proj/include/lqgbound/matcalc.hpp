#pragma once

#include <Eigen/Dense>
#include <optional>

#include "lqgbound/errors.hpp"

namespace lqgbound {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Orthonormal basis of a subspace of R^n, stored as the columns of an n x k
/// matrix. k may be zero; the ambient dimension is still tracked in that case.
class SubspaceBasis {
 public:
  SubspaceBasis() = default;

  /// Wraps columns that are already orthonormal (checked to 1e-10).
  explicit SubspaceBasis(Matrix columns);

  static SubspaceBasis Empty(Eigen::Index ambient_dim);
  /// Orthonormalizes the span of `spanning` (rank decided at `rel_tol`).
  static SubspaceBasis FromSpan(const Matrix& spanning, double rel_tol = 1e-10);

  const Matrix& columns() const { return columns_; }
  Eigen::Index ambient_dim() const { return columns_.rows(); }
  Eigen::Index dim() const { return columns_.cols(); }

 private:
  Matrix columns_;
};

Vector vec(const Matrix& m);
Matrix vec_inv(const Vector& v, Eigen::Index rows, Eigen::Index cols);
Matrix kron(const Matrix& m, const Matrix& n);

/// Eigen-decomposition kernel of a symmetric PSD matrix: eigenvectors whose
/// eigenvalue is <= tol * max(1, lambda_max). Without `tol` the numerical-rank
/// default n * machine-epsilon is used.
SubspaceBasis kernel_basis(const Matrix& m, std::optional<double> tol = {});

Matrix orth_projector(const SubspaceBasis& v);

/// Spectral norm of (I - P_V) P_W.
double subspace_sin_distance(const SubspaceBasis& v, const SubspaceBasis& w);

/// Fisher information of N(mu(theta), Sigma(theta)) given the Jacobians of
/// mu (d x d_theta) and of vec Sigma (d^2 x d_theta).
Matrix gaussian_fisher(const Matrix& mu_jac, const Matrix& sigma,
                       const Matrix& sigma_jac);

// Small numeric helpers used throughout.
double spectral_radius(const Matrix& m);
double sigma_min(const Matrix& m);
double sigma_max(const Matrix& m);
double lambda_min_sym(const Matrix& m);
Matrix symmetrize(const Matrix& m);
bool is_symmetric(const Matrix& m, double tol);
bool is_positive_definite(const Matrix& m);
/// Symmetric square root factor L with L L^T = M for PSD M (eigen-based, so
/// singular covariances are fine).
Matrix psd_sqrt_factor(const Matrix& m);

}  // namespace lqgbound
