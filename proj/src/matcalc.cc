#include "lqgbound/matcalc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace lqgbound {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidInput: return "InvalidInput";
    case ErrorCode::kSingularCovariance: return "SingularCovariance";
    case ErrorCode::kInvalidCost: return "InvalidCost";
    case ErrorCode::kNotStabilizable: return "NotStabilizable";
    case ErrorCode::kNotDetectable: return "NotDetectable";
    case ErrorCode::kDegenerateInnovation: return "DegenerateInnovation";
    case ErrorCode::kUnstableClosedLoop: return "UnstableClosedLoop";
    case ErrorCode::kInvalidDelta: return "InvalidDelta";
    case ErrorCode::kDivisionByZero: return "DivisionByZero";
    case ErrorCode::kInvalidDimensions: return "InvalidDimensions";
    case ErrorCode::kNondegeneracyViolated: return "NondegeneracyViolated";
    case ErrorCode::kInvalidTheta: return "InvalidTheta";
    case ErrorCode::kWrongMode: return "WrongMode";
    case ErrorCode::kInvalidPrior: return "InvalidPrior";
    case ErrorCode::kDegenerateClosedLoop: return "DegenerateClosedLoop";
    case ErrorCode::kNotOveractuated: return "NotOveractuated";
  }
  return "Unknown";
}

SubspaceBasis::SubspaceBasis(Matrix columns) : columns_(std::move(columns)) {
  if (columns_.cols() > columns_.rows()) {
    throw Error(ErrorCode::kInvalidInput, "more basis vectors than dimensions");
  }
  if (columns_.cols() > 0) {
    const Matrix gram = columns_.transpose() * columns_;
    const Matrix eye = Matrix::Identity(gram.rows(), gram.cols());
    if ((gram - eye).cwiseAbs().maxCoeff() > 1e-10) {
      throw Error(ErrorCode::kInvalidInput, "basis columns are not orthonormal");
    }
  }
}

SubspaceBasis SubspaceBasis::Empty(Eigen::Index ambient_dim) {
  return SubspaceBasis(Matrix(ambient_dim, 0));
}

SubspaceBasis SubspaceBasis::FromSpan(const Matrix& spanning, double rel_tol) {
  if (spanning.cols() == 0) return Empty(spanning.rows());
  Eigen::JacobiSVD<Matrix> svd(spanning, Eigen::ComputeThinU);
  const auto& s = svd.singularValues();
  const double cutoff = rel_tol * std::max(s(0), 1e-300);
  Eigen::Index rank = 0;
  while (rank < s.size() && s(rank) > cutoff) ++rank;
  return SubspaceBasis(Matrix(svd.matrixU().leftCols(rank)));
}

Vector vec(const Matrix& m) {
  return Eigen::Map<const Vector>(m.data(), m.size());
}

Matrix vec_inv(const Vector& v, Eigen::Index rows, Eigen::Index cols) {
  if (v.size() != rows * cols) {
    throw Error(ErrorCode::kInvalidDimensions, "vec_inv size mismatch");
  }
  return Eigen::Map<const Matrix>(v.data(), rows, cols);
}

Matrix kron(const Matrix& m, const Matrix& n) {
  Matrix out(m.rows() * n.rows(), m.cols() * n.cols());
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      out.block(i * n.rows(), j * n.cols(), n.rows(), n.cols()) = m(i, j) * n;
    }
  }
  return out;
}

SubspaceBasis kernel_basis(const Matrix& m, std::optional<double> tol) {
  if (m.rows() != m.cols()) {
    throw Error(ErrorCode::kInvalidInput, "kernel_basis needs a square matrix");
  }
  const Eigen::Index n = m.rows();
  if (n == 0) return SubspaceBasis::Empty(0);
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if (!is_symmetric(m, 1e-10 * scale)) {
    throw Error(ErrorCode::kInvalidInput, "kernel_basis needs a symmetric matrix");
  }
  const double rel = tol.value_or(static_cast<double>(n) *
                                  std::numeric_limits<double>::epsilon());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(symmetrize(m));
  const Vector& lambda = eig.eigenvalues();  // ascending
  const double cutoff = rel * std::max(1.0, lambda(n - 1));
  Eigen::Index k = 0;
  while (k < n && lambda(k) <= cutoff) ++k;
  Matrix cols = eig.eigenvectors().leftCols(k);
  // Re-orthonormalize so the strict SubspaceBasis check never trips on
  // eigensolver round-off.
  if (k > 0) {
    Eigen::HouseholderQR<Matrix> qr(cols);
    cols = qr.householderQ() * Matrix::Identity(n, k);
  }
  return SubspaceBasis(std::move(cols));
}

Matrix orth_projector(const SubspaceBasis& v) {
  return v.columns() * v.columns().transpose();
}

double subspace_sin_distance(const SubspaceBasis& v, const SubspaceBasis& w) {
  if (v.ambient_dim() != w.ambient_dim()) {
    throw Error(ErrorCode::kInvalidInput, "subspaces live in different spaces");
  }
  const Eigen::Index n = v.ambient_dim();
  if (n == 0 || w.dim() == 0) return 0.0;
  const Matrix residual =
      (Matrix::Identity(n, n) - orth_projector(v)) * orth_projector(w);
  return std::clamp(sigma_max(residual), 0.0, 1.0);
}

Matrix gaussian_fisher(const Matrix& mu_jac, const Matrix& sigma,
                       const Matrix& sigma_jac) {
  const Eigen::Index d = sigma.rows();
  if (sigma.cols() != d || mu_jac.rows() != d || sigma_jac.rows() != d * d ||
      mu_jac.cols() != sigma_jac.cols()) {
    throw Error(ErrorCode::kInvalidDimensions, "gaussian_fisher shapes");
  }
  Eigen::LLT<Matrix> llt(sigma);
  if (llt.info() != Eigen::Success || !is_positive_definite(sigma)) {
    throw Error(ErrorCode::kSingularCovariance, "Sigma is not positive definite");
  }
  const Matrix sigma_inv = llt.solve(Matrix::Identity(d, d));
  // tr(S^-1 dS_m S^-1 dS_n) = vec(dS_m)^T (S^-1 kron S^-1) vec(dS_n).
  const Matrix mean_part = mu_jac.transpose() * sigma_inv * mu_jac;
  const Matrix cov_part =
      0.5 * sigma_jac.transpose() * kron(sigma_inv, sigma_inv) * sigma_jac;
  return symmetrize(mean_part + cov_part);
}

double spectral_radius(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::EigenSolver<Matrix> es(m, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

double sigma_min(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(svd.singularValues().size() - 1);
}

double sigma_max(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

double lambda_min_sym(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(symmetrize(m),
                                            Eigen::EigenvaluesOnly);
  return eig.eigenvalues()(0);
}

Matrix symmetrize(const Matrix& m) { return 0.5 * (m + m.transpose()); }

bool is_symmetric(const Matrix& m, double tol) {
  return m.rows() == m.cols() && (m - m.transpose()).cwiseAbs().maxCoeff() <= tol;
}

bool is_positive_definite(const Matrix& m) {
  if (m.rows() != m.cols()) return false;
  if (m.size() == 0) return true;
  return lambda_min_sym(m) > 0.0;
}

Matrix psd_sqrt_factor(const Matrix& m) {
  if (m.size() == 0) return m;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(symmetrize(m));
  const Vector root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * root.asDiagonal();
}

}  // namespace lqgbound
