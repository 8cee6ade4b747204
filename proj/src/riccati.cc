#include "lqgbound/riccati.hpp"

#include <cmath>
#include <string>

namespace lqgbound {
namespace {

constexpr Eigen::Index kDenseLyapunovLimit = 30;

Matrix control_step(const Matrix& A, const Matrix& B, const Matrix& Q,
                    const Matrix& R, const Matrix& P) {
  const Matrix BtP = B.transpose() * P;
  const Matrix gain = (BtP * B + R).ldlt().solve(BtP * A);
  return symmetrize(Q + A.transpose() * P * A - A.transpose() * BtP.transpose() * gain);
}

Matrix filter_step(const Matrix& A, const Matrix& C, const Matrix& Sigma_w,
                   const Matrix& Sigma_v, const Matrix& S) {
  const Matrix innovation = C * S * C.transpose() + Sigma_v;
  Eigen::LDLT<Matrix> ldlt(innovation);
  if (ldlt.info() != Eigen::Success || !is_positive_definite(innovation)) {
    throw Error(ErrorCode::kDegenerateInnovation, "C S C' + Sigma_v is singular");
  }
  const Matrix CSAt = C * S * A.transpose();
  return symmetrize(A * S * A.transpose() - CSAt.transpose() * ldlt.solve(CSAt) +
                    Sigma_w);
}

double rel_change(const Matrix& next, const Matrix& prev) {
  const double scale = std::max(next.cwiseAbs().maxCoeff(), 1e-300);
  return (next - prev).cwiseAbs().maxCoeff() / scale;
}

void check_square(const Matrix& m, Eigen::Index n, const char* name) {
  if (m.rows() != n || m.cols() != n) {
    throw Error(ErrorCode::kInvalidDimensions, std::string(name) + " has wrong shape");
  }
}

}  // namespace

ControlSolution solve_control_dare(const Matrix& A, const Matrix& B,
                                   const Matrix& Q, const Matrix& R,
                                   const DareOptions& opts) {
  const Eigen::Index n = A.rows();
  check_square(A, n, "A");
  check_square(Q, n, "Q");
  check_square(R, B.cols(), "R");
  if (B.rows() != n) throw Error(ErrorCode::kInvalidDimensions, "B rows != d_x");
  if (!is_symmetric(Q, 1e-10 * std::max(1.0, Q.cwiseAbs().maxCoeff())) ||
      !is_positive_definite(Q)) {
    throw Error(ErrorCode::kInvalidCost, "Q must be symmetric positive definite");
  }
  if (!is_symmetric(R, 1e-10 * std::max(1.0, R.cwiseAbs().maxCoeff())) ||
      !is_positive_definite(R)) {
    throw Error(ErrorCode::kInvalidCost, "R must be symmetric positive definite");
  }

  ControlSolution sol;
  Matrix P = Q;
  bool converged = false;
  for (int it = 1; it <= opts.max_iterations; ++it) {
    Matrix next = control_step(A, B, Q, R, P);
    if (!next.allFinite()) break;
    const double change = rel_change(next, P);
    P = std::move(next);
    sol.iterations = it;
    if (change <= opts.rel_tol) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    throw Error(ErrorCode::kNotStabilizable,
                "control Riccati iteration did not converge");
  }
  const Matrix BtP = B.transpose() * P;
  sol.P = P;
  sol.K = -(BtP * B + R).ldlt().solve(BtP * A);
  sol.closed_loop = A + B * sol.K;
  if (spectral_radius(sol.closed_loop) >= 1.0) {
    throw Error(ErrorCode::kNotStabilizable, "A + BK is not stable");
  }
  return sol;
}

FilterSolution solve_filter_dare(const Matrix& A, const Matrix& C,
                                 const Matrix& Sigma_w, const Matrix& Sigma_v,
                                 const DareOptions& opts) {
  const Eigen::Index n = A.rows();
  check_square(A, n, "A");
  check_square(Sigma_w, n, "Sigma_w");
  check_square(Sigma_v, C.rows(), "Sigma_v");
  if (C.cols() != n) throw Error(ErrorCode::kInvalidDimensions, "C cols != d_x");
  if (lambda_min_sym(Sigma_w) < 0.0 || lambda_min_sym(Sigma_v) < 0.0) {
    throw Error(ErrorCode::kInvalidInput, "noise covariances must be PSD");
  }

  FilterSolution sol;
  Matrix S = Sigma_w;
  bool converged = false;
  for (int it = 1; it <= opts.max_iterations; ++it) {
    Matrix next = filter_step(A, C, Sigma_w, Sigma_v, S);
    if (!next.allFinite()) break;
    const double change = rel_change(next, S);
    S = std::move(next);
    sol.iterations = it;
    if (change <= opts.rel_tol) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    throw Error(ErrorCode::kNotDetectable, "filter Riccati iteration did not converge");
  }
  const Matrix innovation = C * S * C.transpose() + Sigma_v;
  if (!is_positive_definite(innovation)) {
    throw Error(ErrorCode::kDegenerateInnovation, "C S C' + Sigma_v is singular");
  }
  Eigen::LDLT<Matrix> ldlt(innovation);
  sol.S = S;
  sol.F = ldlt.solve(C * S).transpose();
  sol.Sigma_nu = symmetrize(sol.F * innovation * sol.F.transpose());
  sol.Xi = symmetrize(S - S * C.transpose() * ldlt.solve(C * S));
  const Matrix error_dynamics = (Matrix::Identity(n, n) - sol.F * C) * A;
  if (spectral_radius(error_dynamics) >= 1.0) {
    throw Error(ErrorCode::kNotDetectable, "(I - FC) A is not stable");
  }
  return sol;
}

Matrix closed_loop_gramian(const Matrix& closed_loop, const Matrix& Sigma_nu) {
  const Eigen::Index n = closed_loop.rows();
  check_square(closed_loop, n, "closed loop");
  check_square(Sigma_nu, n, "Sigma_nu");
  if (spectral_radius(closed_loop) >= 1.0) {
    throw Error(ErrorCode::kUnstableClosedLoop, "rho(M) >= 1");
  }
  if (n == 0) return Sigma_nu;
  if (n <= kDenseLyapunovLimit) {
    const Matrix lhs = Matrix::Identity(n * n, n * n) - kron(closed_loop, closed_loop);
    const Vector g = lhs.partialPivLu().solve(vec(Sigma_nu));
    return symmetrize(vec_inv(g, n, n));
  }
  // Smith doubling: Gamma_{k+1} = Gamma_k + M_k Gamma_k M_k', M_{k+1} = M_k^2.
  Matrix gamma = Sigma_nu;
  Matrix power = closed_loop;
  for (int it = 0; it < 200; ++it) {
    const Matrix increment = power * gamma * power.transpose();
    gamma += increment;
    power = power * power;
    if (increment.cwiseAbs().maxCoeff() <= 1e-16 * gamma.cwiseAbs().maxCoeff()) break;
  }
  return symmetrize(gamma);
}

Matrix finite_gramian(const Matrix& closed_loop, const Matrix& Sigma_nu,
                      double delta, int N) {
  const Eigen::Index n = closed_loop.rows();
  check_square(closed_loop, n, "closed loop");
  check_square(Sigma_nu, n, "Sigma_nu");
  if (N < 0) throw Error(ErrorCode::kInvalidInput, "N must be non-negative");
  const Matrix deflated = Sigma_nu - delta * Matrix::Identity(n, n);
  const double slack = 1e-12 * std::max(1.0, Sigma_nu.cwiseAbs().maxCoeff());
  if (delta < 0.0 || lambda_min_sym(deflated) < -slack) {
    throw Error(ErrorCode::kInvalidDelta, "Sigma_nu - delta I is indefinite");
  }
  Matrix sum = deflated;
  Matrix term = deflated;
  for (int j = 1; j <= N; ++j) {
    term = closed_loop * term * closed_loop.transpose();
    sum += term;
  }
  return symmetrize(sum);
}

ScalarRiccati scalar_control_riccati(double a, double b) {
  if (b == 0.0) throw Error(ErrorCode::kDivisionByZero, "scalar Riccati needs b != 0");
  const double b2 = b * b;
  const double disc = a * a * a * a + 2.0 * a * a * (b2 - 1.0) + (b2 + 1.0) * (b2 + 1.0);
  const double root = std::sqrt(disc);
  // Roots of b^2 p^2 + (1 - a^2 - b^2) p - 1 = 0; their product is -1/b^2, so
  // exactly one is non-negative. Keep whichever candidate is non-negative and
  // stabilizing.
  for (double sign : {1.0, -1.0}) {
    const double p = (a * a + b2 - 1.0 + sign * root) / (2.0 * b2);
    const double k = -b * p * a / (b2 * p + 1.0);
    if (p >= 0.0 && std::abs(a + b * k) < 1.0) return {p, k};
  }
  throw Error(ErrorCode::kNotStabilizable, "no stabilizing scalar root");
}

double control_dare_residual(const Matrix& A, const Matrix& B, const Matrix& Q,
                             const Matrix& R, const Matrix& P) {
  return sigma_max(P - control_step(A, B, Q, R, P)) / std::max(sigma_max(P), 1e-300);
}

double filter_dare_residual(const Matrix& A, const Matrix& C,
                            const Matrix& Sigma_w, const Matrix& Sigma_v,
                            const Matrix& S) {
  return sigma_max(S - filter_step(A, C, Sigma_w, Sigma_v, S)) /
         std::max(sigma_max(S), 1e-300);
}

}  // namespace lqgbound
