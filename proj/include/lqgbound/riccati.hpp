#pragma once

#include "lqgbound/matcalc.hpp"

namespace lqgbound {

/// Stabilizing solution of the control Riccati equation
///   P = Q + A'PA - A'PB (B'PB + R)^-1 B'PA,   K = -(B'PB + R)^-1 B'PA,
/// so that the optimal stationary policy is u = K x and A + BK is stable.
struct ControlSolution {
  Matrix P;
  Matrix K;
  Matrix closed_loop;  // A + B K
  int iterations = 0;
};

/// Stationary Kalman filter quantities. S is the one-step prediction error
/// covariance, F the filter gain, Sigma_nu the covariance of the filtered
/// state innovation F (y_{t+1} - C (A xhat_t + B u_t)), and Xi the filtering
/// error covariance Cov(x_t - xhat_t).
struct FilterSolution {
  Matrix S;
  Matrix F;
  Matrix Sigma_nu;
  Matrix Xi;
  int iterations = 0;
};

struct DareOptions {
  double rel_tol = 1e-12;
  int max_iterations = 100000;
};

/// Value iteration from P_0 = Q. Throws kInvalidCost for non-PD Q or R and
/// kNotStabilizable when the iteration does not converge to a stabilizing P.
ControlSolution solve_control_dare(const Matrix& A, const Matrix& B,
                                   const Matrix& Q, const Matrix& R,
                                   const DareOptions& opts = {});

/// Dual iteration from S_0 = Sigma_w. Throws kDegenerateInnovation when
/// C S C' + Sigma_v is singular and kNotDetectable on non-convergence.
FilterSolution solve_filter_dare(const Matrix& A, const Matrix& C,
                                 const Matrix& Sigma_w, const Matrix& Sigma_v,
                                 const DareOptions& opts = {});

/// Gamma = M Gamma M' + Sigma_nu for a stable M (kUnstableClosedLoop otherwise).
Matrix closed_loop_gramian(const Matrix& closed_loop, const Matrix& Sigma_nu);

/// sum_{j=0}^{N} M^j (Sigma_nu - delta I) M^j'. kInvalidDelta when the
/// deflated covariance is indefinite.
Matrix finite_gramian(const Matrix& closed_loop, const Matrix& Sigma_nu,
                      double delta, int N);

struct ScalarRiccati {
  double p = 0.0;
  double k = 0.0;
};

/// Closed-form scalar control Riccati solution with q = r = 1, stabilizing
/// branch. kDivisionByZero for b == 0.
ScalarRiccati scalar_control_riccati(double a, double b);

/// Residual of the control Riccati equation in spectral norm, relative to |P|.
double control_dare_residual(const Matrix& A, const Matrix& B, const Matrix& Q,
                             const Matrix& R, const Matrix& P);
double filter_dare_residual(const Matrix& A, const Matrix& C,
                            const Matrix& Sigma_w, const Matrix& Sigma_v,
                            const Matrix& S);

}  // namespace lqgbound
