#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "lqgbound/matcalc.hpp"
#include "lqgbound/montecarlo.hpp"
#include "lqgbound/riccati.hpp"

namespace lqgbound {

enum class Mode { kStateFeedback, kPartiallyObserved };

/// Raw system description at the nominal parameter. In state-feedback mode
/// C and Sigma_v may be left empty; they are filled with I and 0.
struct LqgSystem {
  Matrix A, B, C, Q, R, Sigma_w, Sigma_v;
  Mode mode = Mode::kStateFeedback;

  Eigen::Index d_x() const { return A.rows(); }
  Eigen::Index d_u() const { return B.cols(); }
  Eigen::Index d_y() const { return C.rows(); }
};

/// A validated system together with its Riccati solutions.
struct LqgInstance {
  LqgSystem sys;
  ControlSolution control;
  FilterSolution filter;
  Matrix gamma;     // stationary covariance of xhat under the optimal policy
  Matrix Sigma_x0;  // initial state covariance
  Matrix noise_w, noise_v, noise_x0;  // square-root factors for sampling

  Eigen::Index d_x() const { return sys.d_x(); }
  Eigen::Index d_u() const { return sys.d_u(); }
  Eigen::Index d_y() const { return sys.d_y(); }
  Mode mode() const { return sys.mode; }
  const Matrix& K() const { return control.K; }
  const Matrix& P() const { return control.P; }
  /// B'PB + R, the Hessian (over two) of the Bellman gap in u.
  Matrix bpbr() const;
};

/// Validates shapes and noise nondegeneracy, then solves both Riccati
/// equations. In state-feedback mode x_0 ~ N(0, Gamma) with Gamma the
/// stationary closed-loop covariance; in partially observed mode x_0 ~ N(0, S).
LqgInstance build_instance(const LqgSystem& sys);

/// Same cost and noise as `inst`, different (A, B, C); re-solves everything.
LqgInstance with_matrices(const LqgInstance& inst, const Matrix& A,
                          const Matrix& B, const Matrix& C);

struct SystemTriple {
  Matrix A, B, C;
};

enum class ParamKind {
  kUnstructured,
  kUnstructuredAB,
  kBOnly,
  kSimchoCoordinates,
  kAffine,
  kCustom,
};

std::string_view ParamKindName(ParamKind kind);

/// Smooth map theta -> (A(theta), B(theta), C(theta)).
///
/// Jacobians are taken with respect to the stacked vector
/// [vec A; vec B; vec C], which has d_x^2 + d_x d_u + d_y d_x rows.
class Parametrization {
 public:
  using CustomMap = std::function<SystemTriple(const Vector&)>;

  /// vec[A B C] = theta.
  static Parametrization Unstructured(const LqgSystem& sys);
  /// vec[A B] = theta, C fixed.
  static Parametrization UnstructuredAB(const LqgSystem& sys);
  /// vec B = theta, A and C fixed.
  static Parametrization BOnly(const LqgSystem& sys);
  /// A(theta) = A - Delta K, B(theta) = B + Delta with Delta = vec^-1(theta),
  /// i.e. the directions along which the optimal trajectory does not change.
  static Parametrization SimchoCoordinates(const LqgSystem& sys, const Matrix& K);
  /// (A0, B0, C0) + sum_i theta_i (A_i, B_i, C_i).
  static Parametrization Affine(SystemTriple nominal, std::vector<SystemTriple> basis);
  static Parametrization Custom(Eigen::Index d_theta, CustomMap map, Vector nominal_theta);

  ParamKind kind() const { return kind_; }
  Eigen::Index d_theta() const { return d_theta_; }
  /// Parameter value at which evaluate() returns the nominal system.
  const Vector& nominal_theta() const { return theta0_; }
  bool is_affine() const { return kind_ != ParamKind::kCustom; }

  Eigen::Index d_x() const { return nominal_.A.rows(); }
  Eigen::Index d_u() const { return nominal_.B.cols(); }
  Eigen::Index d_y() const { return nominal_.C.rows(); }

  SystemTriple evaluate(const Vector& theta) const;
  Matrix jacobian_abc(const Vector& theta) const;

  const std::vector<SystemTriple>& affine_basis() const { return basis_; }
  const Matrix& simcho_gain() const { return gain_; }

 private:
  Parametrization() = default;

  ParamKind kind_ = ParamKind::kUnstructured;
  Eigen::Index d_theta_ = 0;
  SystemTriple nominal_;
  Vector theta0_;
  std::vector<SystemTriple> basis_;
  Matrix gain_;
  CustomMap custom_;
};

SystemTriple evaluate(const Parametrization& p, const Vector& theta);
Matrix jacobian_abc(const Parametrization& p, const Vector& theta);
/// Rows of a [vec A; vec B; vec C] Jacobian that belong to vec[A B] / vec C.
Matrix ab_rows(const Matrix& jac, Eigen::Index d_x, Eigen::Index d_u);
Matrix c_rows(const Matrix& jac, Eigen::Index d_x, Eigen::Index d_u);

enum class PolicyKind { kOptimal, kCertaintyEquivalenceDither, kLinearFeedback, kCustom };

struct PolicySpec {
  using CustomFn = std::function<Vector(int t, const Vector& xhat, Rng& rng)>;

  PolicyKind kind = PolicyKind::kOptimal;
  Matrix feedback;  // LinearFeedback gain acting on xhat

  // Certainty-equivalence with decaying dither sigma_t = sigma0 * max(t,1)^-beta.
  double sigma0 = 0.0;
  double beta = 0.25;
  bool adapt_gain = true;  // false freezes the gain at its initial value
  double ridge = 1e-6;
  // A refit is only attempted once lambda_min of the regression Gram matrix
  // reaches min_excitation * lambda_max(Sigma_w), i.e. once the least-squares
  // error along the worst direction has standard deviation <= 1/sqrt(25).
  double min_excitation = 25.0;
  Matrix initial_gain;     // empty -> the instance's optimal K

  CustomFn custom;

  static PolicySpec Optimal();
  static PolicySpec LinearFeedback(Matrix gain);
  static PolicySpec CeDither(double sigma0, double beta);
  static PolicySpec Custom(CustomFn fn);

  std::string describe() const;
  double dither_std(int t) const;
};

/// Stateful per-rollout realization of a PolicySpec.
///
/// The certainty-equivalence variant regresses xhat_{t+1} on
/// z_t = (xhat_t, u_t) with ridge-regularized least squares and re-solves
/// the control Riccati equation for the estimated (A, B) at t = 16, 32, 64,
/// ... A refit is skipped while the regression is too poorly excited (see
/// PolicySpec::min_excitation); estimates that do not yield a stabilizing gain
/// for the estimated model are discarded and the previous gain is kept.
class PolicyRunner {
 public:
  PolicyRunner(const PolicySpec& spec, const LqgInstance& inst);

  Vector act(int t, const Vector& xhat, Rng& rng);
  void observe(const Vector& xhat, const Vector& u, const Vector& xhat_next);
  const Matrix& gain() const { return gain_; }

 private:
  void refit();

  const PolicySpec* spec_;
  const LqgInstance* inst_;
  Matrix gain_;
  Matrix gram_;   // ridge I + sum z z'
  Matrix cross_;  // sum xhat_{t+1} z'
  double excitation_floor_ = 0.0;
  int samples_ = 0;
  int next_refit_ = 16;
};

Vector policy_action(PolicyRunner& runner, int t, const Vector& xhat, Rng& rng);

/// One rollout. Columns are time indices.
struct Trajectory {
  Matrix x;     // d_x x (T+1)
  Matrix u;     // d_u x T
  Matrix y;     // d_y x (T+1)
  Matrix xhat;  // d_x x (T+1)
  Matrix zeta;  // d_x x (T+1), zeta_t = E[x_t | y_0..y_{t-1}]
  Matrix nu;    // d_x x T
  std::uint64_t seed = 0;

  int horizon() const { return static_cast<int>(u.cols()); }
};

/// Rolls out the system with the stationary Kalman filter running alongside.
/// Deterministic in `seed`.
Trajectory simulate(const LqgInstance& inst, const PolicySpec& policy, int T,
                    std::uint64_t seed);

/// simulate() for rollout `index` of a Monte Carlo batch with master seed.
Trajectory simulate_rollout(const LqgInstance& inst, const PolicySpec& policy,
                            int T, std::uint64_t master_seed, std::uint64_t index);

}  // namespace lqgbound
