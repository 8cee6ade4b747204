#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "lqgbound/model.hpp"

namespace lqgbound {

enum class InfoKind { kStateFeedbackExact, kOutputUpperBound, kScoreOracle, kOptimalPolicyPerStep };

/// A Fisher information matrix (or bound) over horizon T. For Monte Carlo
/// estimates `std_error` holds entrywise standard errors; analytic matrices
/// carry zeros there and n_rollouts = 0.
struct InformationMatrix {
  Matrix matrix;
  Matrix std_error;
  int horizon = 0;
  int n_rollouts = 0;
  InfoKind kind = InfoKind::kStateFeedbackExact;
};

/// Information carried by one trajectory: the transition term
/// J_AB' (sum_t z_t z_t' kron Sigma_w^-1) J_AB, plus the output term
/// J_C' (sum_t x_t x_t' kron Sigma_v^-1) J_C in partially observed mode.
/// `jac` is a full [vec A; vec B; vec C] Jacobian.
Matrix trajectory_information(const Trajectory& tr, const LqgInstance& inst,
                              const Matrix& jac);

/// Per-rollout state-feedback information
///   sum_{t<T} J_AB' (z_t z_t' kron Sigma_w^-1) J_AB,  z_t = (x_t, u_t),
/// averaged over rollouts. Throws kWrongMode outside state-feedback mode.
InformationMatrix sf_information(const LqgInstance& inst, const Parametrization& p,
                                 const PolicySpec& policy, int T, int n_rollouts,
                                 std::uint64_t seed);

/// Upper bound on the output-data information in partially observed mode:
/// the transition term above plus sum_t J_C' (x_t x_t' kron Sigma_v^-1) J_C.
InformationMatrix po_information_upper(const LqgInstance& inst,
                                       const Parametrization& p,
                                       const PolicySpec& policy, int T,
                                       int n_rollouts, std::uint64_t seed);

/// Per-rollout score vectors of the trajectory transition density at the
/// nominal theta, by central differences of the log-likelihood with step
/// fd_step * (1 + |theta|). State-feedback mode only.
std::vector<Vector> score_samples(const LqgInstance& inst, const Parametrization& p,
                                  const PolicySpec& policy, int T, int n_rollouts,
                                  std::uint64_t seed, double fd_step = 1e-5);

/// Mean outer product of score_samples().
InformationMatrix score_oracle_information(const LqgInstance& inst,
                                           const Parametrization& p,
                                           const PolicySpec& policy, int T,
                                           int n_rollouts, std::uint64_t seed,
                                           double fd_step = 1e-5);

/// sf_information and score_oracle_information computed on the same rollouts,
/// with the entrywise standard error of their per-rollout difference.
struct OracleComparison {
  InformationMatrix analytic;
  InformationMatrix oracle;
  Matrix difference;     // analytic - oracle
  Matrix difference_se;
  double max_abs_z = 0.0;  // max |difference| / difference_se over entries
};

OracleComparison compare_with_score_oracle(const LqgInstance& inst,
                                           const Parametrization& p,
                                           const PolicySpec& policy, int T,
                                           int n_rollouts, std::uint64_t seed,
                                           double fd_step = 1e-5);

/// Stationary per-step expected information under the optimal policy of the
/// nominal instance, with the Jacobian taken at theta. State feedback:
/// J_AB' (H Gamma H' kron Sigma_w^-1) J_AB with H = [I; K]. Partially observed
/// mode uses E z z' = [[Gamma + Xi, Gamma K'], [K Gamma, K Gamma K']] and adds
/// J_C' ((Gamma + Xi) kron Sigma_v^-1) J_C.
InformationMatrix optimal_policy_information(const LqgInstance& inst,
                                             const Parametrization& p,
                                             const Vector& theta);
InformationMatrix optimal_policy_information(const LqgInstance& inst,
                                             const Parametrization& p);

/// Compactly supported, continuously differentiable prior density on [lower, upper].
class Prior {
 public:
  virtual ~Prior() = default;
  virtual double density(double x) const = 0;
  virtual double derivative(double x) const = 0;
  virtual double lower() const = 0;
  virtual double upper() const = 0;
  /// An upper bound on the density, used for rejection sampling.
  virtual double max_density() const = 0;
  double sample(Rng& rng) const;
};

/// (1/w) cos^2(pi (x - c) / (2w)) on [c - w, c + w].
class CosineBumpPrior : public Prior {
 public:
  explicit CosineBumpPrior(double center = 0.0, double half_width = 1.0);
  double density(double x) const override;
  double derivative(double x) const override;
  double lower() const override { return center_ - width_; }
  double upper() const override { return center_ + width_; }
  double max_density() const override { return 1.0 / width_; }
  /// pi^2 / w^2.
  double exact_location_integral() const;
  /// w^2 (1/3 - 2/pi^2).
  double variance() const;

 private:
  double center_;
  double width_;
};

/// Prior given by arbitrary callables.
class FunctionPrior : public Prior {
 public:
  FunctionPrior(std::function<double(double)> density,
                std::function<double(double)> derivative, double lower,
                double upper, double max_density);
  double density(double x) const override { return density_(x); }
  double derivative(double x) const override { return derivative_(x); }
  double lower() const override { return lower_; }
  double upper() const override { return upper_; }
  double max_density() const override { return max_; }

 private:
  std::function<double(double)> density_, derivative_;
  double lower_, upper_, max_;
};

/// Gauss-Legendre nodes and weights on [-1, 1].
void gauss_legendre(int order, std::vector<double>& nodes, std::vector<double>& weights);

/// integral of (lambda')^2 / lambda over the support, composite Gauss-Legendre
/// with about quadrature_n nodes in total. kInvalidPrior on negative density.
double location_integral(const Prior& prior, int quadrature_n = 2048);

struct VanTreesResult {
  double bayes_mse = 0.0;
  double bayes_mse_se = 0.0;
  double bound = 0.0;
  double location_integral = 0.0;
};

/// y ~ N(theta, sigma^2), theta ~ prior. bayes_mse is the Monte Carlo risk of
/// the posterior mean (computed by quadrature per sample), bound is
/// 1 / (1/sigma^2 + J(prior)).
VanTreesResult van_trees_check(double sigma, const Prior& prior, int n_samples,
                               std::uint64_t seed);

}  // namespace lqgbound
