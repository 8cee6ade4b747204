#pragma once

#include <cstdint>

#include "lqgbound/model.hpp"

namespace lqgbound {

enum class RegretMethod { kDirect, kRepresentation };

struct RegretEstimate {
  double value = 0.0;
  double std_error = 0.0;
  int n_rollouts = 0;
  int horizon = 0;
  RegretMethod method = RegretMethod::kDirect;
};

/// sum_{t<T} (x_t'Q x_t + u_t'R u_t) + x_T' Q_T x_T.
double trajectory_cost(const Trajectory& traj, const Matrix& Q, const Matrix& R,
                       const Matrix& Q_T);
/// Same with Q_T = P.
double trajectory_cost(const Trajectory& traj, const LqgInstance& inst);

/// Expected cost of the optimal policy over horizon T:
///   tr(P Sigma_x0) + T tr(Sigma_nu P) + T tr(Q Xi).
/// Xi = 0 in state-feedback mode.
double optimal_cost(const LqgInstance& inst, int T);

/// sum_{t=0}^{T-1} (u_t - K xhat_t)' (B'PB + R) (u_t - K xhat_t) for one rollout.
double representation_sum(const Trajectory& traj, const LqgInstance& inst);

RegretEstimate regret_direct(const LqgInstance& inst, const PolicySpec& policy,
                             int T, int n_rollouts, std::uint64_t seed);
RegretEstimate regret_representation(const LqgInstance& inst,
                                     const PolicySpec& policy, int T,
                                     int n_rollouts, std::uint64_t seed);

/// Both estimators evaluated on the same rollouts, plus the standard error of
/// their per-rollout difference.
struct PairedRegret {
  RegretEstimate direct;
  RegretEstimate representation;
  double difference = 0.0;
  double difference_se = 0.0;
};

PairedRegret regret_paired(const LqgInstance& inst, const PolicySpec& policy,
                           int T, int n_rollouts, std::uint64_t seed);

/// phi(x,u) = x'Qx + u'Ru + h(Ax+Bu) - h(x) with h(x) = x'Px, evaluated from
/// the definition.
double bellman_gap(const Vector& x, const Vector& u, const LqgInstance& inst);
/// The same quantity as (u-Kx)'(B'PB+R)(u-Kx).
double bellman_gap_quadratic(const Vector& x, const Vector& u,
                             const LqgInstance& inst);

}  // namespace lqgbound
