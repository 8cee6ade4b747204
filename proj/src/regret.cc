#include "lqgbound/regret.hpp"

#include <vector>

namespace lqgbound {
namespace {

void require_rollouts(int n_rollouts, int T) {
  if (n_rollouts < 2) throw Error(ErrorCode::kInvalidInput, "need at least 2 rollouts");
  if (T < 1) throw Error(ErrorCode::kInvalidInput, "horizon must be >= 1");
}

RegretEstimate make_estimate(const MeanSe& s, int n, int T, RegretMethod method) {
  RegretEstimate e;
  e.value = s.mean;
  e.std_error = s.se;
  e.n_rollouts = n;
  e.horizon = T;
  e.method = method;
  return e;
}

}  // namespace

double trajectory_cost(const Trajectory& traj, const Matrix& Q, const Matrix& R,
                       const Matrix& Q_T) {
  const int T = traj.horizon();
  double cost = 0.0;
  for (int t = 0; t < T; ++t) {
    cost += traj.x.col(t).dot(Q * traj.x.col(t));
    cost += traj.u.col(t).dot(R * traj.u.col(t));
  }
  cost += traj.x.col(T).dot(Q_T * traj.x.col(T));
  return cost;
}

double trajectory_cost(const Trajectory& traj, const LqgInstance& inst) {
  return trajectory_cost(traj, inst.sys.Q, inst.sys.R, inst.P());
}

double optimal_cost(const LqgInstance& inst, int T) {
  if (T < 0) throw Error(ErrorCode::kInvalidInput, "horizon must be >= 0");
  const Matrix& P = inst.P();
  return (P * inst.Sigma_x0).trace() +
         T * (inst.filter.Sigma_nu * P).trace() +
         T * (inst.sys.Q * inst.filter.Xi).trace();
}

double representation_sum(const Trajectory& traj, const LqgInstance& inst) {
  const Matrix H = inst.bpbr();
  double sum = 0.0;
  for (int t = 0; t < traj.horizon(); ++t) {
    const Vector r = traj.u.col(t) - inst.K() * traj.xhat.col(t);
    sum += r.dot(H * r);
  }
  return sum;
}

PairedRegret regret_paired(const LqgInstance& inst, const PolicySpec& policy,
                           int T, int n_rollouts, std::uint64_t seed) {
  require_rollouts(n_rollouts, T);
  const double v_star = optimal_cost(inst, T);
  std::vector<double> direct(n_rollouts), repr(n_rollouts), diff(n_rollouts);
  parallel_for(static_cast<std::size_t>(n_rollouts), [&](std::size_t i) {
    const Trajectory tr = simulate_rollout(inst, policy, T, seed, i);
    direct[i] = trajectory_cost(tr, inst) - v_star;
    repr[i] = representation_sum(tr, inst);
    diff[i] = direct[i] - repr[i];
  });
  PairedRegret out;
  out.direct = make_estimate(mean_se(direct), n_rollouts, T, RegretMethod::kDirect);
  out.representation =
      make_estimate(mean_se(repr), n_rollouts, T, RegretMethod::kRepresentation);
  const MeanSe d = mean_se(diff);
  out.difference = d.mean;
  out.difference_se = d.se;
  return out;
}

RegretEstimate regret_direct(const LqgInstance& inst, const PolicySpec& policy,
                             int T, int n_rollouts, std::uint64_t seed) {
  require_rollouts(n_rollouts, T);
  const double v_star = optimal_cost(inst, T);
  std::vector<double> samples(n_rollouts);
  parallel_for(static_cast<std::size_t>(n_rollouts), [&](std::size_t i) {
    samples[i] = trajectory_cost(simulate_rollout(inst, policy, T, seed, i), inst) - v_star;
  });
  return make_estimate(mean_se(samples), n_rollouts, T, RegretMethod::kDirect);
}

RegretEstimate regret_representation(const LqgInstance& inst,
                                     const PolicySpec& policy, int T,
                                     int n_rollouts, std::uint64_t seed) {
  require_rollouts(n_rollouts, T);
  std::vector<double> samples(n_rollouts);
  parallel_for(static_cast<std::size_t>(n_rollouts), [&](std::size_t i) {
    samples[i] = representation_sum(simulate_rollout(inst, policy, T, seed, i), inst);
  });
  return make_estimate(mean_se(samples), n_rollouts, T, RegretMethod::kRepresentation);
}

double bellman_gap(const Vector& x, const Vector& u, const LqgInstance& inst) {
  const auto& s = inst.sys;
  const Matrix& P = inst.P();
  const Vector next = s.A * x + s.B * u;
  return x.dot(s.Q * x) + u.dot(s.R * u) + next.dot(P * next) - x.dot(P * x);
}

double bellman_gap_quadratic(const Vector& x, const Vector& u,
                             const LqgInstance& inst) {
  const Vector r = u - inst.K() * x;
  return r.dot(inst.bpbr() * r);
}

}  // namespace lqgbound
