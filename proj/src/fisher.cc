#include "lqgbound/fisher.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace lqgbound {
namespace {

Matrix inverse_spd(const Matrix& m) {
  return m.ldlt().solve(Matrix::Identity(m.rows(), m.cols()));
}

void require_mc(int T, int n_rollouts) {
  if (T < 1) throw Error(ErrorCode::kInvalidInput, "horizon must be >= 1");
  if (n_rollouts < 1) throw Error(ErrorCode::kInvalidInput, "need at least one rollout");
}

InformationMatrix aggregate(const std::vector<Matrix>& per_rollout, Eigen::Index d,
                            int T, InfoKind kind) {
  const MatrixMeanSe stats = matrix_mean_se(per_rollout, d, d);
  InformationMatrix out;
  out.matrix = symmetrize(stats.mean);
  out.std_error = stats.se;
  out.horizon = T;
  out.n_rollouts = static_cast<int>(per_rollout.size());
  out.kind = kind;
  return out;
}

// sum_t z_t z_t' with z_t = (x_t, u_t), t < T.
Matrix covariates(const Trajectory& tr) {
  const Eigen::Index n = tr.x.rows(), m = tr.u.rows();
  const int T = tr.horizon();
  Matrix Z(n + m, T);
  Z.topRows(n) = tr.x.leftCols(T);
  Z.bottomRows(m) = tr.u;
  return Z * Z.transpose();
}

InformationMatrix transition_information(const LqgInstance& inst,
                                         const Parametrization& p,
                                         const PolicySpec& policy, int T,
                                         int n_rollouts, std::uint64_t seed,
                                         InfoKind kind) {
  require_mc(T, n_rollouts);
  const Matrix J = p.jacobian_abc(p.nominal_theta());
  std::vector<Matrix> per_rollout(n_rollouts);
  parallel_for(static_cast<std::size_t>(n_rollouts), [&](std::size_t i) {
    per_rollout[i] =
        trajectory_information(simulate_rollout(inst, policy, T, seed, i), inst, J);
  });
  return aggregate(per_rollout, p.d_theta(), T, kind);
}

}  // namespace

Matrix trajectory_information(const Trajectory& tr, const LqgInstance& inst,
                              const Matrix& jac) {
  const Eigen::Index n = inst.d_x(), m = inst.d_u();
  const Matrix J_ab = ab_rows(jac, n, m);
  Matrix info = J_ab.transpose() * kron(covariates(tr), inverse_spd(inst.sys.Sigma_w)) * J_ab;
  if (inst.mode() == Mode::kPartiallyObserved) {
    const Matrix J_c = c_rows(jac, n, m);
    const Matrix X = tr.x.leftCols(tr.horizon());
    info += J_c.transpose() * kron(X * X.transpose(), inverse_spd(inst.sys.Sigma_v)) * J_c;
  }
  return symmetrize(info);
}

InformationMatrix sf_information(const LqgInstance& inst, const Parametrization& p,
                                 const PolicySpec& policy, int T, int n_rollouts,
                                 std::uint64_t seed) {
  if (inst.mode() != Mode::kStateFeedback) {
    throw Error(ErrorCode::kWrongMode, "sf_information needs a state-feedback instance");
  }
  return transition_information(inst, p, policy, T, n_rollouts, seed,
                                InfoKind::kStateFeedbackExact);
}

InformationMatrix po_information_upper(const LqgInstance& inst,
                                       const Parametrization& p,
                                       const PolicySpec& policy, int T,
                                       int n_rollouts, std::uint64_t seed) {
  if (inst.mode() != Mode::kPartiallyObserved) {
    throw Error(ErrorCode::kWrongMode, "po_information_upper needs a partially observed instance");
  }
  if (!is_positive_definite(inst.sys.Sigma_w) || !is_positive_definite(inst.sys.Sigma_v)) {
    throw Error(ErrorCode::kNondegeneracyViolated, "noise covariances must be positive definite");
  }
  return transition_information(inst, p, policy, T, n_rollouts, seed,
                                InfoKind::kOutputUpperBound);
}

std::vector<Vector> score_samples(const LqgInstance& inst, const Parametrization& p,
                                  const PolicySpec& policy, int T, int n_rollouts,
                                  std::uint64_t seed, double fd_step) {
  if (inst.mode() != Mode::kStateFeedback) {
    throw Error(ErrorCode::kWrongMode, "score oracle needs a state-feedback instance");
  }
  require_mc(T, n_rollouts);
  const Eigen::Index d = p.d_theta();
  const Vector theta = p.nominal_theta();
  const double h = fd_step * (1.0 + theta.norm());
  const Matrix w_inv = inverse_spd(inst.sys.Sigma_w);

  // Perturbed systems do not depend on the rollout; evaluate them once.
  std::vector<SystemTriple> plus(d), minus(d);
  for (Eigen::Index k = 0; k < d; ++k) {
    Vector tp = theta, tm = theta;
    tp(k) += h;
    tm(k) -= h;
    plus[k] = p.evaluate(tp);
    minus[k] = p.evaluate(tm);
  }

  std::vector<Vector> scores(n_rollouts);
  parallel_for(static_cast<std::size_t>(n_rollouts), [&](std::size_t i) {
    const Trajectory tr = simulate_rollout(inst, policy, T, seed, i);
    const Matrix X0 = tr.x.leftCols(T);
    const Matrix X1 = tr.x.rightCols(T);
    auto log_lik = [&](const SystemTriple& s) {
      const Matrix r = X1 - s.A * X0 - s.B * tr.u;
      return -0.5 * (r.transpose() * w_inv * r).trace();
    };
    Vector score(d);
    for (Eigen::Index k = 0; k < d; ++k) {
      score(k) = (log_lik(plus[k]) - log_lik(minus[k])) / (2.0 * h);
    }
    scores[i] = std::move(score);
  });
  return scores;
}

InformationMatrix score_oracle_information(const LqgInstance& inst,
                                           const Parametrization& p,
                                           const PolicySpec& policy, int T,
                                           int n_rollouts, std::uint64_t seed,
                                           double fd_step) {
  const std::vector<Vector> scores =
      score_samples(inst, p, policy, T, n_rollouts, seed, fd_step);
  std::vector<Matrix> outer(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    outer[i] = scores[i] * scores[i].transpose();
  }
  return aggregate(outer, p.d_theta(), T, InfoKind::kScoreOracle);
}

OracleComparison compare_with_score_oracle(const LqgInstance& inst,
                                           const Parametrization& p,
                                           const PolicySpec& policy, int T,
                                           int n_rollouts, std::uint64_t seed,
                                           double fd_step) {
  const std::vector<Vector> scores =
      score_samples(inst, p, policy, T, n_rollouts, seed, fd_step);
  const Matrix J = p.jacobian_abc(p.nominal_theta());
  const Eigen::Index d = p.d_theta();
  std::vector<Matrix> analytic(n_rollouts), oracle(n_rollouts), diff(n_rollouts);
  parallel_for(static_cast<std::size_t>(n_rollouts), [&](std::size_t i) {
    analytic[i] =
        trajectory_information(simulate_rollout(inst, policy, T, seed, i), inst, J);
    oracle[i] = scores[i] * scores[i].transpose();
    diff[i] = analytic[i] - oracle[i];
  });
  OracleComparison out;
  out.analytic = aggregate(analytic, d, T, InfoKind::kStateFeedbackExact);
  out.oracle = aggregate(oracle, d, T, InfoKind::kScoreOracle);
  const MatrixMeanSe stats = matrix_mean_se(diff, d, d);
  out.difference = stats.mean;
  out.difference_se = stats.se;
  for (Eigen::Index r = 0; r < d; ++r) {
    for (Eigen::Index c = 0; c < d; ++c) {
      const double se = stats.se(r, c);
      const double z = se > 0.0 ? std::abs(stats.mean(r, c)) / se
                                : (std::abs(stats.mean(r, c)) <= 1e-12 ? 0.0
                                           : std::numeric_limits<double>::infinity());
      out.max_abs_z = std::max(out.max_abs_z, z);
    }
  }
  return out;
}

InformationMatrix optimal_policy_information(const LqgInstance& inst,
                                             const Parametrization& p,
                                             const Vector& theta) {
  const Eigen::Index n = inst.d_x(), m = inst.d_u();
  const Matrix J = p.jacobian_abc(theta);
  const Matrix J_ab = ab_rows(J, n, m);
  const Matrix& K = inst.K();
  const Matrix& G = inst.gamma;
  const Matrix w_inv = inverse_spd(inst.sys.Sigma_w);

  Matrix Ezz(n + m, n + m);
  Ezz.topLeftCorner(n, n) = G + inst.filter.Xi;
  Ezz.topRightCorner(n, m) = G * K.transpose();
  Ezz.bottomLeftCorner(m, n) = K * G;
  Ezz.bottomRightCorner(m, m) = K * G * K.transpose();

  Matrix info = J_ab.transpose() * kron(Ezz, w_inv) * J_ab;
  if (inst.mode() == Mode::kPartiallyObserved) {
    const Matrix J_c = c_rows(J, n, m);
    info += J_c.transpose() * kron(G + inst.filter.Xi, inverse_spd(inst.sys.Sigma_v)) * J_c;
  }
  InformationMatrix out;
  out.matrix = symmetrize(info);
  out.std_error = Matrix::Zero(info.rows(), info.cols());
  out.horizon = 1;
  out.kind = InfoKind::kOptimalPolicyPerStep;
  return out;
}

InformationMatrix optimal_policy_information(const LqgInstance& inst,
                                             const Parametrization& p) {
  return optimal_policy_information(inst, p, p.nominal_theta());
}

double Prior::sample(Rng& rng) const {
  const double lo = lower(), hi = upper(), cap = max_density();
  for (;;) {
    const double x = lo + (hi - lo) * rng.uniform();
    if (rng.uniform() * cap <= density(x)) return x;
  }
}

CosineBumpPrior::CosineBumpPrior(double center, double half_width)
    : center_(center), width_(half_width) {
  if (!(half_width > 0.0) || !std::isfinite(center)) {
    throw Error(ErrorCode::kInvalidPrior, "cosine bump needs a positive half width");
  }
}

double CosineBumpPrior::density(double x) const {
  const double s = (x - center_) / width_;
  if (s <= -1.0 || s >= 1.0) return 0.0;
  const double c = std::cos(0.5 * std::numbers::pi * s);
  return c * c / width_;
}

double CosineBumpPrior::derivative(double x) const {
  const double s = (x - center_) / width_;
  if (s <= -1.0 || s >= 1.0) return 0.0;
  // d/dx cos^2(pi s / 2) = -(pi / 2w) sin(pi s)
  return -0.5 * std::numbers::pi * std::sin(std::numbers::pi * s) / (width_ * width_);
}

double CosineBumpPrior::exact_location_integral() const {
  return std::numbers::pi * std::numbers::pi / (width_ * width_);
}

double CosineBumpPrior::variance() const {
  return width_ * width_ * (1.0 / 3.0 - 2.0 / (std::numbers::pi * std::numbers::pi));
}

FunctionPrior::FunctionPrior(std::function<double(double)> density,
                             std::function<double(double)> derivative,
                             double lower, double upper, double max_density)
    : density_(std::move(density)),
      derivative_(std::move(derivative)),
      lower_(lower),
      upper_(upper),
      max_(max_density) {
  if (!(upper > lower) || !(max_density > 0.0)) {
    throw Error(ErrorCode::kInvalidPrior, "prior needs a non-empty support");
  }
}

void gauss_legendre(int order, std::vector<double>& nodes, std::vector<double>& weights) {
  nodes.assign(order, 0.0);
  weights.assign(order, 0.0);
  for (int i = 0; i < (order + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (order + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= order; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = order * (x * p1 - p0) / (x * x - 1.0);
      const double step = p1 / dp;
      x -= step;
      if (std::abs(step) < 1e-16) break;
    }
    nodes[i] = -x;
    nodes[order - 1 - i] = x;
    weights[i] = weights[order - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
}

namespace {

constexpr int kPanelOrder = 8;

// Composite rule on [lo, hi]: node positions and weights.
void composite_rule(double lo, double hi, int total_nodes, std::vector<double>& x,
                    std::vector<double>& w) {
  std::vector<double> gx, gw;
  gauss_legendre(kPanelOrder, gx, gw);
  const int panels = std::max(1, total_nodes / kPanelOrder);
  const double width = (hi - lo) / panels;
  x.clear();
  w.clear();
  for (int p = 0; p < panels; ++p) {
    const double mid = lo + (p + 0.5) * width;
    for (int k = 0; k < kPanelOrder; ++k) {
      x.push_back(mid + 0.5 * width * gx[k]);
      w.push_back(0.5 * width * gw[k]);
    }
  }
}

}  // namespace

double location_integral(const Prior& prior, int quadrature_n) {
  if (quadrature_n < 1) throw Error(ErrorCode::kInvalidInput, "quadrature_n must be positive");
  std::vector<double> x, w;
  composite_rule(prior.lower(), prior.upper(), quadrature_n, x, w);
  double total = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lam = prior.density(x[i]);
    if (lam < 0.0 || !std::isfinite(lam)) {
      throw Error(ErrorCode::kInvalidPrior, "prior density is negative or non-finite");
    }
    if (lam == 0.0) continue;
    const double d = prior.derivative(x[i]);
    total += w[i] * d * d / lam;
  }
  return total;
}

VanTreesResult van_trees_check(double sigma, const Prior& prior, int n_samples,
                               std::uint64_t seed) {
  if (!(sigma > 0.0)) throw Error(ErrorCode::kInvalidInput, "sigma must be positive");
  if (n_samples < 2) throw Error(ErrorCode::kInvalidInput, "need at least 2 samples");
  std::vector<double> nodes, weights;
  composite_rule(prior.lower(), prior.upper(), 512, nodes, weights);
  std::vector<double> prior_w(nodes.size());
  for (std::size_t j = 0; j < nodes.size(); ++j) {
    prior_w[j] = weights[j] * prior.density(nodes[j]);
  }

  std::vector<double> sq_err(n_samples);
  const double inv2s2 = 0.5 / (sigma * sigma);
  parallel_for(static_cast<std::size_t>(n_samples), [&](std::size_t i) {
    Rng rng = Rng::ForRollout(seed, i);
    const double theta = prior.sample(rng);
    const double y = theta + sigma * rng.normal();
    double min_exp = std::numeric_limits<double>::infinity();
    for (double t : nodes) min_exp = std::min(min_exp, (y - t) * (y - t) * inv2s2);
    double num = 0.0, den = 0.0;
    for (std::size_t j = 0; j < nodes.size(); ++j) {
      const double lik = std::exp(min_exp - (y - nodes[j]) * (y - nodes[j]) * inv2s2);
      num += prior_w[j] * lik * nodes[j];
      den += prior_w[j] * lik;
    }
    const double estimate = num / den;
    sq_err[i] = (estimate - theta) * (estimate - theta);
  });
  const MeanSe risk = mean_se(sq_err);
  VanTreesResult out;
  out.bayes_mse = risk.mean;
  out.bayes_mse_se = risk.se;
  out.location_integral = location_integral(prior);
  out.bound = 1.0 / (1.0 / (sigma * sigma) + out.location_integral);
  return out;
}

}  // namespace lqgbound
