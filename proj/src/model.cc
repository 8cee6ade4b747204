#include "lqgbound/model.hpp"

#include <cmath>
#include <sstream>
#include <utility>

namespace lqgbound {
namespace {

void require_shape(const Matrix& m, Eigen::Index rows, Eigen::Index cols,
                   const char* name) {
  if (m.rows() != rows || m.cols() != cols) {
    std::ostringstream os;
    os << name << " is " << m.rows() << "x" << m.cols() << ", expected " << rows
       << "x" << cols;
    throw Error(ErrorCode::kInvalidDimensions, os.str());
  }
}

void require_finite(const Matrix& m, const char* name) {
  if (!m.allFinite()) {
    throw Error(ErrorCode::kInvalidInput, std::string(name) + " has non-finite entries");
  }
}

Vector stack_abc(const Matrix& A, const Matrix& B, const Matrix& C) {
  Vector out(A.size() + B.size() + C.size());
  out << vec(A), vec(B), vec(C);
  return out;
}

}  // namespace

Matrix LqgInstance::bpbr() const {
  return symmetrize(sys.B.transpose() * control.P * sys.B + sys.R);
}

LqgInstance build_instance(const LqgSystem& input) {
  LqgSystem sys = input;
  const Eigen::Index n = sys.A.rows();
  if (n == 0) throw Error(ErrorCode::kInvalidDimensions, "d_x must be positive");
  require_shape(sys.A, n, n, "A");
  if (sys.B.rows() != n || sys.B.cols() == 0) {
    throw Error(ErrorCode::kInvalidDimensions, "B must be d_x x d_u with d_u > 0");
  }
  const Eigen::Index m = sys.B.cols();
  require_shape(sys.Q, n, n, "Q");
  require_shape(sys.R, m, m, "R");
  require_shape(sys.Sigma_w, n, n, "Sigma_w");

  if (sys.mode == Mode::kStateFeedback) {
    const Matrix eye = Matrix::Identity(n, n);
    if (sys.C.size() == 0) sys.C = eye;
    if (sys.Sigma_v.size() == 0) sys.Sigma_v = Matrix::Zero(n, n);
    require_shape(sys.C, n, n, "C");
    require_shape(sys.Sigma_v, n, n, "Sigma_v");
    if ((sys.C - eye).cwiseAbs().maxCoeff() != 0.0 ||
        sys.Sigma_v.cwiseAbs().maxCoeff() != 0.0) {
      throw Error(ErrorCode::kInvalidInput,
                  "state-feedback mode requires C = I and Sigma_v = 0");
    }
  } else {
    if (sys.C.cols() != n || sys.C.rows() == 0) {
      throw Error(ErrorCode::kInvalidDimensions, "C must be d_y x d_x with d_y > 0");
    }
    require_shape(sys.Sigma_v, sys.C.rows(), sys.C.rows(), "Sigma_v");
  }
  for (const auto& [mat, name] :
       {std::pair<const Matrix*, const char*>{&sys.A, "A"}, {&sys.B, "B"},
        {&sys.C, "C"}, {&sys.Q, "Q"}, {&sys.R, "R"}, {&sys.Sigma_w, "Sigma_w"},
        {&sys.Sigma_v, "Sigma_v"}}) {
    require_finite(*mat, name);
  }

  const double sym_tol = 1e-10;
  if (!is_symmetric(sys.Sigma_w, sym_tol * std::max(1.0, sys.Sigma_w.cwiseAbs().maxCoeff())) ||
      !is_positive_definite(sys.Sigma_w)) {
    throw Error(ErrorCode::kNondegeneracyViolated, "Sigma_w must be positive definite");
  }
  if (sys.mode == Mode::kPartiallyObserved &&
      (!is_symmetric(sys.Sigma_v, sym_tol * std::max(1.0, sys.Sigma_v.cwiseAbs().maxCoeff())) ||
       !is_positive_definite(sys.Sigma_v))) {
    throw Error(ErrorCode::kNondegeneracyViolated,
                "partially observed mode requires Sigma_v positive definite");
  }

  LqgInstance inst;
  inst.sys = sys;
  inst.control = solve_control_dare(sys.A, sys.B, sys.Q, sys.R);
  try {
    inst.filter = solve_filter_dare(sys.A, sys.C, sys.Sigma_w, sys.Sigma_v);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kDegenerateInnovation) {
      throw Error(ErrorCode::kNotDetectable, e.what());
    }
    throw;
  }
  inst.gamma = closed_loop_gramian(inst.control.closed_loop, inst.filter.Sigma_nu);
  inst.Sigma_x0 =
      sys.mode == Mode::kStateFeedback ? inst.gamma : inst.filter.S;
  inst.noise_w = psd_sqrt_factor(sys.Sigma_w);
  inst.noise_v = psd_sqrt_factor(sys.Sigma_v);
  inst.noise_x0 = psd_sqrt_factor(inst.Sigma_x0);
  return inst;
}

LqgInstance with_matrices(const LqgInstance& inst, const Matrix& A,
                          const Matrix& B, const Matrix& C) {
  LqgSystem sys = inst.sys;
  sys.A = A;
  sys.B = B;
  sys.C = C;
  return build_instance(sys);
}

std::string_view ParamKindName(ParamKind kind) {
  switch (kind) {
    case ParamKind::kUnstructured: return "Unstructured";
    case ParamKind::kUnstructuredAB: return "UnstructuredAB";
    case ParamKind::kBOnly: return "BOnly";
    case ParamKind::kSimchoCoordinates: return "SimchoCoordinates";
    case ParamKind::kAffine: return "Affine";
    case ParamKind::kCustom: return "Custom";
  }
  return "Unknown";
}

Parametrization Parametrization::Unstructured(const LqgSystem& sys) {
  Parametrization p;
  p.kind_ = ParamKind::kUnstructured;
  p.nominal_ = {sys.A, sys.B, sys.C};
  p.theta0_ = stack_abc(sys.A, sys.B, sys.C);
  p.d_theta_ = p.theta0_.size();
  return p;
}

Parametrization Parametrization::UnstructuredAB(const LqgSystem& sys) {
  Parametrization p;
  p.kind_ = ParamKind::kUnstructuredAB;
  p.nominal_ = {sys.A, sys.B, sys.C};
  p.theta0_.resize(sys.A.size() + sys.B.size());
  p.theta0_ << vec(sys.A), vec(sys.B);
  p.d_theta_ = p.theta0_.size();
  return p;
}

Parametrization Parametrization::BOnly(const LqgSystem& sys) {
  Parametrization p;
  p.kind_ = ParamKind::kBOnly;
  p.nominal_ = {sys.A, sys.B, sys.C};
  p.theta0_ = vec(sys.B);
  p.d_theta_ = p.theta0_.size();
  return p;
}

Parametrization Parametrization::SimchoCoordinates(const LqgSystem& sys,
                                                   const Matrix& K) {
  if (K.rows() != sys.B.cols() || K.cols() != sys.A.rows()) {
    throw Error(ErrorCode::kInvalidDimensions, "K must be d_u x d_x");
  }
  Parametrization p;
  p.kind_ = ParamKind::kSimchoCoordinates;
  p.nominal_ = {sys.A, sys.B, sys.C};
  p.gain_ = K;
  p.d_theta_ = sys.A.rows() * sys.B.cols();
  p.theta0_ = Vector::Zero(p.d_theta_);
  return p;
}

Parametrization Parametrization::Affine(SystemTriple nominal,
                                        std::vector<SystemTriple> basis) {
  for (const auto& b : basis) {
    if (b.A.rows() != nominal.A.rows() || b.A.cols() != nominal.A.cols() ||
        b.B.rows() != nominal.B.rows() || b.B.cols() != nominal.B.cols() ||
        b.C.rows() != nominal.C.rows() || b.C.cols() != nominal.C.cols()) {
      throw Error(ErrorCode::kInvalidDimensions, "affine basis element has wrong shape");
    }
  }
  Parametrization p;
  p.kind_ = ParamKind::kAffine;
  p.nominal_ = std::move(nominal);
  p.basis_ = std::move(basis);
  p.d_theta_ = static_cast<Eigen::Index>(p.basis_.size());
  p.theta0_ = Vector::Zero(p.d_theta_);
  return p;
}

Parametrization Parametrization::Custom(Eigen::Index d_theta, CustomMap map,
                                        Vector nominal_theta) {
  if (nominal_theta.size() != d_theta) {
    throw Error(ErrorCode::kInvalidTheta, "nominal theta has wrong length");
  }
  Parametrization p;
  p.kind_ = ParamKind::kCustom;
  p.d_theta_ = d_theta;
  p.custom_ = std::move(map);
  p.theta0_ = std::move(nominal_theta);
  p.nominal_ = p.custom_(p.theta0_);
  return p;
}

SystemTriple Parametrization::evaluate(const Vector& theta) const {
  if (theta.size() != d_theta_) {
    std::ostringstream os;
    os << "theta has length " << theta.size() << ", expected " << d_theta_;
    throw Error(ErrorCode::kInvalidTheta, os.str());
  }
  if (!theta.allFinite()) throw Error(ErrorCode::kInvalidTheta, "theta is not finite");
  const Eigen::Index n = d_x(), m = d_u(), q = d_y();
  switch (kind_) {
    case ParamKind::kUnstructured:
      return {vec_inv(theta.head(n * n), n, n), vec_inv(theta.segment(n * n, n * m), n, m),
              vec_inv(theta.tail(q * n), q, n)};
    case ParamKind::kUnstructuredAB:
      return {vec_inv(theta.head(n * n), n, n), vec_inv(theta.tail(n * m), n, m),
              nominal_.C};
    case ParamKind::kBOnly:
      return {nominal_.A, vec_inv(theta, n, m), nominal_.C};
    case ParamKind::kSimchoCoordinates: {
      const Matrix delta = vec_inv(theta, n, m);
      return {nominal_.A - delta * gain_, nominal_.B + delta, nominal_.C};
    }
    case ParamKind::kAffine: {
      SystemTriple out = nominal_;
      for (Eigen::Index i = 0; i < d_theta_; ++i) {
        out.A += theta(i) * basis_[i].A;
        out.B += theta(i) * basis_[i].B;
        out.C += theta(i) * basis_[i].C;
      }
      return out;
    }
    case ParamKind::kCustom:
      return custom_(theta);
  }
  return nominal_;
}

Matrix Parametrization::jacobian_abc(const Vector& theta) const {
  const Eigen::Index n = d_x(), m = d_u(), q = d_y();
  const Eigen::Index rows = n * n + n * m + q * n;
  if (theta.size() != d_theta_) {
    throw Error(ErrorCode::kInvalidTheta, "theta has wrong length");
  }
  Matrix J = Matrix::Zero(rows, d_theta_);
  switch (kind_) {
    case ParamKind::kUnstructured:
      J.setIdentity();
      break;
    case ParamKind::kUnstructuredAB:
      J.topRows(n * n + n * m).setIdentity();
      break;
    case ParamKind::kBOnly:
      J.middleRows(n * n, n * m).setIdentity();
      break;
    case ParamKind::kSimchoCoordinates:
      // vec(Delta K) = (K' kron I) vec(Delta)
      J.topRows(n * n) = -kron(gain_.transpose(), Matrix::Identity(n, n));
      J.middleRows(n * n, n * m).setIdentity();
      break;
    case ParamKind::kAffine:
      for (Eigen::Index i = 0; i < d_theta_; ++i) {
        J.col(i) = stack_abc(basis_[i].A, basis_[i].B, basis_[i].C);
      }
      break;
    case ParamKind::kCustom: {
      const double h = 1e-6 * (1.0 + theta.norm());
      for (Eigen::Index i = 0; i < d_theta_; ++i) {
        Vector plus = theta, minus = theta;
        plus(i) += h;
        minus(i) -= h;
        const SystemTriple hi = evaluate(plus), lo = evaluate(minus);
        J.col(i) = (stack_abc(hi.A, hi.B, hi.C) - stack_abc(lo.A, lo.B, lo.C)) / (2.0 * h);
      }
      break;
    }
  }
  return J;
}

SystemTriple evaluate(const Parametrization& p, const Vector& theta) {
  return p.evaluate(theta);
}

Matrix jacobian_abc(const Parametrization& p, const Vector& theta) {
  return p.jacobian_abc(theta);
}

Matrix ab_rows(const Matrix& jac, Eigen::Index d_x, Eigen::Index d_u) {
  return jac.topRows(d_x * d_x + d_x * d_u);
}

Matrix c_rows(const Matrix& jac, Eigen::Index d_x, Eigen::Index d_u) {
  return jac.bottomRows(jac.rows() - d_x * d_x - d_x * d_u);
}

PolicySpec PolicySpec::Optimal() { return PolicySpec{}; }

PolicySpec PolicySpec::LinearFeedback(Matrix gain) {
  PolicySpec p;
  p.kind = PolicyKind::kLinearFeedback;
  p.feedback = std::move(gain);
  return p;
}

PolicySpec PolicySpec::CeDither(double sigma0, double beta) {
  if (!(sigma0 >= 0.0) || !std::isfinite(beta)) {
    throw Error(ErrorCode::kInvalidInput, "dither needs sigma0 >= 0 and finite beta");
  }
  PolicySpec p;
  p.kind = PolicyKind::kCertaintyEquivalenceDither;
  p.sigma0 = sigma0;
  p.beta = beta;
  return p;
}

PolicySpec PolicySpec::Custom(CustomFn fn) {
  PolicySpec p;
  p.kind = PolicyKind::kCustom;
  p.custom = std::move(fn);
  return p;
}

std::string PolicySpec::describe() const {
  std::ostringstream os;
  switch (kind) {
    case PolicyKind::kOptimal: os << "optimal"; break;
    case PolicyKind::kLinearFeedback: os << "feedback"; break;
    case PolicyKind::kCertaintyEquivalenceDither:
      os << "ce-dither(sigma0=" << sigma0 << ",beta=" << beta
         << (adapt_gain ? "" : ",frozen") << ")";
      break;
    case PolicyKind::kCustom: os << "custom"; break;
  }
  return os.str();
}

double PolicySpec::dither_std(int t) const {
  return sigma0 * std::pow(static_cast<double>(std::max(t, 1)), -beta);
}

PolicyRunner::PolicyRunner(const PolicySpec& spec, const LqgInstance& inst)
    : spec_(&spec), inst_(&inst) {
  switch (spec.kind) {
    case PolicyKind::kOptimal:
      gain_ = inst.K();
      break;
    case PolicyKind::kLinearFeedback:
      if (spec.feedback.rows() != inst.d_u() || spec.feedback.cols() != inst.d_x()) {
        throw Error(ErrorCode::kInvalidDimensions, "feedback gain must be d_u x d_x");
      }
      gain_ = spec.feedback;
      break;
    case PolicyKind::kCertaintyEquivalenceDither: {
      gain_ = spec.initial_gain.size() ? spec.initial_gain : inst.K();
      const Eigen::Index dz = inst.d_x() + inst.d_u();
      gram_ = spec.ridge * Matrix::Identity(dz, dz);
      cross_ = Matrix::Zero(inst.d_x(), dz);
      excitation_floor_ = spec.ridge + spec.min_excitation * sigma_max(inst.sys.Sigma_w);
      break;
    }
    case PolicyKind::kCustom:
      if (!spec.custom) throw Error(ErrorCode::kInvalidInput, "custom policy has no function");
      break;
  }
}

Vector PolicyRunner::act(int t, const Vector& xhat, Rng& rng) {
  switch (spec_->kind) {
    case PolicyKind::kOptimal:
    case PolicyKind::kLinearFeedback:
      return gain_ * xhat;
    case PolicyKind::kCertaintyEquivalenceDither: {
      Vector u = gain_ * xhat;
      const double s = spec_->dither_std(t);
      if (s > 0.0) u += s * rng.normal_vector(u.size());
      return u;
    }
    case PolicyKind::kCustom:
      return spec_->custom(t, xhat, rng);
  }
  return gain_ * xhat;
}

void PolicyRunner::observe(const Vector& xhat, const Vector& u,
                           const Vector& xhat_next) {
  if (spec_->kind != PolicyKind::kCertaintyEquivalenceDither || !spec_->adapt_gain) return;
  Vector z(xhat.size() + u.size());
  z << xhat, u;
  gram_.noalias() += z * z.transpose();
  cross_.noalias() += xhat_next * z.transpose();
  ++samples_;
  if (samples_ >= next_refit_) {
    refit();
    next_refit_ *= 2;
  }
}

void PolicyRunner::refit() {
  if (lambda_min_sym(gram_) < excitation_floor_) return;
  const Eigen::Index n = inst_->d_x();
  const Matrix theta = gram_.ldlt().solve(cross_.transpose()).transpose();
  const Matrix A_hat = theta.leftCols(n);
  const Matrix B_hat = theta.rightCols(theta.cols() - n);
  try {
    DareOptions opts;
    opts.max_iterations = 5000;
    opts.rel_tol = 1e-10;
    const ControlSolution sol =
        solve_control_dare(A_hat, B_hat, inst_->sys.Q, inst_->sys.R, opts);
    if (sol.K.allFinite()) gain_ = sol.K;
  } catch (const Error&) {
    // keep the previous gain
  }
}

Vector policy_action(PolicyRunner& runner, int t, const Vector& xhat, Rng& rng) {
  return runner.act(t, xhat, rng);
}

Trajectory simulate(const LqgInstance& inst, const PolicySpec& policy, int T,
                    std::uint64_t seed) {
  if (T < 1) throw Error(ErrorCode::kInvalidInput, "horizon must be >= 1");
  const auto& s = inst.sys;
  const Eigen::Index n = inst.d_x(), m = inst.d_u(), q = inst.d_y();
  const bool sf = inst.mode() == Mode::kStateFeedback;
  const Matrix& F = inst.filter.F;

  Rng rng(seed);
  PolicyRunner runner(policy, inst);
  Trajectory tr;
  tr.seed = seed;
  tr.x.resize(n, T + 1);
  tr.u.resize(m, T);
  tr.y.resize(q, T + 1);
  tr.xhat.resize(n, T + 1);
  tr.zeta.resize(n, T + 1);
  tr.nu.resize(n, T);

  tr.x.col(0) = inst.noise_x0 * rng.normal_vector(n);
  tr.zeta.col(0).setZero();
  if (sf) {
    tr.y.col(0) = tr.x.col(0);
    tr.xhat.col(0) = tr.x.col(0);
  } else {
    tr.y.col(0) = s.C * tr.x.col(0) + inst.noise_v * rng.normal_vector(q);
    tr.xhat.col(0) = F * tr.y.col(0);
  }

  for (int t = 0; t < T; ++t) {
    const Vector xhat = tr.xhat.col(t);
    const Vector u = runner.act(t, xhat, rng);
    tr.u.col(t) = u;
    tr.x.col(t + 1) = s.A * tr.x.col(t) + s.B * u + inst.noise_w * rng.normal_vector(n);
    tr.zeta.col(t + 1) = s.A * xhat + s.B * u;
    if (sf) {
      tr.y.col(t + 1) = tr.x.col(t + 1);
      tr.xhat.col(t + 1) = tr.x.col(t + 1);
      tr.nu.col(t) = tr.x.col(t + 1) - tr.zeta.col(t + 1);
    } else {
      tr.y.col(t + 1) = s.C * tr.x.col(t + 1) + inst.noise_v * rng.normal_vector(q);
      tr.nu.col(t) = F * (tr.y.col(t + 1) - s.C * tr.zeta.col(t + 1));
      tr.xhat.col(t + 1) = tr.zeta.col(t + 1) + tr.nu.col(t);
    }
    runner.observe(xhat, u, tr.xhat.col(t + 1));
  }
  return tr;
}

Trajectory simulate_rollout(const LqgInstance& inst, const PolicySpec& policy,
                            int T, std::uint64_t master_seed, std::uint64_t index) {
  return simulate(inst, policy, T, Rng::stream_seed(master_seed, index));
}

}  // namespace lqgbound
