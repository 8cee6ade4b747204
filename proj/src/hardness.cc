#include "lqgbound/hardness.hpp"

#include <algorithm>
#include <cmath>

namespace lqgbound {
namespace {

// Eigenvectors of a symmetric PSD matrix whose eigenvalues are at most
// rel * trace. A zero matrix has every direction in its kernel.
Matrix small_eigvecs(const Matrix& m, double rel) {
  const Eigen::Index n = m.rows();
  if (n == 0) return Matrix(0, 0);
  const double scale = std::max(m.trace(), 0.0);
  if (scale == 0.0) return Matrix::Identity(n, n);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(symmetrize(m));
  Eigen::Index k = 0;
  while (k < n && eig.eigenvalues()(k) <= rel * scale) ++k;
  return eig.eigenvectors().leftCols(k);
}

Matrix orthonormalize(const Matrix& cols) {
  if (cols.cols() == 0) return cols;
  Eigen::HouseholderQR<Matrix> qr(cols);
  return qr.householderQ() * Matrix::Identity(cols.rows(), cols.cols());
}

Matrix inverse_spd(const Matrix& m) {
  return m.ldlt().solve(Matrix::Identity(m.rows(), m.cols()));
}

double inf_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  return m.cwiseAbs().rowwise().sum().maxCoeff();
}

// K for (A, B) with the instance's cost, tightly converged for differencing.
Matrix gain_for(const LqgInstance& inst, const Matrix& A, const Matrix& B) {
  DareOptions tight;
  tight.rel_tol = 1e-14;
  try {
    return solve_control_dare(A, B, inst.sys.Q, inst.sys.R, tight).K;
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kInvalidCost) throw;
    // Round-off can keep the relative change just above 1e-14.
    return solve_control_dare(A, B, inst.sys.Q, inst.sys.R).K;
  }
}

void require_nonsingular_closed_loop(const LqgInstance& inst) {
  const Matrix& M = inst.control.closed_loop;
  if (sigma_min(M) <= 1e-12 * std::max(1.0, sigma_max(M))) {
    throw Error(ErrorCode::kDegenerateClosedLoop, "A + BK is singular");
  }
}

}  // namespace

Matrix singularity_matrix(const LqgInstance& inst, const Parametrization& p,
                          const Vector& theta) {
  const Eigen::Index n = inst.d_x(), m = inst.d_u();
  const Matrix J = p.jacobian_abc(theta);
  const Matrix J_ab = ab_rows(J, n, m);
  const Matrix& K = inst.K();
  const Matrix w_inv = inverse_spd(inst.sys.Sigma_w);

  Matrix weight(n + m, n + m);
  if (inst.mode() == Mode::kStateFeedback) {
    Matrix H(n + m, n);
    H << Matrix::Identity(n, n), K;
    weight = H * H.transpose();
  } else {
    weight.setZero();
    weight.topLeftCorner(n, n).setIdentity();
    weight.bottomRightCorner(m, m) = K * K.transpose();
  }
  Matrix out = J_ab.transpose() * kron(weight, w_inv) * J_ab;
  if (inst.mode() == Mode::kPartiallyObserved) {
    const Matrix J_c = c_rows(J, n, m);
    out += J_c.transpose() * kron(Matrix::Identity(n, n), inverse_spd(inst.sys.Sigma_v)) * J_c;
  }
  return symmetrize(out);
}

UninformativeCertificate certify_uninformative(const LqgInstance& inst,
                                               const Parametrization& p, double eps,
                                               const CertifyOptions& opts) {
  if (!(eps > 0.0)) throw Error(ErrorCode::kInvalidInput, "eps must be positive");
  const Eigen::Index d = p.d_theta();
  const Vector theta0 = p.nominal_theta();

  UninformativeCertificate cert;
  cert.exact = p.is_affine();
  Matrix V = small_eigvecs(singularity_matrix(inst, p, theta0), opts.kernel_tol);
  if (d == 0) V = Matrix(0, 0);
  cert.sample_points = 1;

  // Shrink the kernel to what stays singular at sampled points of the ball
  // inside the candidate subspace.
  Rng rng(opts.seed);
  for (int s = 0; s < opts.sphere_points && V.cols() > 0; ++s) {
    Vector g = rng.normal_vector(V.cols());
    const Vector theta = theta0 + 0.5 * eps * (V * g) / g.norm();
    const Matrix Ms = singularity_matrix(inst, p, theta);
    const Matrix W = V.transpose() * Ms * V;
    const double scale = std::max(Ms.trace(), 0.0);
    Matrix coeffs;
    if (scale == 0.0) {
      coeffs = Matrix::Identity(V.cols(), V.cols());
    } else {
      Eigen::SelfAdjointEigenSolver<Matrix> eig(symmetrize(W));
      Eigen::Index k = 0;
      while (k < W.rows() && eig.eigenvalues()(k) <= opts.kernel_tol * scale) ++k;
      coeffs = eig.eigenvectors().leftCols(k);
    }
    V = orthonormalize(V * coeffs);
    ++cert.sample_points;
  }
  cert.raw_kernel = SubspaceBasis(V.rows() == d ? V : Matrix(d, 0));

  if (V.cols() == 0) {
    cert.basis = SubspaceBasis::Empty(d);
    return cert;
  }
  const Matrix DK = jacobian_K(inst, p);
  const double threshold = opts.dk_tol * inf_norm(DK);
  const Matrix G = DK * V;
  Eigen::JacobiSVD<Matrix> svd(G, Eigen::ComputeFullV);
  Eigen::Index r = 0;
  while (r < svd.singularValues().size() && svd.singularValues()(r) > threshold) ++r;
  cert.basis = SubspaceBasis(orthonormalize(V * svd.matrixV().leftCols(r)));
  cert.uninformative = r > 0;
  return cert;
}

SubspaceBasis unstructured_singular_subspace(const LqgInstance& inst) {
  require_nonsingular_closed_loop(inst);
  const Eigen::Index n = inst.d_x(), m = inst.d_u();
  Matrix span(n * n + n * m, n * m);
  for (Eigen::Index j = 0; j < m; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      Matrix Delta = Matrix::Zero(n, m);
      Delta(i, j) = 1.0;
      span.col(i + j * n) << vec(-Delta * inst.K()), vec(Delta);
    }
  }
  return SubspaceBasis::FromSpan(span);
}

Matrix dK_directional(const LqgInstance& inst, const Matrix& Delta) {
  if (Delta.rows() != inst.d_x() || Delta.cols() != inst.d_u()) {
    throw Error(ErrorCode::kInvalidDimensions, "Delta must be d_x x d_u");
  }
  return -inst.bpbr().ldlt().solve(Delta.transpose() * inst.P() * inst.control.closed_loop);
}

Matrix jacobian_K(const LqgInstance& inst, const Parametrization& p) {
  const Eigen::Index n = inst.d_x(), m = inst.d_u(), d = p.d_theta();
  Matrix DK(m * n, d);
  if (p.kind() == ParamKind::kSimchoCoordinates) {
    for (Eigen::Index c = 0; c < d; ++c) {
      DK.col(c) = vec(dK_directional(inst, vec_inv(Vector::Unit(d, c), n, m)));
    }
    return DK;
  }
  const Vector theta = p.nominal_theta();
  const double h = 1e-5 * (1.0 + theta.norm());
  for (Eigen::Index c = 0; c < d; ++c) {
    Vector tp = theta, tm = theta;
    tp(c) += h;
    tm(c) -= h;
    const SystemTriple hi = p.evaluate(tp), lo = p.evaluate(tm);
    Matrix K_hi, K_lo;
    try {
      K_hi = gain_for(inst, hi.A, hi.B);
      K_lo = gain_for(inst, lo.A, lo.B);
    } catch (const Error& e) {
      throw Error(ErrorCode::kNotStabilizable,
                  std::string("Riccati re-solve failed near theta: ") + e.what());
    }
    DK.col(c) = vec(K_hi - K_lo) / (2.0 * h);
  }
  return DK;
}

InfoRegretConstant info_regret_constant_detail(const LqgInstance& inst,
                                               const Parametrization& p, double eps) {
  if (!(eps > 0.0)) throw Error(ErrorCode::kInvalidInput, "eps must be positive");
  const Eigen::Index n = inst.d_x(), m = inst.d_u(), d = p.d_theta();
  InfoRegretConstant c;
  c.exact = p.is_affine();
  c.trace_sigma_w_inv = inverse_spd(inst.sys.Sigma_w).trace();
  c.hessian_inv_norm = 1.0 / lambda_min_sym(inst.bpbr());

  const Vector theta0 = p.nominal_theta();
  auto jac_norm_sq = [&](const Vector& theta) {
    const double s = sigma_max(ab_rows(p.jacobian_abc(theta), n, m));
    return s * s;
  };
  c.jacobian_norm_sq = jac_norm_sq(theta0);
  if (!c.exact && d > 0) {
    Rng rng(CertifyOptions{}.seed);
    for (int s = 0; s < CertifyOptions{}.sphere_points; ++s) {
      Vector g = rng.normal_vector(d);
      c.jacobian_norm_sq =
          std::min(c.jacobian_norm_sq, jac_norm_sq(theta0 + eps * g / g.norm()));
    }
  }
  c.L = c.trace_sigma_w_inv * c.jacobian_norm_sq * c.hessian_inv_norm;
  return c;
}

double info_regret_constant(const LqgInstance& inst, const Parametrization& p,
                            double eps) {
  return info_regret_constant_detail(inst, p, eps).L;
}

double lower_bound_main(const LqgInstance& inst, const Parametrization& p,
                        const SubspaceBasis& U, double L) {
  if (U.dim() == 0) return 0.0;
  if (!(L > 0.0)) throw Error(ErrorCode::kInvalidInput, "L must be positive");
  if (spectral_radius(inst.control.closed_loop) >= 1.0) {
    throw Error(ErrorCode::kUnstableClosedLoop, "rho(A + BK) >= 1");
  }
  const Matrix DK = jacobian_K(inst, p);
  const Matrix projected = DK * orth_projector(U) * DK.transpose();
  const double tr = (kron(inst.gamma, inst.bpbr()) * projected).trace();
  return 0.25 * std::sqrt(static_cast<double>(U.dim()) / L) * std::sqrt(std::max(tr, 0.0));
}

double lower_bound_main(const LqgInstance& inst, const Parametrization& p, double eps) {
  const UninformativeCertificate cert = certify_uninformative(inst, p, eps);
  if (!cert.uninformative) return 0.0;
  return lower_bound_main(inst, p, cert.basis, info_regret_constant(inst, p, eps));
}

int kernel_dim_KKT(const Matrix& K) {
  const Matrix KKt = K * K.transpose();
  if (KKt.size() == 0) return 0;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(symmetrize(KKt), Eigen::EigenvaluesOnly);
  const double cutoff = 1e-10 * std::max(1.0, eig.eigenvalues().maxCoeff());
  int k = 0;
  for (Eigen::Index i = 0; i < eig.eigenvalues().size(); ++i) {
    if (eig.eigenvalues()(i) <= cutoff) ++k;
  }
  return k;
}

namespace {

// Factors shared by both corollaries.
double corollary_tail(const LqgInstance& inst) {
  const Matrix H = inst.bpbr();
  return (sigma_min(H) / sigma_max(H)) *
         std::sqrt(sigma_min(inst.sys.Sigma_w) * sigma_min(inst.gamma)) *
         sigma_min(inst.control.closed_loop);
}

}  // namespace

double lower_bound_sf_corollary(const LqgInstance& inst) {
  if (inst.mode() != Mode::kStateFeedback) {
    throw Error(ErrorCode::kWrongMode, "state-feedback corollary on a partially observed instance");
  }
  require_nonsingular_closed_loop(inst);
  const double kk = sigma_max(inst.K() * inst.K().transpose());
  if (kk == 0.0) throw Error(ErrorCode::kDivisionByZero, "K = 0");
  const double dims = static_cast<double>(inst.d_x() * inst.d_u());
  return 0.25 * std::sqrt(dims) * (sigma_min(inst.P()) / kk) * corollary_tail(inst);
}

double lower_bound_po_corollary(const LqgInstance& inst) {
  if (inst.mode() != Mode::kPartiallyObserved) {
    throw Error(ErrorCode::kWrongMode, "partially observed corollary on a state-feedback instance");
  }
  const int ker = kernel_dim_KKT(inst.K());
  if (ker == 0) throw Error(ErrorCode::kNotOveractuated, "K K' is nonsingular");
  require_nonsingular_closed_loop(inst);
  const double dims = static_cast<double>(inst.d_x() * ker);
  return 0.25 * std::sqrt(dims) * sigma_min(inst.P()) * corollary_tail(inst);
}

HardnessReport analyze(const LqgInstance& inst, const Parametrization& p, double eps) {
  HardnessReport r;
  const UninformativeCertificate cert = certify_uninformative(inst, p, eps);
  r.uninformative = cert.uninformative;
  r.U_basis = cert.basis;
  r.dim_U = static_cast<int>(cert.basis.dim());
  if (!cert.exact) {
    r.notes.push_back("certificate sampled at " + std::to_string(cert.sample_points) +
                      " points; exact only for affine parametrizations");
  }
  if (r.uninformative) {
    const InfoRegretConstant L = info_regret_constant_detail(inst, p, eps);
    r.L = L.L;
    r.c_main = lower_bound_main(inst, p, cert.basis, L.L);
    if (!L.exact) r.notes.push_back("L infimum sampled on 16 sphere points");
  } else {
    r.notes.push_back("NotUninformative: no information-singular direction moves K");
  }

  try {
    if (inst.mode() == Mode::kStateFeedback) {
      r.c_sf = lower_bound_sf_corollary(inst);
    } else {
      r.c_po = lower_bound_po_corollary(inst);
    }
  } catch (const Error& e) {
    r.notes.push_back(std::string("corollary bound not applicable: ") + e.what());
  }

  auto& dg = r.diagnostics;
  dg.sigma_min_P = sigma_min(inst.P());
  dg.sigma_min_Gamma = sigma_min(inst.gamma);
  dg.ker_KKT_dim = kernel_dim_KKT(inst.K());
  const Matrix H = inst.bpbr();
  dg.cond_BPBR = sigma_max(H) / sigma_min(H);
  dg.spectral_radius_closed_loop = spectral_radius(inst.control.closed_loop);
  return r;
}

std::string_view SweepKindName(SweepKind kind) {
  switch (kind) {
    case SweepKind::kMarginalStability: return "marginal";
    case SweepKind::kPoorObservability: return "observability";
    case SweepKind::kNearUnitRoot: return "unit-root";
  }
  return "unknown";
}

std::vector<SweepRow> failure_sweep(SweepKind kind, const std::vector<double>& grid,
                                    const SweepFamily& family) {
  if (grid.empty()) throw Error(ErrorCode::kInvalidInput, "sweep grid is empty");
  std::vector<SweepRow> rows;
  rows.reserve(grid.size());
  for (double g : grid) {
    if (!std::isfinite(g)) throw Error(ErrorCode::kInvalidInput, "non-finite grid point");
    LqgSystem sys;
    double a = family.a, b = family.b;
    const Matrix one = Matrix::Identity(1, 1);
    sys.Q = one;
    sys.Sigma_w = one;
    if (kind == SweepKind::kPoorObservability) {
      sys.mode = Mode::kPartiallyObserved;
      sys.A = a * one;
      sys.B = Matrix(1, 2);
      sys.B << b, 0.0;
      sys.C = g * one;
      sys.R = Matrix::Identity(2, 2);
      sys.Sigma_v = one;
    } else {
      if (kind == SweepKind::kMarginalStability) b = g; else a = g;
      sys.mode = Mode::kStateFeedback;
      sys.A = a * one;
      sys.B = b * one;
      sys.R = one;
    }
    const LqgInstance inst = build_instance(sys);
    SweepRow row;
    row.parameter = g;
    row.p = inst.P()(0, 0);
    row.k = inst.K()(0, 0);
    row.closed_loop = inst.control.closed_loop(0, 0);
    row.gamma = inst.gamma(0, 0);
    row.sigma_nu2 = inst.filter.Sigma_nu(0, 0);
    switch (kind) {
      case SweepKind::kMarginalStability:
        row.bound = lower_bound_sf_corollary(inst);
        row.asymptote_ratio = row.p * b * b / (a * a - 1.0);
        break;
      case SweepKind::kPoorObservability:
        row.bound = lower_bound_po_corollary(inst);
        row.asymptote_ratio =
            row.sigma_nu2 * g * g * a * a / ((a * a - 1.0) * (a * a - 1.0));
        break;
      case SweepKind::kNearUnitRoot:
        row.bound = lower_bound_sf_corollary(inst);
        row.asymptote_ratio = row.gamma * (1.0 - row.closed_loop * row.closed_loop);
        break;
    }
    rows.push_back(row);
  }
  return rows;
}

InequalityCheck info_regret_inequality_check(const LqgInstance& inst,
                                             const Parametrization& p,
                                             const PolicySpec& policy, int T,
                                             int n_rollouts, std::uint64_t seed,
                                             double eps) {
  if (n_rollouts < 2 || T < 1) {
    throw Error(ErrorCode::kInvalidInput, "need T >= 1 and at least 2 rollouts");
  }
  const UninformativeCertificate cert = certify_uninformative(inst, p, eps);
  if (!cert.uninformative) {
    throw Error(ErrorCode::kInvalidInput, "instance is not certified uninformative");
  }
  const Matrix& V0 = cert.basis.columns();
  const double L = info_regret_constant(inst, p, eps);
  const Matrix J = p.jacobian_abc(p.nominal_theta());
  const double v_star = optimal_cost(inst, T);

  std::vector<double> lhs(n_rollouts), repr(n_rollouts), direct(n_rollouts),
      diff(n_rollouts), info_trace(n_rollouts);
  parallel_for(static_cast<std::size_t>(n_rollouts), [&](std::size_t i) {
    const Trajectory tr = simulate_rollout(inst, policy, T, seed, i);
    const Matrix info = trajectory_information(tr, inst, J);
    lhs[i] = (V0.transpose() * info * V0).trace();
    info_trace[i] = info.trace();
    repr[i] = representation_sum(tr, inst);
    direct[i] = trajectory_cost(tr, inst) - v_star;
    diff[i] = lhs[i] - L * repr[i];
  });

  InequalityCheck out;
  const MeanSe l = mean_se(lhs), r = mean_se(repr), dr = mean_se(direct),
               d = mean_se(diff), it = mean_se(info_trace);
  out.lhs = l.mean;
  out.lhs_se = l.se;
  out.L = L;
  out.regret = r.mean;
  out.regret_se = r.se;
  out.regret_direct = dr.mean;
  out.regret_direct_se = dr.se;
  out.rhs = L * r.mean;
  out.difference_se = d.se;
  // Per-rollout lhs is a quadratic form that vanishes analytically under
  // the optimal policy; allow for its round-off.
  out.slack = 1e-9 * std::max(1.0, it.mean);
  out.holds = d.mean <= 3.0 * d.se + out.slack;
  return out;
}

LlnCheck covariance_lln_check(const LqgInstance& inst, const PolicySpec& policy,
                              int T, double alpha, double delta, int n_rollouts,
                              std::uint64_t seed) {
  if (T < 1 || n_rollouts < 1) throw Error(ErrorCode::kInvalidInput, "need T, n >= 1");
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw Error(ErrorCode::kInvalidInput, "alpha must lie in (0, 1)");
  }
  const double scale = std::pow(static_cast<double>(T), 1.0 - alpha);
  const int m = static_cast<int>(std::ceil(scale));
  LlnCheck out;
  out.block_length = m;
  out.gramian = finite_gramian(inst.control.closed_loop, inst.filter.Sigma_nu, delta, m);
  out.n_blocks = std::max(0, T / m - 1);
  const Matrix threshold = out.gramian * scale;

  std::vector<double> hit(n_rollouts);
  parallel_for(static_cast<std::size_t>(n_rollouts), [&](std::size_t i) {
    const Trajectory tr = simulate_rollout(inst, policy, T, seed, i);
    bool ok = true;
    for (int k = 1; k <= out.n_blocks && ok; ++k) {
      const Matrix X = tr.xhat.middleCols(static_cast<Eigen::Index>(k) * m, m + 1);
      ok = lambda_min_sym(X * X.transpose() - threshold) >= 0.0;
    }
    hit[i] = ok ? 1.0 : 0.0;
  });
  const MeanSe s = mean_se(hit);
  out.probability = s.mean;
  out.std_error = s.se;
  return out;
}

}  // namespace lqgbound
