#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lqgbound/fisher.hpp"
#include "lqgbound/model.hpp"
#include "lqgbound/regret.hpp"

namespace lqgbound {

/// Result of the local-uninformativeness test.
struct UninformativeCertificate {
  bool uninformative = false;
  SubspaceBasis basis;       // filtered information-singular subspace in theta-space
  SubspaceBasis raw_kernel;  // kernel intersection before the dK filter
  int sample_points = 0;
  bool exact = true;  // false when the neighbourhood was only sampled (Custom maps)
};

struct CertifyOptions {
  /// Eigenvalues at or below kernel_tol * trace count as zero.
  double kernel_tol = 1e-9;
  /// Directions with |dK v| <= dk_tol * |dK|_inf are dropped.
  double dk_tol = 1e-8;
  int sphere_points = 16;
  std::uint64_t seed = 0x5eedULL;
};

/// Matrix whose kernel characterizes information singularity under the
/// nominal optimal policy, with the Jacobian evaluated at theta:
///   state feedback:    J_AB' (H H' kron Sigma_w^-1) J_AB,  H = [I; K]
///   partially observed: J_AB' (blkdiag(I, K K') kron Sigma_w^-1) J_AB
///                       + J_C' (I kron Sigma_v^-1) J_C
Matrix singularity_matrix(const LqgInstance& inst, const Parametrization& p,
                          const Vector& theta);

UninformativeCertificate certify_uninformative(const LqgInstance& inst,
                                               const Parametrization& p, double eps,
                                               const CertifyOptions& opts = {});

/// Explicit basis {vec[-Delta K, Delta]} of the singular subspace for the
/// unstructured (A, B) parametrization, orthonormalized.
/// kDegenerateClosedLoop when A + BK is singular.
SubspaceBasis unstructured_singular_subspace(const LqgInstance& inst);

/// Derivative of K along (A - t Delta K, B + t Delta) at t = 0:
///   -(R + B'PB)^-1 Delta' P (A + BK).
Matrix dK_directional(const LqgInstance& inst, const Matrix& Delta);

/// D_theta vec K at the nominal theta. Analytic for SimchoCoordinates, central
/// differences through control Riccati re-solves otherwise.
Matrix jacobian_K(const LqgInstance& inst, const Parametrization& p);

struct InfoRegretConstant {
  double L = 0.0;
  double trace_sigma_w_inv = 0.0;
  double jacobian_norm_sq = 0.0;  // inf over the sampled ball of |J_AB|_2^2
  double hessian_inv_norm = 0.0;  // |(B'PB + R)^-1|_2
  bool exact = true;
};

InfoRegretConstant info_regret_constant_detail(const LqgInstance& inst,
                                               const Parametrization& p, double eps);
double info_regret_constant(const LqgInstance& inst, const Parametrization& p,
                            double eps);

/// (1/4) sqrt(dim U / L) sqrt(tr[(Gamma kron (B'PB + R)) DK Pi_U DK']);
/// 0 when the instance is not certified uninformative.
double lower_bound_main(const LqgInstance& inst, const Parametrization& p, double eps);
double lower_bound_main(const LqgInstance& inst, const Parametrization& p,
                        const SubspaceBasis& U, double L);

/// Closed-form state-feedback bound for unknown (A, B).
double lower_bound_sf_corollary(const LqgInstance& inst);
/// Closed-form partially observed bound for unknown B with K K' singular.
double lower_bound_po_corollary(const LqgInstance& inst);

struct HardnessDiagnostics {
  double sigma_min_P = 0.0;
  double sigma_min_Gamma = 0.0;
  int ker_KKT_dim = 0;
  double cond_BPBR = 0.0;
  double spectral_radius_closed_loop = 0.0;
};

struct HardnessReport {
  bool uninformative = false;
  SubspaceBasis U_basis;
  int dim_U = 0;
  double L = 0.0;
  double c_main = 0.0;
  std::optional<double> c_sf;
  std::optional<double> c_po;
  HardnessDiagnostics diagnostics;
  std::vector<std::string> notes;
};

HardnessReport analyze(const LqgInstance& inst, const Parametrization& p, double eps);

int kernel_dim_KKT(const Matrix& K);

enum class SweepKind {
  kMarginalStability,  // scalar state feedback, a fixed, b -> 0
  kPoorObservability,  // scalar PO with B = [1, 0], c -> 0
  kNearUnitRoot,       // scalar state feedback, b fixed, a -> 1+
};

struct SweepRow {
  double parameter = 0.0;
  double p = 0.0;
  double k = 0.0;
  double closed_loop = 0.0;  // a + b k
  double gamma = 0.0;
  double sigma_nu2 = 0.0;
  double bound = 0.0;        // c_sf or c_po
  double asymptote_ratio = 0.0;
};

struct SweepFamily {
  double a = 2.0;
  double b = 1.0;  // fixed b for kPoorObservability and kNearUnitRoot
};

/// Asymptote ratios: kMarginalStability p b^2 / (a^2 - 1);
/// kPoorObservability sigma_nu^2 c^2 a^2 / (a^2 - 1)^2; kNearUnitRoot
/// Gamma (1 - (a + bk)^2), which is 1 by construction.
std::vector<SweepRow> failure_sweep(SweepKind kind, const std::vector<double>& grid,
                                    const SweepFamily& family = {});
std::string_view SweepKindName(SweepKind kind);

struct InequalityCheck {
  double lhs = 0.0;          // tr(V0' I V0), Monte Carlo
  double lhs_se = 0.0;
  double L = 0.0;
  double regret = 0.0;       // representation estimate used on the right
  double regret_se = 0.0;
  double regret_direct = 0.0;
  double regret_direct_se = 0.0;
  double rhs = 0.0;          // L * regret
  double difference_se = 0.0;  // SE of the per-rollout lhs - L * regret
  double slack = 0.0;
  bool holds = false;
};

/// tr(V0' I^T V0) <= L R_T on paired rollouts. V0 spans the certified
/// subspace; the information is the state-feedback form or the output upper
/// bound depending on mode. kInvalidInput when the instance is not certified.
InequalityCheck info_regret_inequality_check(const LqgInstance& inst,
                                             const Parametrization& p,
                                             const PolicySpec& policy, int T,
                                             int n_rollouts, std::uint64_t seed,
                                             double eps = 0.1);

struct LlnCheck {
  double probability = 0.0;
  double std_error = 0.0;
  int block_length = 0;
  int n_blocks = 0;
  Matrix gramian;
};

/// Fraction of rollouts in which every block k = 1 .. floor(T/m) - 1 with
/// m = ceil(T^(1-alpha)) satisfies
///   sum_{t=km}^{(k+1)m} xhat_t xhat_t' >= Gamma_T T^(1-alpha)
/// where Gamma_T = finite_gramian(A + BK, Sigma_nu, delta, m).
LlnCheck covariance_lln_check(const LqgInstance& inst, const PolicySpec& policy,
                              int T, double alpha, double delta, int n_rollouts,
                              std::uint64_t seed);

}  // namespace lqgbound
