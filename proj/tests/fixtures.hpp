#pragma once

// Reference values frozen from tests/oracle/freeze_oracles.py, which goes
// through scipy's Schur-based DARE, explicit sums and finite differences
// rather than anything in the library.

#include <cstdint>
#include <random>

#include "lqgbound/model.hpp"

namespace lqgbound::fixtures {

// E1: a = 2, b = 1, q = r = 1, sigma_w = 1, state feedback.
inline constexpr double kE1_p = 4.236067977499789;
inline constexpr double kE1_k = -1.6180339887498947;
inline constexpr double kE1_closed_loop = 0.3819660112501053;
inline constexpr double kE1_gamma = 1.1708203932499373;
inline constexpr double kE1_dK_unit = -0.30901699437494756;
inline constexpr double kE1_dK_kernel_unit = -0.16245984811645325;
inline constexpr double kE1_L_unstructured_ab = 0.1909830056250526;
inline constexpr double kE1_L_simcho = 0.6909830056250527;
inline constexpr double kE1_c_main = 0.23011051636532598;
inline constexpr double kE1_c_sf = 0.16718507624410558;
inline constexpr double kE1_V100 = 428.5664725252287;
inline constexpr double kE1_bellman_1_0 = 13.708203932499366;
inline constexpr double kE1_feedback01_second_moment = 1.3025772882806879;
inline constexpr double kE1_regret50_feedback005 = 0.803709585841676;
inline constexpr double kE1_regret50_feedback01 = 3.401205288522912;
inline constexpr double kE1_regret50_feedback02 = 15.727211323521095;

inline constexpr double kScalar_a2_b01_p = 301.3318600296359;

// Scalar filter, a = 2, sigma_w = sigma_v = 1.
inline constexpr double kFilter_c1_s = 4.236067977499789;
inline constexpr double kFilter_c1_f = 0.8090169943749473;
inline constexpr double kFilter_c1_sigma_nu = 3.4270509831248415;
inline constexpr double kFilter_c01_sigma_nu = 226.24889502222672;
inline constexpr double kFilter_c002_sigma_nu = 5626.249955565332;
inline constexpr double kFilter_c001_sigma_nu = 22501.24998889049;

// E_PO: a = 2, B = [1, 0], c = 1, R = I_2, unit noises.
inline constexpr double kEPO_xi = 0.8090169943749475;
inline constexpr double kEPO_gamma = 4.0124611797498115;
inline constexpr double kEPO_c_po = 0.15474897980908306;
inline constexpr double kEPO_V50 = 784.2561679724619;
inline constexpr double kEPO_c_po_c01 = 1.2573631996959862;
inline constexpr double kEPO_c_po_c001 = 12.539229012617207;

inline constexpr double kCosineBumpJ = 9.869604401089356;
inline constexpr double kCosineBumpVariance = 0.13069096604865782;
inline constexpr double kGramian_m042229 = 1.2170318902148527;

inline Matrix scalar(double v) { return Matrix::Constant(1, 1, v); }

inline LqgSystem scalar_sf(double a, double b) {
  LqgSystem s;
  s.A = scalar(a);
  s.B = scalar(b);
  s.Q = scalar(1.0);
  s.R = scalar(1.0);
  s.Sigma_w = scalar(1.0);
  s.mode = Mode::kStateFeedback;
  return s;
}

inline LqgSystem e1_system() { return scalar_sf(2.0, 1.0); }
inline LqgInstance e1() { return build_instance(e1_system()); }

inline LqgSystem po_system(double c) {
  LqgSystem s;
  s.A = scalar(2.0);
  s.B = Matrix(1, 2);
  s.B << 1.0, 0.0;
  s.C = scalar(c);
  s.Q = scalar(1.0);
  s.R = Matrix::Identity(2, 2);
  s.Sigma_w = scalar(1.0);
  s.Sigma_v = scalar(1.0);
  s.mode = Mode::kPartiallyObserved;
  return s;
}

inline LqgInstance e_po() { return build_instance(po_system(1.0)); }

// Random state-feedback instance; entries of B are bounded away from zero and
// A has spectral radius in [0.5, 1.5] so the Riccati problems stay well posed.
inline LqgSystem random_sf(int dx, int du, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> nd;
  LqgSystem s;
  s.A = Matrix(dx, dx);
  for (Eigen::Index i = 0; i < s.A.size(); ++i) s.A(i) = nd(gen);
  const double rho = s.A.eigenvalues().cwiseAbs().maxCoeff();
  std::uniform_real_distribution<double> target(0.5, 1.5);
  s.A *= target(gen) / rho;
  s.B = Matrix(dx, du);
  for (Eigen::Index i = 0; i < s.B.size(); ++i) {
    const double v = nd(gen);
    s.B(i) = v + (v >= 0 ? 0.3 : -0.3);
  }
  Matrix q(dx, dx), r(du, du), w(dx, dx);
  for (Eigen::Index i = 0; i < q.size(); ++i) q(i) = nd(gen);
  for (Eigen::Index i = 0; i < r.size(); ++i) r(i) = nd(gen);
  for (Eigen::Index i = 0; i < w.size(); ++i) w(i) = nd(gen);
  s.Q = 0.3 * q * q.transpose() + Matrix::Identity(dx, dx);
  s.R = 0.3 * r * r.transpose() + Matrix::Identity(du, du);
  s.Sigma_w = 0.2 * w * w.transpose() + Matrix::Identity(dx, dx);
  s.mode = Mode::kStateFeedback;
  return s;
}

}  // namespace lqgbound::fixtures
