#include <gtest/gtest.h>

#include <cmath>

#include "fixtures.hpp"
#include "lqgbound/errors.hpp"
#include "lqgbound/matcalc.hpp"
#include "lqgbound/riccati.hpp"

namespace lqgbound {
namespace {

using fixtures::scalar;

TEST(ControlDare, ScalarGoldenValues) {
  const ControlSolution e1 = solve_control_dare(scalar(2), scalar(1), scalar(1), scalar(1));
  EXPECT_NEAR(e1.P(0, 0), fixtures::kE1_p, 1e-10);
  EXPECT_NEAR(e1.K(0, 0), fixtures::kE1_k, 1e-10);
  EXPECT_NEAR(e1.closed_loop(0, 0), fixtures::kE1_closed_loop, 1e-10);
  const ControlSolution weak = solve_control_dare(scalar(2), scalar(0.1), scalar(1), scalar(1));
  EXPECT_NEAR(weak.P(0, 0) / fixtures::kScalar_a2_b01_p, 1.0, 1e-10);
}

TEST(ControlDare, ClosedFormAgreesWithIteration) {
  for (double a : {0.5, 1.0, 1.3, 3.0}) {
    for (double b : {0.2, 1.0, 4.0}) {
      const ScalarRiccati cf = scalar_control_riccati(a, b);
      const ControlSolution it = solve_control_dare(scalar(a), scalar(b), scalar(1), scalar(1));
      EXPECT_NEAR(cf.p, it.P(0, 0), 1e-9 * cf.p) << a << " " << b;
      EXPECT_NEAR(cf.k, it.K(0, 0), 1e-9) << a << " " << b;
    }
  }
  EXPECT_THROW(scalar_control_riccati(2.0, 0.0), Error);
}

TEST(ControlDare, RandomMultivariableResidual) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const LqgSystem s = fixtures::random_sf(3, 2, seed);
    const ControlSolution sol = solve_control_dare(s.A, s.B, s.Q, s.R);
    EXPECT_LT(control_dare_residual(s.A, s.B, s.Q, s.R, sol.P), 1e-10);
    EXPECT_LT(spectral_radius(sol.closed_loop), 1.0);
    EXPECT_TRUE(is_symmetric(sol.P, 1e-10 * sol.P.norm()));
    EXPECT_TRUE(is_positive_definite(sol.P));
  }
}

TEST(ControlDare, Errors) {
  try {
    solve_control_dare(scalar(2), scalar(1), scalar(-1), scalar(1));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidCost);
  }
  // Unstable mode that the input cannot reach.
  Matrix a(2, 2), b(2, 1);
  a << 2, 0,
       0, 0.5;
  b << 0, 1;
  try {
    solve_control_dare(a, b, Matrix::Identity(2, 2), scalar(1));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNotStabilizable);
  }
}

TEST(FilterDare, ScalarGoldenValues) {
  const FilterSolution f = solve_filter_dare(scalar(2), scalar(1), scalar(1), scalar(1));
  EXPECT_NEAR(f.S(0, 0), fixtures::kFilter_c1_s, 1e-10);
  EXPECT_NEAR(f.F(0, 0), fixtures::kFilter_c1_f, 1e-10);
  EXPECT_NEAR(f.Sigma_nu(0, 0), fixtures::kFilter_c1_sigma_nu, 1e-10);
  EXPECT_NEAR(f.Xi(0, 0), fixtures::kEPO_xi, 1e-10);
  const FilterSolution weak = solve_filter_dare(scalar(2), scalar(0.1), scalar(1), scalar(1));
  EXPECT_NEAR(weak.Sigma_nu(0, 0) / fixtures::kFilter_c01_sigma_nu, 1.0, 1e-9);
}

TEST(FilterDare, DualOfControl) {
  const LqgSystem s = fixtures::random_sf(3, 2, 11);
  const Matrix C = s.B.transpose();
  const FilterSolution f = solve_filter_dare(s.A, C, s.Sigma_w, s.R);
  const ControlSolution c = solve_control_dare(s.A.transpose(), C.transpose(), s.Sigma_w, s.R);
  EXPECT_TRUE(f.S.isApprox(c.P, 1e-9));
  EXPECT_LT(filter_dare_residual(s.A, C, s.Sigma_w, s.R, f.S), 1e-10);
}

TEST(FilterDare, Errors) {
  try {
    solve_filter_dare(scalar(2), scalar(0), scalar(1), scalar(0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDegenerateInnovation);
  }
  Matrix a(2, 2), c(1, 2);
  a << 2, 0,
       0, 0.5;
  c << 0, 1;
  try {
    solve_filter_dare(a, c, Matrix::Identity(2, 2), scalar(1));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNotDetectable);
  }
}

TEST(Gramian, ScalarAndLyapunovResidual) {
  const Matrix g = closed_loop_gramian(scalar(fixtures::kE1_closed_loop), scalar(1));
  EXPECT_NEAR(g(0, 0), fixtures::kE1_gamma, 1e-12);
  Matrix m(3, 3);
  m << 0.5, 0.2, 0.0,
       -0.1, 0.3, 0.4,
       0.0, 0.1, -0.6;
  const Matrix sig = Matrix::Identity(3, 3) * 0.7;
  const Matrix gm = closed_loop_gramian(m, sig);
  EXPECT_LT((gm - m * gm * m.transpose() - sig).norm(), 1e-12);
  EXPECT_THROW(closed_loop_gramian(scalar(1.2), scalar(1)), Error);
}

// The doubling branch kicks in above n = 30; it must agree with the direct
// Kronecker solve's defining equation.
TEST(Gramian, LargeSystemUsesDoubling) {
  const int n = 35;
  Matrix m = Matrix::Random(n, n);
  m *= 0.8 / spectral_radius(m);
  const Matrix g = closed_loop_gramian(m, Matrix::Identity(n, n));
  EXPECT_LT((g - m * g * m.transpose() - Matrix::Identity(n, n)).norm(), 1e-9);
}

TEST(Gramian, FiniteSum) {
  const double m = 0.42229;
  const Matrix g = finite_gramian(scalar(m), scalar(1.0), 0.0, 200);
  EXPECT_NEAR(g(0, 0), fixtures::kGramian_m042229, 1e-12);
  const Matrix g0 = finite_gramian(scalar(m), scalar(1.0), 0.5, 0);
  EXPECT_NEAR(g0(0, 0), 0.5, 1e-15);
  try {
    finite_gramian(scalar(m), scalar(1.0), 2.0, 5);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidDelta);
  }
}

}  // namespace
}  // namespace lqgbound
