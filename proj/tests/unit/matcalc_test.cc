#include <gtest/gtest.h>

#include <cmath>

#include "lqgbound/errors.hpp"
#include "lqgbound/matcalc.hpp"

namespace lqgbound {
namespace {

TEST(Vec, ColumnMajorRoundTrip) {
  Matrix m(2, 3);
  m << 1, 2, 3,
       4, 5, 6;
  const Vector v = vec(m);
  ASSERT_EQ(v.size(), 6);
  EXPECT_DOUBLE_EQ(v(0), 1);
  EXPECT_DOUBLE_EQ(v(1), 4);
  EXPECT_DOUBLE_EQ(v(2), 2);
  EXPECT_TRUE(vec_inv(v, 2, 3).isApprox(m));
  EXPECT_THROW(vec_inv(v, 4, 2), Error);
}

// vec(A X B) = (B' kron A) vec X is the identity every Fisher term leans on.
TEST(Kron, VecIdentity) {
  Matrix a = Matrix::Random(3, 2), x = Matrix::Random(2, 4), b = Matrix::Random(4, 2);
  const Vector lhs = vec(a * x * b);
  const Vector rhs = kron(b.transpose(), a) * vec(x);
  EXPECT_LT((lhs - rhs).norm(), 1e-12);
}

TEST(Kron, Shapes) {
  const Matrix k = kron(Matrix::Ones(2, 3), Matrix::Identity(4, 5));
  EXPECT_EQ(k.rows(), 8);
  EXPECT_EQ(k.cols(), 15);
}

TEST(KernelBasis, RankDeficientPsd) {
  Matrix f(4, 2);
  f << 1, 0,
       1, 1,
       0, 2,
       3, 1;
  const Matrix m = f * f.transpose();
  const SubspaceBasis ker = kernel_basis(m, 1e-10);
  EXPECT_EQ(ker.dim(), 2);
  EXPECT_LT((m * ker.columns()).norm(), 1e-9);
  EXPECT_TRUE((ker.columns().transpose() * ker.columns())
                  .isApprox(Matrix::Identity(2, 2), 1e-12));
}

TEST(KernelBasis, FullRankHasEmptyKernel) {
  const SubspaceBasis ker = kernel_basis(Matrix::Identity(3, 3));
  EXPECT_EQ(ker.dim(), 0);
  EXPECT_EQ(ker.ambient_dim(), 3);
}

TEST(KernelBasis, RejectsNonSymmetric) {
  Matrix m(2, 2);
  m << 1, 2, 0, 1;
  EXPECT_THROW(kernel_basis(m), Error);
}

TEST(Subspace, SinDistance) {
  const SubspaceBasis e1(Matrix::Identity(3, 1));
  Matrix rotated(3, 1);
  const double ang = 0.3;
  rotated << std::cos(ang), std::sin(ang), 0;
  EXPECT_NEAR(subspace_sin_distance(e1, SubspaceBasis(rotated)), std::sin(ang), 1e-12);
  EXPECT_NEAR(subspace_sin_distance(e1, e1), 0.0, 1e-15);
  Matrix span(3, 2);
  span << 1, 1,
          0, 1,
          0, 0;
  const SubspaceBasis plane = SubspaceBasis::FromSpan(span);
  EXPECT_EQ(plane.dim(), 2);
  EXPECT_NEAR(subspace_sin_distance(plane, SubspaceBasis(rotated)), 0.0, 1e-12);
  EXPECT_NEAR(subspace_sin_distance(SubspaceBasis(rotated), plane), 1.0, 1e-12);
  const Matrix proj = orth_projector(plane);
  EXPECT_TRUE((proj * proj).isApprox(proj, 1e-12));
}

TEST(Subspace, RejectsNonOrthonormalColumns) {
  EXPECT_THROW(SubspaceBasis(Matrix::Ones(3, 2)), Error);
}

TEST(GaussianFisher, ScalarMeanAndVariance) {
  // N(theta_1, theta_2): information diag(1/s, 1/(2 s^2)).
  const double s = 2.5;
  Matrix mu_jac(1, 2), sig_jac(1, 2);
  mu_jac << 1, 0;
  sig_jac << 0, 1;
  const Matrix info = gaussian_fisher(mu_jac, Matrix::Constant(1, 1, s), sig_jac);
  EXPECT_NEAR(info(0, 0), 1 / s, 1e-14);
  EXPECT_NEAR(info(1, 1), 1 / (2 * s * s), 1e-14);
  EXPECT_NEAR(info(0, 1), 0, 1e-14);
}

// Covariance and its derivatives do not commute here, so the trace form is the
// only trustworthy reference.
TEST(GaussianFisher, MatchesTraceFormNonCommuting) {
  Matrix sigma(2, 2);
  sigma << 2.0, 0.6,
           0.6, 1.0;
  Matrix d1(2, 2), d2(2, 2);
  d1 << 1.0, 0.0,
        0.0, 0.0;
  d2 << 0.0, 1.0,
        1.0, 0.5;
  Matrix sig_jac(4, 2);
  sig_jac.col(0) = vec(d1);
  sig_jac.col(1) = vec(d2);
  const Matrix info = gaussian_fisher(Matrix::Zero(2, 2), sigma, sig_jac);
  const Matrix si = sigma.inverse();
  const Matrix* ds[2] = {&d1, &d2};
  for (int m = 0; m < 2; ++m) {
    for (int n = 0; n < 2; ++n) {
      const double ref = 0.5 * (si * *ds[m] * si * *ds[n]).trace();
      EXPECT_NEAR(info(m, n), ref, 1e-13);
    }
  }
}

TEST(GaussianFisher, SingularCovarianceThrows) {
  try {
    gaussian_fisher(Matrix::Ones(2, 1), Matrix::Ones(2, 2), Matrix::Zero(4, 1));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSingularCovariance);
  }
}

TEST(Helpers, SingularValuesAndSqrtFactor) {
  Matrix m(2, 2);
  m << 3, 0,
       0, -0.5;
  EXPECT_DOUBLE_EQ(sigma_max(m), 3);
  EXPECT_DOUBLE_EQ(sigma_min(m), 0.5);
  EXPECT_DOUBLE_EQ(spectral_radius(m), 3);
  Matrix psd(2, 2);
  psd << 1, 1,
         1, 1;
  const Matrix l = psd_sqrt_factor(psd);
  EXPECT_TRUE((l * l.transpose()).isApprox(psd, 1e-12));
  EXPECT_FALSE(is_positive_definite(psd));
  EXPECT_NEAR(lambda_min_sym(psd), 0.0, 1e-14);
}

}  // namespace
}  // namespace lqgbound
