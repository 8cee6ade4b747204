#include <gtest/gtest.h>

#include <cmath>

#include "fixtures.hpp"
#include "lqgbound/errors.hpp"
#include "lqgbound/hardness.hpp"
#include "lqgbound/matcalc.hpp"

namespace lqgbound {
namespace {

using fixtures::scalar;

TEST(Certificate, E1UnstructuredAB) {
  const LqgInstance inst = fixtures::e1();
  const Parametrization p = Parametrization::UnstructuredAB(inst.sys);
  const UninformativeCertificate cert = certify_uninformative(inst, p, 0.1);
  ASSERT_TRUE(cert.uninformative);
  EXPECT_EQ(cert.basis.dim(), 1);
  EXPECT_TRUE(cert.exact);
  Matrix expect(2, 1);
  expect << -fixtures::kE1_k, 1.0;
  expect.normalize();
  EXPECT_LT(subspace_sin_distance(cert.basis, SubspaceBasis(expect)), 1e-8);
  EXPECT_LT(subspace_sin_distance(cert.basis, unstructured_singular_subspace(inst)), 1e-8);
}

// Only B unknown: every direction moves the trajectory, nothing to certify.
TEST(Certificate, KnownAIsInformative) {
  const LqgInstance inst = build_instance(fixtures::scalar_sf(2.0, 0.5));
  const UninformativeCertificate cert =
      certify_uninformative(inst, Parametrization::BOnly(inst.sys), 0.1);
  EXPECT_FALSE(cert.uninformative);
  EXPECT_EQ(cert.basis.dim(), 0);
  const HardnessReport rep = analyze(inst, Parametrization::BOnly(inst.sys), 0.1);
  EXPECT_EQ(rep.dim_U, 0);
  EXPECT_EQ(rep.c_main, 0.0);
}

// Simcho coordinates leave the closed loop unchanged, so the whole space is
// singular; the Jacobian of K there is the identity-like analytic form.
TEST(Certificate, SimchoWholeSpace) {
  const LqgInstance inst = build_instance(fixtures::random_sf(2, 2, 4));
  const Parametrization p = Parametrization::SimchoCoordinates(inst.sys, inst.K());
  const UninformativeCertificate cert = certify_uninformative(inst, p, 0.05);
  EXPECT_TRUE(cert.uninformative);
  EXPECT_EQ(cert.basis.dim(), 4);
}

TEST(Certificate, PartiallyObservedBOnly) {
  const LqgInstance inst = fixtures::e_po();
  const Parametrization p = Parametrization::BOnly(inst.sys);
  const UninformativeCertificate cert = certify_uninformative(inst, p, 0.1);
  ASSERT_TRUE(cert.uninformative);
  EXPECT_EQ(cert.basis.dim(), 1);
  // The unused input channel.
  EXPECT_NEAR(std::abs(cert.basis.columns()(1, 0)), 1.0, 1e-10);
}

TEST(Certificate, CustomMapIsSampled) {
  const LqgInstance inst = fixtures::e1();
  const Parametrization p = Parametrization::Custom(
      2,
      [](const Vector& th) {
        return SystemTriple{scalar(th(0)), scalar(th(1)), scalar(1.0)};
      },
      (Vector(2) << 2.0, 1.0).finished());
  const UninformativeCertificate cert = certify_uninformative(inst, p, 0.1);
  EXPECT_FALSE(cert.exact);
  EXPECT_EQ(cert.sample_points, 1 + 16);  // nominal point plus the sphere
  EXPECT_TRUE(cert.uninformative);
}

TEST(UnstructuredSubspace, DegenerateClosedLoop) {
  // With A = 0 the optimal gain is zero and so is the closed loop.
  LqgSystem s = fixtures::scalar_sf(0.0, 1.0);
  const LqgInstance inst = build_instance(s);
  try {
    unstructured_singular_subspace(inst);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDegenerateClosedLoop);
  }
}

TEST(GainDerivative, E1GoldenValues) {
  const LqgInstance inst = fixtures::e1();
  EXPECT_NEAR(dK_directional(inst, scalar(1.0))(0, 0), fixtures::kE1_dK_unit, 1e-12);
  const Parametrization p = Parametrization::UnstructuredAB(inst.sys);
  const Matrix jk = jacobian_K(inst, p);
  ASSERT_EQ(jk.rows(), 1);
  ASSERT_EQ(jk.cols(), 2);
  Vector v(2);
  v << -fixtures::kE1_k, 1.0;
  v.normalize();
  EXPECT_NEAR((jk * v)(0), fixtures::kE1_dK_kernel_unit, 1e-7);
}

TEST(GainDerivative, SimchoAnalyticMatchesDifferences) {
  const LqgInstance inst = build_instance(fixtures::random_sf(3, 2, 8));
  const Parametrization simcho = Parametrization::SimchoCoordinates(inst.sys, inst.K());
  const Matrix analytic = jacobian_K(inst, simcho);
  const Parametrization as_custom = Parametrization::Custom(
      simcho.d_theta(), [&](const Vector& th) { return simcho.evaluate(th); },
      simcho.nominal_theta());
  const Matrix numeric = jacobian_K(inst, as_custom);
  EXPECT_LT((analytic - numeric).norm(), 1e-6 * analytic.norm());
}

TEST(Constants, E1Golden) {
  const LqgInstance inst = fixtures::e1();
  const Parametrization ab = Parametrization::UnstructuredAB(inst.sys);
  EXPECT_NEAR(info_regret_constant(inst, ab, 0.1), fixtures::kE1_L_unstructured_ab, 1e-10);
  const Parametrization sim = Parametrization::SimchoCoordinates(inst.sys, inst.K());
  EXPECT_NEAR(info_regret_constant(inst, sim, 0.1), fixtures::kE1_L_simcho, 1e-10);
  EXPECT_NEAR(lower_bound_main(inst, ab, 0.1) / fixtures::kE1_c_main, 1.0, 1e-6);
  EXPECT_NEAR(lower_bound_sf_corollary(inst) / fixtures::kE1_c_sf, 1.0, 1e-9);
}

TEST(Constants, PartiallyObservedCorollary) {
  EXPECT_NEAR(lower_bound_po_corollary(fixtures::e_po()) / fixtures::kEPO_c_po, 1.0, 1e-9);
  EXPECT_NEAR(lower_bound_po_corollary(build_instance(fixtures::po_system(0.1))) /
                  fixtures::kEPO_c_po_c01, 1.0, 1e-8);
  // Square B: K K' is invertible.
  LqgSystem s = fixtures::po_system(1.0);
  s.B = scalar(1.0);
  s.R = scalar(1.0);
  try {
    lower_bound_po_corollary(build_instance(s));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNotOveractuated);
  }
  EXPECT_EQ(kernel_dim_KKT(fixtures::e_po().K()), 1);
}

TEST(Analyze, ReportFields) {
  const LqgInstance inst = fixtures::e1();
  const HardnessReport rep = analyze(inst, Parametrization::UnstructuredAB(inst.sys), 0.1);
  EXPECT_TRUE(rep.uninformative);
  EXPECT_EQ(rep.dim_U, 1);
  ASSERT_TRUE(rep.c_sf.has_value());
  EXPECT_FALSE(rep.c_po.has_value());
  EXPECT_NEAR(rep.diagnostics.sigma_min_P, fixtures::kE1_p, 1e-9);
  EXPECT_NEAR(rep.diagnostics.spectral_radius_closed_loop, fixtures::kE1_closed_loop, 1e-9);

  const LqgInstance po = fixtures::e_po();
  const HardnessReport rpo = analyze(po, Parametrization::BOnly(po.sys), 0.1);
  EXPECT_EQ(rpo.dim_U, 1);
  ASSERT_TRUE(rpo.c_po.has_value());
  EXPECT_NEAR(*rpo.c_po, fixtures::kEPO_c_po, 1e-9);
}

TEST(Sweep, PoorObservabilityAsymptote) {
  const std::vector<SweepRow> rows =
      failure_sweep(SweepKind::kPoorObservability, {1.0, 0.1, 0.02, 0.01});
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_NEAR(rows[0].sigma_nu2, fixtures::kFilter_c1_sigma_nu, 1e-9);
  EXPECT_NEAR(rows[2].sigma_nu2 / fixtures::kFilter_c002_sigma_nu, 1.0, 1e-8);
  EXPECT_NEAR(rows[3].sigma_nu2 / fixtures::kFilter_c001_sigma_nu, 1.0, 1e-8);
  EXPECT_NEAR(rows[3].bound / fixtures::kEPO_c_po_c001, 1.0, 1e-8);
  for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_GT(rows[i].bound, rows[i - 1].bound);
}

TEST(Sweep, MarginalAndUnitRoot) {
  const std::vector<SweepRow> m = failure_sweep(SweepKind::kMarginalStability, {1.0, 0.1});
  EXPECT_NEAR(m[0].p, fixtures::kE1_p, 1e-9);
  EXPECT_NEAR(m[1].p / fixtures::kScalar_a2_b01_p, 1.0, 1e-9);
  const std::vector<SweepRow> u =
      failure_sweep(SweepKind::kNearUnitRoot, {1.5, 1.1, 1.01}, {2.0, 0.5});
  for (const SweepRow& r : u) EXPECT_NEAR(r.asymptote_ratio, 1.0, 1e-9);
  EXPECT_EQ(SweepKindName(SweepKind::kPoorObservability), "observability");
}

TEST(Inequality, RejectsUncertifiedInstance) {
  const LqgInstance inst = build_instance(fixtures::scalar_sf(2.0, 0.5));
  EXPECT_THROW(info_regret_inequality_check(inst, Parametrization::BOnly(inst.sys),
                                            PolicySpec::Optimal(), 50, 20, 1),
               Error);
}

TEST(Inequality, SmallRunHolds) {
  const LqgInstance inst = fixtures::e1();
  const InequalityCheck c = info_regret_inequality_check(
      inst, Parametrization::UnstructuredAB(inst.sys),
      PolicySpec::LinearFeedback(scalar(fixtures::kE1_k + 0.1)), 100, 500, 3);
  EXPECT_TRUE(c.holds);
  EXPECT_NEAR(c.L, fixtures::kE1_L_unstructured_ab, 1e-10);
}

TEST(Lln, ShortRunIsWellFormed) {
  const LqgInstance inst = fixtures::e1();
  const LlnCheck c = covariance_lln_check(inst, PolicySpec::Optimal(), 256, 0.25, 0.5, 50, 2);
  EXPECT_EQ(c.block_length, static_cast<int>(std::ceil(std::pow(256.0, 0.75))));
  EXPECT_EQ(c.n_blocks, 256 / c.block_length - 1);
  EXPECT_GE(c.probability, 0.0);
  EXPECT_LE(c.probability, 1.0);
  EXPECT_THROW(covariance_lln_check(inst, PolicySpec::Optimal(), 256, 0.25, 5.0, 10, 2), Error);
}

}  // namespace
}  // namespace lqgbound
