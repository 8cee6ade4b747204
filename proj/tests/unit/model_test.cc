#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "lqgbound/errors.hpp"
#include "lqgbound/matcalc.hpp"
#include "lqgbound/model.hpp"

namespace lqgbound {
namespace {

using fixtures::scalar;

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no Error thrown";
  return ErrorCode::kInvalidInput;
}

TEST(BuildInstance, StateFeedbackFillsObservation) {
  const LqgInstance inst = fixtures::e1();
  EXPECT_EQ(inst.mode(), Mode::kStateFeedback);
  EXPECT_TRUE(inst.sys.C.isIdentity());
  EXPECT_TRUE(inst.sys.Sigma_v.isZero());
  EXPECT_NEAR(inst.P()(0, 0), fixtures::kE1_p, 1e-10);
  EXPECT_NEAR(inst.gamma(0, 0), fixtures::kE1_gamma, 1e-10);
  EXPECT_NEAR(inst.Sigma_x0(0, 0), fixtures::kE1_gamma, 1e-10);
  EXPECT_NEAR(inst.bpbr()(0, 0), fixtures::kE1_p + 1.0, 1e-10);
  // Full observation: the innovation is the process noise itself.
  EXPECT_NEAR(inst.filter.Sigma_nu(0, 0), 1.0, 1e-12);
  EXPECT_NEAR(inst.filter.Xi(0, 0), 0.0, 1e-12);
}

TEST(BuildInstance, PartiallyObserved) {
  const LqgInstance inst = fixtures::e_po();
  EXPECT_EQ(inst.d_u(), 2);
  EXPECT_NEAR(inst.K()(0, 0), fixtures::kE1_k, 1e-10);
  EXPECT_NEAR(inst.K()(1, 0), 0.0, 1e-12);
  EXPECT_NEAR(inst.filter.Sigma_nu(0, 0), fixtures::kFilter_c1_sigma_nu, 1e-10);
  EXPECT_NEAR(inst.gamma(0, 0), fixtures::kEPO_gamma, 1e-10);
  EXPECT_NEAR(inst.Sigma_x0(0, 0), fixtures::kFilter_c1_s, 1e-10);
}

TEST(BuildInstance, Validation) {
  LqgSystem s = fixtures::e1_system();
  s.Sigma_w = scalar(0.0);
  EXPECT_EQ(code_of([&] { build_instance(s); }), ErrorCode::kNondegeneracyViolated);

  s = fixtures::po_system(1.0);
  s.Sigma_v = scalar(0.0);
  EXPECT_EQ(code_of([&] { build_instance(s); }), ErrorCode::kNondegeneracyViolated);

  s = fixtures::e1_system();
  s.C = scalar(2.0);
  EXPECT_EQ(code_of([&] { build_instance(s); }), ErrorCode::kInvalidInput);

  s = fixtures::e1_system();
  s.B = Matrix::Ones(2, 1);
  EXPECT_EQ(code_of([&] { build_instance(s); }), ErrorCode::kInvalidDimensions);

  s = fixtures::e1_system();
  s.A(0, 0) = std::nan("");
  EXPECT_EQ(code_of([&] { build_instance(s); }), ErrorCode::kInvalidInput);

  s = fixtures::po_system(0.0);
  EXPECT_EQ(code_of([&] { build_instance(s); }), ErrorCode::kNotDetectable);
}

TEST(BuildInstance, WithMatricesResolves) {
  const LqgInstance inst = fixtures::e1();
  const LqgInstance moved = with_matrices(inst, scalar(2.0), scalar(0.1), scalar(1.0));
  EXPECT_NEAR(moved.P()(0, 0), fixtures::kScalar_a2_b01_p, 1e-8);
}

TEST(Parametrization, UnstructuredABRoundTrip) {
  const LqgSystem s = fixtures::random_sf(2, 1, 3);
  const LqgInstance inst = build_instance(s);
  const Parametrization p = Parametrization::UnstructuredAB(inst.sys);
  EXPECT_EQ(p.d_theta(), 6);
  const SystemTriple t = p.evaluate(p.nominal_theta());
  EXPECT_TRUE(t.A.isApprox(s.A));
  EXPECT_TRUE(t.B.isApprox(s.B));
  const Matrix jac = p.jacobian_abc(p.nominal_theta());
  EXPECT_EQ(jac.rows(), 4 + 2 + 4);
  EXPECT_TRUE(ab_rows(jac, 2, 1).isIdentity());
  EXPECT_TRUE(c_rows(jac, 2, 1).isZero());
  EXPECT_EQ(code_of([&] { p.evaluate(Vector::Zero(3)); }), ErrorCode::kInvalidTheta);
}

TEST(Parametrization, BOnlyAndUnstructured) {
  const LqgInstance inst = fixtures::e_po();
  const Parametrization b = Parametrization::BOnly(inst.sys);
  EXPECT_EQ(b.d_theta(), 2);
  const Matrix jb = b.jacobian_abc(b.nominal_theta());
  EXPECT_TRUE(jb.topRows(1).isZero());
  EXPECT_TRUE(jb.middleRows(1, 2).isIdentity());
  const Parametrization u = Parametrization::Unstructured(inst.sys);
  EXPECT_EQ(u.d_theta(), 1 + 2 + 1);
  EXPECT_TRUE(u.jacobian_abc(u.nominal_theta()).isIdentity());
}

TEST(Parametrization, SimchoKeepsClosedLoop) {
  const LqgInstance inst = build_instance(fixtures::random_sf(3, 2, 5));
  const Parametrization p = Parametrization::SimchoCoordinates(inst.sys, inst.K());
  Vector theta = Vector::Random(p.d_theta());
  const SystemTriple t = p.evaluate(theta);
  // A - Delta K + (B + Delta) K = A + B K for every Delta.
  EXPECT_TRUE((t.A + t.B * inst.K()).isApprox(inst.control.closed_loop, 1e-12));
}

TEST(Parametrization, CustomFiniteDifferenceMatchesAffine) {
  const LqgInstance inst = fixtures::e1();
  std::vector<SystemTriple> basis = {{scalar(1.0), scalar(0.5), scalar(0.0)},
                                     {scalar(0.0), scalar(-2.0), scalar(0.0)}};
  const Parametrization aff = Parametrization::Affine(
      {inst.sys.A, inst.sys.B, inst.sys.C}, basis);
  const Parametrization custom = Parametrization::Custom(
      2, [&](const Vector& th) { return aff.evaluate(th); }, Vector::Zero(2));
  EXPECT_FALSE(custom.is_affine());
  EXPECT_LT((aff.jacobian_abc(aff.nominal_theta()) -
             custom.jacobian_abc(custom.nominal_theta())).norm(),
            1e-8);
}

TEST(Policy, DitherScheduleAndDescribe) {
  const PolicySpec ce = PolicySpec::CeDither(0.5, 0.25);
  EXPECT_DOUBLE_EQ(ce.dither_std(0), 0.5);
  EXPECT_DOUBLE_EQ(ce.dither_std(1), 0.5);
  EXPECT_NEAR(ce.dither_std(16), 0.25, 1e-15);
  EXPECT_EQ(PolicySpec::Optimal().describe(), "optimal");
  EXPECT_EQ(ce.describe(), "ce-dither(sigma0=0.5,beta=0.25)");
  EXPECT_THROW(PolicySpec::CeDither(-1.0, 0.25), Error);
}

TEST(Policy, LinearFeedbackShapeChecked) {
  const LqgInstance inst = fixtures::e1();
  const PolicySpec bad = PolicySpec::LinearFeedback(Matrix::Ones(2, 1));
  EXPECT_EQ(code_of([&] { PolicyRunner(bad, inst); }), ErrorCode::kInvalidDimensions);
}

TEST(Policy, FrozenCeDitherKeepsGain) {
  const LqgInstance inst = fixtures::e1();
  PolicySpec ce = PolicySpec::CeDither(0.5, 0.25);
  ce.adapt_gain = false;
  ce.initial_gain = scalar(-1.0);
  PolicyRunner runner(ce, inst);
  Rng rng(3);
  Vector x = Vector::Ones(1);
  for (int t = 0; t < 100; ++t) {
    const Vector u = runner.act(t, x, rng);
    const Vector next = inst.sys.A * x + inst.sys.B * u + rng.normal_vector(1);
    runner.observe(x, u, next);
    x = next;
  }
  EXPECT_DOUBLE_EQ(runner.gain()(0, 0), -1.0);
}

// With plenty of excitation the least-squares refits should move an initial
// gain towards the optimal one.
TEST(Policy, CeDitherLearnsTowardsOptimalGain) {
  const LqgInstance inst = fixtures::e1();
  PolicySpec ce = PolicySpec::CeDither(1.0, 0.0);
  ce.initial_gain = scalar(-1.2);
  PolicyRunner runner(ce, inst);
  Rng rng(17);
  Vector x = Vector::Zero(1);
  for (int t = 0; t < 4096; ++t) {
    const Vector u = runner.act(t, x, rng);
    const Vector next = inst.sys.A * x + inst.sys.B * u + rng.normal_vector(1);
    runner.observe(x, u, next);
    x = next;
  }
  EXPECT_NEAR(runner.gain()(0, 0), fixtures::kE1_k, 0.05);
}

TEST(Simulate, ShapesAndDeterminism) {
  const LqgInstance inst = fixtures::e_po();
  const Trajectory a = simulate(inst, PolicySpec::Optimal(), 30, 99);
  const Trajectory b = simulate(inst, PolicySpec::Optimal(), 30, 99);
  const Trajectory c = simulate(inst, PolicySpec::Optimal(), 30, 100);
  EXPECT_EQ(a.horizon(), 30);
  EXPECT_EQ(a.x.cols(), 31);
  EXPECT_EQ(a.u.rows(), 2);
  EXPECT_EQ(a.nu.cols(), 30);
  EXPECT_TRUE(a.x == b.x);
  EXPECT_TRUE(a.u == b.u);
  EXPECT_FALSE(a.x == c.x);
  EXPECT_THROW(simulate(inst, PolicySpec::Optimal(), 0, 1), Error);
}

TEST(Simulate, FilterRecursionHolds) {
  const LqgInstance inst = fixtures::e_po();
  const Trajectory tr = simulate(inst, PolicySpec::CeDither(0.3, 0.25), 40, 5);
  const Matrix& A = inst.sys.A;
  const Matrix& B = inst.sys.B;
  const Matrix& C = inst.sys.C;
  const Matrix& F = inst.filter.F;
  EXPECT_TRUE(tr.zeta.col(0).isZero());
  for (int t = 0; t < 40; ++t) {
    const Vector zeta = A * tr.xhat.col(t) + B * tr.u.col(t);
    EXPECT_LT((tr.zeta.col(t + 1) - zeta).norm(), 1e-9);
    const Vector nu = F * (tr.y.col(t + 1) - C * zeta);
    EXPECT_LT((tr.nu.col(t) - nu).norm(), 1e-9);
    EXPECT_LT((tr.xhat.col(t + 1) - zeta - nu).norm(), 1e-9);
  }
}

TEST(Simulate, StateFeedbackObservesState) {
  const LqgInstance inst = fixtures::e1();
  const Trajectory tr = simulate(inst, PolicySpec::Optimal(), 25, 8);
  EXPECT_TRUE(tr.xhat.isApprox(tr.x));
  for (int t = 0; t < 25; ++t) {
    EXPECT_NEAR(tr.u(0, t), fixtures::kE1_k * tr.x(0, t), 1e-12);
  }
}

TEST(Rng, StreamsAreIndependentOfThreadCount) {
  Rng a = Rng::ForRollout(1, 7), b = Rng::ForRollout(1, 7), c = Rng::ForRollout(1, 8);
  const double va = a.normal();
  EXPECT_EQ(va, b.normal());
  EXPECT_NE(va, c.normal());
  const Trajectory t1 = simulate_rollout(fixtures::e1(), PolicySpec::Optimal(), 10, 42, 3);
  const Trajectory t2 = simulate_rollout(fixtures::e1(), PolicySpec::Optimal(), 10, 42, 3);
  EXPECT_TRUE(t1.x == t2.x);
}

}  // namespace
}  // namespace lqgbound
