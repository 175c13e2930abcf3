#include <gtest/gtest.h>

#include "gcreg/oracle.hpp"
#include "test_util.hpp"

using namespace gcreg;

namespace {

struct Step1Instance {
  ScalarField u;
  VectorField2 q;
  VectorField2 mu;
};

// q close to the identity gradient (x, y), so det(grad q) stays near 1.
Step1Instance step1_instance(int n, unsigned seed) {
  const ScalarField x = test::field_xy(n, [](double a, double) { return a; });
  const ScalarField y = test::field_xy(n, [](double, double b) { return b; });
  return {test::smooth_random(n, seed, 3.0, 1.5),
          {x + test::smooth_random(n, seed + 1, 0.3, 1.5), y + test::smooth_random(n, seed + 2, 0.3, 1.5)},
          {test::smooth_random(n, seed + 3, 0.5, 1.5), test::smooth_random(n, seed + 4, 0.5, 1.5)}};
}

// Convex bowl plus smooth noise: det of the Hessian stays near 0.09.
ScalarField el_instance(int n, unsigned seed) {
  const double c = 0.5 * (n - 1);
  return test::field_xy(n, [c](double x, double y) { return 0.15 * ((x - c) * (x - c) + (y - c) * (y - c)); }) +
         test::smooth_random(n, seed, 0.2, 2.0);
}

}  // namespace

TEST(NumericGradient, QuadraticAndConstant) {
  const ScalarField u = test::random_field(10, 10, 1);
  const ScalarEnergy half_sq = [](const ScalarField& v) { return 0.5 * inner(v, v); };
  EXPECT_LE(test::max_abs_diff(numeric_gradient(half_sq, u, 1e-5), u), 1e-8);
  const ScalarEnergy constant = [](const ScalarField&) { return 3.0; };
  EXPECT_EQ(max_abs(numeric_gradient(constant, u, 1e-5)), 0.0);
  EXPECT_THROW(numeric_gradient(half_sq, ScalarField(33, 8), 1e-5), Error);
  EXPECT_THROW(numeric_gradient(half_sq, u, 0.0), Error);
}

TEST(NumericGradient, LinearCurvatureEnergy) {
  const ScalarField u = test::smooth_random(16, 2, 3.0, 1.5);
  const ScalarEnergy e = [](const ScalarField& v) { return lc_energy(v); };
  const ScalarField num = numeric_gradient(e, u, 1e-5);
  const ScalarField ana = 2.0 * biharmonic(u);
  EXPECT_LE(test::max_abs_diff(num, ana) / max_abs(num), 1e-4);
}

TEST(VerifyStep1, PureQuadraticWhenGammaZero) {
  const Step1Instance s = step1_instance(16, 10);
  // The objective is quadratic, so any step is exact up to round-off.
  const GradCheckReport rep = verify_step1_el(s.u, s.q, s.mu, 0.0, 0.1, 1e-3);
  EXPECT_LE(rep.max_rel_err, 1e-8);
  EXPECT_EQ(rep.nodes_skipped, 0);
  EXPECT_EQ(rep.nodes_checked, 2 * 16 * 16);
}

TEST(VerifyStep1, CurvatureTermMatches) {
  const Step1Instance s = step1_instance(16, 20);
  for (double gamma : {1e-4, 1.0}) {
    const GradCheckReport rep = verify_step1_el(s.u, s.q, s.mu, gamma, 0.1);
    EXPECT_LE(rep.max_rel_err, 1e-3) << gamma;
    EXPECT_GE(rep.max_rel_err, rep.mean_rel_err);
    EXPECT_GT(rep.nodes_checked, 400);
    EXPECT_EQ(rep.step, 1e-6);
  }
}

TEST(VerifyStep1, PenaltyPartLinearInR) {
  const Step1Instance s = step1_instance(10, 30);
  const VectorField2 zero_mu = VectorField2::zeros(10, 10);
  const VectorField2 a = step1_residual(s.u, s.q, zero_mu, 0.0, 0.1);
  const VectorField2 b = step1_residual(s.u, s.q, zero_mu, 0.0, 0.2);
  EXPECT_LE(test::max_abs_diff(b.x, 2.0 * a.x) + test::max_abs_diff(b.y, 2.0 * a.y), 1e-14);
}

TEST(VerifyStep1, SkipsNodesNearKink) {
  Step1Instance s = step1_instance(12, 40);
  s.q.x = ScalarField(12, 12);  // det(grad q) = 0 everywhere
  const GradCheckReport rep = verify_step1_el(s.u, s.q, s.mu, 1e-2, 0.1);
  EXPECT_EQ(rep.nodes_checked, 0);
  EXPECT_EQ(rep.nodes_skipped, 2 * 12 * 12);
}

TEST(VerifyEl, SmoothInstance) {
  const ScalarField u = el_instance(16, 50);
  for (double gamma : {1e-4, 1.0}) {
    const GradCheckReport rep = verify_el17(u, gamma);
    EXPECT_LE(rep.max_rel_err, 1e-2) << gamma;
    EXPECT_GT(rep.nodes_checked, 100);
  }
}

TEST(VerifyEl, AffineKernel) {
  const ScalarField a = test::field_xy(12, [](double x, double y) { return 0.3 * x - 0.6 * y + 2.0; });
  EXPECT_LE(max_abs(gc_regularizer_operator(a, 1.0).total), 1e-10);
  const ScalarEnergy e = [](const ScalarField& v) { return gc_energy(v); };
  EXPECT_LE(max_abs(numeric_gradient(e, a, 1e-5)), 1e-6);
}
