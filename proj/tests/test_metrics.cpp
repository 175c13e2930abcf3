#include <gtest/gtest.h>

#include "gcreg/fixtures.hpp"
#include "gcreg/metrics.hpp"
#include "test_util.hpp"

using namespace gcreg;

TEST(Jacobian, IdentityStretchAndFold) {
  const VectorField2 z = VectorField2::zeros(10, 10);
  EXPECT_EQ(min_value(jacobian_det_field(z)), 1.0);
  EXPECT_EQ(max_value(jacobian_det_field(z)), 1.0);

  VectorField2 s = z;
  s.x = test::field_xy(10, [](double x, double) { return 0.3 * x; });
  EXPECT_LE(max_abs(jacobian_det_field(s) - ScalarField(10, 10, 1.0, 1.3)), 1e-12);

  VectorField2 f = z;
  f.x = test::field_xy(10, [](double x, double) { return -2.0 * x; });
  EXPECT_LE(max_abs(jacobian_det_field(f) - ScalarField(10, 10, 1.0, -1.0)), 1e-12);
}

TEST(Quality, ZeroDisplacementAndIdenticalImages) {
  const ScalarField t = test::random_field(10, 10, 1, 50.0);
  const ScalarField r = test::random_field(10, 10, 2, 50.0);
  const QualityReport q = quality(t, r, VectorField2::zeros_like(t));
  EXPECT_EQ(q.epsilon, 1.0);
  EXPECT_EQ(q.min_jac, 1.0);
  EXPECT_EQ(q.negative_jac_count, 0);
  EXPECT_EQ(quality(t, t, VectorField2::zeros_like(t)).epsilon, 0.0);
}

TEST(Quality, RecoveredIntegerShift) {
  const ScalarField t = test::random_field(16, 16, 4, 100.0);
  VectorField2 u = VectorField2::zeros_like(t);
  u.x = ScalarField(16, 16, 1.0, 3.0);
  u.y = ScalarField(16, 16, 1.0, -1.0);
  const QualityReport q = quality(t, sample_warped(t, u), u);
  EXPECT_EQ(q.epsilon, 0.0);
  EXPECT_EQ(q.min_jac, 1.0);
}

TEST(Quality, FoldIsCounted) {
  const ScalarField t = test::random_field(10, 10, 3);
  VectorField2 u = VectorField2::zeros(10, 10);
  u.x = test::field_xy(10, [](double x, double) { return -2.0 * x; });
  const QualityReport q = quality(t, t, u);
  EXPECT_LT(q.min_jac, 0.0);
  EXPECT_EQ(q.negative_jac_count, 100);
}

TEST(Quality, FoldIndicatorsConsistent) {
  for (unsigned seed = 0; seed < 20; ++seed) {
    const VectorField2 u{test::smooth_random(12, seed, 3.0, 1.0), test::smooth_random(12, seed + 100, 3.0, 1.0)};
    const QualityReport q = quality(ScalarField(12, 12), ScalarField(12, 12), u);
    EXPECT_EQ(q.negative_jac_count == 0, q.min_jac > 0.0);
  }
}

TEST(Fixtures, GroundTruthAndDeterminism) {
  const Fixture a = make_fixture(FixtureKind::gaussian_shift, 64);
  const double before = ssd(a.template_image, a.reference);
  EXPECT_GT(before, 0.0);
  EXPECT_LT(ssd(a.template_image, a.reference, a.u_true), 1e-6 * before);

  const Fixture w = make_fixture(FixtureKind::smooth_warp, 64);
  EXPECT_GT(min_value(jacobian_det_field(w.u_true)), 0.0);

  const Fixture s1 = make_fixture(FixtureKind::square_rotate, 40);
  const Fixture s2 = make_fixture(FixtureKind::square_rotate, 40);
  EXPECT_EQ(s1.reference, s2.reference);

  FixtureParams p;
  p.shift_x = 0.0;
  const Fixture z = make_fixture(FixtureKind::gaussian_shift, 32, p);
  EXPECT_EQ(z.template_image, z.reference);

  EXPECT_THROW(make_fixture(FixtureKind::gaussian_shift, 31), Error);
  EXPECT_EQ(parse_fixture_kind("smooth_warp"), FixtureKind::smooth_warp);
  EXPECT_FALSE(parse_fixture_kind("blob"));
}
