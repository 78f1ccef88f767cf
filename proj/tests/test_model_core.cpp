#include "test_util.hpp"

using namespace semitrack;

TEST(ModelCore, ReferenceMatrices) {
  const auto M = build_matrices(reference_body(), reference_axles());
  EXPECT_NEAR(M.Lambda(0, 0), 454.545, 1e-3);
  EXPECT_NEAR(M.Lambda(1, 1), 555.556, 1e-3);
  EXPECT_NEAR(M.b(0), -0.38462, 1e-5);
  EXPECT_NEAR(M.b(1), 0.075, 1e-12);
  EXPECT_TRUE(M.H.isApprox(1.84 * Mat2d::Identity()));
  EXPECT_TRUE(M.G2.isApprox(-50 * Mat2d::Identity()));
  Mat2d A1;
  A1 << 0, -50, 0, 0;
  EXPECT_TRUE(M.A1.isApprox(A1));
  Mat2d G1;
  G1 << -1.0 / 1300, -1.0 / 1300, -1.4 / 2000, 1.0 / 2000;
  EXPECT_TRUE(M.G1.isApprox(G1));
}

TEST(ModelCore, NoWindNoDisturbance) {
  auto body = reference_body();
  body.Fw = 0;
  EXPECT_TRUE(build_matrices(body, reference_axles()).b.isZero());
}

TEST(ModelCore, PressureProfile) {
  const auto ax = reference_axles()[0];
  EXPECT_NEAR(pressure_profile(ax, 0.0), 1.05083, 1e-5);
  EXPECT_NEAR(pressure_profile(ax, 1.0), 0.95083, 1e-5);
  EXPECT_NEAR(test::simpson([&](double x) { return pressure_profile(ax, x); }), 1.0, 1e-12);
  const double h = 1e-6;
  EXPECT_NEAR(pressure_slope(ax, 0.4), (pressure_profile(ax, 0.4 + h) - pressure_profile(ax, 0.4 - h)) / (2 * h), 1e-8);
}

TEST(ModelCore, FrictionDiagonal) {
  const auto axles = reference_axles();
  EXPECT_TRUE(sigma_matrix(Vec2d(0, 0), axles, 0.0).isZero());
  Mat2d expected = Mat2d::Zero();
  expected(0, 0) = -240;
  EXPECT_TRUE(sigma_matrix(Vec2d(1, 0), axles, 0.0).isApprox(expected));
  EXPECT_TRUE(sigma_diagonal(Vec2d(-0.5, 0.2), axles, 0.0).isApprox(Vec2d(-120, -53.8)));
}

TEST(ModelCore, RegularizedAbsIsSmooth) {
  const double eps = 1e-3, h = 1e-7;
  auto d = [&](double v) { return (regularized_abs(v + h, eps) - regularized_abs(v - h, eps)) / (2 * h); };
  EXPECT_NEAR(d(0.0), 0.0, 1e-6);
  EXPECT_NEAR(d(1e-5), d(-1e-5) * -1, 1e-6);
  EXPECT_LT(std::abs(d(1e-5) - d(0.0)), 0.05);
  EXPECT_NEAR(regularized_abs(2.0, 0.0), 2.0, 1e-15);
}

TEST(ModelCore, RelativeVelocity) {
  const auto M = build_matrices(reference_body(), reference_axles());
  EXPECT_TRUE(rel_velocity(Vec2d(0, 0), Vec2d(0, 0), M).isZero());
  EXPECT_TRUE(rel_velocity(Vec2d(1, 0.1), Vec2d(0, 0), M).isApprox(Vec2d(1.14, 0.9)));
  EXPECT_TRUE(rel_velocity(Vec2d(0, 0), Vec2d(0.01, 0.01), M).isApprox(Vec2d(-0.5, -0.5)));
}

TEST(ModelCore, RejectsInconsistentParameters) {
  auto axles = reference_axles();
  axles[1].phi = 0.9;
  EXPECT_THROW(build_matrices(reference_body(), axles), ParameterError);
  auto body = reference_body();
  body.m = -1;
  EXPECT_THROW(build_matrices(body, reference_axles()), ParameterError);
}

TEST(ModelCore, ScalarTemplated) {
  VehicleBodyParams<long double> body;
  body.vx = 50;
  std::array<AxleTireParams<long double>, 2> axles;
  const auto M = build_matrices(body, axles);
  EXPECT_NEAR(static_cast<double>(M.Lambda(0, 0)), 500.0, 1e-12);
  EXPECT_NEAR(static_cast<double>(pressure_profile(axles[0], 0.5L)),
              pressure_profile(AxleTireParams<double>{}, 0.5), 1e-14);
}
