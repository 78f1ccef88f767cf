#include "test_util.hpp"

using namespace semitrack;

TEST(Analysis, StateNormExamples) {
  const auto m = reference_model(50);
  const FieldD zero = FieldD::Zero(2, m.grid.nodes());
  EXPECT_DOUBLE_EQ(state_norm(Vec2d::Zero(), zero, m.grid), 0.0);
  const FieldD z0 = test::uniform_field(Vec2d(0.003, 0.003), m.grid);
  EXPECT_NEAR(state_norm(Vec2d(1.5, -0.25), z0, m.grid), 1.5207, 1e-4);
}

TEST(Analysis, LumpedLyapunov) {
  EXPECT_DOUBLE_EQ(lyapunov_v1(Vec2d::Zero()), 0.0);
  EXPECT_DOUBLE_EQ(lyapunov_v1(Vec2d(3, 4)), 12.5);
}

TEST(Analysis, DistributedLyapunovBounds) {
  const auto m = reference_model(50);
  EXPECT_DOUBLE_EQ(lyapunov_v2(FieldD::Zero(2, m.grid.nodes()), m.grid, m.kernels), 0.0);
  const double qmin = m.kernels.Q.minCoeff(), qmax = m.kernels.Q.maxCoeff();
  std::mt19937_64 rng(21);
  for (int n = 0; n < 50; ++n) {
    const FieldD z = test::random_field(rng, m.grid, 0.01);
    const double half = 0.5 * inner(z, z, m.grid);
    const double v2 = lyapunov_v2(z, m.grid, m.kernels);
    EXPECT_LE(qmin * half, v2 * (1 + 1e-12));
    EXPECT_LE(v2, qmax * half * (1 + 1e-12));
  }
}

TEST(Analysis, LyapunovEquationSolution) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-3, 3);
  for (int n = 0; n < 20; ++n) {
    Mat2d A;
    A << u(rng), u(rng), u(rng), u(rng);
    A -= (A.eigenvalues().real().maxCoeff() + 0.5) * Mat2d::Identity();
    const Mat2d P = solve_lyapunov(A);
    EXPECT_LT((A.transpose() * P + P * A + Mat2d::Identity()).norm(), 1e-10 * (1 + P.norm()));
    EXPECT_GT(Eigen::SelfAdjointEigenSolver<Mat2d>(P).eigenvalues().minCoeff(), 0.0);
  }
}

TEST(Analysis, CompositeFunctionalAtZero) {
  const auto m = reference_model(50);
  const auto eq = solve_equilibrium(EquilibriumTarget::lumped(Vec2d::Zero()), m);
  const auto gains = synthesize_controller(m, eq, 2.0);
  const FieldD zero = FieldD::Zero(2, m.grid.nodes());
  EXPECT_DOUBLE_EQ(composite_v(Vec2d::Zero(), zero, gains, m), 0.0);
  const auto w = make_observer_lyapunov(gain_l1(2.0, m.mats), m, gains.omega_h);
  EXPECT_DOUBLE_EQ(lyapunov_v0(Vec2d::Zero(), zero, w, m), 0.0);
  EXPECT_GT(w.rho, 0.0);
  EXPECT_GT(composite_gamma0(gains, w), 0.0);
}

TEST(Analysis, PassivityResidualWithinDiscretizationError) {
  const auto m = reference_model(50);
  const double omega = dissipativity_constant(m);
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto trial = passivity_trial(m, omega, seed);
    EXPECT_GE(trial.residual, -(5e-5 + m.grid.dxi)) << "seed " << seed;
    EXPECT_GT(trial.dissipated, 0.0);
  }
}

TEST(Analysis, CertifiesReferenceVehicle) {
  CertifyOptions o;
  o.trials = 20;
  const auto r = certify(reference_model(50), o);
  for (const auto& v : r.verdicts) EXPECT_TRUE(v.pass) << v.name << ": " << v.detail;
  EXPECT_GT(r.omega_h, 0.0);
  EXPECT_LT(r.lemma1_norm_error, 1e-3);
  EXPECT_LT(r.equilibrium_residual, 1e-8);
  for (double re : r.hurwitz_margins) EXPECT_LT(re, 0.0);
}

TEST(Analysis, LargeCarcassFlexibilityFailsDissipativity) {
  CertifyOptions o;
  o.trials = 2;
  const auto r = certify(test::model_with(0.9), o);
  EXPECT_FALSE(r.all_pass());
  const auto it = std::find_if(r.verdicts.begin(), r.verdicts.end(), [](const auto& v) { return v.name == "dissipativity"; });
  ASSERT_NE(it, r.verdicts.end());
  EXPECT_FALSE(it->pass) << it->detail;
}

TEST(Analysis, ContinuumNormalizationGapShrinks) {
  double prev = std::numeric_limits<double>::infinity();
  for (int n : {50, 100, 200}) {
    const auto m = reference_model(n);
    const auto eq = solve_equilibrium(EquilibriumTarget::lumped(Vec2d::Zero()), m);
    const double gap = lemma1_continuum_gap(m, eq.v_star);
    EXPECT_LT(gap, prev);
    prev = gap;
  }
}
