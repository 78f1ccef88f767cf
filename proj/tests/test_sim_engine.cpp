#include "test_util.hpp"

using namespace semitrack;

TEST(SimEngine, DelayLinePassThroughAndImpulse) {
  DelayLine none;
  EXPECT_TRUE(none.push(Vec2d(1, 2)).isApprox(Vec2d(1, 2)));

  DelayLine d(7);
  std::vector<Vec2d> out;
  for (int n = 0; n < 20; ++n) out.push_back(d.push(n == 3 ? Vec2d(1, -1) : Vec2d::Zero()));
  for (int n = 0; n < 20; ++n) EXPECT_EQ(out[n].norm() > 0, n == 10) << "step " << n;
}

TEST(SimEngine, NoiseStatisticsAndHold) {
  std::mt19937_64 rng(12);
  NoiseChannel ch(0.5, 4);
  const long samples = 400000;
  double sum = 0, sq = 0, previous = 0;
  for (long n = 0; n < samples; ++n) {
    const double v = ch.sample(n, rng);
    if (n % 4 != 0) EXPECT_EQ(v, previous);
    previous = v;
    if (n % 4 == 0) {
      sum += v;
      sq += v * v;
    }
  }
  const double count = samples / 4.0;
  const double mean = sum / count, sd = std::sqrt(sq / count - mean * mean);
  EXPECT_LT(std::abs(mean), 0.05 * 0.5);
  EXPECT_NEAR(sd, 0.5, 0.05 * 0.5);
  NoiseChannel off(0.0, 1);
  EXPECT_EQ(off.sample(0, rng), 0.0);
}

TEST(SimEngine, EulerStabilityGuard) {
  const auto m = reference_model(50);
  SimConfig c;
  c.scheme = Scheme::euler;
  c.dt = 4e-5;  // dt max(Lambda) / dxi = 1.11
  EXPECT_THROW(validate(c, m), ParameterError);
  c.dt = 3e-5;
  EXPECT_NO_THROW(validate(c, m));
  c.scheme = Scheme::rk4;
  c.dt = 1e-4;
  EXPECT_THROW(validate(c, m), ParameterError);
  c.dt = 5e-5;
  EXPECT_NO_THROW(validate(c, m));
}

TEST(SimEngine, ZeroDynamicsStayZero) {
  const auto m = test::model_with(0.08, 1, 0.0);
  SimState s;
  s.z = FieldD::Zero(2, m.grid.nodes());
  s.z_hat = s.z;
  const Mat2d L1 = gain_l1(2.0, m.mats);
  for (auto scheme : {Scheme::rk4, Scheme::euler}) {
    const SimState next = step(s, StepInputs{}, 1e-5, scheme, true, m, L1);
    EXPECT_TRUE(next.X.isZero());
    EXPECT_TRUE(next.z.isZero());
    EXPECT_TRUE(next.X_hat.isZero());
  }
}

TEST(SimEngine, TransportAgainstCharacteristics) {
  // theta = 0, psi = 0, frozen v: z_t = -Lambda z_xi + c, z(0) = 0, z(., 0) = 0,
  // so z(xi, t) = c min(t, xi / Lambda).
  auto error = [](int intervals) {
    const auto m = test::model_with(0.0, 0.0, 0.0, intervals);
    const Vec2d v(0.2, -0.1);
    const Vec2d c = m.mats.H * v;
    FieldD z = FieldD::Zero(2, m.grid.nodes());
    const double dt = 0.2 * m.grid.dxi / m.mats.Lambda.diagonal().maxCoeff();
    const double t_end = 1.5e-3;
    const int steps = static_cast<int>(std::lround(t_end / dt));
    for (int n = 0; n < steps; ++n) {
      auto f = [&](const FieldD& zz) { return transport_rhs(zz, v, c, m); };
      const FieldD k1 = f(z), k2 = f(FieldD(z + 0.5 * dt * k1)), k3 = f(FieldD(z + 0.5 * dt * k2)),
                   k4 = f(FieldD(z + dt * k3));
      z += dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
    }
    const double t = steps * dt;
    FieldD exact(2, m.grid.nodes());
    for (int k = 0; k < m.grid.nodes(); ++k)
      for (int i = 0; i < 2; ++i) exact(i, k) = c(i) * std::min(t, m.grid.xi(k) / m.mats.Lambda(i, i));
    return l2_norm(FieldD(z - exact), m.grid) / l2_norm(exact, m.grid);
  };
  const double e100 = error(100), e400 = error(400);
  EXPECT_LT(e100, 0.05);
  EXPECT_LT(e400, 0.6 * e100);
}

TEST(SimEngine, TimeStepConvergenceOrder) {
  const auto m = reference_model(50);
  auto terminal = [&](double dt) {
    SimConfig c;
    c.t_end = 0.05;
    c.dt = dt;
    c.observer = false;
    return run_scenario(c, m);
  };
  auto diff = [&](const SimTrace& a, const SimTrace& b) {
    return (a.rows.back().X - b.rows.back().X).norm();
  };
  const auto a = terminal(8e-5), b = terminal(4e-5), c = terminal(2e-5);
  const double e1 = diff(a, b), e2 = diff(b, c);
  EXPECT_GT(e1 / std::max(e2, 1e-300), 8.0) << e1 << " " << e2;
}

TEST(SimEngine, AppliedInputLagsCommand) {
  const auto m = reference_model(50);
  SimConfig c;
  c.mode = Mode::output_feedback;
  c.t_end = 0.3;
  c.delay_u = 0.05;
  c.log_interval = c.dt;
  const auto trace = run_scenario(c, m);
  const int lag = static_cast<int>(std::lround(c.delay_u / c.dt));
  EXPECT_EQ(trace.summary.delay_steps, lag);
  ASSERT_GT(trace.rows.size(), static_cast<std::size_t>(2 * lag));
  for (std::size_t k = 0; k < static_cast<std::size_t>(lag); ++k) EXPECT_TRUE(trace.rows[k].U_applied.isZero());
  for (std::size_t k = lag; k < trace.rows.size(); ++k)
    EXPECT_EQ(trace.rows[k].U_applied, trace.rows[k - lag].U_cmd) << "row " << k;
}

TEST(SimEngine, OpenLoopDiverges) {
  const auto m = reference_model(50);
  SimConfig c;
  const auto trace = run_scenario(c, m);
  EXPECT_TRUE(trace.summary.diverged);
  EXPECT_LT(trace.summary.divergence_time, 10.0);
  EXPECT_GT(trace.rows.back().norm, 1.5207);
  EXPECT_NEAR(trace.rows.front().norm, 1.5207, 1e-4);
}

TEST(SimEngine, DeterministicGivenSeed) {
  const auto m = reference_model(50);
  SimConfig c;
  c.mode = Mode::output_feedback;
  c.noise = true;
  c.delay_u = 0.2;
  c.t_end = 1.0;
  const auto a = run_scenario(c, m), b = run_scenario(c, m);
  ASSERT_EQ(a.rows.size(), b.rows.size());
  for (std::size_t k = 0; k < a.rows.size(); ++k) {
    EXPECT_EQ(a.rows[k].X, b.rows[k].X);
    EXPECT_EQ(a.rows[k].Y, b.rows[k].Y);
  }
  EXPECT_EQ(summary_json(a.summary), summary_json(b.summary));
  c.seed = 2;
  EXPECT_NE(summary_json(run_scenario(c, m).summary), summary_json(a.summary));
}

TEST(SimEngine, TraceLayout) {
  const auto m = reference_model(50);
  SimConfig c;
  c.t_end = 0.5;
  c.max_snapshots = 20;
  const auto trace = run_scenario(c, m);
  EXPECT_LE(trace.snapshots.size(), 21u);
  EXPECT_EQ(trace.rows.size(), 501u);
  for (std::size_t k = 1; k < trace.rows.size(); ++k)
    EXPECT_NEAR(trace.rows[k].t - trace.rows[k - 1].t, 1e-3, 1e-12);
  std::ostringstream os;
  write_trace_csv(trace, os);
  EXPECT_EQ(os.str().substr(0, os.str().find('\n')),
            "t,vy,r,vy_hat,r_hat,Fy1,Fy2,delta1_cmd,delta2_cmd,delta1_applied,delta2_applied,Y1,Y2,norm,norm_hat,"
            "error_norm,V1,V2,V,V0");
}
