#include "test_util.hpp"

using namespace semitrack;

namespace {

const char* kNominal = R"([vehicle]
vx = 50
intervals = 50

[axle1]
L = 0.11
psi = 0.08
phi = 0.92

[sim]
mode = output_feedback
t_end = 0.5
seed = 17
delay = 0.2
X0 = 1.5, -0.25
z0 = 0.003, 0.003

[controller]
q = 2

[observer]
p = 6
input = commanded

[noise]
enabled = true
std1 = 0.4

[sweep]
axis = ic_scale
values = 1, 2
)";

std::string error_of(const std::string& text) {
  try {
    parse_config(text, "test.ini");
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Config, ParsesSectionsAndDefaults) {
  const auto c = parse_config(kNominal);
  EXPECT_EQ(c.sim.mode, Mode::output_feedback);
  EXPECT_EQ(c.sim.seed, 17u);
  EXPECT_DOUBLE_EQ(c.sim.delay_u, 0.2);
  EXPECT_EQ(c.sim.X0, Vec2d(1.5, -0.25));
  EXPECT_DOUBLE_EQ(c.sim.p, 6.0);
  EXPECT_EQ(c.sim.observer_input, ObserverInput::commanded);
  EXPECT_TRUE(c.sim.noise);
  EXPECT_DOUBLE_EQ(c.sim.noise_channels[0].std, 0.4);
  EXPECT_DOUBLE_EQ(c.sim.noise_channels[1].std, 0.1);
  EXPECT_EQ(c.sweep.axis, SweepAxis::ic_scale);
  EXPECT_EQ(c.sweep.values, (std::vector<double>{1, 2}));
  EXPECT_DOUBLE_EQ(c.axles[1].L, 0.09);  // untouched keys keep the reference vehicle
  EXPECT_DOUBLE_EQ(c.body.Fw, -500);
  EXPECT_DOUBLE_EQ(c.certify.observer_gain, 6.0);
}

TEST(Config, EchoRoundTrip) {
  const auto c = parse_config(kNominal);
  const std::string echo = echo_config(c);
  const auto again = parse_config(echo, "echo");
  EXPECT_EQ(echo_config(again), echo);
  const auto m = c.model();
  EXPECT_EQ(summary_json(run_scenario(c.sim, m).summary), summary_json(run_scenario(again.sim, again.model()).summary));
}

TEST(Config, UnknownKeyReportsLine) {
  const std::string err = error_of("[sim]\nt_end = 1\nspeed = 3\n");
  EXPECT_NE(err.find("test.ini:3"), std::string::npos) << err;
  EXPECT_NE(err.find("sim.speed"), std::string::npos) << err;
  EXPECT_NE(err.find("unknown key"), std::string::npos) << err;
}

TEST(Config, BadValueNamesKey) {
  const std::string err = error_of("[vehicle]\nm = heavy\n");
  EXPECT_NE(err.find("vehicle.m"), std::string::npos) << err;
  EXPECT_NE(err.find("test.ini:2"), std::string::npos) << err;
  EXPECT_NE(error_of("[sim]\nX0 = 1\n").find("sim.X0"), std::string::npos);
  EXPECT_NE(error_of("[sim]\nmode = cruise\n").find("expected one of"), std::string::npos);
  EXPECT_NE(error_of("[noise]\nenabled = maybe\n").find("noise.enabled"), std::string::npos);
}

TEST(Config, SyntaxErrorReportsLine) {
  const std::string err = error_of("[sim]\nt_end = 1\nthis is not a key value pair\n");
  EXPECT_NE(err.find("test.ini:3"), std::string::npos) << err;
  EXPECT_FALSE(error_of("t_end = 1\n").empty());
  EXPECT_FALSE(error_of("[sim]\nt_end = 1\nt_end = 2\n").empty());
}

TEST(Config, RangeErrors) {
  EXPECT_NE(error_of("[sim]\nscheme = euler\ndt = 5e-5\n").find("dt"), std::string::npos);
  EXPECT_NE(error_of("[axle1]\npsi = 0.2\n").find("phi + psi"), std::string::npos);
  EXPECT_NE(error_of("[sweep]\naxis = speed\n").find("unknown axis"), std::string::npos);
  EXPECT_THROW(parse_axis("nope"), ConfigError);
  EXPECT_THROW(load_config("/nonexistent/file.ini"), ConfigError);
}

TEST(Sweep, RowsKeepOrderAndRecordFailures) {
  const auto m = reference_model(50);
  SimConfig base;
  base.t_end = 0.3;
  const auto rows = run_sweep(base, m, SweepAxis::observer_gain, {6, 0, 2}, {}, 2);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0].value, 6);
  EXPECT_EQ(rows[1].verdict, "failed");
  EXPECT_FALSE(rows[1].error.empty());
  EXPECT_EQ(rows[2].value, 2);
  EXPECT_NE(rows[2].verdict, "failed");
  std::ostringstream os;
  write_sweep_csv(SweepAxis::observer_gain, rows, os);
  const std::string csv = os.str();
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
  EXPECT_EQ(csv.rfind("axis,value,verdict,", 0), 0u);
}

TEST(Sweep, AxisApplication) {
  const SimConfig base;
  EXPECT_DOUBLE_EQ(apply_axis(base, SweepAxis::delay, 0.6, {}).delay_u, 0.6);
  EXPECT_EQ(apply_axis(base, SweepAxis::ic_scale, 2, Vec2d(-0.3, 0.05)).X0, Vec2d(-0.6, 0.1));
  EXPECT_DOUBLE_EQ(apply_axis(base, SweepAxis::observer_gain, 10, {}).p, 10.0);
}
