// Runs the acceptance scenarios and prints one PASS/FAIL line per criterion.
#include <cmath>
#include <future>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>

#include "semitrack/scenarios.hpp"

using namespace semitrack;

namespace {

struct Line {
  std::string id;
  std::string name;
  bool pass = false;
  std::string detail;
};

std::vector<Line> lines;

void report(const std::string& id, const std::string& name, bool pass, const std::string& detail) {
  lines.push_back({id, name, pass, detail});
  std::cout << (pass ? "[PASS] " : "[FAIL] ") << std::left << std::setw(4) << id << name << " | " << detail
            << std::endl;
}

template <typename... T>
std::string str(const T&... parts) {
  std::ostringstream os;
  os << std::setprecision(4);
  (os << ... << parts);
  return os.str();
}

SimConfig open_loop() {
  SimConfig c;
  c.mode = Mode::open_loop;
  c.X0 = Vec2d(1.5, -0.25);
  c.z0 = Vec2d(0.003, 0.003);
  c.noise = false;
  c.p = 2;
  return c;
}

SimConfig nominal() {
  SimConfig c = open_loop();
  c.mode = Mode::output_feedback;
  c.q = 2;
  c.noise = true;
  c.delay_u = 0.2;
  c.seed = 1;
  return c;
}

bool within(double value, double target, double rel) { return std::abs(value - target) <= rel * std::abs(target); }

std::string verdicts(const std::vector<SweepRow>& rows) {
  std::string s;
  for (const auto& r : rows)
    s += str(s.empty() ? "" : ", ", r.value, ": ", r.verdict, " (tail max ", r.summary.tail_max_norm, ")");
  return s;
}

struct LinearCase {
  int converged = 0;
  int monotone = 0;
  double worst_ratio = 0;
  double worst_increase = 0;
};

// theta = 0, no wind: state feedback from random initial conditions with |X0| <= 10.
LinearCase linear_case(int count, std::uint64_t seed) {
  auto body = reference_body();
  body.theta = 0;
  body.Fw = 0;
  const ModelD model = make_model(body, reference_axles(), 50);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0), zu(-0.005, 0.005);

  std::vector<std::future<SimTrace>> runs;
  for (int i = 0; i < count; ++i) {
    SimConfig c;
    c.mode = Mode::state_feedback;
    c.observer = false;
    const double r = 10 * std::sqrt(u(rng)), a = 2 * M_PI * u(rng);
    c.X0 = Vec2d(r * std::cos(a), r * std::sin(a));
    c.z0 = Vec2d(zu(rng), zu(rng));
    c.divergence_norm = 1e3;
    c.t_end = 10;
    runs.push_back(std::async(std::launch::async, [c, &model] { return run_scenario(c, model); }));
  }
  LinearCase out;
  for (auto& f : runs) {
    const SimTrace t = f.get();
    const double ratio = t.summary.final_norm / t.rows.front().norm;
    out.worst_ratio = std::max(out.worst_ratio, ratio);
    if (!t.summary.diverged && ratio < 1e-3) ++out.converged;
    double increase = 0;
    for (std::size_t k = 1; k < t.rows.size(); ++k)
      increase = std::max(increase, (t.rows[k].V - t.rows[k - 1].V) / t.rows.front().V);
    out.worst_increase = std::max(out.worst_increase, increase);
    if (increase <= 1e-9) ++out.monotone;
  }
  return out;
}

}  // namespace

int main() {
  const ModelD model = reference_model(50);
  auto async = [](auto f) { return std::async(std::launch::async, f); };

  auto f_open = async([&] { return run_scenario(open_loop(), model).summary; });
  auto f_nom = async([&] { return run_scenario(nominal(), model).summary; });
  auto f_nom2 = async([&] { return run_scenario(nominal(), model).summary; });
  auto f_delay = async([&] { return run_sweep(nominal(), model, SweepAxis::delay, {0.2, 0.6, 1.0}, {}, 3); });
  auto f_ic = async([&] {
    return run_sweep(nominal(), model, SweepAxis::ic_scale, {1, 2, 3}, Vec2d(-0.3, 0.05), 3);
  });
  auto f_obs = async([&] { return run_sweep(open_loop(), model, SweepAxis::observer_gain, {2, 6, 10}, {}, 3); });
  auto f_cert = async([&] { return certify(model); });
  auto f_omega = async([] {
    return std::array<double, 2>{dissipativity_constant(reference_model(100)),
                                 dissipativity_constant(reference_model(200))};
  });
  auto f_fine = async([] {
    const ModelD fine = reference_model(800);
    const auto eq = solve_equilibrium(EquilibriumTarget::lumped(Vec2d::Zero()), fine);
    return (k1_of_profile(m_profile(eq.v_star, fine), fine) - Mat2d::Identity()).norm();
  });
  auto f_lin = async([] { return linear_case(20, 2024); });

  const auto open = f_open.get();
  report("1", "open-loop instability", open.diverged && open.divergence_time < 10,
         str("norm exceeds 10 at t = ", open.divergence_time, " s"));

  const auto nom = f_nom.get();
  report("2", "closed-loop stabilization", nom.max_norm < 5 && nom.max_X_norm_after_3s < 0.2,
         str("max norm ", nom.max_norm, " (< 5), max |X| after 3 s ", nom.max_X_norm_after_3s, " (< 0.2)"));

  const Vec2d f_ref(-146, -354);
  const Vec2d fm = nom.mean_forces_last_2s;
  report("3a", "steady forces (simulation)", !nom.diverged && within(fm(0), f_ref(0), 0.15) && within(fm(1), f_ref(1), 0.15),
         str("final 2 s mean [", fm(0), ", ", fm(1), "] N vs [-146, -354] +-15%"));
  const auto eq = solve_equilibrium(EquilibriumTarget::lumped(Vec2d::Zero()), model);
  report("3b", "steady forces (equilibrium)", within(eq.forces(0), f_ref(0), 0.05) && within(eq.forces(1), f_ref(1), 0.05),
         str("[", eq.forces(0), ", ", eq.forces(1), "] N vs +-5%; U* = [", eq.U_star(0) * 180 / M_PI, ", ",
             eq.U_star(1) * 180 / M_PI, "] deg"));

  report("4", "steering bound", nom.max_steer_deg <= 5, str("max commanded |delta| = ", nom.max_steer_deg, " deg"));

  const auto obs = f_obs.get();
  const double t2 = obs[0].summary.observer_convergence_time;
  bool decreasing = true;
  for (std::size_t i = 0; i < obs.size(); ++i) {
    const double t = obs[i].summary.observer_convergence_time;
    if (t < 0 || (i > 0 && !(t < obs[i - 1].summary.observer_convergence_time))) decreasing = false;
  }
  report("5a", "observer convergence p = 2", t2 >= 0 && t2 <= 3.5, str("|X~| < 5% of initial after t = ", t2, " s"));
  report("5b", "observer convergence trend", decreasing,
         str("p = 2, 6, 10: ", obs[0].summary.observer_convergence_time, ", ",
             obs[1].summary.observer_convergence_time, ", ", obs[2].summary.observer_convergence_time, " s"));

  const auto delay = f_delay.get();
  report("6", "delay sweep", delay[0].verdict == "stable" && delay[1].verdict == "stable" &&
                                 delay[2].verdict == "diverged",
         verdicts(delay));

  const auto ic = f_ic.get();
  report("7", "initial-condition sweep", ic[0].verdict == "stable" && ic[1].verdict == "stable" &&
                                             ic[2].verdict == "diverged",
         verdicts(ic));

  const auto cert = f_cert.get();
  const auto omega = f_omega.get();
  const double spread = (std::max({cert.omega_h, omega[0], omega[1]}) - std::min({cert.omega_h, omega[0], omega[1]})) /
                        cert.omega_h;
  report("8a", "dissipativity constant", cert.omega_h > 0 && omega[0] > 0 && omega[1] > 0,
         str("omega_h at N = 50, 100, 200: ", cert.omega_h, ", ", omega[0], ", ", omega[1], " (spread ",
             100 * spread, "%)"));
  const double fine = f_fine.get();
  report("8b", "normalization K1 M = I", cert.lemma1_norm_error <= 1e-3 && fine <= 1e-6,
         str("N = 50: ", cert.lemma1_norm_error, ", N = 800: ", fine));
  report("8c", "equilibrium residual", cert.equilibrium_residual < 1e-8, str("relative ", cert.equilibrium_residual));
  report("8d", "passivity inequality", cert.passivity_residual_min >= -cert.passivity_tolerance,
         str("min residual ", cert.passivity_residual_min, " over ", cert.passivity_trials, " trials vs -",
             cert.passivity_tolerance));
  const auto lin = f_lin.get();
  report("8e", "linear case global convergence", lin.converged == 20 && lin.monotone == 20,
         str(lin.converged, "/20 converged (worst final/initial ", lin.worst_ratio, "), ", lin.monotone,
             "/20 monotone V (worst relative increase ", lin.worst_increase, ")"));
  const auto n1 = summary_json(nom), n2 = summary_json(f_nom2.get());
  report("8f", "determinism", n1 == n2, n1 == n2 ? "identical summary JSON" : "summary JSON differs");

  int failed = 0;
  for (const auto& l : lines) failed += !l.pass;
  std::cout << (lines.size() - failed) << "/" << lines.size() << " criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
