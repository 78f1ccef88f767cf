#include "semitrack/scenarios.hpp"

#include <algorithm>
#include <atomic>
#include <future>
#include <nlohmann/json.hpp>
#include <ostream>
#include <thread>

namespace semitrack {

namespace {

nlohmann::json vec(const Vec2d& v) { return {v(0), v(1)}; }

}  // namespace

SimConfig apply_axis(SimConfig base, SweepAxis axis, double value, const Vec2d& ic_direction) {
  switch (axis) {
    case SweepAxis::delay: base.delay_u = value; break;
    case SweepAxis::ic_scale: base.X0 = value * ic_direction; break;
    case SweepAxis::observer_gain: base.p = value; break;
  }
  return base;
}

std::string sweep_verdict(const SimSummary& s) {
  if (s.diverged) return "diverged";
  return s.stable ? "stable" : "bounded";
}

std::vector<SweepRow> run_sweep(const SimConfig& base, const ModelD& model, SweepAxis axis,
                                const std::vector<double>& values, const Vec2d& ic_direction, int workers) {
  std::vector<SweepRow> rows(values.size());
  if (workers <= 0) workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  workers = std::min<int>(workers, static_cast<int>(values.size()));

  // Each worker owns whole rows; nothing else is shared.
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < values.size(); i = next++) {
      SweepRow& row = rows[i];
      row.value = values[i];
      try {
        const SimConfig c = apply_axis(base, axis, values[i], ic_direction);
        validate(c, model);
        row.summary = run_scenario(c, model).summary;
        row.verdict = sweep_verdict(row.summary);
      } catch (const std::exception& e) {
        row.verdict = "failed";
        row.error = e.what();
      }
    }
  };
  std::vector<std::future<void>> pool;
  for (int w = 0; w < workers; ++w) pool.push_back(std::async(std::launch::async, work));
  for (auto& f : pool) f.get();
  return rows;
}

void write_sweep_csv(SweepAxis axis, const std::vector<SweepRow>& rows, std::ostream& os) {
  os << "axis,value,verdict,diverged,divergence_time,max_norm,tail_max_norm,final_norm,max_X_norm_after_3s,"
        "max_steer_deg,Fy1_mean,Fy2_mean,observer_convergence_time,settle_time,error\n";
  os.precision(10);
  for (const auto& r : rows) {
    const auto& s = r.summary;
    std::string err = r.error;
    std::replace(err.begin(), err.end(), ',', ';');
    std::replace(err.begin(), err.end(), '\n', ' ');
    os << to_string(axis) << ',' << r.value << ',' << r.verdict << ',' << (s.diverged ? 1 : 0) << ','
       << s.divergence_time << ',' << s.max_norm << ',' << s.tail_max_norm << ',' << s.final_norm << ','
       << s.max_X_norm_after_3s << ',' << s.max_steer_deg << ',' << s.mean_forces_last_2s(0) << ','
       << s.mean_forces_last_2s(1) << ',' << s.observer_convergence_time << ',' << s.settle_time << ',' << err
       << '\n';
  }
}

std::string report_json(const CertificationReport& r) {
  nlohmann::ordered_json j;
  j["intervals"] = r.intervals;
  j["omega_h"] = r.omega_h;
  j["omega_h_upwind"] = r.omega_h_upwind;
  j["passivity_residual_min"] = r.passivity_residual_min;
  j["passivity_tolerance"] = r.passivity_tolerance;
  j["passivity_trials"] = r.passivity_trials;
  j["lemma1_norm_error"] = r.lemma1_norm_error;
  j["lemma1_continuum_gap"] = r.lemma1_continuum_gap;
  j["equilibrium_residual"] = r.equilibrium_residual;
  j["hurwitz_margins"] = r.hurwitz_margins;
  j["lipschitz_sigma"] = r.lipschitz_sigma;
  j["gamma1"] = r.gamma1;
  j["observer_rho"] = r.observer_rho;
  j["all_pass"] = r.all_pass();
  auto& v = j["verdicts"] = nlohmann::ordered_json::array();
  for (const auto& x : r.verdicts) v.push_back({{"name", x.name}, {"pass", x.pass}, {"detail", x.detail}});
  return j.dump(2);
}

std::string equilibrium_json(const EquilibriumPoint& eq) {
  constexpr double rad_to_deg = 57.29577951308232;
  nlohmann::ordered_json j;
  j["X_star"] = vec(eq.X_star);
  j["U_star_rad"] = vec(eq.U_star);
  j["U_star_deg"] = vec(eq.U_star * rad_to_deg);
  j["v_star"] = vec(eq.v_star);
  j["forces"] = vec(eq.forces);
  j["residual"] = eq.residual;
  j["iterations"] = eq.iterations;
  return j.dump(2);
}

std::string manifest_json(const RunManifest& m) {
  nlohmann::ordered_json j;
  j["command"] = m.command;
  j["config_path"] = m.config_path;
  j["seed"] = m.seed;
  j["out_dir"] = m.out_dir;
  j["artifacts"] = m.artifacts;
  j["exit_code"] = m.exit_code;
  j["config_echo"] = m.config_echo;
  return j.dump(2);
}

}  // namespace semitrack
