#include "semitrack/sim_engine.hpp"

#include <cmath>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace semitrack {

namespace {

constexpr double kRadToDeg = 57.29577951308232;
constexpr double kRk4Limit = 2.5;  // dt * max(Lambda) / dxi, inside the RK4 real-axis interval
constexpr double kEulerLimit = 1.0;

int steps_for(double duration, double dt) { return static_cast<int>(std::lround(duration / dt)); }

struct Rates {
  Vec2d dX;
  FieldD dz;
  Vec2d dX_hat;
  FieldD dz_hat;
};

Rates rates(const SimState& s, const StepInputs& in, bool with_observer, const ModelD& model, const Mat2d& L1) {
  Rates r;
  r.dX = ode_rhs(s.X, s.z, model);
  r.dz = pde_rhs(s.X, s.z, in.U_applied, model);
  if (with_observer) {
    const Vec2d Y = measure(s.X, in.U_applied, model.mats).Y + in.noise;
    const auto o = observer_rhs({s.X_hat, s.z_hat}, Y, in.U_observer, model, L1);
    r.dX_hat = o.dX;
    r.dz_hat = o.dz;
  } else {
    r.dX_hat.setZero();
    r.dz_hat = FieldD::Zero(2, s.z.cols());
  }
  return r;
}

SimState advance(const SimState& s, const Rates& r, double h) {
  SimState out;
  out.X = s.X + h * r.dX;
  out.z = s.z + h * r.dz;
  out.X_hat = s.X_hat + h * r.dX_hat;
  out.z_hat = s.z_hat + h * r.dz_hat;
  return out;
}

bool finite(const SimState& s) {
  return s.X.allFinite() && s.z.allFinite() && s.X_hat.allFinite() && s.z_hat.allFinite();
}

}  // namespace

std::string to_string(Scheme s) { return s == Scheme::rk4 ? "rk4" : "euler"; }

std::string to_string(ObserverInput o) { return o == ObserverInput::applied ? "applied" : "commanded"; }

std::string to_string(Mode m) {
  switch (m) {
    case Mode::open_loop:
      return "open_loop";
    case Mode::state_feedback:
      return "state_feedback";
    case Mode::output_feedback:
      return "output_feedback";
  }
  return "unknown";
}

void validate(const SimConfig& c, const ModelD& model) {
  if (!(c.dt > 0)) throw ParameterError("sim.dt must be positive");
  if (!(c.t_end > 0)) throw ParameterError("sim.t_end must be positive");
  if (c.dt > c.t_end) throw ParameterError("sim.dt exceeds sim.t_end");
  const double courant = c.dt * model.mats.Lambda.diagonal().maxCoeff() / model.grid.dxi;
  const double limit = c.scheme == Scheme::rk4 ? kRk4Limit : kEulerLimit;
  if (courant > limit) {
    std::ostringstream msg;
    msg << "sim.dt = " << c.dt << " gives dt*max(Lambda)/dxi = " << courant << " > " << limit << " for "
        << to_string(c.scheme);
    throw ParameterError(msg.str());
  }
  if (!(c.delay_u >= 0)) throw ParameterError("sim.delay must be non-negative");
  for (const auto& ch : c.noise_channels) {
    if (!(ch.std >= 0)) throw ParameterError("noise std must be non-negative");
    if (!(ch.sample_time > 0)) throw ParameterError("noise sample_time must be positive");
  }
  if (c.mode == Mode::output_feedback && !c.observer)
    throw ParameterError("output feedback requires the observer");
  if (!(c.q > 0)) throw ParameterError("controller.q must be positive");
  if (c.observer && !(c.p > 0)) throw ParameterError("observer.p must be positive");
  if (!(c.divergence_norm > 0)) throw ParameterError("sim.divergence_norm must be positive");
  if (!(c.stable_ratio > 0 && c.stable_ratio < 1)) throw ParameterError("sim.stable_ratio must lie in (0, 1)");
  if (!(c.log_interval > 0)) throw ParameterError("sim.log_interval must be positive");
  if (c.max_snapshots < 1) throw ParameterError("sim.max_snapshots must be at least 1");
}

Vec2d DelayLine::push(const Vec2d& command) {
  if (buffer_.empty()) return command;
  const Vec2d out = buffer_[head_];
  buffer_[head_] = command;
  head_ = (head_ + 1) % buffer_.size();
  return out;
}

double NoiseChannel::sample(long step, std::mt19937_64& rng) {
  if (enabled_ && step % period_ == 0) held_ = dist_(rng);
  return held_;
}

SimState initial_state(const SimConfig& c, const ModelD& model) {
  const int n = model.grid.nodes();
  SimState s;
  s.X = c.X0;
  s.z = c.z0.replicate(1, n);
  s.z.col(0).setZero();
  s.X_hat = c.X_hat0;
  s.z_hat = c.z_hat0.replicate(1, n);
  s.z_hat.col(0).setZero();
  return s;
}

SimState step(const SimState& s, const StepInputs& in, double dt, Scheme scheme, bool with_observer,
              const ModelD& model, const Mat2d& L1) {
  const Rates k1 = rates(s, in, with_observer, model, L1);
  if (scheme == Scheme::euler) return advance(s, k1, dt);

  const Rates k2 = rates(advance(s, k1, 0.5 * dt), in, with_observer, model, L1);
  const Rates k3 = rates(advance(s, k2, 0.5 * dt), in, with_observer, model, L1);
  const Rates k4 = rates(advance(s, k3, dt), in, with_observer, model, L1);
  SimState out;
  const double w = dt / 6.0;
  out.X = s.X + w * (k1.dX + 2 * k2.dX + 2 * k3.dX + k4.dX);
  out.z = s.z + w * (k1.dz + 2 * k2.dz + 2 * k3.dz + k4.dz);
  out.X_hat = s.X_hat + w * (k1.dX_hat + 2 * k2.dX_hat + 2 * k3.dX_hat + k4.dX_hat);
  out.z_hat = s.z_hat + w * (k1.dz_hat + 2 * k2.dz_hat + 2 * k3.dz_hat + k4.dz_hat);
  out.z.col(0).setZero();
  out.z_hat.col(0).setZero();
  return out;
}

SimTrace run_scenario(const SimConfig& c, const ModelD& model) {
  validate(c, model);

  const auto eq = solve_equilibrium(EquilibriumTarget::lumped(c.X_target), model);
  const auto gains = synthesize_controller(model, eq, c.q);
  const Mat2d L1 = c.observer ? gain_l1(c.p, model.mats) : Mat2d::Zero();
  const auto lyap0 = c.observer ? make_observer_lyapunov(L1, model, gains.omega_h) : ObserverLyapunov{};
  const double gamma0 = c.mode == Mode::output_feedback ? composite_gamma0(gains, lyap0) : 0.0;

  const long total = steps_for(c.t_end, c.dt);
  const int log_every = std::max(1, steps_for(c.log_interval, c.dt));
  const int snap_every = static_cast<int>(std::max<long>(1, (total + c.max_snapshots - 1) / c.max_snapshots));

  DelayLine delay(steps_for(c.delay_u, c.dt));
  std::mt19937_64 rng(c.seed);
  std::array<NoiseChannel, 2> noise{NoiseChannel(c.noise ? c.noise_channels[0].std : 0.0,
                                                 steps_for(c.noise_channels[0].sample_time, c.dt)),
                                    NoiseChannel(c.noise ? c.noise_channels[1].std : 0.0,
                                                 steps_for(c.noise_channels[1].sample_time, c.dt))};

  SimTrace trace;
  SimSummary& sum = trace.summary;
  sum.mode = to_string(c.mode);
  sum.seed = c.seed;
  sum.dt = c.dt;
  sum.delay_steps = delay.steps();
  sum.U_star = eq.U_star;
  sum.gamma1 = gains.gamma1;
  sum.omega_h = gains.omega_h;
  sum.snapshot_stride = snap_every;

  SimState s = initial_state(c, model);
  const double err0 = (s.X - s.X_hat).norm();
  double observer_last_above = 0;
  double settle_last_above = 0;
  Vec2d force_sum = Vec2d::Zero();
  long force_count = 0;
  const double force_window_start = c.t_end - 2.0;

  for (long n = 0;; ++n) {
    const double t = n * c.dt;

    // Commands and measurement noise are held across the step.
    StepInputs in;
    if (c.mode == Mode::state_feedback) {
      in.U_command = state_feedback(s.X, s.z, gains, model).U;
    } else if (c.mode == Mode::output_feedback) {
      in.U_command = output_feedback(s.X_hat, s.z_hat, gains, model).U;
    }
    in.U_applied = delay.push(in.U_command);
    in.U_observer = c.observer_input == ObserverInput::applied ? in.U_applied : in.U_command;
    in.noise = Vec2d(noise[0].sample(n, rng), noise[1].sample(n, rng));

    const double norm = state_norm(s.X, s.z, model.grid);
    const double x_err = (s.X - eq.X_star).norm();
    const double obs_err = (s.X - s.X_hat).norm();
    sum.max_norm = std::max(sum.max_norm, norm);
    sum.max_steer_deg = std::max(sum.max_steer_deg, in.U_command.cwiseAbs().maxCoeff() * kRadToDeg);
    if (t > 3.0) sum.max_X_norm_after_3s = std::max(sum.max_X_norm_after_3s, s.X.norm());
    if (x_err >= c.settle_threshold) settle_last_above = t;
    if (obs_err >= c.observer_tolerance * err0) observer_last_above = t;
    const Vec2d forces = tire_forces(s.z, model.kernels, model.grid);
    if (t >= force_window_start) {
      sum.tail_max_norm = std::max(sum.tail_max_norm, norm);
      force_sum += forces;
      ++force_count;
    }

    if (n % log_every == 0 || n == total) {
      TraceRow row;
      row.t = t;
      row.X = s.X;
      row.X_hat = s.X_hat;
      row.forces = forces;
      row.U_cmd = in.U_command;
      row.U_applied = in.U_applied;
      row.Y = measure(s.X, in.U_applied, model.mats).Y + in.noise;
      row.norm = norm;
      row.norm_hat = state_norm(s.X_hat, s.z_hat, model.grid);
      row.error_norm = obs_err;
      const Vec2d Xd = s.X - eq.X_star;
      const FieldD zeta = transformed_state(FieldD(s.z - eq.z_star), Xd, gains);
      row.V1 = lyapunov_v1(Xd);
      row.V2 = lyapunov_v2(zeta, model.grid, model.kernels);
      if (c.observer) row.V0 = lyapunov_v0(s.X - s.X_hat, FieldD(s.z - s.z_hat), lyap0, model);
      row.V = composite_v(Xd, zeta, gains, model, gamma0, row.V0);
      trace.rows.push_back(row);
    }
    if (n % snap_every == 0 || n == total) trace.snapshots.push_back({t, s.z, s.z_hat});

    sum.t_final = t;
    sum.steps = n;
    if (!std::isfinite(norm) || norm > c.divergence_norm) {
      sum.diverged = true;
      sum.divergence_time = t;
      break;
    }
    if (n == total) break;

    s = step(s, in, c.dt, c.scheme, c.observer, model, L1);
    if (!finite(s)) {
      sum.diverged = true;
      sum.divergence_time = t + c.dt;
      sum.t_final = t + c.dt;
      break;
    }
  }

  const SimState& last = s;
  sum.final_norm = state_norm(last.X, last.z, model.grid);
  sum.final_X_norm = last.X.norm();
  if (force_count > 0 && !sum.diverged) sum.mean_forces_last_2s = force_sum / static_cast<double>(force_count);
  if (!sum.diverged) sum.settle_time = settle_last_above;
  sum.stable = !sum.diverged && sum.tail_max_norm <= c.stable_ratio * sum.max_norm;
  if (c.observer && observer_last_above < sum.t_final) sum.observer_convergence_time = observer_last_above;
  return trace;
}

void write_trace_csv(const SimTrace& trace, std::ostream& os) {
  os << "t,vy,r,vy_hat,r_hat,Fy1,Fy2,delta1_cmd,delta2_cmd,delta1_applied,delta2_applied,Y1,Y2,norm,norm_hat,"
        "error_norm,V1,V2,V,V0\n";
  os.precision(10);
  for (const auto& r : trace.rows) {
    os << r.t << ',' << r.X(0) << ',' << r.X(1) << ',' << r.X_hat(0) << ',' << r.X_hat(1) << ',' << r.forces(0)
       << ',' << r.forces(1) << ',' << r.U_cmd(0) << ',' << r.U_cmd(1) << ',' << r.U_applied(0) << ','
       << r.U_applied(1) << ',' << r.Y(0) << ',' << r.Y(1) << ',' << r.norm << ',' << r.norm_hat << ','
       << r.error_norm << ',' << r.V1 << ',' << r.V2 << ',' << r.V << ',' << r.V0 << '\n';
  }
}

void write_snapshots_csv(const SimTrace& trace, std::ostream& os) {
  os << "t,xi,z1,z2,z1_hat,z2_hat\n";
  os.precision(10);
  for (const auto& s : trace.snapshots) {
    const long n = s.z.cols();
    for (long k = 0; k < n; ++k) {
      os << s.t << ',' << static_cast<double>(k) / (n - 1) << ',' << s.z(0, k) << ',' << s.z(1, k) << ','
         << s.z_hat(0, k) << ',' << s.z_hat(1, k) << '\n';
    }
  }
}

std::string summary_json(const SimSummary& s) {
  auto opt = [](double v) { return v < 0 ? nlohmann::json(nullptr) : nlohmann::json(v); };
  nlohmann::ordered_json j;
  j["mode"] = s.mode;
  j["seed"] = s.seed;
  j["dt"] = s.dt;
  j["delay_steps"] = s.delay_steps;
  j["steps"] = s.steps;
  j["t_final"] = s.t_final;
  j["diverged"] = s.diverged;
  j["divergence_time"] = opt(s.divergence_time);
  j["stable"] = s.stable;
  j["max_norm"] = s.max_norm;
  j["tail_max_norm"] = s.tail_max_norm;
  j["final_norm"] = s.final_norm;
  j["final_X_norm"] = s.final_X_norm;
  j["max_X_norm_after_3s"] = s.max_X_norm_after_3s;
  j["max_steer_deg"] = s.max_steer_deg;
  j["mean_forces_last_2s"] = {s.mean_forces_last_2s(0), s.mean_forces_last_2s(1)};
  j["observer_convergence_time"] = opt(s.observer_convergence_time);
  j["settle_time"] = opt(s.settle_time);
  j["U_star_deg"] = {s.U_star(0) * kRadToDeg, s.U_star(1) * kRadToDeg};
  j["gamma1"] = s.gamma1;
  j["omega_h"] = s.omega_h;
  j["snapshot_stride"] = s.snapshot_stride;
  return j.dump(2);
}

}  // namespace semitrack
