#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "semitrack/analysis.hpp"

namespace semitrack {

enum class Scheme { rk4, euler };
enum class Mode { open_loop, state_feedback, output_feedback };
/// Which steering signal drives the observer's output prediction.
enum class ObserverInput { applied, commanded };

std::string to_string(Scheme s);
std::string to_string(Mode m);
std::string to_string(ObserverInput o);

struct NoiseSpec {
  double std = 0;
  double sample_time = 0.01;
};

struct SimConfig {
  double t_end = 10;
  double dt = 5e-5;
  Scheme scheme = Scheme::rk4;
  std::uint64_t seed = 1;
  double delay_u = 0;
  bool noise = false;
  std::array<NoiseSpec, 2> noise_channels{{{0.5, 0.01}, {0.1, 0.005}}};
  Mode mode = Mode::open_loop;
  bool observer = true;  // run the observer also in open loop and state feedback
  ObserverInput observer_input = ObserverInput::applied;

  Vec2d X0 = Vec2d(1.5, -0.25);
  Vec2d z0 = Vec2d(0.003, 0.003);  // uniform initial deflection (inflow node stays 0)
  Vec2d X_hat0 = Vec2d::Zero();
  Vec2d z_hat0 = Vec2d::Zero();

  double q = 2;
  double p = 2;
  Vec2d X_target = Vec2d::Zero();

  double divergence_norm = 10;
  double stable_ratio = 0.5;  // stable: final-2 s peak norm at most this fraction of the overall peak
  double log_interval = 1e-3;
  int max_snapshots = 500;
  double settle_threshold = 0.2;
  double observer_tolerance = 0.05;  // fraction of the initial |X_tilde|
};

/// Throws ParameterError on invalid settings (time step, stability bound, delay, noise).
void validate(const SimConfig& c, const ModelD& model);

/// Fixed-length FIFO of past commands; zero delay is a pass-through.
class DelayLine {
 public:
  explicit DelayLine(int steps = 0) : buffer_(static_cast<std::size_t>(steps), Vec2d::Zero()) {}

  Vec2d push(const Vec2d& command);
  int steps() const { return static_cast<int>(buffer_.size()); }

 private:
  std::vector<Vec2d> buffer_;
  std::size_t head_ = 0;
};

/// Zero-order-held Gaussian noise refreshed every `period` steps.
class NoiseChannel {
 public:
  NoiseChannel(double std, int period)
      : dist_(0.0, std > 0 ? std : 1.0), period_(std::max(period, 1)), enabled_(std > 0) {}

  /// Called once per step before stages are evaluated.
  double sample(long step, std::mt19937_64& rng);
  double held() const { return held_; }

 private:
  std::normal_distribution<double> dist_;
  int period_;
  bool enabled_;
  double held_ = 0;
};

struct TraceRow {
  double t = 0;
  Vec2d X, X_hat, forces, U_cmd, U_applied, Y;
  double norm = 0, norm_hat = 0, error_norm = 0;
  double V1 = 0, V2 = 0, V = 0, V0 = 0;
};

struct Snapshot {
  double t = 0;
  FieldD z, z_hat;
};

struct SimSummary {
  std::string mode;
  std::uint64_t seed = 0;
  double dt = 0;
  int delay_steps = 0;
  long steps = 0;
  double t_final = 0;
  bool diverged = false;
  double divergence_time = -1;
  double max_norm = 0;
  double tail_max_norm = 0;  // over the final 2 s
  bool stable = false;
  double final_norm = 0;
  double final_X_norm = 0;
  double max_X_norm_after_3s = 0;
  double max_steer_deg = 0;
  Vec2d mean_forces_last_2s = Vec2d::Zero();
  double observer_convergence_time = -1;
  double settle_time = -1;
  Vec2d U_star = Vec2d::Zero();
  double gamma1 = 0;
  double omega_h = 0;
  int snapshot_stride = 0;
};

struct SimTrace {
  std::vector<TraceRow> rows;
  std::vector<Snapshot> snapshots;
  SimSummary summary;
};

/// Plant and observer states advanced together.
struct SimState {
  Vec2d X = Vec2d::Zero();
  FieldD z;
  Vec2d X_hat = Vec2d::Zero();
  FieldD z_hat;
};

/// Inputs held constant across one step.
struct StepInputs {
  Vec2d U_applied = Vec2d::Zero();  // plant actuator (after the delay line)
  Vec2d U_command = Vec2d::Zero();   // controller output before the delay line
  Vec2d U_observer = Vec2d::Zero();  // input fed to the observer
  Vec2d noise = Vec2d::Zero();      // added to Y
};

SimState initial_state(const SimConfig& c, const ModelD& model);

/// One explicit step of the coupled plant-observer system.
SimState step(const SimState& s, const StepInputs& in, double dt, Scheme scheme, bool with_observer,
              const ModelD& model, const Mat2d& L1);

SimTrace run_scenario(const SimConfig& c, const ModelD& model);

void write_trace_csv(const SimTrace& trace, std::ostream& os);
void write_snapshots_csv(const SimTrace& trace, std::ostream& os);
std::string summary_json(const SimSummary& s);

}  // namespace semitrack
