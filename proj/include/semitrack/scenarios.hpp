#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "semitrack/config.hpp"

namespace semitrack {

/// Base config with one sweep coordinate applied.
SimConfig apply_axis(SimConfig base, SweepAxis axis, double value, const Vec2d& ic_direction);

struct SweepRow {
  double value = 0;
  std::string verdict;  // stable, bounded, diverged or failed
  SimSummary summary;
  std::string error;    // set when the run threw
};

std::string sweep_verdict(const SimSummary& s);

/// One scenario per value on a bounded pool of workers; rows keep the order of `values`.
std::vector<SweepRow> run_sweep(const SimConfig& base, const ModelD& model, SweepAxis axis,
                                const std::vector<double>& values, const Vec2d& ic_direction, int workers = 0);

/// Header: axis,value,verdict,diverged,divergence_time,max_norm,tail_max_norm,final_norm,
/// max_X_norm_after_3s,max_steer_deg,Fy1_mean,Fy2_mean,observer_convergence_time,settle_time,error
void write_sweep_csv(SweepAxis axis, const std::vector<SweepRow>& rows, std::ostream& os);

std::string report_json(const CertificationReport& r);
std::string equilibrium_json(const EquilibriumPoint& eq);

/// Record of one CLI invocation and everything it wrote.
struct RunManifest {
  std::string command;
  std::string config_path;
  std::string config_echo;
  std::uint64_t seed = 0;
  std::string out_dir;
  std::vector<std::string> artifacts;
  int exit_code = 0;
};

std::string manifest_json(const RunManifest& m);

}  // namespace semitrack
