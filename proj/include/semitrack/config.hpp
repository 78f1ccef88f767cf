#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "semitrack/sim_engine.hpp"

namespace semitrack {

/// Malformed or invalid configuration; `where()` names the section.key and line when known.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& where, const std::string& what)
      : std::runtime_error(where.empty() ? what : where + ": " + what), where_(where), message_(what) {}
  const std::string& where() const { return where_; }
  const std::string& message() const { return message_; }

 private:
  std::string where_, message_;
};

enum class SweepAxis { delay, ic_scale, observer_gain };

std::string to_string(SweepAxis a);
/// Throws ConfigError for an unknown axis name.
SweepAxis parse_axis(const std::string& name);

struct SweepSpec {
  SweepAxis axis = SweepAxis::delay;
  std::vector<double> values{0.2, 0.6, 1.0};
  Vec2d ic_direction = Vec2d(-0.3, 0.05);  // X0 = k * ic_direction on the ic_scale axis
  int workers = 0;                          // 0: one per hardware thread
};

/// Everything a run needs, as resolved from the configuration file.
struct RunConfig {
  VehicleBodyParams<double> body = reference_body();
  std::array<AxleTireParams<double>, 2> axles = reference_axles();
  int intervals = 50;
  SimConfig sim;
  SweepSpec sweep;
  CertifyOptions certify;

  ModelD model() const { return make_model(body, axles, intervals); }
};

/// Parses the flat sectioned key-value format. `source` is used in diagnostics.
RunConfig parse_config(const std::string& text, const std::string& source = "<config>");
RunConfig load_config(const std::string& path);

/// Comma-separated numbers; throws ConfigError on anything else.
std::vector<double> parse_list(const std::string& raw);

/// Checks parameter ranges and the time-step bound against the model.
void validate(const RunConfig& c);

/// Fully resolved configuration; parsing it again yields the same RunConfig.
std::string echo_config(const RunConfig& c);

}  // namespace semitrack
