// semitrack simulate|equilibrium|verify|sweep --config <file> --out <dir> [--seed N]
#include <boost/program_options.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "semitrack/scenarios.hpp"

namespace po = boost::program_options;
namespace fs = std::filesystem;
using namespace semitrack;

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 2;
constexpr int kSolverFailure = 3;
constexpr int kDiverged = 4;
constexpr const char* kOutEnv = "SEMITRACK_OUT_DIR";

struct Output {
  fs::path dir;
  RunManifest manifest;

  void write(const std::string& name, const std::string& content) {
    std::ofstream f(dir / name);
    f << content;
    if (!content.empty() && content.back() != '\n') f << '\n';
    manifest.artifacts.push_back(name);
  }

  template <typename F>
  void write_with(const std::string& name, F&& emit) {
    std::ofstream f(dir / name);
    emit(f);
    manifest.artifacts.push_back(name);
  }

  void finish(int code) {
    manifest.exit_code = code;
    std::ofstream(dir / "manifest.json") << manifest_json(manifest) << '\n';
  }
};

int simulate(const RunConfig& c, Output& out) {
  const ModelD model = c.model();
  const SimTrace trace = run_scenario(c.sim, model);
  out.write_with("trace.csv", [&](std::ostream& os) { write_trace_csv(trace, os); });
  out.write_with("snapshots.csv", [&](std::ostream& os) { write_snapshots_csv(trace, os); });
  const std::string summary = summary_json(trace.summary);
  out.write("summary.json", summary);
  std::cout << summary << '\n';
  return trace.summary.diverged ? kDiverged : kOk;
}

int equilibrium(const RunConfig& c, Output& out) {
  const auto eq = solve_equilibrium(EquilibriumTarget::lumped(c.sim.X_target), c.model());
  const std::string j = equilibrium_json(eq);
  out.write("equilibrium.json", j);
  std::cout << j << '\n';
  return kOk;
}

int verify(const RunConfig& c, Output& out) {
  const auto report = certify(c.model(), c.certify);
  out.write("report.json", report_json(report));
  for (const auto& v : report.verdicts)
    std::cout << (v.pass ? "PASS " : "FAIL ") << v.name << ": " << v.detail << '\n';
  return report.all_pass() ? kOk : kSolverFailure;
}

int sweep(const RunConfig& c, Output& out) {
  const auto rows = run_sweep(c.sim, c.model(), c.sweep.axis, c.sweep.values, c.sweep.ic_direction, c.sweep.workers);
  out.write_with("sweep.csv", [&](std::ostream& os) { write_sweep_csv(c.sweep.axis, rows, os); });
  for (const auto& r : rows)
    std::cout << to_string(c.sweep.axis) << " = " << r.value << ": " << r.verdict
              << (r.error.empty() ? "" : " (" + r.error + ")") << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  std::string command, config_path, out_dir, axis, values;
  std::uint64_t seed = 0;

  po::options_description opts("Options");
  opts.add_options()("help,h", "show this help")                                            //
      ("config,c", po::value(&config_path), "configuration file")                          //
      ("out,o", po::value(&out_dir), (std::string("output directory (default $") + kOutEnv + " or ./out)").c_str())
      ("seed,s", po::value(&seed), "override sim.seed")                                     //
      ("axis", po::value(&axis), "sweep: override sweep.axis (delay, ic_scale, observer_gain)")
      ("values", po::value(&values), "sweep: override sweep.values, comma separated");
  po::options_description all;
  all.add(opts).add_options()("command", po::value(&command));
  po::positional_options_description pos;
  pos.add("command", 1);

  po::variables_map vm;
  try {
    po::store(po::command_line_parser(argc, argv).options(all).positional(pos).run(), vm);
    po::notify(vm);
  } catch (const po::error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfigError;
  }
  const bool known = command == "simulate" || command == "equilibrium" || command == "verify" || command == "sweep";
  if (vm.count("help") || !known || config_path.empty()) {
    std::cerr << "usage: semitrack simulate|equilibrium|verify|sweep --config <file> [--out <dir>] [--seed N]\n"
              << opts;
    return vm.count("help") ? kOk : kConfigError;
  }

  RunConfig cfg;
  try {
    cfg = load_config(config_path);
    if (vm.count("seed")) cfg.sim.seed = seed;
    if (!axis.empty()) cfg.sweep.axis = parse_axis(axis);
    if (!values.empty()) {
      cfg.sweep.values = parse_list(values);
      if (cfg.sweep.values.empty()) throw ConfigError("--values", "expected at least one value");
    }
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  }

  Output out;
  if (out_dir.empty()) {
    const char* env = std::getenv(kOutEnv);
    out_dir = env && *env ? env : "out";
  }
  out.dir = out_dir;
  std::error_code ec;
  fs::create_directories(out.dir, ec);
  if (ec) {
    std::cerr << "cannot create output directory " << out_dir << ": " << ec.message() << '\n';
    return kConfigError;
  }
  out.manifest.command = command;
  out.manifest.config_path = config_path;
  out.manifest.seed = cfg.sim.seed;
  out.manifest.out_dir = fs::absolute(out.dir).string();
  out.manifest.config_echo = echo_config(cfg);
  out.write("config.ini", out.manifest.config_echo);

  int code = kOk;
  try {
    if (command == "simulate")
      code = simulate(cfg, out);
    else if (command == "equilibrium")
      code = equilibrium(cfg, out);
    else if (command == "verify")
      code = verify(cfg, out);
    else
      code = sweep(cfg, out);
  } catch (const ParameterError& e) {
    std::cerr << "parameter error: " << e.what() << '\n';
    code = kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    code = kSolverFailure;
  }
  out.finish(code);
  return code;
}
