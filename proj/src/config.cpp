#include "semitrack/config.hpp"

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace semitrack {

namespace pt = boost::property_tree;

std::string to_string(SweepAxis a) {
  switch (a) {
    case SweepAxis::delay: return "delay";
    case SweepAxis::ic_scale: return "ic_scale";
    case SweepAxis::observer_gain: return "observer_gain";
  }
  return "?";
}

SweepAxis parse_axis(const std::string& name) {
  for (auto a : {SweepAxis::delay, SweepAxis::ic_scale, SweepAxis::observer_gain})
    if (name == to_string(a)) return a;
  throw ConfigError("sweep.axis", "unknown axis '" + name + "' (expected delay, ic_scale or observer_gain)");
}

namespace {

double parse_double(const std::string& raw) {
  double v = 0;
  const auto [p, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), v);
  if (ec != std::errc() || p != raw.data() + raw.size() || raw.empty())
    throw ConfigError("", "expected a number, got '" + raw + "'");
  return v;
}

}  // namespace

std::vector<double> parse_list(const std::string& raw) {
  std::vector<std::string> parts;
  boost::algorithm::split(parts, raw, boost::is_any_of(","));
  std::vector<double> out;
  for (auto& s : parts) {
    boost::algorithm::trim(s);
    if (!s.empty()) out.push_back(parse_double(s));
  }
  return out;
}

namespace {

// Reads typed values from the parsed tree and remembers which keys were used,
// so leftovers can be reported as unknown.
class Reader {
 public:
  Reader(const std::string& text, const std::string& source) : source_(source) {
    std::istringstream is(text);
    try {
      pt::read_ini(is, tree_);
    } catch (const pt::ini_parser_error& e) {
      throw ConfigError(source + ":" + std::to_string(e.line()), e.message());
    }
    index_lines(text);
    for (const auto& [key, node] : tree_)
      if (node.empty()) throw ConfigError(where("", key), "key outside of any section");
  }

  template <typename F>
  void get(const std::string& section, const std::string& key, F&& assign) {
    const auto sec = tree_.get_child_optional(section);
    if (!sec) return;
    const auto node = sec->get_child_optional(pt::ptree::path_type(key, '\0'));
    if (!node) return;
    used_.insert(section + "." + key);
    const std::string raw = boost::algorithm::trim_copy(node->data());
    try {
      assign(raw);
    } catch (const ConfigError& e) {
      throw ConfigError(where(section, key), e.message());
    }
  }

  void number(const std::string& section, const std::string& key, double& out) {
    get(section, key, [&](const std::string& raw) { out = parse_double(raw); });
  }

  void integer(const std::string& section, const std::string& key, int& out) {
    get(section, key, [&](const std::string& raw) {
      const double v = parse_double(raw);
      if (v != static_cast<int>(v)) throw ConfigError("", "expected an integer, got '" + raw + "'");
      out = static_cast<int>(v);
    });
  }

  void seed(const std::string& section, const std::string& key, std::uint64_t& out) {
    get(section, key, [&](const std::string& raw) {
      const auto [p, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), out);
      if (ec != std::errc() || p != raw.data() + raw.size())
        throw ConfigError("", "expected a non-negative integer, got '" + raw + "'");
    });
  }

  void flag(const std::string& section, const std::string& key, bool& out) {
    get(section, key, [&](const std::string& raw) {
      const std::string v = boost::algorithm::to_lower_copy(raw);
      if (v == "true" || v == "on" || v == "yes" || v == "1")
        out = true;
      else if (v == "false" || v == "off" || v == "no" || v == "0")
        out = false;
      else
        throw ConfigError("", "expected true/false, got '" + raw + "'");
    });
  }

  void vec2(const std::string& section, const std::string& key, Vec2d& out) {
    get(section, key, [&](const std::string& raw) {
      const auto v = parse_list(raw);
      if (v.size() != 2) throw ConfigError("", "expected two comma-separated numbers, got '" + raw + "'");
      out = Vec2d(v[0], v[1]);
    });
  }

  void list(const std::string& section, const std::string& key, std::vector<double>& out) {
    get(section, key, [&](const std::string& raw) {
      out = parse_list(raw);
      if (out.empty()) throw ConfigError("", "expected at least one value");
    });
  }

  template <typename E>
  void choice(const std::string& section, const std::string& key, E& out, std::initializer_list<E> options) {
    get(section, key, [&](const std::string& raw) {
      std::string names;
      for (E o : options) {
        if (raw == to_string(o)) {
          out = o;
          return;
        }
        names += (names.empty() ? "" : ", ") + to_string(o);
      }
      throw ConfigError("", "unknown value '" + raw + "' (expected one of " + names + ")");
    });
  }

  void reject_unknown() const {
    for (const auto& [section, node] : tree_)
      for (const auto& [key, value] : node)
        if (!used_.count(section + "." + key)) throw ConfigError(where(section, key), "unknown key");
  }

  std::string where(const std::string& section, const std::string& key) const {
    const std::string name = section.empty() ? key : section + "." + key;
    const auto it = lines_.find(name);
    return source_ + (it != lines_.end() ? ":" + std::to_string(it->second) : "") + " [" + name + "]";
  }

 private:
  // Line numbers of section.key pairs, for diagnostics only.
  void index_lines(const std::string& text) {
    std::istringstream is(text);
    std::string line, section;
    for (int n = 1; std::getline(is, line); ++n) {
      boost::algorithm::trim(line);
      if (line.empty() || line[0] == ';' || line[0] == '#') continue;
      if (line.front() == '[' && line.back() == ']') {
        section = boost::algorithm::trim_copy(line.substr(1, line.size() - 2));
      } else if (const auto eq = line.find('='); eq != std::string::npos) {
        const std::string key = boost::algorithm::trim_copy(line.substr(0, eq));
        lines_.emplace(section.empty() ? key : section + "." + key, n);
      }
    }
  }

  std::string source_;
  pt::ptree tree_;
  std::set<std::string> used_;
  std::map<std::string, int> lines_;
};

void read_axle(Reader& r, const std::string& section, AxleTireParams<double>& a) {
  r.number(section, "L", a.L);
  r.number(section, "sigma", a.sigma);
  r.number(section, "phi", a.phi);
  r.number(section, "psi", a.psi);
  r.number(section, "a", a.a);
  r.number(section, "Fz", a.Fz);
}

std::string fmt(double v) {
  char buf[32];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

std::string fmt(const Vec2d& v) { return fmt(v(0)) + ", " + fmt(v(1)); }

std::string fmt(bool b) { return b ? "true" : "false"; }

}  // namespace

RunConfig parse_config(const std::string& text, const std::string& source) {
  RunConfig c;
  Reader r(text, source);

  auto& b = c.body;
  r.number("vehicle", "m", b.m);
  r.number("vehicle", "Iz", b.Iz);
  r.number("vehicle", "l1", b.l1);
  r.number("vehicle", "l2", b.l2);
  r.number("vehicle", "vx", b.vx);
  r.number("vehicle", "Fw", b.Fw);
  r.number("vehicle", "lw", b.lw);
  r.number("vehicle", "theta", b.theta);
  r.number("vehicle", "eps", b.eps);
  r.integer("vehicle", "intervals", c.intervals);
  read_axle(r, "axle1", c.axles[0]);
  read_axle(r, "axle2", c.axles[1]);

  auto& s = c.sim;
  r.choice("sim", "mode", s.mode, {Mode::open_loop, Mode::state_feedback, Mode::output_feedback});
  r.choice("sim", "scheme", s.scheme, {Scheme::rk4, Scheme::euler});
  r.number("sim", "t_end", s.t_end);
  r.number("sim", "dt", s.dt);
  r.seed("sim", "seed", s.seed);
  r.number("sim", "delay", s.delay_u);
  r.vec2("sim", "X0", s.X0);
  r.vec2("sim", "z0", s.z0);
  r.number("sim", "divergence_norm", s.divergence_norm);
  r.number("sim", "stable_ratio", s.stable_ratio);
  r.number("sim", "settle_threshold", s.settle_threshold);
  r.number("sim", "log_interval", s.log_interval);
  r.integer("sim", "max_snapshots", s.max_snapshots);

  r.number("controller", "q", s.q);
  r.vec2("controller", "X_target", s.X_target);

  r.flag("observer", "enabled", s.observer);
  r.number("observer", "p", s.p);
  r.choice("observer", "input", s.observer_input, {ObserverInput::applied, ObserverInput::commanded});
  r.vec2("observer", "X_hat0", s.X_hat0);
  r.vec2("observer", "z_hat0", s.z_hat0);
  r.number("observer", "tolerance", s.observer_tolerance);

  r.flag("noise", "enabled", s.noise);
  r.number("noise", "std1", s.noise_channels[0].std);
  r.number("noise", "sample_time1", s.noise_channels[0].sample_time);
  r.number("noise", "std2", s.noise_channels[1].std);
  r.number("noise", "sample_time2", s.noise_channels[1].sample_time);

  r.get("sweep", "axis", [&](const std::string& raw) { c.sweep.axis = parse_axis(raw); });
  r.list("sweep", "values", c.sweep.values);
  r.vec2("sweep", "ic_direction", c.sweep.ic_direction);
  r.integer("sweep", "workers", c.sweep.workers);

  r.reject_unknown();

  // Range errors are reported against the whole file; the message names the key.
  try {
    validate(c);
  } catch (const ParameterError& e) {
    throw ConfigError(source, e.what());
  }
  c.certify.controller_gain = s.q;
  c.certify.observer_gain = s.p;
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, "cannot open configuration file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

void validate(const RunConfig& c) {
  validate(c.body);
  validate(c.axles[0]);
  validate(c.axles[1]);
  if (c.intervals < 2) throw ParameterError("vehicle.intervals must be at least 2");
  validate(c.sim, c.model());
  if (c.sweep.workers < 0) throw ParameterError("sweep.workers must be non-negative");
}

std::string echo_config(const RunConfig& c) {
  std::ostringstream o;
  const auto& b = c.body;
  o << "[vehicle]\n"
    << "m = " << fmt(b.m) << "\nIz = " << fmt(b.Iz) << "\nl1 = " << fmt(b.l1) << "\nl2 = " << fmt(b.l2)
    << "\nvx = " << fmt(b.vx) << "\nFw = " << fmt(b.Fw) << "\nlw = " << fmt(b.lw) << "\ntheta = " << fmt(b.theta)
    << "\neps = " << fmt(b.eps) << "\nintervals = " << c.intervals << "\n";
  for (int i = 0; i < 2; ++i) {
    const auto& a = c.axles[i];
    o << "\n[axle" << i + 1 << "]\n"
      << "L = " << fmt(a.L) << "\nsigma = " << fmt(a.sigma) << "\nphi = " << fmt(a.phi) << "\npsi = " << fmt(a.psi)
      << "\na = " << fmt(a.a) << "\nFz = " << fmt(a.Fz) << "\n";
  }
  const auto& s = c.sim;
  o << "\n[sim]\n"
    << "mode = " << to_string(s.mode) << "\nscheme = " << to_string(s.scheme) << "\nt_end = " << fmt(s.t_end)
    << "\ndt = " << fmt(s.dt) << "\nseed = " << s.seed << "\ndelay = " << fmt(s.delay_u) << "\nX0 = " << fmt(s.X0)
    << "\nz0 = " << fmt(s.z0) << "\ndivergence_norm = " << fmt(s.divergence_norm)
    << "\nstable_ratio = " << fmt(s.stable_ratio) << "\nsettle_threshold = " << fmt(s.settle_threshold)
    << "\nlog_interval = " << fmt(s.log_interval) << "\nmax_snapshots = " << s.max_snapshots << "\n";
  o << "\n[controller]\nq = " << fmt(s.q) << "\nX_target = " << fmt(s.X_target) << "\n";
  o << "\n[observer]\nenabled = " << fmt(s.observer) << "\np = " << fmt(s.p)
    << "\ninput = " << to_string(s.observer_input) << "\nX_hat0 = " << fmt(s.X_hat0)
    << "\nz_hat0 = " << fmt(s.z_hat0) << "\ntolerance = " << fmt(s.observer_tolerance) << "\n";
  o << "\n[noise]\nenabled = " << fmt(s.noise) << "\nstd1 = " << fmt(s.noise_channels[0].std)
    << "\nsample_time1 = " << fmt(s.noise_channels[0].sample_time) << "\nstd2 = " << fmt(s.noise_channels[1].std)
    << "\nsample_time2 = " << fmt(s.noise_channels[1].sample_time) << "\n";
  o << "\n[sweep]\naxis = " << to_string(c.sweep.axis) << "\nvalues = ";
  for (std::size_t i = 0; i < c.sweep.values.size(); ++i) o << (i ? ", " : "") << fmt(c.sweep.values[i]);
  o << "\nic_direction = " << fmt(c.sweep.ic_direction) << "\nworkers = " << c.sweep.workers << "\n";
  return o.str();
}

}  // namespace semitrack
