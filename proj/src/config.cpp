#include "rieszflow/config.hpp"

#include <yaml-cpp/yaml.h>

#include <charconv>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include "rieszflow/io.hpp"

namespace rieszflow {
namespace {

int line_of(const YAML::Node& node) { return node.Mark().is_null() ? 0 : node.Mark().line + 1; }

[[noreturn]] void fail(const YAML::Node& node, const std::string& what) {
  const int line = line_of(node);
  throw ConfigError(line > 0 ? "line " + std::to_string(line) + ": " + what : what, line);
}

void allow_keys(const YAML::Node& section, const std::string& name, std::initializer_list<const char*> keys) {
  if (!section.IsMap()) fail(section, "section '" + name + "' must be a mapping");
  for (const auto& kv : section) {
    const std::string key = kv.first.as<std::string>();
    bool known = false;
    for (const char* k : keys) known = known || key == k;
    if (!known) fail(kv.first, "unknown key '" + key + "' in section '" + name + "'");
  }
}

template <typename T>
void read(const YAML::Node& section, const char* key, T& out) {
  const YAML::Node node = section[key];
  if (!node) return;
  try {
    out = node.as<T>();
  } catch (const YAML::Exception&) {
    fail(node, std::string("bad value for '") + key + "'");
  }
}

InitSpec::Kind init_kind_from_string(const std::string& name) {
  if (name == "uniform") return InitSpec::Kind::uniform;
  if (name == "random") return InitSpec::Kind::random;
  if (name == "jitter") return InitSpec::Kind::jitter;
  if (name == "file") return InitSpec::Kind::file;
  throw std::invalid_argument("unknown init kind '" + name + "'");
}

std::string resolve(const std::string& base_dir, const std::string& path) {
  if (path.empty()) return path;
  const std::filesystem::path p(path);
  return p.is_absolute() ? path : (std::filesystem::path(base_dir) / p).lexically_normal().string();
}

double as_double(const YAML::Node& node) {
  try {
    return node.as<double>();
  } catch (const YAML::Exception&) {
    fail(node, "expected a number");
  }
}

// Shortest text that reads back to the same double.
std::string num(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

template <typename F>
void with_line(const YAML::Node& node, F&& f) {
  try {
    f();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    fail(node, e.what());
  }
}

}  // namespace

const char* to_string(InitSpec::Kind kind) {
  switch (kind) {
    case InitSpec::Kind::uniform: return "uniform";
    case InitSpec::Kind::random: return "random";
    case InitSpec::Kind::jitter: return "jitter";
    case InitSpec::Kind::file: return "file";
  }
  return "?";
}

void RunConfig::validate() const {
  try {
    params.validate();
    integrator.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what(), 0);
  }
  if (grid_size < 256) throw ConfigError("curve.grid_size must be at least 256", 0);
  if ((init.kind == InitSpec::Kind::random || init.kind == InitSpec::Kind::jitter) && !init.seed)
    throw ConfigError("init.seed is required for random and jittered initial data", 0);
  if (init.kind == InitSpec::Kind::jitter && !(init.jitter >= 0.0 && init.jitter < 1.0))
    throw ConfigError("init.jitter must lie in [0, 1)", 0);
  if (init.kind == InitSpec::Kind::file && init.path.empty()) throw ConfigError("init.path is required", 0);
  if (curve.kind == CurveSpec::Kind::table && table_path.empty() && curve.samples.empty())
    throw ConfigError("curve.path is required for table curves", 0);
  for (const Window& w : diagnostics.windows)
    if (!(w.L > 0.0 && w.L < 1.0)) throw ConfigError("diagnostics window length must lie in (0, 1)", 0);
  if (diagnostics.sample_every < 1) throw ConfigError("diagnostics.sample_every must be positive", 0);
  if (output.trajectory_every < 1) throw ConfigError("output.trajectory_every must be positive", 0);
  if (output.snapshot_every < 0) throw ConfigError("output.snapshot_every must be non-negative", 0);
}

RunConfig parse_config(const std::string& text, const std::string& base_dir) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    const int line = e.mark.is_null() ? 0 : e.mark.line + 1;
    throw ConfigError("line " + std::to_string(line) + ": " + e.msg, line);
  }
  RunConfig cfg;
  if (root.IsNull()) {
    cfg.validate();
    return cfg;
  }
  allow_keys(root, "top level", {"curve", "params", "init", "integrator", "diagnostics", "output"});

  if (const YAML::Node c = root["curve"]) {
    allow_keys(c, "curve", {"kind", "semi_axes", "knot", "pinch_width", "path", "grid_size"});
    if (const YAML::Node k = c["kind"]) with_line(k, [&] { cfg.curve.kind = curve_kind_from_string(k.as<std::string>()); });
    if (const YAML::Node ax = c["semi_axes"]) {
      if (!ax.IsSequence() || ax.size() != 2) fail(ax, "semi_axes must be a pair [a, b]");
      cfg.curve.semi_axis_a = as_double(ax[0]);
      cfg.curve.semi_axis_b = as_double(ax[1]);
    }
    if (const YAML::Node kn = c["knot"]) {
      allow_keys(kn, "curve.knot", {"p", "q", "major", "minor"});
      read(kn, "p", cfg.curve.knot_p);
      read(kn, "q", cfg.curve.knot_q);
      read(kn, "major", cfg.curve.knot_major);
      read(kn, "minor", cfg.curve.knot_minor);
    }
    read(c, "pinch_width", cfg.curve.pinch_width);
    read(c, "path", cfg.table_path);
    cfg.table_path = resolve(base_dir, cfg.table_path);
    read(c, "grid_size", cfg.grid_size);
  }
  if (const YAML::Node p = root["params"]) {
    allow_keys(p, "params", {"s", "N"});
    read(p, "s", cfg.params.s);
    read(p, "N", cfg.params.N);
    with_line(p, [&] { cfg.params.validate(); });
  }
  if (const YAML::Node in = root["init"]) {
    allow_keys(in, "init", {"kind", "seed", "jitter", "path"});
    if (const YAML::Node k = in["kind"]) with_line(k, [&] { cfg.init.kind = init_kind_from_string(k.as<std::string>()); });
    if (in["seed"]) {
      std::uint64_t seed = 0;
      read(in, "seed", seed);
      cfg.init.seed = seed;
    }
    read(in, "jitter", cfg.init.jitter);
    read(in, "path", cfg.init.path);
    cfg.init.path = resolve(base_dir, cfg.init.path);
  }
  if (const YAML::Node ig = root["integrator"]) {
    allow_keys(ig, "integrator", {"method", "dt_init", "dt_min", "dt_max", "safety", "gap_fraction", "rtol", "t_end",
                                  "plateau_threshold", "plateau_window", "max_steps"});
    if (const YAML::Node m = ig["method"]) with_line(m, [&] { cfg.integrator.method = method_from_string(m.as<std::string>()); });
    IntegratorConfig& x = cfg.integrator;
    read(ig, "dt_init", x.dt_init);
    read(ig, "dt_min", x.dt_min);
    read(ig, "dt_max", x.dt_max);
    read(ig, "safety", x.safety);
    read(ig, "gap_fraction", x.gap_fraction);
    read(ig, "rtol", x.rtol);
    read(ig, "t_end", x.t_end);
    read(ig, "plateau_threshold", x.plateau_threshold);
    read(ig, "plateau_window", x.plateau_window);
    read(ig, "max_steps", x.max_steps);
    with_line(ig, [&] { x.validate(); });
  }
  if (const YAML::Node d = root["diagnostics"]) {
    allow_keys(d, "diagnostics", {"epsilon", "windows", "sample_every"});
    read(d, "epsilon", cfg.diagnostics.epsilon);
    read(d, "sample_every", cfg.diagnostics.sample_every);
    if (const YAML::Node ws = d["windows"]) {
      if (!ws.IsSequence()) fail(ws, "windows must be a list of [a, L] pairs");
      cfg.diagnostics.windows.clear();
      for (const YAML::Node& w : ws) {
        if (!w.IsSequence() || w.size() != 2) fail(w, "each window must be a pair [a, L]");
        cfg.diagnostics.windows.push_back({as_double(w[0]), as_double(w[1])});
      }
    }
  }
  if (const YAML::Node o = root["output"]) {
    allow_keys(o, "output", {"directory", "trajectory", "trajectory_full_z", "trajectory_every", "snapshot_every"});
    read(o, "directory", cfg.output.directory);
    read(o, "trajectory", cfg.output.trajectory);
    read(o, "trajectory_full_z", cfg.output.trajectory_full_z);
    read(o, "trajectory_every", cfg.output.trajectory_every);
    read(o, "snapshot_every", cfg.output.snapshot_every);
  }

  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string dir = std::filesystem::path(path).parent_path().string();
  return parse_config(ss.str(), dir.empty() ? "." : dir);
}

std::string to_yaml(const RunConfig& cfg) {
  YAML::Emitter y;
  y << YAML::BeginMap;

  y << YAML::Key << "curve" << YAML::Value << YAML::BeginMap;
  y << YAML::Key << "kind" << YAML::Value << to_string(cfg.curve.kind);
  y << YAML::Key << "semi_axes" << YAML::Value << YAML::Flow << YAML::BeginSeq << num(cfg.curve.semi_axis_a)
    << num(cfg.curve.semi_axis_b) << YAML::EndSeq;
  y << YAML::Key << "knot" << YAML::Value << YAML::BeginMap;
  y << YAML::Key << "p" << YAML::Value << cfg.curve.knot_p << YAML::Key << "q" << YAML::Value << cfg.curve.knot_q;
  y << YAML::Key << "major" << YAML::Value << num(cfg.curve.knot_major);
  y << YAML::Key << "minor" << YAML::Value << num(cfg.curve.knot_minor) << YAML::EndMap;
  y << YAML::Key << "pinch_width" << YAML::Value << num(cfg.curve.pinch_width);
  if (!cfg.table_path.empty()) y << YAML::Key << "path" << YAML::Value << cfg.table_path;
  y << YAML::Key << "grid_size" << YAML::Value << cfg.grid_size;
  y << YAML::EndMap;

  y << YAML::Key << "params" << YAML::Value << YAML::BeginMap;
  y << YAML::Key << "s" << YAML::Value << num(cfg.params.s) << YAML::Key << "N" << YAML::Value << cfg.params.N;
  y << YAML::EndMap;

  y << YAML::Key << "init" << YAML::Value << YAML::BeginMap;
  y << YAML::Key << "kind" << YAML::Value << to_string(cfg.init.kind);
  if (cfg.init.seed) y << YAML::Key << "seed" << YAML::Value << *cfg.init.seed;
  y << YAML::Key << "jitter" << YAML::Value << num(cfg.init.jitter);
  if (!cfg.init.path.empty()) y << YAML::Key << "path" << YAML::Value << cfg.init.path;
  y << YAML::EndMap;

  const IntegratorConfig& x = cfg.integrator;
  y << YAML::Key << "integrator" << YAML::Value << YAML::BeginMap;
  y << YAML::Key << "method" << YAML::Value << to_string(x.method);
  y << YAML::Key << "dt_init" << YAML::Value << num(x.dt_init);
  y << YAML::Key << "dt_min" << YAML::Value << num(x.dt_min);
  y << YAML::Key << "dt_max" << YAML::Value << num(x.dt_max);
  y << YAML::Key << "safety" << YAML::Value << num(x.safety);
  y << YAML::Key << "gap_fraction" << YAML::Value << num(x.gap_fraction);
  y << YAML::Key << "rtol" << YAML::Value << num(x.rtol);
  y << YAML::Key << "t_end" << YAML::Value << num(x.t_end);
  y << YAML::Key << "plateau_threshold" << YAML::Value << num(x.plateau_threshold);
  y << YAML::Key << "plateau_window" << YAML::Value << x.plateau_window;
  y << YAML::Key << "max_steps" << YAML::Value << x.max_steps;
  y << YAML::EndMap;

  y << YAML::Key << "diagnostics" << YAML::Value << YAML::BeginMap;
  y << YAML::Key << "epsilon" << YAML::Value << num(cfg.diagnostics.epsilon);
  y << YAML::Key << "windows" << YAML::Value << YAML::BeginSeq;
  for (const Window& w : cfg.diagnostics.windows) y << YAML::Flow << YAML::BeginSeq << num(w.a) << num(w.L) << YAML::EndSeq;
  y << YAML::EndSeq;
  y << YAML::Key << "sample_every" << YAML::Value << cfg.diagnostics.sample_every;
  y << YAML::EndMap;

  y << YAML::Key << "output" << YAML::Value << YAML::BeginMap;
  y << YAML::Key << "directory" << YAML::Value << cfg.output.directory;
  y << YAML::Key << "trajectory" << YAML::Value << cfg.output.trajectory;
  y << YAML::Key << "trajectory_full_z" << YAML::Value << cfg.output.trajectory_full_z;
  y << YAML::Key << "trajectory_every" << YAML::Value << cfg.output.trajectory_every;
  y << YAML::Key << "snapshot_every" << YAML::Value << cfg.output.snapshot_every;
  y << YAML::EndMap;

  y << YAML::EndMap;
  return std::string(y.c_str()) + "\n";
}

Curve build_configured_curve(const RunConfig& cfg) {
  CurveSpec spec = cfg.curve;
  if (spec.kind == CurveSpec::Kind::table && spec.samples.empty()) {
    if (!std::filesystem::exists(cfg.table_path)) throw IoError("curve table not found: " + cfg.table_path);
    CurveSpec loaded = load_table_csv(cfg.table_path);
    spec.samples = std::move(loaded.samples);
  }
  return build_curve(spec, cfg.grid_size);
}

Configuration initial_configuration(const RunConfig& cfg) {
  const int n = cfg.params.N;
  switch (cfg.init.kind) {
    case InitSpec::Kind::uniform: return uniform_configuration(n);
    case InitSpec::Kind::random: return random_configuration(n, cfg.init.seed.value());
    case InitSpec::Kind::jitter: return jittered_configuration(n, cfg.init.seed.value(), cfg.init.jitter);
    case InitSpec::Kind::file: {
      Configuration z = cfg.init.path.ends_with(".json") ? read_snapshot(cfg.init.path).Z : read_z_file(cfg.init.path);
      if (z.size() != n) throw ConfigError("init file holds " + std::to_string(z.size()) + " particles, expected " +
                                               std::to_string(n), 0);
      return z;
    }
  }
  throw ConfigError("unhandled init kind", 0);
}

}  // namespace rieszflow
