#include "mvf/config.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "mvf/error.hpp"

extern char** environ;

namespace mvf {
namespace {

namespace fs = std::filesystem;

std::string where(const YAML::Node& n) {
  const auto m = n.Mark();
  if (m.is_null() || m.line < 0) return "environment override: ";
  return "line " + std::to_string(m.line + 1) + ": ";
}

[[noreturn]] void fail(const YAML::Node& n, const std::string& key, const std::string& msg) {
  throw Error(ErrorKind::config, where(n) + key + ": " + msg);
}

/// Reads the keys of one mapping and rejects anything it did not ask for.
class Section {
 public:
  Section(const YAML::Node& node, std::string name) : node_(node), name_(std::move(name)) {
    if (node_ && !node_.IsNull() && !node_.IsMap()) fail(node_, name_, "expected a mapping");
    if (node_ && node_.IsMap()) {
      std::set<std::string> keys;
      for (const auto& kv : node_) {
        const auto key = kv.first.as<std::string>();
        if (!keys.insert(key).second) fail(kv.first, qualified(key), "duplicate key");
      }
    }
  }

  ~Section() noexcept(false) {
    if (!node_ || !node_.IsMap() || std::uncaught_exceptions() > 0) return;
    for (const auto& kv : node_) {
      const auto key = kv.first.as<std::string>();
      if (!seen_.count(key)) fail(kv.first, qualified(key), "unknown key");
    }
  }

  std::string qualified(const std::string& key) const {
    return name_.empty() ? key : name_ + "." + key;
  }

  YAML::Node child(const std::string& key) {
    seen_.insert(key);
    const YAML::Node& n = node_;
    if (!n || !n.IsMap()) return YAML::Node(YAML::NodeType::Undefined);
    return n[key];
  }

  template <class T>
  void get(const std::string& key, T& out) {
    const YAML::Node n = child(key);
    if (!n || n.IsNull()) return;
    try {
      if constexpr (std::is_same_v<T, std::vector<double>>) {
        if (!n.IsSequence()) fail(n, qualified(key), "expected a list of numbers");
        out = n.as<std::vector<double>>();
      } else if constexpr (std::is_same_v<T, std::array<double, 3>>) {
        if (!n.IsSequence() || n.size() != 3) fail(n, qualified(key), "expected three numbers");
        for (std::size_t i = 0; i < 3; ++i) out[i] = n[i].as<double>();
      } else {
        if (!n.IsScalar()) fail(n, qualified(key), "expected a scalar");
        out = n.as<T>();
      }
    } catch (const YAML::BadConversion&) {
      fail(n, qualified(key), "value '" + (n.IsScalar() ? n.Scalar() : std::string("...")) +
                                  "' has the wrong type");
    }
  }

  /// Mark of a key's value (or of the section) for later error messages.
  YAML::Node mark_of(const std::string& key) const {
    if (node_ && node_.IsMap() && node_[key]) return node_[key];
    return node_;
  }

 private:
  YAML::Node node_;
  std::string name_;
  std::set<std::string> seen_;
};

void read_source(Section& parent, const std::string& key, FieldSource& src) {
  const YAML::Node n = parent.child(key);
  if (!n || n.IsNull()) return;
  Section s(n, parent.qualified(key));
  s.get("preset", src.preset);
  s.get("value", src.value);
  s.get("path", src.path);
}

std::string resolve(const std::string& p, const fs::path& base) {
  if (p.empty()) return p;
  fs::path path(p);
  if (path.is_relative()) path = base / path;
  return path.lexically_normal().string();
}

void check_exists(Section& sec, const std::string& key, const std::string& path) {
  if (!path.empty() && !fs::exists(path)) {
    fail(sec.mark_of(key), sec.qualified(key), "file not found: " + path);
  }
}

void check_source(Section& sec, const std::string& key, FieldSource& src, const fs::path& base,
                  std::size_t comps) {
  const YAML::Node mark = sec.mark_of(key);
  const std::string name = sec.qualified(key);
  if (src.preset == "zero") return;
  if (src.preset == "constant") {
    if (src.value.size() != comps) {
      fail(mark, name + ".value", "expected " + std::to_string(comps) + " numbers");
    }
    return;
  }
  if (src.preset == "snapshot") {
    src.path = resolve(src.path, base);
    if (src.path.empty()) fail(mark, name + ".path", "snapshot target needs a path");
    if (!fs::exists(src.path)) fail(mark, name + ".path", "file not found: " + src.path);
    return;
  }
  fail(mark, name + ".preset", "expected zero, constant or snapshot, got '" + src.preset + "'");
}

bool in_open_unit(double v) { return v > 0.0 && v < 1.0; }

void apply_overrides(YAML::Node& root) {
  for (const auto& [key, value] : env_overrides()) {
    std::string lower = key;
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    // preserve the case of the time key T
    auto fix = [](std::string k) { return k == "t" ? std::string("T") : k; };
    YAML::Node parsed;
    try {
      parsed = YAML::Load(value);
    } catch (const YAML::Exception& e) {
      throw Error(ErrorKind::config, "environment override MVF_" + key + ": " + e.what());
    }
    const auto pos = lower.find("__");
    // Rebuild the parsed value without marks so errors name the override.
    YAML::Node clean;
    if (parsed.IsSequence()) {
      for (const auto& item : parsed) clean.push_back(YAML::Node(item.Scalar()));
    } else if (parsed.IsScalar()) {
      clean = YAML::Node(parsed.Scalar());
    }
    if (pos == std::string::npos) {
      root[fix(lower)] = clean;
    } else {
      root[lower.substr(0, pos)][fix(lower.substr(pos + 2))] = clean;
    }
  }
}

}  // namespace

std::vector<std::pair<std::string, std::string>> env_overrides() {
  std::vector<std::pair<std::string, std::string>> out;
  for (char** e = environ; e && *e; ++e) {
    const std::string entry(*e);
    if (entry.rfind("MVF_", 0) != 0) continue;
    const auto eq = entry.find('=');
    if (eq == std::string::npos) continue;
    out.emplace_back(entry.substr(4, eq - 4), entry.substr(eq + 1));
  }
  std::sort(out.begin(), out.end());
  return out;
}

RunConfig parse_config(const std::string& text, const fs::path& base_dir, bool apply_env) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw Error(ErrorKind::config, "line " + std::to_string(e.mark.line + 1) + ": " + e.msg);
  }
  if (!root || root.IsNull()) root = YAML::Node(YAML::NodeType::Map);
  if (!root.IsMap()) throw Error(ErrorKind::config, "line 1: top level must be a mapping");
  if (apply_env) apply_overrides(root);

  RunConfig c;
  Section top(root, "");
  {
    Section s(top.child("grid"), "grid");
    s.get("nx", c.grid.nx);
    s.get("ny", c.grid.ny);
    s.get("lx", c.grid.lx);
    s.get("ly", c.grid.ly);
    if (c.grid.nx < 8) fail(s.mark_of("nx"), "grid.nx", "must be at least 8");
    if (c.grid.ny < 8) fail(s.mark_of("ny"), "grid.ny", "must be at least 8");
    if (!(c.grid.lx > 0.0)) fail(s.mark_of("lx"), "grid.lx", "must be positive");
    if (!(c.grid.ly > 0.0)) fail(s.mark_of("ly"), "grid.ly", "must be positive");
  }
  {
    Section s(top.child("time"), "time");
    s.get("T", c.time.T);
    s.get("dt", c.time.dt);
    s.get("save_stride", c.time.save_stride);
    if (!(c.time.T > 0.0)) fail(s.mark_of("T"), "time.T", "must be positive");
    if (!(c.time.dt > 0.0)) fail(s.mark_of("dt"), "time.dt", "must be positive");
    const double r = c.time.T / c.time.dt;
    if (std::abs(r - std::round(r)) > 1e-9 * std::max(1.0, r)) {
      fail(s.mark_of("T"), "time.T", "must be an integer multiple of time.dt");
    }
    if (c.time.save_stride < 1) {
      fail(s.mark_of("save_stride"), "time.save_stride", "must be at least 1");
    }
  }
  {
    Section s(top.child("params"), "params");
    s.get("nu", c.params.nu);
    s.get("kappa", c.params.kappa);
    s.get("alpha", c.params.alpha);
    for (auto [k, v] : {std::pair{"nu", c.params.nu}, std::pair{"kappa", c.params.kappa},
                        std::pair{"alpha", c.params.alpha}}) {
      if (!(v > 0.0)) fail(s.mark_of(k), std::string("params.") + k, "must be positive");
    }
  }
  {
    Section s(top.child("initial"), "initial");
    s.get("preset", c.initial.preset);
    s.get("m", c.initial.m);
    s.get("amplitude", c.initial.amplitude);
    s.get("v_path", c.initial.v_path);
    s.get("F_path", c.initial.F_path);
    s.get("M_path", c.initial.M_path);
    const auto& p = c.initial.preset;
    if (p != "zero" && p != "constant_m" && p != "vortex" && p != "snapshot") {
      fail(s.mark_of("preset"), "initial.preset",
           "expected zero, constant_m, vortex or snapshot, got '" + p + "'");
    }
    c.initial.v_path = resolve(c.initial.v_path, base_dir);
    c.initial.F_path = resolve(c.initial.F_path, base_dir);
    c.initial.M_path = resolve(c.initial.M_path, base_dir);
    check_exists(s, "v_path", c.initial.v_path);
    check_exists(s, "F_path", c.initial.F_path);
    check_exists(s, "M_path", c.initial.M_path);
  }
  {
    Section s(top.child("control"), "control");
    s.get("field", c.control.field);
    s.get("value", c.control.value);
    s.get("amplitude", c.control.amplitude);
    s.get("samples_dir", c.control.samples_dir);
    s.get("coil_basis", c.control.coil_basis);
    s.get("coils", c.control.coils);
    s.get("coil_basis_dir", c.control.coil_basis_dir);
    s.get("lower", c.control.lower);
    s.get("upper", c.control.upper);
    s.get("coil_initial", c.control.coil_initial);
    const auto& f = c.control.field;
    if (f != "zero" && f != "constant" && f != "random" && f != "snapshots") {
      fail(s.mark_of("field"), "control.field",
           "expected zero, constant, random or snapshots, got '" + f + "'");
    }
    if (f == "snapshots" && c.control.samples_dir.empty()) {
      fail(s.mark_of("samples_dir"), "control.samples_dir", "required when field = snapshots");
    }
    if (c.control.coil_basis != "bumps" && c.control.coil_basis != "harmonics" &&
        c.control.coil_basis != "snapshots") {
      fail(s.mark_of("coil_basis"), "control.coil_basis",
           "expected bumps, harmonics or snapshots");
    }
    if (c.control.coils < 1) fail(s.mark_of("coils"), "control.coils", "must be at least 1");
    if (!(c.control.lower <= c.control.upper)) {
      fail(s.mark_of("lower"), "control.lower", "must not exceed control.upper");
    }
    c.control.samples_dir = resolve(c.control.samples_dir, base_dir);
    c.control.coil_basis_dir = resolve(c.control.coil_basis_dir, base_dir);
    check_exists(s, "samples_dir", c.control.samples_dir);
    check_exists(s, "coil_basis_dir", c.control.coil_basis_dir);
  }
  {
    Section s(top.child("cost"), "cost");
    s.get("a1", c.cost.a1);
    s.get("a2", c.cost.a2);
    s.get("a3", c.cost.a3);
    s.get("lambda", c.cost.lambda);
    read_source(s, "v_target", c.cost.v_target);
    read_source(s, "F_target", c.cost.F_target);
    read_source(s, "M_target", c.cost.M_target);
    for (auto [k, v] : {std::pair{"a1", c.cost.a1}, std::pair{"a2", c.cost.a2},
                        std::pair{"a3", c.cost.a3}}) {
      if (!(v >= 0.0)) fail(s.mark_of(k), std::string("cost.") + k, "must be nonnegative");
    }
    if (!(c.cost.lambda > 0.0)) fail(s.mark_of("lambda"), "cost.lambda", "must be positive");
    check_source(s, "v_target", c.cost.v_target, base_dir, 2);
    check_source(s, "F_target", c.cost.F_target, base_dir, 4);
    check_source(s, "M_target", c.cost.M_target, base_dir, 3);
  }
  {
    Section s(top.child("solver"), "solver");
    s.get("poisson_tol", c.solver.poisson_tol);
    s.get("max_cg_iters", c.solver.max_cg_iters);
    s.get("method", c.solver.method);
    if (!in_open_unit(c.solver.poisson_tol)) {
      fail(s.mark_of("poisson_tol"), "solver.poisson_tol", "must lie in (0, 1)");
    }
    if (c.solver.max_cg_iters < 1) {
      fail(s.mark_of("max_cg_iters"), "solver.max_cg_iters", "must be at least 1");
    }
    if (c.solver.method != "direct" && c.solver.method != "cg") {
      fail(s.mark_of("method"), "solver.method", "expected direct or cg");
    }
  }
  {
    Section s(top.child("optimizer"), "optimizer");
    s.get("max_iter", c.optimizer.max_iter);
    s.get("grad_tol", c.optimizer.grad_tol);
    s.get("armijo_c", c.optimizer.armijo_c);
    s.get("armijo_shrink", c.optimizer.armijo_shrink);
    if (c.optimizer.max_iter < 0) {
      fail(s.mark_of("max_iter"), "optimizer.max_iter", "must be nonnegative");
    }
    for (auto [k, v] : {std::pair{"grad_tol", c.optimizer.grad_tol},
                        std::pair{"armijo_c", c.optimizer.armijo_c},
                        std::pair{"armijo_shrink", c.optimizer.armijo_shrink}}) {
      if (!in_open_unit(v)) fail(s.mark_of(k), std::string("optimizer.") + k, "must lie in (0, 1)");
    }
  }
  {
    Section s(top.child("check"), "check");
    s.get("epsilons", c.check.epsilons);
    s.get("directions", c.check.directions);
    s.get("slope_min", c.check.slope_min);
    s.get("slope_max", c.check.slope_max);
    s.get("direction_amplitude", c.check.direction_amplitude);
    if (c.check.epsilons.size() < 2) {
      fail(s.mark_of("epsilons"), "check.epsilons", "needs at least two values");
    }
    for (double e : c.check.epsilons) {
      if (!(e > 0.0)) fail(s.mark_of("epsilons"), "check.epsilons", "values must be positive");
    }
    if (c.check.directions < 1) {
      fail(s.mark_of("directions"), "check.directions", "must be at least 1");
    }
    if (!(c.check.slope_min < c.check.slope_max)) {
      fail(s.mark_of("slope_min"), "check.slope_min", "must be below check.slope_max");
    }
  }
  {
    Section s(top.child("stability"), "stability");
    s.get("epsilons", c.stability.epsilons);
    s.get("h2_samples_dir", c.stability.h2_samples_dir);
    for (double e : c.stability.epsilons) {
      if (!(e > 0.0)) fail(s.mark_of("epsilons"), "stability.epsilons", "values must be positive");
    }
    c.stability.h2_samples_dir = resolve(c.stability.h2_samples_dir, base_dir);
    check_exists(s, "h2_samples_dir", c.stability.h2_samples_dir);
  }
  {
    Section s(top.child("output"), "output");
    s.get("directory", c.output.directory);
    s.get("trajectory_dir", c.output.trajectory_dir);
    c.output.trajectory_dir = resolve(c.output.trajectory_dir, base_dir);
    check_exists(s, "trajectory_dir", c.output.trajectory_dir);
  }
  top.get("seed", c.seed);
  return c;
}

RunConfig load_config(const fs::path& path, bool apply_env) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::config, "cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.parent_path().empty() ? fs::path(".") : path.parent_path(),
                      apply_env);
}

namespace {

void emit_source(YAML::Emitter& out, const char* key, const FieldSource& s) {
  out << YAML::Key << key << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "preset" << YAML::Value << s.preset;
  out << YAML::Key << "value" << YAML::Value << YAML::Flow << s.value;
  out << YAML::Key << "path" << YAML::Value << s.path;
  out << YAML::EndMap;
}

template <class T>
void kv(YAML::Emitter& out, const char* key, const T& v) {
  out << YAML::Key << key << YAML::Value << v;
}

void kv_list(YAML::Emitter& out, const char* key, const std::vector<double>& v) {
  out << YAML::Key << key << YAML::Value << YAML::Flow << v;
}

void kv_arr(YAML::Emitter& out, const char* key, const std::array<double, 3>& v) {
  out << YAML::Key << key << YAML::Value << YAML::Flow << YAML::BeginSeq << v[0] << v[1] << v[2]
      << YAML::EndSeq;
}

}  // namespace

std::string serialize_config(const RunConfig& c) {
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  out << YAML::BeginMap;
  out << YAML::Key << "grid" << YAML::Value << YAML::BeginMap;
  kv(out, "nx", c.grid.nx);
  kv(out, "ny", c.grid.ny);
  kv(out, "lx", c.grid.lx);
  kv(out, "ly", c.grid.ly);
  out << YAML::EndMap;
  out << YAML::Key << "time" << YAML::Value << YAML::BeginMap;
  kv(out, "T", c.time.T);
  kv(out, "dt", c.time.dt);
  kv(out, "save_stride", c.time.save_stride);
  out << YAML::EndMap;
  out << YAML::Key << "params" << YAML::Value << YAML::BeginMap;
  kv(out, "nu", c.params.nu);
  kv(out, "kappa", c.params.kappa);
  kv(out, "alpha", c.params.alpha);
  out << YAML::EndMap;
  out << YAML::Key << "initial" << YAML::Value << YAML::BeginMap;
  kv(out, "preset", c.initial.preset);
  kv_arr(out, "m", c.initial.m);
  kv(out, "amplitude", c.initial.amplitude);
  kv(out, "v_path", c.initial.v_path);
  kv(out, "F_path", c.initial.F_path);
  kv(out, "M_path", c.initial.M_path);
  out << YAML::EndMap;
  out << YAML::Key << "control" << YAML::Value << YAML::BeginMap;
  kv(out, "field", c.control.field);
  kv_arr(out, "value", c.control.value);
  kv(out, "amplitude", c.control.amplitude);
  kv(out, "samples_dir", c.control.samples_dir);
  kv(out, "coil_basis", c.control.coil_basis);
  kv(out, "coils", c.control.coils);
  kv(out, "coil_basis_dir", c.control.coil_basis_dir);
  kv(out, "lower", c.control.lower);
  kv(out, "upper", c.control.upper);
  kv(out, "coil_initial", c.control.coil_initial);
  out << YAML::EndMap;
  out << YAML::Key << "cost" << YAML::Value << YAML::BeginMap;
  kv(out, "a1", c.cost.a1);
  kv(out, "a2", c.cost.a2);
  kv(out, "a3", c.cost.a3);
  kv(out, "lambda", c.cost.lambda);
  emit_source(out, "v_target", c.cost.v_target);
  emit_source(out, "F_target", c.cost.F_target);
  emit_source(out, "M_target", c.cost.M_target);
  out << YAML::EndMap;
  out << YAML::Key << "solver" << YAML::Value << YAML::BeginMap;
  kv(out, "poisson_tol", c.solver.poisson_tol);
  kv(out, "max_cg_iters", c.solver.max_cg_iters);
  kv(out, "method", c.solver.method);
  out << YAML::EndMap;
  out << YAML::Key << "optimizer" << YAML::Value << YAML::BeginMap;
  kv(out, "max_iter", c.optimizer.max_iter);
  kv(out, "grad_tol", c.optimizer.grad_tol);
  kv(out, "armijo_c", c.optimizer.armijo_c);
  kv(out, "armijo_shrink", c.optimizer.armijo_shrink);
  out << YAML::EndMap;
  out << YAML::Key << "check" << YAML::Value << YAML::BeginMap;
  kv_list(out, "epsilons", c.check.epsilons);
  kv(out, "directions", c.check.directions);
  kv(out, "slope_min", c.check.slope_min);
  kv(out, "slope_max", c.check.slope_max);
  kv(out, "direction_amplitude", c.check.direction_amplitude);
  out << YAML::EndMap;
  out << YAML::Key << "stability" << YAML::Value << YAML::BeginMap;
  kv_list(out, "epsilons", c.stability.epsilons);
  kv(out, "h2_samples_dir", c.stability.h2_samples_dir);
  out << YAML::EndMap;
  out << YAML::Key << "output" << YAML::Value << YAML::BeginMap;
  kv(out, "directory", c.output.directory);
  kv(out, "trajectory_dir", c.output.trajectory_dir);
  out << YAML::EndMap;
  kv(out, "seed", c.seed);
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

std::string config_hash(const RunConfig& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : serialize_config(cfg)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace mvf
