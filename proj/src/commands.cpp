#include "mvf/commands.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "mvf/adjoint.hpp"
#include "mvf/presets.hpp"
#include "mvf/snapshot.hpp"
#include "mvf/version.hpp"

namespace mvf {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// ---------------------------------------------------------------------------
// small helpers

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class Csv {
 public:
  Csv(const fs::path& path, const std::vector<std::string>& header) : path_(path), out_(path) {
    if (!out_) throw Error(ErrorKind::io, "cannot write " + path.string());
    row_strings(header);
  }
  void row(const std::vector<double>& values) {
    std::vector<std::string> s;
    s.reserve(values.size());
    for (double v : values) s.push_back(num(v));
    row_strings(s);
  }
  void row_strings(const std::vector<std::string>& values) {
    for (std::size_t i = 0; i < values.size(); ++i) out_ << (i ? "," : "") << values[i];
    out_ << '\n';
  }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
  std::ofstream out_;
};

std::string timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

void write_atomic(const fs::path& path, const std::string& text) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw Error(ErrorKind::io, "cannot write " + tmp.string());
    out << text;
    if (!out) throw Error(ErrorKind::io, "failed writing " + tmp.string());
  }
  fs::rename(tmp, path);
}

/// Least-squares slope of log(y) against log(x) over entries with y > 0.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(y[i] > 0.0) || !(x[i] > 0.0)) continue;
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++n;
  }
  if (n < 2) return std::nan("");
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

template <int C>
std::vector<Field<C>> target_from(const FieldSource& src, const Grid& g, Bc bc) {
  if (src.preset == "zero") return {};
  if (src.preset == "constant") {
    Field<C> f(g, bc);
    for (int c = 0; c < C; ++c) f.comp(c).setConstant(src.value.at(c));
    return {f};
  }
  Field<C> f = read_field<C>(src.path);
  if (!(f.grid() == g)) throw Error(ErrorKind::config, src.path + ": target grid mismatch");
  f.set_bc(bc);
  return {f};
}

SolverOptions solver_from(const RunConfig& cfg) {
  SolverOptions s;
  s.method = cfg.solver.method == "cg" ? SolverOptions::Method::cg : SolverOptions::Method::direct;
  s.cg.tolerance = cfg.solver.poisson_tol;
  s.cg.max_iterations = cfg.solver.max_cg_iters;
  return s;
}

std::string h_source(const RunConfig& cfg) {
  if (cfg.control.field == "snapshots") return "snapshots:" + cfg.control.samples_dir;
  return cfg.control.field;
}

std::vector<Vector3Field> load_basis(const Setup& s) {
  const auto& c = s.cfg.control;
  if (c.coil_basis != "snapshots") return coil_basis_preset(s.grid, c.coil_basis, c.coils);
  if (c.coil_basis_dir.empty()) {
    throw Error(ErrorKind::config, "control.coil_basis_dir: required for coil_basis = snapshots");
  }
  std::vector<Vector3Field> basis;
  for (int i = 0; i < c.coils; ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "coil_%03d.snap", i);
    auto f = read_field<3>(fs::path(c.coil_basis_dir) / name);
    if (!(f.grid() == s.grid)) throw Error(ErrorKind::config, std::string(name) + ": grid mismatch");
    f.set_bc(Bc::neumann_zero);
    basis.push_back(std::move(f));
  }
  return basis;
}

// ---------------------------------------------------------------------------
// run context: output directory, artifacts and manifest

struct Run {
  Run(std::string cmd, Setup s, fs::path dir, std::ostream& lg, bool q)
      : command(std::move(cmd)), setup(std::move(s)), out(std::move(dir)), log(lg), quiet(q) {}

  std::string command;
  Setup setup;
  fs::path out;
  std::ostream& log;
  bool quiet;
  std::string start = timestamp();
  std::vector<fs::path> artifacts;
  json summary = json::object();

  void note(const std::string& msg) const {
    if (!quiet) log << msg << '\n';
  }
  void add(const fs::path& p) { artifacts.push_back(p); }

  void manifest(const std::string& status, const std::string& message) const {
    json m;
    m["command"] = command;
    m["config_hash"] = config_hash(setup.cfg);
    m["tool_version"] = kVersion;
    m["start"] = start;
    m["end"] = timestamp();
    m["status"] = status;
    if (!message.empty()) m["message"] = message;
    auto arr = json::array();
    for (const auto& p : artifacts) arr.push_back(fs::relative(p, out).generic_string());
    m["artifacts"] = arr;
    m["summary"] = summary;
    write_atomic(out / "manifest.json", m.dump(2) + "\n");
  }
};

void write_energy_csvs(Run& run, const Trajectory& traj) {
  const EnergyReport er = energy_report(traj);
  Csv energy(run.out / "energy.csv",
             {"t", "kinetic", "exchange", "penalty", "zeeman", "elastic", "total"});
  for (std::size_t i = 0; i < er.t.size(); ++i) {
    const auto& p = er.parts[i];
    energy.row({er.t[i], p.kinetic, p.exchange, p.penalty, p.zeeman, p.elastic, p.total});
  }
  run.add(energy.path());
  Csv work(run.out / "energy_balance.csv", {"t", "internal", "increment", "zeeman_work"});
  for (std::size_t i = 0; i < er.t.size(); ++i) {
    work.row({er.t[i], er.internal[i], i ? er.increments[i - 1] : 0.0, er.zeeman_work[i]});
  }
  run.add(work.path());
  const NormSeries ns = strong_norm_monitor(traj, run.setup.solver);
  Csv norms(run.out / "norms.csv", {"t", "A", "B"});
  for (std::size_t i = 0; i < ns.t.size(); ++i) norms.row({ns.t[i], ns.A[i], ns.B[i]});
  run.add(norms.path());

  bool h_zero = true;
  for (const auto& h : traj.h_samples) h_zero = h_zero && h.values().isZero(0.0);
  double worst = 0.0;
  for (double d : er.increments) worst = std::max(worst, d);
  run.summary["energy_tolerance"] = er.tolerance;
  run.summary["max_energy_increment"] = worst;
  run.summary["control_is_zero"] = h_zero;
  if (h_zero) run.summary["dissipative"] = er.dissipative;
  run.summary["growth_rate_A"] = ns.growth_rate;
  run.note("energy: E0=" + num(er.internal.front()) + " max increment=" + num(worst) +
           (h_zero ? (er.dissipative ? " (dissipative)" : " (NOT dissipative)") : ""));
}

// ---------------------------------------------------------------------------
// commands

int cmd_simulate(Run& run) {
  const Setup& s = run.setup;
  const Trajectory traj = solve_state(s.init, s.h, s.cfg.time.T, s.cfg.time.dt, s.params,
                                      s.solver, s.cfg.time.save_stride);
  for (const auto& p : write_trajectory_dir(run.out / "trajectory", traj, h_source(s.cfg))) {
    run.add(p);
  }
  write_energy_csvs(run, traj);
  double max_div = 0.0;
  for (double r : traj.residuals) max_div = std::max(max_div, r);
  run.summary["steps"] = traj.steps;
  run.summary["max_divergence_residual"] = max_div;
  run.note("simulate: " + std::to_string(traj.steps) + " steps, max weak divergence " +
           num(max_div));
  return 0;
}

int cmd_energy_report(Run& run) {
  const auto& dir = run.setup.cfg.output.trajectory_dir;
  if (dir.empty()) {
    throw Error(ErrorKind::config, "output.trajectory_dir: required by energy-report");
  }
  const Trajectory traj = read_trajectory_dir(dir);
  write_energy_csvs(run, traj);
  return 0;
}

ControlProblem make_problem(const Setup& s) {
  return ControlProblem(s.init, s.cfg.time.T, s.cfg.time.dt, s.params, s.cost, s.solver);
}

int cmd_gradient_check(Run& run, double corrupt) {
  const Setup& s = run.setup;
  const ControlProblem pb = make_problem(s);
  SplitMix64 rng(s.cfg.seed);
  Trajectory base;
  reduced_cost(pb, s.h, &base);
  set_adjoint_corruption(corrupt);
  GradientReport g;
  try {
    g = reduced_gradient(pb, s.h, &base);
  } catch (...) {
    set_adjoint_corruption(1.0);
    throw;
  }
  set_adjoint_corruption(1.0);
  const double J0 = g.cost.J;
  const auto& eps = s.cfg.check.epsilons;

  Csv detail(run.out / "gradient_check.csv",
             {"direction", "epsilon", "J", "fd_error", "taylor_remainder"});
  Csv summary(run.out / "gradient_check_summary.csv",
              {"direction", "J", "dJ", "grad_norm", "taylor_slope", "fd_slope", "pass"});
  bool all_pass = true;
  for (int d = 0; d < s.cfg.check.directions; ++d) {
    const FieldControl dh =
        random_smooth_control(s.grid, pb.steps(), pb.dt(), rng, s.cfg.check.direction_amplitude);
    const double dJ = directional_derivative(pb, g, dh);
    std::vector<double> fd, rem;
    for (double e : eps) {
      FieldControl hp = s.h;
      for (std::size_t k = 0; k < hp.size(); ++k) hp[k].axpy(e, dh[k]);
      const double J = reduced_cost(pb, hp).J;
      fd.push_back(std::abs((J - J0) / e - dJ));
      rem.push_back(std::abs(J - J0 - e * dJ));
      detail.row({double(d), e, J, fd.back(), rem.back()});
    }
    const double slope = loglog_slope(eps, rem);
    const double fd_slope = loglog_slope(eps, fd);
    double max_rem = 0.0;
    for (double r : rem) max_rem = std::max(max_rem, r);
    // A remainder at roundoff level means the first-order model is exact.
    const bool exact = max_rem <= 1e-13 * (1.0 + std::abs(J0));
    const bool pass =
        exact || (slope >= s.cfg.check.slope_min && slope <= s.cfg.check.slope_max);
    all_pass = all_pass && pass;
    summary.row_strings({std::to_string(d), num(J0), num(dJ), num(g.norm_riesz), num(slope),
                         num(fd_slope), pass ? "1" : "0"});
    run.note("direction " + std::to_string(d) + ": taylor slope " + num(slope) + ", fd slope " +
             num(fd_slope) + (pass ? " PASS" : " FAIL"));
  }
  run.add(detail.path());
  run.add(summary.path());

  const AdjointSolution adj = solve_adjoint(pb.stepper(), base, pb.cost());
  Csv ynorms(run.out / "adjoint_norms.csv", {"t", "Y_a"});
  for (std::size_t k = 0; k < adj.t.size(); ++k) ynorms.row({adj.t[k], adj.y_a[k]});
  run.add(ynorms.path());
  run.summary["adjoint_growth_rate"] = adj.growth_rate;
  run.summary["J"] = J0;
  run.summary["grad_norm"] = g.norm_riesz;
  run.summary["kkt_residual"] = kkt_residual(pb, g);
  run.summary["pass"] = all_pass;
  if (!all_pass) throw Error(ErrorKind::check, "gradient-check: Taylor slope outside the band");
  return 0;
}

int cmd_optimize_field(Run& run) {
  const Setup& s = run.setup;
  const ControlProblem pb = make_problem(s);
  OptimizerOptions o;
  o.max_iter = s.cfg.optimizer.max_iter;
  o.grad_tol = s.cfg.optimizer.grad_tol;
  o.armijo_c = s.cfg.optimizer.armijo_c;
  o.armijo_shrink = s.cfg.optimizer.armijo_shrink;
  const FieldOptResult r = optimize_field(pb, s.h, o);
  Csv csv(run.out / "optimize.csv", {"iter", "J", "grad_norm", "step"});
  for (const auto& it : r.history) csv.row({double(it.iter), it.J, it.grad_norm, it.step});
  run.add(csv.path());
  for (const auto& p : write_control_dir(run.out / "control", r.h, pb.dt())) run.add(p);
  run.summary["converged"] = r.converged;
  run.summary["iterations"] = r.history.back().iter;
  run.summary["J"] = r.history.back().J;
  run.summary["grad_norm"] = r.history.back().grad_norm;
  run.summary["kkt_residual"] = r.kkt;
  run.note("optimize-field: J=" + num(r.history.back().J) + " |grad|=" +
           num(r.history.back().grad_norm) + (r.converged ? " converged" : " budget exhausted"));
  return 0;
}

int cmd_optimize_coils(Run& run) {
  const Setup& s = run.setup;
  const ControlProblem pb = make_problem(s);
  CoilBasis basis{load_basis(s)};
  const int cols = pb.steps() + 1;
  CoilControl c0;
  c0.u = Eigen::MatrixXd::Constant(basis.n(), cols, s.cfg.control.coil_initial);
  c0.a = Eigen::MatrixXd::Constant(basis.n(), cols, s.cfg.control.lower);
  c0.b = Eigen::MatrixXd::Constant(basis.n(), cols, s.cfg.control.upper);
  CoilOptOptions o;
  o.max_iter = s.cfg.optimizer.max_iter;
  o.tol = s.cfg.optimizer.grad_tol;
  o.armijo_c = s.cfg.optimizer.armijo_c;
  o.armijo_shrink = s.cfg.optimizer.armijo_shrink;
  o.seed = s.cfg.seed;
  const CoilOptResult r = optimize_coils(pb, basis, c0, o);

  Csv csv(run.out / "optimize.csv", {"iter", "J", "grad_norm", "step", "fixedpoint_residual"});
  for (const auto& it : r.history) {
    csv.row({double(it.iter), it.J, it.grad_norm, it.step, it.fixedpoint_residual});
  }
  run.add(csv.path());
  std::vector<std::string> header{"t"};
  for (int i = 0; i < basis.n(); ++i) header.push_back("u" + std::to_string(i + 1));
  Csv u(run.out / "coils.csv", header);
  for (int k = 0; k < cols; ++k) {
    std::vector<double> row{k * pb.dt()};
    for (int i = 0; i < basis.n(); ++i) row.push_back(r.control.u(i, k));
    u.row(row);
  }
  run.add(u.path());
  for (const auto& p : write_control_dir(run.out / "control", coil_field(r.control.u, basis),
                                         pb.dt())) {
    run.add(p);
  }
  run.summary["converged"] = r.converged;
  run.summary["iterations"] = r.history.back().iter;
  run.summary["J"] = r.history.back().J;
  run.summary["fixedpoint_residual"] = r.residual.l2;
  run.summary["fixedpoint_residual_max"] = r.residual.max;
  run.summary["vi_residual"] = r.vi_residual;
  run.note("optimize-coils: J=" + num(r.history.back().J) + " fixed-point residual " +
           num(r.residual.l2) + (r.converged ? " converged" : " budget exhausted"));
  return 0;
}

int cmd_stability_probe(Run& run) {
  const Setup& s = run.setup;
  const ControlProblem pb = make_problem(s);
  Csv csv(run.out / "stability.csv",
          {"epsilon", "weak_lhs", "strong_lhs", "rhs", "weak_ratio", "strong_ratio",
           "weak_lipschitz", "strong_lipschitz"});
  auto emit = [&](double e, const StabilityReport& r) {
    csv.row({e, r.weak_lhs, r.strong_lhs, r.rhs, r.weak_ratio, r.strong_ratio, r.weak_lipschitz,
             r.strong_lipschitz});
  };
  if (!s.cfg.stability.h2_samples_dir.empty()) {
    const FieldControl h2 = read_control_dir(s.cfg.stability.h2_samples_dir, s.grid, pb.steps());
    emit(std::nan(""), stability_probe(pb, s.h, h2));
  } else {
    emit(0.0, stability_probe(pb, s.h, s.h));
    SplitMix64 rng(s.cfg.seed);
    const FieldControl dir =
        random_smooth_control(s.grid, pb.steps(), pb.dt(), rng, s.cfg.check.direction_amplitude);
    for (double e : s.cfg.stability.epsilons) {
      FieldControl h2 = s.h;
      for (std::size_t k = 0; k < h2.size(); ++k) h2[k].axpy(e, dir[k]);
      emit(e, stability_probe(pb, s.h, h2));
    }
  }
  run.add(csv.path());
  return 0;
}

}  // namespace

// ---------------------------------------------------------------------------

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::config:
      return 2;
    case ErrorKind::convergence:
      return 3;
    case ErrorKind::check:
      return 4;
    default:
      return 1;
  }
}

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"simulate",       "gradient-check",
                                              "optimize-field", "optimize-coils",
                                              "stability-probe", "energy-report"};
  return names;
}

Setup build_setup(const RunConfig& cfg) {
  const Grid g(cfg.grid.nx, cfg.grid.ny, cfg.grid.lx, cfg.grid.ly);
  State init(g);
  if (cfg.initial.preset == "snapshot") {
    auto load = [&](const std::string& path, auto& field, const char* key) {
      if (path.empty()) return;
      using F = std::decay_t<decltype(field)>;
      F f = read_field<F::components>(path);
      if (!(f.grid() == g)) {
        throw Error(ErrorKind::config, std::string("initial.") + key + ": grid mismatch");
      }
      f.set_bc(field.bc());
      field = std::move(f);
    };
    load(cfg.initial.v_path, init.v, "v_path");
    load(cfg.initial.F_path, init.F, "F_path");
    load(cfg.initial.M_path, init.M, "M_path");
  } else {
    PresetOptions po;
    po.m = cfg.initial.m;
    po.amplitude = cfg.initial.amplitude;
    init = preset_state(g, cfg.initial.preset, po);
  }

  CostSpec cost;
  cost.a1 = cfg.cost.a1;
  cost.a2 = cfg.cost.a2;
  cost.a3 = cfg.cost.a3;
  cost.lambda = cfg.cost.lambda;
  cost.v_d = target_from<2>(cfg.cost.v_target, g, Bc::dirichlet_zero);
  cost.F_d = target_from<4>(cfg.cost.F_target, g, Bc::dirichlet_zero);
  cost.M_d = target_from<3>(cfg.cost.M_target, g, Bc::neumann_zero);

  const int steps = step_count(cfg.time.T, cfg.time.dt);
  FieldControl h;
  if (cfg.control.field == "zero") {
    h = constant_control(g, steps, {0.0, 0.0, 0.0});
  } else if (cfg.control.field == "constant") {
    h = constant_control(g, steps, cfg.control.value);
  } else if (cfg.control.field == "random") {
    // separate stream from the check directions
    SplitMix64 rng(cfg.seed ^ 0xA5A5A5A5A5A5A5A5ULL);
    h = random_smooth_control(g, steps, cfg.time.dt, rng, cfg.control.amplitude);
  } else {
    h = read_control_dir(cfg.control.samples_dir, g, steps);
  }
  return Setup{cfg, g, std::move(init), {cfg.params.nu, cfg.params.kappa, cfg.params.alpha},
               std::move(cost), solver_from(cfg), std::move(h)};
}

std::vector<fs::path> write_trajectory_dir(const fs::path& dir, const Trajectory& traj,
                                           const std::string& h_src) {
  fs::create_directories(dir);
  std::vector<fs::path> out;
  const std::vector<Bc> bcs{Bc::dirichlet_zero, Bc::dirichlet_zero, Bc::neumann_zero,
                            Bc::dirichlet_zero, Bc::dirichlet_zero, Bc::dirichlet_zero,
                            Bc::dirichlet_zero, Bc::neumann_zero,   Bc::neumann_zero,
                            Bc::neumann_zero,   Bc::neumann_zero,   Bc::neumann_zero,
                            Bc::neumann_zero};
  for (std::size_t n = 0; n < traj.states.size(); ++n) {
    const int k = static_cast<int>(n) * traj.save_stride;
    const State& s = traj.states[n];
    Snapshot snap{s.grid(), s.t, bcs, Eigen::MatrixXd(s.grid().nodes(), 13)};
    snap.values << s.v.values(), s.p.values(), s.F.values(), s.M.values(),
        traj.h_samples.at(k).values();
    char name[32];
    std::snprintf(name, sizeof name, "state_%06d.snap", k);
    write_snapshot(dir / name, snap);
    out.push_back(dir / name);
  }
  json meta;
  meta["dt"] = traj.dt;
  meta["T"] = traj.steps * traj.dt;
  meta["steps"] = traj.steps;
  meta["save_stride"] = traj.save_stride;
  meta["params"] = {{"nu", traj.params.nu}, {"kappa", traj.params.kappa},
                    {"alpha", traj.params.alpha}};
  meta["h_source"] = h_src;
  meta["components"] = {"vx", "vy", "p", "Fxx", "Fxy", "Fyx", "Fyy", "Mx", "My", "Mz",
                        "Hx", "Hy", "Hz"};
  write_atomic(dir / "meta.json", meta.dump(2) + "\n");
  out.push_back(dir / "meta.json");
  return out;
}

Trajectory read_trajectory_dir(const fs::path& dir) {
  std::ifstream in(dir / "meta.json");
  if (!in) throw Error(ErrorKind::io, "cannot read " + (dir / "meta.json").string());
  json meta;
  try {
    meta = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::io, (dir / "meta.json").string() + ": " + e.what());
  }
  Trajectory traj;
  try {
    traj.dt = meta.at("dt").get<double>();
    traj.steps = meta.at("steps").get<int>();
    traj.save_stride = meta.at("save_stride").get<int>();
    traj.params.nu = meta.at("params").at("nu").get<double>();
    traj.params.kappa = meta.at("params").at("kappa").get<double>();
    traj.params.alpha = meta.at("params").at("alpha").get<double>();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::io, (dir / "meta.json").string() + ": " + e.what());
  }
  for (int k = 0; k <= traj.steps; k += traj.save_stride) {
    char name[32];
    std::snprintf(name, sizeof name, "state_%06d.snap", k);
    const Snapshot snap = read_snapshot(dir / name);
    if (snap.values.cols() != 13) {
      throw Error(ErrorKind::io, std::string(name) + ": expected 13 components");
    }
    if (traj.h_samples.empty()) {
      traj.h_samples.assign(traj.steps + 1, Vector3Field(snap.grid, Bc::neumann_zero));
    }
    State s(snap.grid);
    s.t = snap.time;
    s.v.values() = snap.values.middleCols(0, 2);
    s.p.values() = snap.values.middleCols(2, 1);
    s.F.values() = snap.values.middleCols(3, 4);
    s.M.values() = snap.values.middleCols(7, 3);
    traj.h_samples[k].values() = snap.values.middleCols(10, 3);
    traj.states.push_back(std::move(s));
  }
  return traj;
}

FieldControl read_control_dir(const fs::path& dir, const Grid& g, int steps) {
  FieldControl h;
  h.reserve(steps + 1);
  for (int k = 0; k <= steps; ++k) {
    char name[32];
    std::snprintf(name, sizeof name, "h_%06d.snap", k);
    auto f = read_field<3>(dir / name);
    if (!(f.grid() == g)) throw Error(ErrorKind::config, std::string(name) + ": grid mismatch");
    f.set_bc(Bc::neumann_zero);
    h.push_back(std::move(f));
  }
  return h;
}

std::vector<fs::path> write_control_dir(const fs::path& dir, const FieldControl& h, double dt) {
  fs::create_directories(dir);
  std::vector<fs::path> out;
  for (std::size_t k = 0; k < h.size(); ++k) {
    char name[32];
    std::snprintf(name, sizeof name, "h_%06zu.snap", k);
    write_field(dir / name, h[k], static_cast<double>(k) * dt);
    out.push_back(dir / name);
  }
  return out;
}

int run_command(const std::string& name, const CommandOptions& opts, std::ostream& log,
                std::ostream& err) {
  bool known = false;
  for (const auto& n : command_names()) known = known || n == name;
  if (!known) {
    err << "mvf: unknown command '" << name << "'\n";
    return 1;
  }
  RunConfig cfg;
  try {
    cfg = opts.config_path.empty() ? parse_config("", ".") : load_config(opts.config_path);
    if (opts.seed) cfg.seed = *opts.seed;
    if (!opts.output_dir.empty()) cfg.output.directory = opts.output_dir;
  } catch (const Error& e) {
    err << "mvf " << name << ": config error: " << e.what() << '\n';
    return exit_code_for(e.kind());
  }

  std::unique_ptr<Run> run;
  try {
    Setup setup = build_setup(cfg);
    const fs::path out = cfg.output.directory;
    fs::create_directories(out);
    run = std::make_unique<Run>(name, std::move(setup), out, log, opts.quiet);
    int code = 0;
    if (name == "simulate") code = cmd_simulate(*run);
    if (name == "gradient-check") code = cmd_gradient_check(*run, opts.corrupt_adjoint);
    if (name == "optimize-field") code = cmd_optimize_field(*run);
    if (name == "optimize-coils") code = cmd_optimize_coils(*run);
    if (name == "stability-probe") code = cmd_stability_probe(*run);
    if (name == "energy-report") code = cmd_energy_report(*run);
    run->manifest("success", "");
    return code;
  } catch (const StepError& e) {
    err << "mvf " << name << ": " << to_string(e.kind()) << " error at step " << e.step() << ": "
        << e.what() << '\n';
    if (run) run->manifest("failed", e.what());
    return exit_code_for(e.kind());
  } catch (const Error& e) {
    err << "mvf " << name << ": " << to_string(e.kind()) << " error: " << e.what() << '\n';
    if (run) run->manifest(e.kind() == ErrorKind::check ? "check_failed" : "failed", e.what());
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    err << "mvf " << name << ": internal error: " << e.what() << '\n';
    if (run) run->manifest("failed", e.what());
    return 1;
  }
}

}  // namespace mvf
