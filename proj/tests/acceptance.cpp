// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "mvf/commands.hpp"
#include "mvf/control.hpp"
#include "mvf/linearized.hpp"
#include "mvf/presets.hpp"
#include "mvf/snapshot.hpp"

using namespace mvf;
namespace fs = std::filesystem;

namespace {

constexpr double pi = std::numbers::pi;

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) pass = false;
    if (!detail.empty()) detail += "; ";
    detail += (ok ? "" : "FAILED ") + what;
  }
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string fmt2(const char* f, double a, double b) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

double slope(const std::vector<double>& x, const std::vector<double>& y) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

template <int C>
double max_abs(const Field<C>& f) {
  return f.values().cwiseAbs().maxCoeff();
}

FieldControl shifted(const FieldControl& h, double e, const FieldControl& d) {
  FieldControl r = h;
  for (std::size_t k = 0; k < r.size(); ++k) r[k].axpy(e, d[k]);
  return r;
}

bool in_band(double v, double lo, double hi) { return v >= lo && v <= hi; }

// ---------------------------------------------------------------------------

Outcome operators() {
  Outcome o;
  auto err_grad = [](int n) {
    Grid g(n, n, 1.0, 1.0);
    auto f = sample(g, Bc::none, [](double x, double y) { return std::sin(2 * pi * x) * std::cos(pi * y); });
    auto gf = gradient_scalar(f);
    double e = 0.0;
    for (int j = 0; j <= n; ++j)
      for (int i = 0; i <= n; ++i) {
        const double x = g.x(i), y = g.y(j);
        const int k = g.index(i, j);
        e = std::max(e, std::abs(gf(k, 0) - 2 * pi * std::cos(2 * pi * x) * std::cos(pi * y)));
        e = std::max(e, std::abs(gf(k, 1) + pi * std::sin(2 * pi * x) * std::sin(pi * y)));
      }
    return e;
  };
  auto err_div = [](int n) {
    Grid g(n, n, 1.0, 1.0);
    Vector2Field u(g, Bc::none);
    u.comp(0) = sample(g, Bc::none, [](double x, double y) { return std::sin(pi * x) * std::cos(y); }).values();
    u.comp(1) = sample(g, Bc::none, [](double x, double y) { return x * x * std::sin(2 * y); }).values();
    auto d = divergence(u);
    double e = 0.0;
    for (int j = 0; j <= n; ++j)
      for (int i = 0; i <= n; ++i) {
        const double x = g.x(i), y = g.y(j);
        const double exact = pi * std::cos(pi * x) * std::cos(y) + 2 * x * x * std::cos(2 * y);
        e = std::max(e, std::abs(d(g.index(i, j)) - exact));
      }
    return e;
  };
  auto err_lap = [](int n, Bc bc) {
    Grid g(n, n, 1.0, 1.0);
    auto shape = [bc](double x, double y) {
      return bc == Bc::neumann_zero ? std::cos(pi * x) * std::cos(2 * pi * y)
                                    : std::sin(pi * x) * std::sin(2 * pi * y);
    };
    auto f = sample(g, bc, shape);
    auto l = laplacian(f);
    double e = 0.0;
    for (int j = 0; j <= n; ++j)
      for (int i = 0; i <= n; ++i) {
        if (bc == Bc::dirichlet_zero && g.on_boundary(i, j)) continue;
        e = std::max(e, std::abs(l(g.index(i, j)) + 5 * pi * pi * shape(g.x(i), g.y(j))));
      }
    return e;
  };
  struct Seq {
    const char* name;
    std::function<double(int)> err;
  };
  const std::vector<Seq> seqs{
      {"gradient", err_grad},
      {"divergence", err_div},
      {"laplacian_neumann", [&](int n) { return err_lap(n, Bc::neumann_zero); }},
      {"laplacian_dirichlet", [&](int n) { return err_lap(n, Bc::dirichlet_zero); }},
  };
  for (const auto& s : seqs) {
    const double e32 = s.err(32), e64 = s.err(64), e128 = s.err(128);
    const double p1 = std::log2(e32 / e64), p2 = std::log2(e64 / e128);
    o.require(in_band(p1, 1.8, 2.2) && in_band(p2, 1.8, 2.2),
              std::string(s.name) + fmt2(" orders %.3f %.3f", p1, p2));
  }
  Grid g(64, 64, 1.0, 1.0);
  SplitMix64 rng(101);
  auto f = random_smooth_field<1>(g, Bc::dirichlet_zero, rng, 1.0, 6);
  auto u = random_smooth_field<2>(g, Bc::dirichlet_zero, rng, 1.0, 6);
  const double a = inner_l2(gradient_scalar(f), u), b = -inner_l2(f, divergence(u));
  const double rel = std::abs(a - b) / std::abs(a);
  o.require(rel <= 1e-10, fmt("adjointness rel %.2e", rel));
  return o;
}

Outcome leray() {
  Outcome o;
  const double tol = 1e-10;
  CgOptions opts{tol, 20000};
  Grid g(64, 64, 1.0, 1.0);
  SplitMix64 rng(202);
  auto f = random_smooth_field<2>(g, Bc::none, rng, 1.0, 5);
  auto h = random_smooth_field<2>(g, Bc::none, rng, 1.0, 5);
  auto pf = leray_project(f, opts).u;
  auto ph = leray_project(h, opts).u;
  auto ppf = leray_project(pf, opts).u;
  const double idem = norm_l2(ppf - pf) / norm_l2(f);
  const double sym = std::abs(inner_l2(pf, h) - inner_l2(f, ph)) / (norm_l2(f) * norm_l2(h));
  const double growth = norm_l2(pf) / norm_l2(f) - 1.0;
  o.require(idem <= 10 * tol, fmt("idempotence %.2e", idem));
  o.require(sym <= 10 * tol, fmt("symmetry %.2e", sym));
  o.require(growth <= 10 * tol, fmt("norm growth %.2e", growth));
  auto phi = random_smooth_field<1>(g, Bc::none, rng, 1.0, 5);
  auto grad = gradient_scalar(phi);
  const double gr = norm_l2(leray_project(grad, opts).u) / norm_l2(grad);
  o.require(gr <= 100 * tol, fmt("gradient residue %.2e", gr));
  return o;
}

Outcome state_structure() {
  Outcome o;
  const double tol = 1e-10;
  {
    Grid g(32, 32, 1.0, 1.0);
    PresetOptions p;
    p.m = {0.0, 0.6, 0.8};
    auto s0 = preset_state(g, "constant_m", p);
    auto traj = solve_state(s0, constant_control(g, 50, {0, 0, 0}), 0.05, 1e-3, PhysParams{});
    const auto& s = traj.states.back();
    const double drift = std::max({max_abs(s.v), max_abs(s.F), max_abs(s.M - s0.M), max_abs(s.p)});
    o.require(drift <= tol, fmt("stationary drift %.2e", drift));
  }
  {
    Grid g(32, 32, 1.0, 1.0);
    auto s0 = preset_state(g, "vortex");
    s0.F.values().setZero();
    SplitMix64 rng(303);
    auto traj = solve_state(s0, random_smooth_control(g, 50, 1e-3, rng, 0.5), 0.05, 1e-3, PhysParams{});
    double fmax = 0.0;
    for (const auto& s : traj.states) fmax = std::max(fmax, max_abs(s.F));
    o.require(fmax == 0.0, fmt("max |F| %.1e", fmax));
  }
  {
    Grid g(32, 32, 1.0, 1.0);
    auto traj = solve_state(preset_state(g, "vortex"), constant_control(g, 200, {0, 0, 0}), 0.2, 1e-3,
                            PhysParams{});
    auto rep = energy_report(traj);
    double worst = -1e300;
    for (double d : rep.increments) worst = std::max(worst, d);
    o.require(rep.dissipative, fmt2("energy max increment %.2e (slack %.2e)", worst, rep.tolerance));
  }
  return o;
}

Outcome homogeneous() {
  Outcome o;
  Grid g(16, 16, 1.0, 1.0);
  const double T = 1.0, dt = 1e-3;
  const int n = step_count(T, dt);
  struct Case {
    std::array<double, 3> m, h;
    double alpha;
  };
  for (const Case& c : {Case{{0.5, 0.1, 0.4}, {0.2, 0.0, 0.6}, 1.0},
                        Case{{1.2, -0.3, 0.0}, {0.0, 0.0, 0.0}, 0.7},
                        Case{{0.0, 0.0, 1.0}, {0.0, 0.5, -0.5}, 1.0}}) {
    PresetOptions p;
    p.m = c.m;
    auto traj = solve_state(preset_state(g, "constant_m", p), constant_control(g, n, c.h), T, dt,
                            PhysParams{1.0, 1.0, c.alpha});
    // RK4 oracle with 100 substeps per step, compared at every step
    std::array<double, 3> m = c.m;
    const int sub = 100;
    const double hs = dt / sub;
    auto rhs = [&](const std::array<double, 3>& x) {
      const double s = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2] - 1.0) / (c.alpha * c.alpha);
      return std::array<double, 3>{-s * x[0] + c.h[0], -s * x[1] + c.h[1], -s * x[2] + c.h[2]};
    };
    double err = 0.0, vmax = 0.0;
    for (int k = 1; k <= n; ++k) {
      for (int q = 0; q < sub; ++q) {
        auto k1 = rhs(m);
        std::array<double, 3> y, k2, k3, k4;
        for (int a = 0; a < 3; ++a) y[a] = m[a] + 0.5 * hs * k1[a];
        k2 = rhs(y);
        for (int a = 0; a < 3; ++a) y[a] = m[a] + 0.5 * hs * k2[a];
        k3 = rhs(y);
        for (int a = 0; a < 3; ++a) y[a] = m[a] + hs * k3[a];
        k4 = rhs(y);
        for (int a = 0; a < 3; ++a) m[a] += hs / 6 * (k1[a] + 2 * k2[a] + 2 * k3[a] + k4[a]);
      }
      const auto& M = traj.states[k].M;
      for (int a = 0; a < 3; ++a) err = std::max(err, (M.comp(a).array() - m[a]).abs().maxCoeff());
      vmax = std::max(vmax, max_abs(traj.states[k].v));
    }
    o.require(err <= 5 * dt && vmax <= 1e-12, fmt2("max error %.2e (bound %.1e)", err, 5 * dt));
  }
  return o;
}

Outcome frechet() {
  Outcome o;
  Grid g(32, 32, 1.0, 1.0);
  const double dt = 1e-3;
  const int n = 100;
  StateStepper st(g, PhysParams{}, dt);
  SplitMix64 rng(505);
  const auto init = preset_state(g, "vortex");
  for (int pair = 0; pair < 3; ++pair) {
    auto h = random_smooth_control(g, n, dt, rng, 0.5);
    auto dh = random_smooth_control(g, n, dt, rng, 0.5);
    auto base = solve_state(st, init, h, n);
    auto d = directional_state_derivative(st, base, dh);
    std::vector<double> eps{1e-2, 1e-3, 1e-4}, err;
    for (double e : eps) {
      auto tp = solve_state(st, init, shifted(h, e, dh), n);
      err.push_back(s_norm_difference(tp, base, &d.states, e) / e);
    }
    const double s = slope(eps, err);
    o.require(in_band(s, 0.8, 1.2), fmt("pair %.0f", pair) + fmt(" slope %.3f", s));

    // superposition: L(a dh + b dh2) = a L(dh) + b L(dh2)
    auto dh2 = random_smooth_control(g, n, dt, rng, 0.5);
    auto d2 = directional_state_derivative(st, base, dh2);
    FieldControl comb = dh;
    for (int k = 0; k <= n; ++k) {
      comb[k] *= 1.7;
      comb[k].axpy(-0.4, dh2[k]);
    }
    auto dc = directional_state_derivative(st, base, comb);
    double num = 0.0, den = 0.0;
    for (int k = 0; k <= n; ++k) {
      auto ev = 1.7 * d.states[k].dv - 0.4 * d2.states[k].dv;
      auto eF = 1.7 * d.states[k].dF - 0.4 * d2.states[k].dF;
      auto eM = 1.7 * d.states[k].dM - 0.4 * d2.states[k].dM;
      auto ep = 1.7 * d.states[k].dp - 0.4 * d2.states[k].dp;
      num += std::pow(norm_l2(dc.states[k].dv - ev), 2) + std::pow(norm_l2(dc.states[k].dF - eF), 2) +
             std::pow(norm_l2(dc.states[k].dM - eM), 2) + std::pow(norm_l2(dc.states[k].dp - ep), 2);
      den += std::pow(norm_l2(ev), 2) + std::pow(norm_l2(eF), 2) + std::pow(norm_l2(eM), 2) +
             std::pow(norm_l2(ep), 2);
    }
    const double rel = std::sqrt(num / den);
    o.require(rel <= 1e-9, fmt(" superposition %.2e", rel));
  }
  return o;
}

CostSpec default_tracking(const Grid& g) {
  CostSpec c;
  c.a1 = 1.0;
  c.a3 = 1.0;
  c.lambda = 1e-2;
  Vector3Field md(g, Bc::neumann_zero);
  md.comp(0).setConstant(0.6);
  md.comp(2).setConstant(0.8);
  c.M_d = {md};
  return c;
}

Outcome adjoint_gradient() {
  Outcome o;
  Grid g(32, 32, 1.0, 1.0);
  ControlProblem pb(preset_state(g, "vortex"), 0.1, 1e-3, PhysParams{}, default_tracking(g));
  SplitMix64 rng(606);
  auto h = random_smooth_control(g, pb.steps(), pb.dt(), rng, 0.5);
  auto gr = reduced_gradient(pb, h);
  for (int dir = 0; dir < 3; ++dir) {
    auto dh = random_smooth_control(g, pb.steps(), pb.dt(), rng, 0.5);
    const double dj = directional_derivative(pb, gr, dh);
    std::vector<double> eps{1e-1, 1e-2, 1e-3, 1e-4}, rem;
    for (double e : eps) rem.push_back(std::abs(reduced_cost(pb, shifted(h, e, dh)).J - gr.cost.J - e * dj));
    const double s = slope(eps, rem);
    o.require(in_band(s, 1.6, 2.4), fmt("direction %.0f", dir) + fmt(" slope %.3f", s));
  }
  CostSpec zero;
  zero.lambda = 1e-2;
  ControlProblem pz(preset_state(g, "vortex"), 0.1, 1e-3, PhysParams{}, zero);
  auto gz = reduced_gradient(pz, h);
  double num = 0.0, den = 0.0;
  for (int k = 0; k <= pz.steps(); ++k) {
    num += std::pow(norm_l2(gz.riesz[k] - zero.lambda * h[k]), 2);
    den += std::pow(norm_l2(zero.lambda * h[k]), 2);
  }
  const double rel = std::sqrt(num / den);
  o.require(rel <= 1e-8, fmt("riesz - lambda H rel %.2e", rel));
  return o;
}

Outcome coils() {
  Outcome o;
  Grid g(32, 32, 1.0, 1.0);
  const double T = 0.1, dt = 1e-3;
  ControlProblem pb(preset_state(g, "vortex"), T, dt, PhysParams{}, default_tracking(g));
  CoilBasis basis{coil_basis_preset(g, "bumps", 2)};
  const int ns = pb.steps() + 1;
  {
    SplitMix64 rng(707);
    Eigen::MatrixXd u(2, ns), du(2, ns);
    for (int k = 0; k < ns; ++k)
      for (int i = 0; i < 2; ++i) {
        u(i, k) = rng.uniform(-1, 1);
        du(i, k) = rng.uniform(-1, 1);
      }
    auto cg = coil_gradient(pb, basis, u);
    auto fg = reduced_gradient(pb, coil_field(u, basis));
    const double lhs = coil_inner(pb, cg.d, du);
    const double rhs = l2_inner(pb, fg.tracking, coil_field(du, basis));
    const double rel = std::abs(lhs - rhs) / std::abs(rhs);
    o.require(rel <= 1e-8, fmt("chain rule rel %.2e", rel));
  }
  {
    CostSpec c;
    c.lambda = 1e-2;
    ControlProblem pz(preset_state(g, "vortex"), T, dt, PhysParams{}, c);
    CoilControl c0;
    c0.a = Eigen::MatrixXd::Ones(2, ns);
    c0.b = 2.0 * c0.a;
    c0.u = 1.5 * c0.a;
    auto res = optimize_coils(pz, basis, c0);
    const double dev = (res.control.u.array() - 1.0).abs().maxCoeff();
    o.require(dev <= 1e-8 && res.residual.max <= 1e-8,
              fmt2("lower bound |u-1| %.1e residual %.1e", dev, res.residual.max));
  }
  {
    CoilControl c0;
    c0.a = -0.1 * Eigen::MatrixXd::Ones(2, ns);
    c0.b = 0.1 * Eigen::MatrixXd::Ones(2, ns);
    c0.u = Eigen::MatrixXd::Zero(2, ns);
    CoilOptOptions opts;
    auto res = optimize_coils(pb, basis, c0, opts);
    const Eigen::MatrixXd fixed = project_box(-res.d / pb.cost().lambda, c0.a, c0.b);
    const double gap = (fixed - res.control.u).cwiseAbs().maxCoeff();
    bool decreasing = true;
    for (std::size_t i = 1; i < res.history.size(); ++i) decreasing &= res.history[i].J < res.history[i - 1].J;
    const long active = ((res.control.u - c0.a).array().abs() < 1e-12).count() +
                        ((res.control.u - c0.b).array().abs() < 1e-12).count();
    o.require(res.converged && gap <= 10 * opts.tol,
              fmt2("projection gap %.1e after %.0f iterations", gap, res.history.size() - 1.0) +
                  fmt(", %.0f active bounds", static_cast<double>(active)));
    o.require(decreasing, "strictly decreasing history");
  }
  return o;
}

Outcome stability() {
  Outcome o;
  Grid g(32, 32, 1.0, 1.0);
  ControlProblem pb(preset_state(g, "vortex"), 0.1, 1e-3, PhysParams{}, default_tracking(g));
  SplitMix64 rng(808);
  auto h = random_smooth_control(g, pb.steps(), pb.dt(), rng, 0.5);
  auto dir = random_smooth_control(g, pb.steps(), pb.dt(), rng, 0.5);
  auto zero = stability_probe(pb, h, h);
  o.require(zero.weak_lhs == 0.0 && zero.strong_lhs == 0.0 && zero.rhs == 0.0, "H1 = H2 gives zero");
  // The estimates bound squared norms by |Hbar|, so LHS/|Hbar| itself shrinks
  // like eps; the Lipschitz constant is sqrt(LHS)/|Hbar|. Both are reported.
  std::vector<double> weak, strong, weak_raw, strong_raw;
  for (double e : {1e-1, 1e-2, 1e-3}) {
    auto r = stability_probe(pb, h, shifted(h, e, dir));
    weak.push_back(r.weak_lipschitz);
    strong.push_back(r.strong_lipschitz);
    weak_raw.push_back(r.weak_ratio);
    strong_raw.push_back(r.strong_ratio);
  }
  auto spread = [](const std::vector<double>& v) {
    return *std::max_element(v.begin(), v.end()) / *std::min_element(v.begin(), v.end());
  };
  o.require(spread(weak) < 3.0, fmt("weak ratio spread %.4f", spread(weak)));
  o.require(spread(strong) < 3.0, fmt("strong ratio spread %.4f", spread(strong)));
  o.require(weak_raw[2] <= weak_raw[0] && strong_raw[2] <= strong_raw[0],
            fmt2("squared-form ratios bounded, spreads %.1f and %.1f", spread(weak_raw), spread(strong_raw)));
  return o;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism() {
  Outcome o;
  const fs::path work = fs::temp_directory_path() / "mvf_acceptance";
  fs::remove_all(work);
  fs::create_directories(work);
  {
    std::ofstream(work / "run.yaml") << "grid: {nx: 16, ny: 16}\n"
                                        "time: {T: 0.02, dt: 1.0e-3}\n"
                                        "control: {field: random}\n"
                                        "cost: {a1: 1.0, a3: 1.0}\n";
  }
  std::ostringstream sink;
  int files = 0;
  for (const char* cmd : {"simulate", "gradient-check", "optimize-field", "optimize-coils", "stability-probe"}) {
    for (const char* tag : {"a", "b"}) {
      CommandOptions opts;
      opts.config_path = (work / "run.yaml").string();
      opts.output_dir = (work / (std::string(cmd) + "_" + tag)).string();
      opts.quiet = true;
      const int rc = run_command(cmd, opts, sink, sink);
      if (rc != 0) o.require(false, std::string(cmd) + " exited " + std::to_string(rc));
    }
    const fs::path a = work / (std::string(cmd) + "_a"), b = work / (std::string(cmd) + "_b");
    for (const auto& e : fs::directory_iterator(a)) {
      if (e.path().extension() != ".csv") continue;
      ++files;
      if (slurp(e.path()) != slurp(b / e.path().filename())) {
        o.require(false, std::string(cmd) + "/" + e.path().filename().string() + " differs");
      }
    }
  }
  o.require(files >= 8, std::to_string(files) + " CSV files identical across reruns");

  Grid g(20, 14, 1.3, 0.9);
  SplitMix64 rng(909);
  auto m = random_smooth_field<3>(g, Bc::neumann_zero, rng, 1.0);
  auto f = random_smooth_field<4>(g, Bc::dirichlet_zero, rng, 1.0);
  write_field(work / "m.snap", m, 0.1);
  write_field(work / "f.snap", f, 0.2);
  auto m2 = read_field<3>(work / "m.snap");
  auto f2 = read_field<4>(work / "f.snap");
  const bool exact =
      std::memcmp(m2.values().data(), m.values().data(), sizeof(double) * m.values().size()) == 0 &&
      std::memcmp(f2.values().data(), f.values().data(), sizeof(double) * f.values().size()) == 0 &&
      m2.grid() == g && f2.bc() == Bc::dirichlet_zero;
  o.require(exact, "snapshot round trip bit exact");
  return o;
}

struct Criterion {
  int id;
  const char* name;
  double limit_s;
  Outcome (*fn)();
};

}  // namespace

int main() {
  const Criterion criteria[] = {
      {1, "operator correctness", 10, operators},
      {2, "Leray projection", 10, leray},
      {3, "state solver structure", 60, state_structure},
      {4, "homogeneous reductions", 30, homogeneous},
      {5, "Frechet consistency", 300, frechet},
      {6, "adjoint gradient", 600, adjoint_gradient},
      {7, "coil problem", 900, coils},
      {8, "stability probes", 600, stability},
      {9, "determinism and I/O", 600, determinism},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.fn();
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    o.require(secs < c.limit_s, fmt2("runtime %.2f s (limit %.0f s)", secs, c.limit_s));
    if (!o.pass) ++failed;
    std::printf("%s criterion %d (%s): %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of 9 criteria passed\n", 9 - failed);
  return failed == 0 ? 0 : 1;
}
