#include <algorithm>
#include <cstdio>
#include <cmath>
#include <limits>

#include "mvf/control.hpp"
#include "mvf/presets.hpp"

namespace mvf {
namespace {

FieldControl axpy(const FieldControl& x, double a, const FieldControl& y) {
  FieldControl out = x;
  for (std::size_t k = 0; k < out.size(); ++k) out[k].axpy(a, y[k]);
  return out;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6e", v);
  return buf;
}

}  // namespace

FieldOptResult optimize_field(const ControlProblem& pb, FieldControl h0,
                              const OptimizerOptions& opts) {
  pb.check_control(h0);
  const double lambda = pb.cost().lambda;
  FieldOptResult res;
  res.h = std::move(h0);
  Trajectory traj = pb.solve(res.h);
  GradientReport g = reduced_gradient(pb, res.h, &traj);
  double step = opts.initial_step > 0.0 ? opts.initial_step : 1.0 / lambda;
  double last_step = 0.0;
  FieldControl prev_h;
  FieldControl prev_r;

  for (int iter = 0;; ++iter) {
    res.history.push_back({iter, g.cost.J, g.norm_riesz, last_step, 0.0});
    if (g.norm_riesz <= opts.grad_tol) {
      res.converged = true;
      break;
    }
    if (iter >= opts.max_iter) break;

    if (!prev_h.empty()) {
      const FieldControl dh = axpy(res.h, -1.0, prev_h);
      const FieldControl dr = axpy(g.riesz, -1.0, prev_r);
      const double sy = h_inner(pb, dh, dr);
      const double ss = h_inner(pb, dh, dh);
      if (sy > 0.0 && ss > 0.0) step = std::clamp(ss / sy, 1e-6 / lambda, 1e6 / lambda);
    }

    const double slope = g.norm_riesz * g.norm_riesz;
    bool accepted = false;
    FieldControl trial;
    Trajectory trial_traj;
    double trial_J = 0.0;
    for (int half = 0; half <= opts.max_halvings; ++half) {
      trial = axpy(res.h, -step, g.riesz);
      trial_J = reduced_cost(pb, trial, &trial_traj).J;
      if (std::isfinite(trial_J) && trial_J <= g.cost.J - opts.armijo_c * step * slope &&
          trial_J < g.cost.J) {
        accepted = true;
        break;
      }
      step *= opts.armijo_shrink;
    }
    if (!accepted) {
      throw Error(ErrorKind::stagnation,
                  "optimize_field: line search failed after " +
                      std::to_string(opts.max_halvings) + " halvings at iteration " +
                      std::to_string(iter) + " (J=" + fmt(g.cost.J) +
                      ", |grad|=" + fmt(g.norm_riesz) + ")");
    }
    prev_h = std::move(res.h);
    prev_r = std::move(g.riesz);
    res.h = std::move(trial);
    g = reduced_gradient(pb, res.h, &trial_traj);
    last_step = step;
  }
  res.kkt = kkt_residual(pb, g);
  return res;
}

CoilOptResult optimize_coils(const ControlProblem& pb, const CoilBasis& basis, CoilControl c0,
                             const CoilOptOptions& opts) {
  c0.validate();
  if (c0.u.rows() != basis.n() || c0.u.cols() != pb.steps() + 1) {
    throw Error(ErrorKind::structural, "coil control shape does not match basis and time grid");
  }
  const double lambda = pb.cost().lambda;
  CoilOptResult res;
  res.control = std::move(c0);
  CoilControl& c = res.control;
  c.u = project_box(c.u, c.a, c.b);

  Trajectory traj = pb.solve(coil_field(c.u, basis));
  CoilGradient g = coil_gradient(pb, basis, c.u, &traj);
  double step = opts.initial_step > 0.0 ? opts.initial_step : 1.0 / lambda;
  double last_step = 0.0;
  Eigen::MatrixXd prev_u;
  Eigen::MatrixXd prev_g;

  for (int iter = 0;; ++iter) {
    res.residual = coil_fixed_point_residual(pb, c, g.d);
    res.history.push_back({iter, g.cost.J, std::sqrt(coil_inner(pb, g.grad, g.grad)), last_step,
                           res.residual.l2});
    if (res.residual.l2 <= opts.tol && res.residual.max <= opts.tol) {
      res.converged = true;
      break;
    }
    if (iter >= opts.max_iter) break;

    if (prev_u.size()) {
      const Eigen::MatrixXd du = c.u - prev_u;
      const Eigen::MatrixXd dg = g.grad - prev_g;
      const double sy = coil_inner(pb, du, dg);
      const double ss = coil_inner(pb, du, du);
      if (sy > 0.0 && ss > 0.0) step = std::clamp(ss / sy, 1e-6 / lambda, 1e6 / lambda);
    }

    bool accepted = false;
    Eigen::MatrixXd trial;
    Trajectory trial_traj;
    for (int half = 0; half <= opts.max_halvings; ++half) {
      trial = project_box(c.u - step * g.grad, c.a, c.b);
      const double decrease = coil_inner(pb, g.grad, trial - c.u);
      if (decrease < 0.0) {
        const double J = coil_cost(pb, basis, trial, &trial_traj).J;
        if (std::isfinite(J) && J <= g.cost.J + opts.armijo_c * decrease && J < g.cost.J) {
          accepted = true;
          break;
        }
      }
      step *= opts.armijo_shrink;
    }
    if (!accepted) {
      throw Error(ErrorKind::stagnation,
                  "optimize_coils: line search failed after " +
                      std::to_string(opts.max_halvings) + " halvings at iteration " +
                      std::to_string(iter) + " (J=" + fmt(g.cost.J) + ", fixed-point residual " +
                      fmt(res.residual.l2) + ", max " + fmt(res.residual.max) + ")");
    }
    prev_u = c.u;
    prev_g = g.grad;
    c.u = std::move(trial);
    g = coil_gradient(pb, basis, c.u, &trial_traj);
    last_step = step;
  }
  res.grad = g.grad;
  res.d = g.d;

  SplitMix64 rng(opts.seed);
  double vi = std::numeric_limits<double>::infinity();
  for (int sample = 0; sample < opts.vi_samples; ++sample) {
    Eigen::MatrixXd v(c.u.rows(), c.u.cols());
    for (Eigen::Index k = 0; k < v.cols(); ++k) {
      for (Eigen::Index i = 0; i < v.rows(); ++i) v(i, k) = rng.uniform(c.a(i, k), c.b(i, k));
    }
    vi = std::min(vi, coil_inner(pb, g.grad, v - c.u));
  }
  res.vi_residual = opts.vi_samples > 0 ? vi : 0.0;
  return res;
}

}  // namespace mvf
