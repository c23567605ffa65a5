#include "mvf/control.hpp"

#include <algorithm>
#include <cmath>

#include "mvf/stencils.hpp"

namespace mvf {

ControlProblem::ControlProblem(State init, double T, double dt, PhysParams params, CostSpec cost,
                               SolverOptions solver)
    : init_(std::move(init)),
      dt_(dt),
      steps_(step_count(T, dt)),
      params_(params),
      cost_(std::move(cost)) {
  params_.validate();
  cost_.validate();
  stepper_ = std::make_shared<StateStepper>(init_.grid(), params_, dt_, solver);
  riesz_ = std::make_shared<ShiftedLaplaceSolver>(init_.grid(), Bc::neumann_zero, 1.0, solver);
  tau_ = time_weights(steps_, dt_);
}

void ControlProblem::check_control(const FieldControl& h) const {
  if (static_cast<int>(h.size()) != steps_ + 1) {
    throw Error(ErrorKind::structural, "control has " + std::to_string(h.size()) +
                                           " samples, expected " + std::to_string(steps_ + 1));
  }
  for (const auto& f : h) {
    if (!(f.grid() == grid())) throw Error(ErrorKind::structural, "control grid mismatch");
    if (!f.all_finite()) throw Error(ErrorKind::structural, "control has non-finite entries");
  }
}

Trajectory ControlProblem::solve(const FieldControl& h) const {
  check_control(h);
  return solve_state(*stepper_, init_, h, steps_, 1);
}

// ---------------------------------------------------------------------------

double h_inner(const ControlProblem& pb, const FieldControl& a, const FieldControl& b) {
  pb.check_control(a);
  pb.check_control(b);
  const auto& s = stencils(pb.grid());
  double acc = 0.0;
  for (int k = 0; k <= pb.steps(); ++k) {
    double slice = 0.0;
    for (int c = 0; c < 3; ++c) {
      const Vec ai = a[k].comp(c);
      slice += wdot(s, ai - s.lap_n * ai, b[k].comp(c));
    }
    acc += pb.tau()[k] * slice;
  }
  return acc;
}

double h_norm(const ControlProblem& pb, const FieldControl& a) {
  return std::sqrt(std::max(0.0, h_inner(pb, a, a)));
}

double l2_inner(const ControlProblem& pb, const FieldControl& a, const FieldControl& b) {
  pb.check_control(a);
  pb.check_control(b);
  double acc = 0.0;
  for (int k = 0; k <= pb.steps(); ++k) acc += pb.tau()[k] * inner_l2(a[k], b[k]);
  return acc;
}

CostValue reduced_cost(const ControlProblem& pb, const FieldControl& h, Trajectory* traj_out) {
  Trajectory traj = pb.solve(h);
  CostValue c;
  c.tracking = tracking_cost(pb.cost(), traj);
  c.regularization = 0.5 * pb.cost().lambda * h_inner(pb, h, h);
  c.J = c.tracking + c.regularization;
  if (traj_out) *traj_out = std::move(traj);
  return c;
}

GradientReport reduced_gradient(const ControlProblem& pb, const FieldControl& h,
                                const Trajectory* traj) {
  Trajectory local;
  if (!traj) {
    local = pb.solve(h);
    traj = &local;
  } else {
    pb.check_control(h);
  }
  const auto& s = stencils(pb.grid());
  const double lambda = pb.cost().lambda;
  GradientReport rep;
  rep.cost.tracking = tracking_cost(pb.cost(), *traj);
  rep.cost.regularization = 0.5 * lambda * h_inner(pb, h, h);
  rep.cost.J = rep.cost.tracking + rep.cost.regularization;

  AdjointSolution adj = solve_adjoint(pb.stepper(), *traj, pb.cost());
  rep.hbar = std::move(adj.hbar);
  const int n = pb.steps();
  rep.dual.reserve(n + 1);
  rep.tracking.reserve(n + 1);
  rep.riesz.reserve(n + 1);
  for (int k = 0; k <= n; ++k) {
    const double tau = pb.tau()[k];
    Vector3Field tr(pb.grid(), Bc::neumann_zero);
    if (tau > 0.0) {
      tr.values() = (rep.hbar[k].values().array().colwise() * s.w_inv.array()) / tau;
    }
    Vector3Field dual(pb.grid(), Bc::neumann_zero);
    Vector3Field riesz(pb.grid(), Bc::neumann_zero);
    for (int c = 0; c < 3; ++c) {
      const Vec hk = h[k].comp(c);
      dual.comp(c) = lambda * (hk - s.lap_n * hk) + tr.comp(c);
      Vec r = tr.comp(c);
      pb.riesz_solver().solve(r);
      riesz.comp(c) = lambda * hk + r;
    }
    rep.tracking.push_back(std::move(tr));
    rep.dual.push_back(std::move(dual));
    rep.riesz.push_back(std::move(riesz));
  }
  rep.norm_dual = std::sqrt(l2_inner(pb, rep.dual, rep.dual));
  rep.norm_riesz = h_norm(pb, rep.riesz);
  return rep;
}

double directional_derivative(const ControlProblem& pb, const GradientReport& g,
                              const FieldControl& dh) {
  return l2_inner(pb, g.dual, dh);
}

double kkt_residual(const ControlProblem& pb, const GradientReport& g) {
  return g.norm_dual / pb.cost().lambda;
}

double kkt_residual_from_riesz(const ControlProblem& pb, const GradientReport& g) {
  const auto& s = stencils(pb.grid());
  double acc = 0.0;
  for (int k = 0; k <= pb.steps(); ++k) {
    for (int c = 0; c < 3; ++c) {
      const Vec r = g.riesz[k].comp(c);
      const Vec ar = r - s.lap_n * r;
      acc += pb.tau()[k] * wdot(s, ar, ar);
    }
  }
  return std::sqrt(acc) / pb.cost().lambda;
}

// ---------------------------------------------------------------------------

void CoilBasis::validate() const {
  if (h.empty()) throw Error(ErrorKind::structural, "coil basis is empty");
  for (const auto& f : h) {
    if (!f.all_finite()) throw Error(ErrorKind::structural, "coil basis has non-finite entries");
    if (!(f.grid() == h.front().grid())) {
      throw Error(ErrorKind::structural, "coil basis fields live on different grids");
    }
  }
}

bool CoilControl::feasible() const {
  return (u.array() >= a.array()).all() && (u.array() <= b.array()).all();
}

void CoilControl::validate() const {
  if (u.rows() != a.rows() || u.cols() != a.cols() || u.rows() != b.rows() ||
      u.cols() != b.cols()) {
    throw Error(ErrorKind::structural, "coil control and bounds differ in shape");
  }
  if (!(a.array() <= b.array()).all()) {
    throw Error(ErrorKind::structural, "coil bounds violate a <= b");
  }
  if (!u.allFinite()) throw Error(ErrorKind::structural, "coil intensities are not finite");
}

FieldControl coil_field(const Eigen::MatrixXd& u, const CoilBasis& basis) {
  basis.validate();
  if (u.rows() != basis.n()) {
    throw Error(ErrorKind::structural, "intensity matrix has " + std::to_string(u.rows()) +
                                           " rows for " + std::to_string(basis.n()) + " coils");
  }
  const Grid& g = basis.h.front().grid();
  FieldControl h;
  h.reserve(u.cols());
  for (Eigen::Index k = 0; k < u.cols(); ++k) {
    Vector3Field f(g, Bc::neumann_zero);
    for (int i = 0; i < basis.n(); ++i) f.axpy(u(i, k), basis.h[i]);
    h.push_back(std::move(f));
  }
  return h;
}

double coil_inner(const ControlProblem& pb, const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.cols() != pb.steps() + 1 || b.cols() != a.cols() || a.rows() != b.rows()) {
    throw Error(ErrorKind::structural, "intensity matrix shape mismatch");
  }
  double acc = 0.0;
  for (Eigen::Index k = 0; k < a.cols(); ++k) acc += pb.tau()[k] * a.col(k).dot(b.col(k));
  return acc;
}

CostValue coil_cost(const ControlProblem& pb, const CoilBasis& basis, const Eigen::MatrixXd& u,
                    Trajectory* traj_out) {
  Trajectory traj = pb.solve(coil_field(u, basis));
  CostValue c;
  c.tracking = tracking_cost(pb.cost(), traj);
  c.regularization = 0.5 * pb.cost().lambda * coil_inner(pb, u, u);
  c.J = c.tracking + c.regularization;
  if (traj_out) *traj_out = std::move(traj);
  return c;
}

CoilGradient coil_gradient(const ControlProblem& pb, const CoilBasis& basis,
                           const Eigen::MatrixXd& u, const Trajectory* traj) {
  const FieldControl h = coil_field(u, basis);
  CoilGradient out;
  out.field = reduced_gradient(pb, h, traj);
  out.cost.tracking = out.field.cost.tracking;
  out.cost.regularization = 0.5 * pb.cost().lambda * coil_inner(pb, u, u);
  out.cost.J = out.cost.tracking + out.cost.regularization;
  out.d.resize(u.rows(), u.cols());
  for (Eigen::Index k = 0; k < u.cols(); ++k) {
    for (int i = 0; i < basis.n(); ++i) {
      out.d(i, k) = inner_l2(out.field.tracking[k], basis.h[i]);
    }
  }
  out.grad = pb.cost().lambda * u + out.d;
  return out;
}

Eigen::MatrixXd project_box(const Eigen::MatrixXd& u, const Eigen::MatrixXd& a,
                            const Eigen::MatrixXd& b) {
  if (u.rows() != a.rows() || u.cols() != a.cols() || u.rows() != b.rows() ||
      u.cols() != b.cols()) {
    throw Error(ErrorKind::structural, "project_box: shape mismatch");
  }
  return u.cwiseMax(a).cwiseMin(b);
}

FixedPointResidual coil_fixed_point_residual(const ControlProblem& pb, const CoilControl& c,
                                             const Eigen::MatrixXd& d) {
  const Eigen::MatrixXd target = project_box(-d / pb.cost().lambda, c.a, c.b);
  const Eigen::MatrixXd r = c.u - target;
  FixedPointResidual out;
  out.l2 = std::sqrt(coil_inner(pb, r, r));
  out.max = r.size() ? r.cwiseAbs().maxCoeff() : 0.0;
  return out;
}

}  // namespace mvf
