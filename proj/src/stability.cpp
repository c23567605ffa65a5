#include <algorithm>
#include <cmath>

#include "mvf/control.hpp"
#include "mvf/stencils.hpp"

namespace mvf {
namespace {

template <int C>
double sq(double (*norm)(const Field<C>&), const Field<C>& f) {
  const double n = norm(f);
  return n * n;
}

double lap_sq(const Vector3Field& m) {
  const auto& s = stencils(m.grid());
  double acc = 0.0;
  for (int c = 0; c < 3; ++c) {
    const Vec l = s.lap_n * m.comp(c);
    acc += wdot(s, l, l);
  }
  return acc;
}

}  // namespace

StabilityReport stability_probe(const ControlProblem& pb, const FieldControl& h1,
                                const FieldControl& h2) {
  const Trajectory t1 = pb.solve(h1);
  const Trajectory t2 = pb.solve(h2);
  FieldControl hbar = h1;
  for (std::size_t k = 0; k < hbar.size(); ++k) hbar[k] -= h2[k];

  double sup_v = 0.0, sup_f = 0.0, sup_m = 0.0, int_weak = 0.0;
  double sup_strong = 0.0, int_strong = 0.0;
  for (int k = 0; k <= pb.steps(); ++k) {
    const double tau = pb.tau()[k];
    const Vector2Field v = t1.states[k].v - t2.states[k].v;
    const Tensor22Field F = t1.states[k].F - t2.states[k].F;
    const Vector3Field M = t1.states[k].M - t2.states[k].M;
    const double v_l2 = sq<2>(norm_l2<2>, v), v_h1 = sq<2>(norm_h1<2>, v),
                 v_h2 = sq<2>(norm_h2<2>, v);
    const double f_l2 = sq<4>(norm_l2<4>, F), f_h1 = sq<4>(norm_h1<4>, F),
                 f_h2 = sq<4>(norm_h2<4>, F);
    const double m_h1 = sq<3>(norm_h1<3>, M), m_h2 = sq<3>(norm_h2<3>, M),
                 m_h3 = sq<3>(norm_h3<3>, M);
    sup_v = std::max(sup_v, v_l2);
    sup_f = std::max(sup_f, f_l2);
    sup_m = std::max(sup_m, m_h1);
    int_weak += tau * (v_h1 + f_h1 + lap_sq(M));
    sup_strong = std::max(sup_strong, v_h1 + f_h1 + m_h2);
    int_strong += tau * (v_h2 + f_h2 + m_h3);
  }
  StabilityReport rep;
  rep.weak_lhs = sup_v + sup_f + sup_m + int_weak;
  rep.strong_lhs = sup_strong + int_strong;
  rep.rhs = h_norm(pb, hbar);
  if (rep.rhs > 0.0) {
    rep.weak_ratio = rep.weak_lhs / rep.rhs;
    rep.strong_ratio = rep.strong_lhs / rep.rhs;
    rep.weak_lipschitz = std::sqrt(rep.weak_lhs) / rep.rhs;
    rep.strong_lipschitz = std::sqrt(rep.strong_lhs) / rep.rhs;
  }
  return rep;
}

}  // namespace mvf
