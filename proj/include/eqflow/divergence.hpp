#pragma once

#include "eqflow/dual.hpp"
#include "eqflow/fields.hpp"
#include "eqflow/rng.hpp"

namespace eqflow {

enum class DerivKind { dual, finite_difference };

struct JvpResult {
  Vec v;   // field value
  Vec dv;  // directional derivative of the field along dir
};

// Jacobian-vector product by a single forward sweep with dual arithmetic; exact
// up to roundoff.
template <class Field>
JvpResult field_jvp_dual(const Field& f, const Vec& x, double t, const Vec& dir) {
  VecX<Dual> xd(x.size());
  for (int k = 0; k < x.size(); ++k) xd[k] = Dual(x[k], dir[k]);
  const VecX<Dual> vd = field_velocity(f, xd, t);
  JvpResult out;
  out.v.resize(x.size());
  out.dv.resize(x.size());
  for (int k = 0; k < x.size(); ++k) {
    out.v[k] = vd[k].v;
    out.dv[k] = vd[k].d;
  }
  return out;
}

// Central-difference JVP with step 1e-5 * (1 + |x|_inf).
template <class Field>
JvpResult field_jvp_fd(const Field& f, const Vec& x, double t, const Vec& dir) {
  const double h = 1e-5 * (1.0 + x.cwiseAbs().maxCoeff());
  JvpResult out;
  out.v = field_velocity_only(f, x, t);
  out.dv = (field_velocity_only(f, x + h * dir, t) - field_velocity_only(f, x - h * dir, t)) /
           (2.0 * h);
  return out;
}

template <class Field>
JvpResult field_jvp(const Field& f, const Vec& x, double t, const Vec& dir,
                    DerivKind kind = DerivKind::dual) {
  return kind == DerivKind::dual ? field_jvp_dual(f, x, t, dir) : field_jvp_fd(f, x, t, dir);
}

// Trace of the velocity Jacobian from n directional derivatives along the
// coordinate axes. The reference the closed-form divergence is checked against.
template <class Field>
double divergence_brute_force(const Field& f, const Vec& x, double t,
                              DerivKind kind = DerivKind::dual) {
  double trace = 0.0;
  Vec dir = Vec::Zero(x.size());
  for (int k = 0; k < x.size(); ++k) {
    dir[k] = 1.0;
    trace += field_jvp(f, x, t, dir, kind).dv[k];
    dir[k] = 0.0;
  }
  return trace;
}

enum class ProbeLaw { rademacher, gaussian };

inline Vec draw_probe(int n, ProbeLaw law, Rng& rng) {
  Vec e(n);
  for (int k = 0; k < n; ++k) e[k] = law == ProbeLaw::rademacher ? rng.rademacher() : rng.gaussian();
  return e;
}

// Unbiased stochastic trace estimate: mean over probes of e^T (dv/dx) e.
template <class Field>
double divergence_hutchinson(const Field& f, const Vec& x, double t, int n_probes, Rng& rng,
                             ProbeLaw law = ProbeLaw::rademacher,
                             DerivKind kind = DerivKind::dual) {
  if (n_probes < 1) throw std::invalid_argument("divergence_hutchinson: need at least one probe");
  double est = 0.0;
  for (int p = 0; p < n_probes; ++p) {
    const Vec e = draw_probe(static_cast<int>(x.size()), law, rng);
    est += e.dot(field_jvp(f, x, t, e, kind).dv);
  }
  return est / n_probes;
}

}  // namespace eqflow
