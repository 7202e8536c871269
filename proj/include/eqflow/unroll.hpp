#pragma once

// Discretize-then-optimize backend: the fixed-grid solver is unrolled, stage
// inputs are recorded on a tape, and the backward pass chains hand-written
// vector-Jacobian products of the dynamics through the stored stages.

#include <utility>
#include <vector>

#include "eqflow/integrator.hpp"
#include "eqflow/kernel_field.hpp"
#include "eqflow/mlp_field.hpp"

namespace eqflow {

// Recorded augmented-state trajectory: enough to rerun the forward pass
// bit-for-bit and to drive the backward sweep.
struct UnrollTape {
  IntegratorConfig cfg;
  Vec x0;
  std::vector<Vec> stage_y;      // stage inputs, n_stages per step
  std::vector<double> stage_s;   // grid times of the stages
  Vec x_final;
  double ell_final = 0.0;

  int stages_per_step() const { return cfg.scheme == Scheme::rk4 ? 4 : 1; }
};

// --- dynamics adapters -----------------------------------------------------
//
// An adapter presents the augmented-state rate G(y, s) = (velocity, dlog-rate)
// for one integration direction of one field type, plus its VJP. The forward
// direction accumulates -div; the inverse direction runs the time-reversed
// field and accumulates +div, so delta_logp matches the plain integrator.

struct KernelForwardDynamics {
  using Grads = KernelFieldGrads;
  const KernelField& field;

  std::pair<Vec, double> eval(const Vec& y, double s) const {
    FieldEval e = field_eval(field, y, s);
    return {std::move(e.v), -*e.div};
  }
  void vjp(const Vec& y, double s, const Vec& vbar, double gbar, Vec& ybar, Grads& grads) const {
    kernel_field_vjp(field, y, s, vbar, -gbar, ybar, grads);
  }
};

struct KernelInverseDynamics {
  using Grads = KernelFieldGrads;
  const KernelField& field;
  double t_lo, t_hi;

  std::pair<Vec, double> eval(const Vec& y, double s) const {
    FieldEval e = field_eval(field, y, t_hi + t_lo - s);
    return {-e.v, *e.div};
  }
  void vjp(const Vec& y, double s, const Vec& vbar, double gbar, Vec& ybar, Grads& grads) const {
    kernel_field_vjp(field, y, t_hi + t_lo - s, -vbar, gbar, ybar, grads);
  }
};

// The MLP has no closed-form divergence; training uses the stochastic estimate
// with probes fixed per trajectory.
struct MlpForwardDynamics {
  using Grads = MlpGrads;
  const MlpField& field;
  const Mat& probes;

  std::pair<Vec, double> eval(const Vec& y, double s) const {
    Vec v;
    const double est = mlp_hutchinson_div(field, y, s, probes, &v);
    return {std::move(v), -est};
  }
  void vjp(const Vec& y, double s, const Vec& vbar, double gbar, Vec& ybar, Grads& grads) const {
    mlp_hutchinson_vjp(field, y, s, probes, vbar, -gbar, ybar, grads);
  }
};

struct MlpInverseDynamics {
  using Grads = MlpGrads;
  const MlpField& field;
  const Mat& probes;
  double t_lo, t_hi;

  std::pair<Vec, double> eval(const Vec& y, double s) const {
    Vec v;
    const double est = mlp_hutchinson_div(field, y, t_hi + t_lo - s, probes, &v);
    return {-v, est};
  }
  void vjp(const Vec& y, double s, const Vec& vbar, double gbar, Vec& ybar, Grads& grads) const {
    Vec mv = -vbar;
    mlp_hutchinson_vjp(field, y, t_hi + t_lo - s, probes, mv, gbar, ybar, grads);
  }
};

// --- unrolled solver ---------------------------------------------------------

template <class Dyn>
void unroll_forward(const Dyn& dyn, const Vec& x0, const IntegratorConfig& cfg,
                    UnrollTape& tape) {
  tape.cfg = cfg;
  tape.x0 = x0;
  tape.stage_y.clear();
  tape.stage_s.clear();
  const double h = (cfg.t_end - cfg.t_start) / cfg.n_steps;
  Vec x = x0;
  double ell = 0.0;
  for (int k = 0; k < cfg.n_steps; ++k) {
    const double s = cfg.t_start + k * h;
    if (cfg.scheme == Scheme::euler) {
      tape.stage_y.push_back(x);
      tape.stage_s.push_back(s);
      auto [v1, g1] = dyn.eval(x, s);
      x += h * v1;
      ell += h * g1;
    } else {
      auto record = [&](const Vec& y, double sy) -> const Vec& {
        tape.stage_y.push_back(y);
        tape.stage_s.push_back(sy);
        return tape.stage_y.back();
      };
      auto [v1, g1] = dyn.eval(record(x, s), s);
      auto [v2, g2] = dyn.eval(record(x + 0.5 * h * v1, s + 0.5 * h), s + 0.5 * h);
      auto [v3, g3] = dyn.eval(record(x + 0.5 * h * v2, s + 0.5 * h), s + 0.5 * h);
      auto [v4, g4] = dyn.eval(record(x + h * v3, s + h), s + h);
      x += (h / 6.0) * (v1 + 2.0 * v2 + 2.0 * v3 + v4);
      ell += (h / 6.0) * (g1 + 2.0 * g2 + 2.0 * g3 + g4);
    }
    if (!x.allFinite() || !std::isfinite(ell)) throw IntegrationError(k);
  }
  tape.x_final = std::move(x);
  tape.ell_final = ell;
}

// Rerun the recorded forward pass; with identical inputs the result is
// bit-identical, which the tape tests assert.
template <class Dyn>
std::pair<Vec, double> replay(const Dyn& dyn, const UnrollTape& tape) {
  UnrollTape scratch;
  unroll_forward(dyn, tape.x0, tape.cfg, scratch);
  return {scratch.x_final, scratch.ell_final};
}

// Backward sweep: cotangents (xbar_final, ellbar) of the augmented output are
// pulled through every stage, accumulating parameter gradients; the cotangent
// of the initial state lands in x0bar when requested.
template <class Dyn>
void unroll_backward(const Dyn& dyn, const UnrollTape& tape, const Vec& xbar_final,
                     double ellbar, typename Dyn::Grads& grads, Vec* x0bar = nullptr) {
  const IntegratorConfig& cfg = tape.cfg;
  const double h = (cfg.t_end - cfg.t_start) / cfg.n_steps;
  const int per = tape.stages_per_step();
  Vec xbar = xbar_final;
  Vec ybar(xbar.size());
  for (int k = cfg.n_steps - 1; k >= 0; --k) {
    const Vec* y = &tape.stage_y[k * per];
    const double* s = &tape.stage_s[k * per];
    if (cfg.scheme == Scheme::euler) {
      ybar.setZero();
      dyn.vjp(y[0], s[0], Vec(h * xbar), h * ellbar, ybar, grads);
      xbar += ybar;
      continue;
    }
    // x_{k+1} = x_k + h/6 (v1 + 2 v2 + 2 v3 + v4), y2 = x_k + h/2 v1,
    // y3 = x_k + h/2 v2, y4 = x_k + h v3
    Vec ybar4(xbar.size()), ybar3(xbar.size()), ybar2(xbar.size()), ybar1(xbar.size());
    ybar4.setZero();
    dyn.vjp(y[3], s[3], Vec((h / 6.0) * xbar), (h / 6.0) * ellbar, ybar4, grads);
    ybar3.setZero();
    dyn.vjp(y[2], s[2], Vec((h / 3.0) * xbar + h * ybar4), (h / 3.0) * ellbar, ybar3, grads);
    ybar2.setZero();
    dyn.vjp(y[1], s[1], Vec((h / 3.0) * xbar + 0.5 * h * ybar3), (h / 3.0) * ellbar, ybar2,
            grads);
    ybar1.setZero();
    dyn.vjp(y[0], s[0], Vec((h / 6.0) * xbar + 0.5 * h * ybar2), (h / 6.0) * ellbar, ybar1,
            grads);
    xbar += ybar1 + ybar2 + ybar3 + ybar4;
  }
  if (x0bar) *x0bar = std::move(xbar);
}

}  // namespace eqflow
