#pragma once

#include <vector>

#include "eqflow/kernel_field.hpp"
#include "eqflow/rng.hpp"
#include "eqflow/types.hpp"

namespace eqflow {

// Fully-connected tanh network mapping the concatenated (coords, t) vector of
// width n+1 to a velocity of width n. No closed-form divergence; callers use
// the stochastic or brute-force estimators. With no hidden layers this is a
// plain affine map, which the divergence tests use as a hook with a known trace.
struct MlpFieldParams {
  std::vector<Mat> weights;  // layer l maps width cols -> rows
  std::vector<Vec> biases;
  int input_width = 0;
  int output_width = 0;

  int n_layers() const { return static_cast<int>(weights.size()); }
  int n_params() const;
  void validate() const;
};

struct MlpGrads {
  std::vector<Mat> weights;
  std::vector<Vec> biases;

  static MlpGrads zeros_like(const MlpFieldParams& p);
  MlpGrads& operator+=(const MlpGrads& o);
};

struct MlpField {
  SystemShape shape;
  MlpFieldParams params;
};

// Hidden layers use 1/sqrt(fan_in) Gaussian init; the final layer is scaled by
// final_scale so the flow starts near the identity.
MlpFieldParams make_mlp_params(SystemShape shape, const std::vector<int>& hidden, Rng& rng,
                               double final_scale = 0.01);

FieldEval field_eval(const MlpField& f, const Vec& x, double t);

// Backprop for the plain velocity output.
void mlp_field_vjp(const MlpField& f, const Vec& x, double t, const Vec& vbar, Vec& xbar,
                   MlpGrads& grads);

// Velocity plus the Hutchinson divergence estimate with the given probe columns,
// sharing one forward pass.
double mlp_hutchinson_div(const MlpField& f, const Vec& x, double t, const Mat& probes,
                          Vec* velocity_out = nullptr);

// Reverse mode through both the velocity and the probe-averaged estimate
// (forward-over-reverse for the tangent part).
void mlp_hutchinson_vjp(const MlpField& f, const Vec& x, double t, const Mat& probes,
                        const Vec& vbar, double ebar, Vec& xbar, MlpGrads& grads);

template <class S>
VecX<S> field_velocity(const MlpField& f, const VecX<S>& x, double t) {
  const MlpFieldParams& p = f.params;
  VecX<S> h(p.input_width);
  for (int k = 0; k < x.size(); ++k) h[k] = x[k];
  h[p.input_width - 1] = S(t);
  for (int l = 0; l < p.n_layers(); ++l) {
    const Mat& a = p.weights[l];
    VecX<S> z(a.rows());
    for (int i = 0; i < a.rows(); ++i) {
      S acc = S(p.biases[l][i]);
      for (int j = 0; j < a.cols(); ++j) acc += a(i, j) * h[j];
      z[i] = (l + 1 < p.n_layers()) ? tanh(acc) : acc;
    }
    h = std::move(z);
  }
  return h;
}

}  // namespace eqflow
