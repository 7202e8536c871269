#pragma once

#include <optional>

#include "eqflow/rbf.hpp"
#include "eqflow/rng.hpp"
#include "eqflow/types.hpp"

namespace eqflow {

// Velocity of a dynamics field, with the exact divergence when the field has a
// closed form for it.
struct FieldEval {
  Vec v;
  std::optional<double> div;
};

// Pair-coupling field built from Gaussian RBF expansions of distance and time,
// mixed by a trainable matrix:
//
//   v_i = sum_{j != i} phi(d_ij, t) * (x_i - x_j)
//   phi(d, t) = time_expansion(t)^T * weights * dist_expansion(d)
//
// The field is the gradient of a rotation/permutation-invariant potential, so
// it is equivariant, and its divergence has the closed form
//   div = sum_{i != j} dphi/dd * d_ij + D * phi.
//
// Bandwidths are optimized in log space to stay positive.
struct KernelFieldParams {
  Mat weights;        // n_time x n_dist mixing matrix
  Arr dist_means;     // n_dist
  Arr dist_log_bw;    // n_dist
  Arr time_means;     // n_time
  Arr time_log_bw;    // n_time
  bool trainable_means = true;
  bool trainable_bandwidths = true;

  int n_time() const { return static_cast<int>(time_means.size()); }
  int n_dist() const { return static_cast<int>(dist_means.size()); }

  Arr dist_bw() const { return dist_log_bw.exp(); }
  Arr time_bw() const { return time_log_bw.exp(); }

  // weights always train; means and bandwidths per flag.
  int n_trainable() const {
    int n = n_time() * n_dist();
    if (trainable_means) n += n_time() + n_dist();
    if (trainable_bandwidths) n += n_time() + n_dist();
    return n;
  }
};

// Gradient accumulator with the same block layout as the parameters.
struct KernelFieldGrads {
  Mat weights;
  Arr dist_means, dist_log_bw, time_means, time_log_bw;

  static KernelFieldGrads zeros_like(const KernelFieldParams& p);
  KernelFieldGrads& operator+=(const KernelFieldGrads& o);
};

struct KernelField {
  SystemShape shape;
  KernelFieldParams params;
};

// m equispaced points covering [lo, hi].
Arr equispaced_means(int m, double lo, double hi);

// m points covering [lo, hi], densest at `center`, with consecutive gaps growing
// geometrically by `ratio` toward both interval ends. `left_fraction` of the
// points land left of the center.
Arr geometric_gap_means(int m, double lo, double hi, double center, double ratio,
                        double left_fraction);

// Bandwidths proportional to the squared local mean spacing, floored for stability.
Arr gap_scaled_bandwidths(const Arr& means, double scale, double floor_value);

// phi and its distance derivative for a single (distance, time) pair.
double phi(double d, double t, const KernelFieldParams& p);
double phi_ddist(double d, double t, const KernelFieldParams& p);

// Velocity and exact divergence in one pass over the distance matrix.
FieldEval field_eval(const KernelField& f, const Vec& x, double t, bool want_div = true);

// Scalar potential whose gradient is the field; used to verify the gradient-field
// property. Built from the antiderivative of k(d)*d for each distance kernel.
double mixture_potential(const KernelField& f, const Vec& x, double t);

// Reverse-mode step: given cotangents (vbar, divbar) of (v, div) at (x, t),
// accumulate parameter gradients and the input cotangent.
void kernel_field_vjp(const KernelField& f, const Vec& x, double t, const Vec& vbar,
                      double divbar, Vec& xbar, KernelFieldGrads& grads);

// Generic-scalar velocity (forward-mode sweeps instantiate this with Dual).
template <class S>
VecX<S> field_velocity(const KernelField& f, const VecX<S>& x, double t) {
  const int N = f.shape.n_particles, D = f.shape.dim;
  const KernelFieldParams& p = f.params;
  const Arr tk = rbf_expand(t, p.time_means, p.time_bw());
  const Vec w = p.weights.transpose() * tk.matrix();
  const Arr mu = p.dist_means;
  const Arr gamma = p.dist_bw();

  VecX<S> v = VecX<S>::Zero(x.size());
  for (int i = 0; i < N; ++i) {
    for (int j = i + 1; j < N; ++j) {
      S d2 = S(0.0);
      for (int k = 0; k < D; ++k) {
        const S rk = x[i * D + k] - x[j * D + k];
        d2 += rk * rk;
      }
      if (value(d2) == 0.0) continue;  // coincident pair contributes nothing
      const S d = sqrt(d2);
      S ph = S(0.0);
      for (int m = 0; m < p.n_dist(); ++m) {
        const S s = d - mu[m];
        ph += w[m] * exp(-(s * s) / (2.0 * gamma[m]));
      }
      for (int k = 0; k < D; ++k) {
        const S update = ph * (x[i * D + k] - x[j * D + k]);
        v[i * D + k] += update;
        v[j * D + k] -= update;
      }
    }
  }
  return v;
}

}  // namespace eqflow
