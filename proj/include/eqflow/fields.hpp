#pragma once

#include <variant>

#include "eqflow/kernel_field.hpp"
#include "eqflow/mlp_field.hpp"

namespace eqflow {

// Pair coupling with a constant phi: v_i = c * sum_{j != i} (x_i - x_j).
// On CoM-free states this is v = c*N*x with divergence c*D*N*(N-1), giving a
// closed-form flow that integrator tests check against.
struct ConstantCouplingField {
  SystemShape shape;
  double coupling = 0.0;
};

inline FieldEval field_eval(const ConstantCouplingField& f, const Vec& x, double t,
                            bool want_div = true) {
  (void)t;
  const int N = f.shape.n_particles, D = f.shape.dim;
  FieldEval out;
  out.v = Vec::Zero(x.size());
  Vec sum = Vec::Zero(D);
  for (int i = 0; i < N; ++i) sum += x.segment(i * D, D);
  for (int i = 0; i < N; ++i)
    out.v.segment(i * D, D) = f.coupling * (N * x.segment(i * D, D) - sum);
  if (want_div) out.div = f.coupling * D * N * (N - 1);
  return out;
}

template <class S>
VecX<S> field_velocity(const ConstantCouplingField& f, const VecX<S>& x, double t) {
  (void)t;
  const int N = f.shape.n_particles, D = f.shape.dim;
  VecX<S> v = VecX<S>::Zero(x.size());
  for (int k = 0; k < D; ++k) {
    S sum = S(0.0);
    for (int i = 0; i < N; ++i) sum += x[i * D + k];
    for (int i = 0; i < N; ++i) v[i * D + k] = f.coupling * (double(N) * x[i * D + k] - sum);
  }
  return v;
}

// velocity without paying for the kernel field's divergence pass
inline Vec field_velocity_only(const KernelField& f, const Vec& x, double t) {
  return field_eval(f, x, t, /*want_div=*/false).v;
}
inline Vec field_velocity_only(const MlpField& f, const Vec& x, double t) {
  return field_eval(f, x, t).v;
}
inline Vec field_velocity_only(const ConstantCouplingField& f, const Vec& x, double t) {
  return field_eval(f, x, t, false).v;
}

inline bool has_exact_divergence(const KernelField&) { return true; }
inline bool has_exact_divergence(const MlpField&) { return false; }
inline bool has_exact_divergence(const ConstantCouplingField&) { return true; }

using AnyField = std::variant<KernelField, MlpField, ConstantCouplingField>;

inline SystemShape field_shape(const AnyField& f) {
  return std::visit([](const auto& g) { return g.shape; }, f);
}

}  // namespace eqflow
