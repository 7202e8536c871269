#pragma once

#include "eqflow/types.hpp"

namespace eqflow {

// Gaussian radial basis expansion with per-kernel bandwidth gamma (the direct
// divisor, not its square root): component l = exp(-(s - mu_l)^2 / (2 gamma_l)).

inline Arr rbf_expand(double s, const Arr& mu, const Arr& gamma) {
  return (-(s - mu).square() / (2.0 * gamma)).exp();
}

// d/ds of the expansion: -(s - mu)/gamma * k.
inline Arr rbf_expand_deriv(double s, const Arr& mu, const Arr& gamma, const Arr& k) {
  return -((s - mu) / gamma) * k;
}

// Second derivative: ((s-mu)^2/gamma^2 - 1/gamma) * k.
inline Arr rbf_expand_deriv2(double s, const Arr& mu, const Arr& gamma, const Arr& k) {
  return (((s - mu) / gamma).square() - gamma.inverse()) * k;
}

// Generic-scalar overload used by forward-mode sweeps (means/bandwidths stay double).
template <class S>
VecX<S> rbf_expand(const S& s, const Arr& mu, const Arr& gamma) {
  VecX<S> out(mu.size());
  for (Eigen::Index l = 0; l < mu.size(); ++l) {
    const S t = s - mu[l];
    out[l] = exp(-(t * t) / (2.0 * gamma[l]));
  }
  return out;
}

}  // namespace eqflow
