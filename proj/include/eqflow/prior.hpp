#pragma once

#include <cmath>
#include <numbers>

#include "eqflow/geometry.hpp"

namespace eqflow {

// Latent base density. The CoM-free kind lives on the projected subspace and is
// what the pair-coupling flow uses; the full-space kind is a plain standard
// normal for flows that do not conserve the center of mass.
struct Prior {
  enum class Kind { com_free, full_space };
  Kind kind = Kind::com_free;

  Configuration sample(SystemShape shape, Rng& rng) const {
    if (kind == Kind::com_free) return prior_sample(shape, rng);
    Vec z(shape.n());
    for (int k = 0; k < shape.n(); ++k) z[k] = rng.gaussian();
    return Configuration(shape, std::move(z));
  }

  double logp(const Configuration& x) const {
    if (kind == Kind::com_free) return prior_logp(x);
    return -0.5 * x.coords.squaredNorm() -
           0.5 * x.shape.n() * std::log(2.0 * std::numbers::pi);
  }
};

}  // namespace eqflow
