#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace eqflow {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Arr = Eigen::ArrayXd;

template <class Scalar>
using VecX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

// N particles with D spatial degrees of freedom each, flattened to length n = N*D.
struct SystemShape {
  int n_particles = 0;
  int dim = 0;

  int n() const { return n_particles * dim; }

  void validate() const {
    if (n_particles < 2) throw std::invalid_argument("SystemShape: need at least 2 particles");
    if (dim != 2 && dim != 3) throw std::invalid_argument("SystemShape: dim must be 2 or 3");
  }

  bool operator==(const SystemShape&) const = default;
};

// Flat coordinate vector; particle i occupies entries [i*D, (i+1)*D).
struct Configuration {
  SystemShape shape;
  Vec coords;

  Configuration() = default;
  Configuration(SystemShape s, Vec c) : shape(s), coords(std::move(c)) {
    if (coords.size() != shape.n())
      throw std::invalid_argument("Configuration: coords length does not match shape");
  }

  auto particle(int i) { return coords.segment(i * shape.dim, shape.dim); }
  auto particle(int i) const { return coords.segment(i * shape.dim, shape.dim); }
};

// Raised when an ODE trajectory leaves the finite domain; carries the failing step.
struct IntegrationError : std::runtime_error {
  int step;
  explicit IntegrationError(int step_index)
      : std::runtime_error("non-finite state at integration step " + std::to_string(step_index)),
        step(step_index) {}
};

}  // namespace eqflow
