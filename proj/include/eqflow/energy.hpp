#pragma once

#include <cstdint>
#include <variant>

#include "eqflow/geometry.hpp"
#include "eqflow/types.hpp"

namespace eqflow {

// Pairwise double-well acting on distances:
//   u = 1/(2 tau) * sum_{i != j} a*s + b*s^2 + c*s^4,  s = d_ij - d0
// The ordered sum visits each pair twice, so the 1/2 single-counts it.
struct DoubleWellParams {
  double a = 0.0;
  double b = -4.0;
  double c = 0.9;
  double d0 = 4.0;
  double tau = 1.0;
};

enum class PairConvention { ordered, unordered };

// Lennard-Jones pair sum plus a harmonic attraction of each particle to the CoM:
//   u = eps/(2 tau) * S + c_harmonic/2 * sum_i |x_i - xbar|^2
// where S sums (r_m/d)^12 - 2 (r_m/d)^6 over ordered or unordered pairs.
struct LennardJonesParams {
  double eps = 1.0;
  double r_m = 1.0;
  double tau = 1.0;
  double c_harmonic = 0.5;
  PairConvention pair_convention = PairConvention::ordered;
};

// Count of pair evaluations whose distance was floored at 1e-4*r_m.
struct LjEvalStats {
  std::int64_t floored_pairs = 0;
};

struct EnergyModel {
  SystemShape shape;
  std::variant<DoubleWellParams, LennardJonesParams> params;

  bool is_lennard_jones() const { return std::holds_alternative<LennardJonesParams>(params); }
};

double dw_energy(const Configuration& x, const DoubleWellParams& p);

// Throws std::domain_error on exactly coincident particles; distances below
// 1e-4*r_m are floored and counted in stats.
double lj_energy(const Configuration& x, const LennardJonesParams& p, LjEvalStats* stats = nullptr);

double energy(const Configuration& x, const EnergyModel& m, LjEvalStats* stats = nullptr);

// Analytic gradient of the energy; pairs at the LJ floor contribute zero force.
Vec energy_gradient(const Configuration& x, const EnergyModel& m, LjEvalStats* stats = nullptr);

// Single-counted raw pair sum of (r_m/d)^12 - 2 (r_m/d)^6; convention-free
// quantity used for structure bookkeeping.
double lj_pair_sum(const Configuration& x, double r_m);

}  // namespace eqflow
