#include "eqflow/energy.hpp"

#include <cmath>

namespace eqflow {

namespace {

// d/dd of the double-well pair term.
inline double dw_pair(double s, const DoubleWellParams& p) {
  const double s2 = s * s;
  return p.a * s + p.b * s2 + p.c * s2 * s2;
}

inline double dw_pair_deriv(double s, const DoubleWellParams& p) {
  return p.a + 2.0 * p.b * s + 4.0 * p.c * s * s * s;
}

inline double lj_pair(double d, double r_m) {
  const double q = r_m / d;
  const double q6 = q * q * q * q * q * q;
  return q6 * q6 - 2.0 * q6;
}

inline double lj_pair_deriv(double d, double r_m) {
  const double q = r_m / d;
  const double q6 = q * q * q * q * q * q;
  return (-12.0 * q6 * q6 + 12.0 * q6) / d;
}

}  // namespace

double dw_energy(const Configuration& x, const DoubleWellParams& p) {
  const int N = x.shape.n_particles;
  double sum = 0.0;
  for (int i = 0; i < N; ++i)
    for (int j = i + 1; j < N; ++j)
      sum += dw_pair((x.particle(i) - x.particle(j)).norm() - p.d0, p);
  return sum / p.tau;  // ordered double count cancels the 1/2 prefactor
}

double lj_energy(const Configuration& x, const LennardJonesParams& p, LjEvalStats* stats) {
  const int N = x.shape.n_particles;
  const double dmin = 1e-4 * p.r_m;
  double pair_sum = 0.0;
  for (int i = 0; i < N; ++i) {
    for (int j = i + 1; j < N; ++j) {
      double d = (x.particle(i) - x.particle(j)).norm();
      if (d == 0.0) throw std::domain_error("lj_energy: coincident particles");
      if (d < dmin) {
        d = dmin;
        if (stats) ++stats->floored_pairs;
      }
      pair_sum += lj_pair(d, p.r_m);
    }
  }
  const double scale =
      p.pair_convention == PairConvention::ordered ? p.eps / p.tau : p.eps / (2.0 * p.tau);
  double u = scale * pair_sum;
  if (p.c_harmonic > 0.0) {
    const Vec com = center_of_mass(x);
    double conf = 0.0;
    for (int i = 0; i < N; ++i) conf += (x.particle(i) - com).squaredNorm();
    u += 0.5 * p.c_harmonic * conf;
  }
  return u;
}

double energy(const Configuration& x, const EnergyModel& m, LjEvalStats* stats) {
  if (auto* dw = std::get_if<DoubleWellParams>(&m.params)) return dw_energy(x, *dw);
  return lj_energy(x, std::get<LennardJonesParams>(m.params), stats);
}

Vec energy_gradient(const Configuration& x, const EnergyModel& m, LjEvalStats* stats) {
  const int N = x.shape.n_particles, D = x.shape.dim;
  Vec grad = Vec::Zero(x.shape.n());

  if (auto* dw = std::get_if<DoubleWellParams>(&m.params)) {
    for (int i = 0; i < N; ++i) {
      for (int j = i + 1; j < N; ++j) {
        const Vec r = x.particle(i) - x.particle(j);
        const double d = r.norm();
        if (d < 1e-12) continue;  // force direction undefined exactly at coincidence
        const Vec f = (dw_pair_deriv(d - dw->d0, *dw) / (dw->tau * d)) * r;
        grad.segment(i * D, D) += f;
        grad.segment(j * D, D) -= f;
      }
    }
    return grad;
  }

  const auto& p = std::get<LennardJonesParams>(m.params);
  const double dmin = 1e-4 * p.r_m;
  const double scale =
      p.pair_convention == PairConvention::ordered ? p.eps / p.tau : p.eps / (2.0 * p.tau);
  for (int i = 0; i < N; ++i) {
    for (int j = i + 1; j < N; ++j) {
      const Vec r = x.particle(i) - x.particle(j);
      const double d = r.norm();
      if (d == 0.0) throw std::domain_error("energy_gradient: coincident particles");
      if (d < dmin) {
        if (stats) ++stats->floored_pairs;
        continue;  // energy is flat below the floor
      }
      const Vec f = (scale * lj_pair_deriv(d, p.r_m) / d) * r;
      grad.segment(i * D, D) += f;
      grad.segment(j * D, D) -= f;
    }
  }
  if (p.c_harmonic > 0.0) {
    const Vec com = center_of_mass(x);
    for (int i = 0; i < N; ++i)
      grad.segment(i * D, D) += p.c_harmonic * (x.particle(i) - com);
  }
  return grad;
}

double lj_pair_sum(const Configuration& x, double r_m) {
  const int N = x.shape.n_particles;
  double sum = 0.0;
  for (int i = 0; i < N; ++i)
    for (int j = i + 1; j < N; ++j) sum += lj_pair((x.particle(i) - x.particle(j)).norm(), r_m);
  return sum;
}

}  // namespace eqflow
