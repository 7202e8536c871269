#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "eqflow/energy.hpp"
#include "test_support.hpp"

using namespace eqflow;
using testsup::random_config;

namespace {

Configuration two_particles_at(double d, int dim = 2) {
  SystemShape s{2, dim};
  Vec x = Vec::Zero(s.n());
  x[0] = d / 2;
  x[dim] = -d / 2;
  return Configuration(s, std::move(x));
}

}  // namespace

TEST_CASE("double-well energy") {
  const DoubleWellParams p;  // a=0, b=-4, c=0.9, d0=4, tau=1

  SUBCASE("vanishes at the well reference distance") {
    CHECK(dw_energy(two_particles_at(4.0), p) == doctest::Approx(0.0));
  }

  SUBCASE("well depth matches the 1d minimization oracle") {
    auto pair_energy = [&](double d) { return dw_energy(two_particles_at(d), p); };
    const double d_star = testsup::golden_minimize(pair_energy, 4.0, 8.0);
    CHECK(d_star == doctest::Approx(4.0 + std::sqrt(20.0 / 9.0)).epsilon(1e-9));
    CHECK(pair_energy(d_star) == doctest::Approx(-40.0 / 9.0).epsilon(1e-12));
  }

  SUBCASE("group-action and translation invariance") {
    Rng rng(3);
    const SystemShape s{4, 2};
    const EnergyModel m{s, p};
    for (int rep = 0; rep < 100; ++rep) {
      const Configuration x = random_config(s, rng, 2.5);
      const GroupAction g = random_group_action(s, rng);
      CHECK(std::abs(energy(apply_group_action(x, g), m) - energy(x, m)) < 1e-10);
      Configuration shifted = x;
      for (int i = 0; i < s.n_particles; ++i)
        shifted.particle(i) += (Vec(2) << 0.7, -1.3).finished();
      CHECK(std::abs(energy(shifted, m) - energy(x, m)) < 1e-10);
    }
  }
}

TEST_CASE("Lennard-Jones energy") {
  LennardJonesParams p;
  p.c_harmonic = 0.0;

  SUBCASE("pair minimum under the ordered convention") {
    CHECK(lj_energy(two_particles_at(1.0, 3), p) == doctest::Approx(-1.0));
  }

  SUBCASE("unordered convention halves the pair sum") {
    LennardJonesParams q = p;
    q.pair_convention = PairConvention::unordered;
    CHECK(lj_energy(two_particles_at(1.0, 3), q) == doctest::Approx(-0.5));
  }

  SUBCASE("decays to zero at large separation") {
    CHECK(std::abs(lj_energy(two_particles_at(1e6, 3), p)) < 1e-30);
  }

  SUBCASE("coincident particles raise; floored pairs are counted") {
    SystemShape s{2, 3};
    CHECK_THROWS_AS(lj_energy(Configuration(s, Vec::Zero(6)), p), std::domain_error);
    LjEvalStats stats;
    const double u = lj_energy(two_particles_at(1e-5, 3), p, &stats);
    CHECK(std::isfinite(u));
    CHECK(stats.floored_pairs == 1);
  }

  SUBCASE("harmonic confinement term") {
    LennardJonesParams q;
    q.c_harmonic = 0.5;
    const Configuration x = two_particles_at(1.0, 3);
    // each particle sits 0.5 from the CoM
    const double expected = -1.0 + 0.5 * 0.5 * (0.25 + 0.25);
    CHECK(lj_energy(x, q) == doctest::Approx(expected));
  }

  SUBCASE("invariance under group actions") {
    Rng rng(5);
    LennardJonesParams q;
    q.c_harmonic = 0.5;
    const SystemShape s{5, 3};
    const EnergyModel m{s, q};
    int done = 0;
    while (done < 50) {
      Configuration x = random_config(s, rng, 1.5);
      if (sorted_distance_signature(x).minCoeff() < 0.8) continue;  // stay off the stiff core
      const GroupAction g = random_group_action(s, rng);
      CHECK(std::abs(energy(apply_group_action(x, g), m) - energy(x, m)) < 1e-10);
      ++done;
    }
  }
}

TEST_CASE("analytic gradients match finite differences") {
  Rng rng(7);

  SUBCASE("double well") {
    const SystemShape s{4, 2};
    const EnergyModel m{s, DoubleWellParams{}};
    for (int rep = 0; rep < 20; ++rep) {
      const Configuration x = random_config(s, rng, 2.5);
      const Vec g = energy_gradient(x, m);
      const Vec g_fd = testsup::fd_gradient(
          [&](const Vec& c) { return energy(Configuration(s, c), m); }, x.coords);
      const double scale = std::max(1.0, g.cwiseAbs().maxCoeff());
      CHECK((g - g_fd).cwiseAbs().maxCoeff() / scale < 1e-6);
    }
  }

  SUBCASE("Lennard-Jones with confinement") {
    const SystemShape s{5, 3};
    LennardJonesParams p;
    p.c_harmonic = 0.5;
    const EnergyModel m{s, p};
    int done = 0;
    while (done < 20) {
      const Configuration x = random_config(s, rng, 1.2);
      if (sorted_distance_signature(x).minCoeff() < 0.7)
        continue;  // keep FD away from the stiff core
      const Vec g = energy_gradient(x, m);
      const Vec g_fd = testsup::fd_gradient(
          [&](const Vec& c) { return energy(Configuration(s, c), m); }, x.coords);
      const double scale = std::max(1.0, g.cwiseAbs().maxCoeff());
      CHECK((g - g_fd).cwiseAbs().maxCoeff() / scale < 1e-6);
      ++done;
    }
  }

  SUBCASE("stationary points") {
    const EnergyModel dw{SystemShape{2, 2}, DoubleWellParams{}};
    CHECK(energy_gradient(two_particles_at(4.0), dw).cwiseAbs().maxCoeff() <
          1e-12);  // a=0 makes d0 stationary
    LennardJonesParams p;
    p.c_harmonic = 0.0;
    const EnergyModel lj{SystemShape{2, 3}, p};
    CHECK(energy_gradient(two_particles_at(1.0, 3), lj).cwiseAbs().maxCoeff() < 1e-12);
  }

  SUBCASE("gradient is equivariant") {
    const SystemShape s{4, 2};
    const EnergyModel m{s, DoubleWellParams{}};
    for (int rep = 0; rep < 50; ++rep) {
      const Configuration x = random_config(s, rng, 2.5);
      const GroupAction g = random_group_action(s, rng);
      const Vec lhs = energy_gradient(apply_group_action(x, g), m);
      const Configuration grad_as_config(s, energy_gradient(x, m));
      const Vec rhs = apply_group_action(grad_as_config, g).coords;
      CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-8);
    }
  }
}
