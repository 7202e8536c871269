#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/SVD>
#include <cmath>
#include <numbers>

#include "eqflow/geometry.hpp"
#include "test_support.hpp"

using namespace eqflow;
using testsup::random_config;

TEST_CASE("center of mass") {
  SystemShape s{2, 2};
  Configuration x(s, (Vec(4) << 1, 0, 1, 0).finished());
  CHECK(center_of_mass(x).isApprox((Vec(2) << 1, 0).finished()));

  Configuration y(s, (Vec(4) << 0.3, -1.2, -0.3, 1.2).finished());
  CHECK(center_of_mass(y).norm() == doctest::Approx(0.0));

  Rng rng(11);
  for (int rep = 0; rep < 20; ++rep) {
    const Configuration z = random_config({5, 3}, rng, 2.0);
    CHECK(center_of_mass(project_com_free(z)).norm() < 1e-12);
  }
}

TEST_CASE("CoM projector") {
  Rng rng(5);
  const SystemShape s{4, 2};

  SUBCASE("already CoM-free input is unchanged") {
    const Configuration x = project_com_free(random_config(s, rng));
    const Configuration y = project_com_free(x);
    CHECK((y.coords - x.coords).cwiseAbs().maxCoeff() < 1e-14);
  }

  SUBCASE("all mass at one point projects to zero") {
    Configuration x(SystemShape{2, 2}, (Vec(4) << 1, 0, 1, 0).finished());
    CHECK(project_com_free(x).coords.cwiseAbs().maxCoeff() == 0.0);
  }

  SUBCASE("idempotent") {
    for (int rep = 0; rep < 10; ++rep) {
      const Configuration x = random_config(s, rng, 3.0);
      const Configuration ax = project_com_free(x);
      CHECK((project_com_free(ax).coords - ax.coords).cwiseAbs().maxCoeff() < 1e-12);
    }
  }

  SUBCASE("projector algebra: A^2 = A, A^T = A, rank (N-1)D") {
    for (SystemShape shape : {SystemShape{4, 2}, SystemShape{3, 3}}) {
      const Mat a = com_projector(shape);
      CHECK((a * a - a).cwiseAbs().maxCoeff() < 1e-12);
      CHECK((a - a.transpose()).cwiseAbs().maxCoeff() == 0.0);
      Eigen::JacobiSVD<Mat> svd(a);
      const int rank = (svd.singularValues().array() > 1e-10).count();
      CHECK(rank == (shape.n_particles - 1) * shape.dim);
      // matrix form agrees with the in-place projection
      const Configuration x = random_config(shape, rng);
      CHECK((a * x.coords - project_com_free(x).coords).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
}

TEST_CASE("group actions") {
  Rng rng(17);
  const SystemShape s{4, 3};

  SUBCASE("identity action") {
    GroupAction g;
    g.rotation = Mat::Identity(3, 3);
    g.permutation = {0, 1, 2, 3};
    const Configuration x = random_config(s, rng);
    CHECK(apply_group_action(x, g).coords.isApprox(x.coords));
  }

  SUBCASE("norm preserved") {
    for (int rep = 0; rep < 50; ++rep) {
      const Configuration x = random_config(s, rng, 2.0);
      const GroupAction g = random_group_action(s, rng);
      CHECK(std::abs(apply_group_action(x, g).coords.norm() - x.coords.norm()) < 1e-12);
    }
  }

  SUBCASE("quarter turn") {
    GroupAction g;
    g.rotation = (Mat(2, 2) << 0, -1, 1, 0).finished();
    g.permutation = {0, 1};
    Configuration x(SystemShape{2, 2}, (Vec(4) << 1, 0, -1, 0).finished());
    CHECK(apply_group_action(x, g).coords.isApprox((Vec(4) << 0, 1, 0, -1).finished(), 1e-15));
  }

  SUBCASE("distance multiset invariant") {
    const Configuration x = random_config(s, rng, 2.0);
    const GroupAction g = random_group_action(s, rng);
    const Vec a = sorted_distance_signature(x);
    const Vec b = sorted_distance_signature(apply_group_action(x, g));
    CHECK((a - b).cwiseAbs().maxCoeff() < 1e-10);
  }

  SUBCASE("commutes with the CoM projector") {
    for (int rep = 0; rep < 20; ++rep) {
      const Configuration x = random_config(s, rng, 2.0);
      const GroupAction g = random_group_action(s, rng);
      const Vec lhs = project_com_free(apply_group_action(x, g)).coords;
      const Vec rhs = apply_group_action(project_com_free(x), g).coords;
      CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
}

TEST_CASE("random group actions are orthogonal, seeded, and unbiased") {
  const SystemShape s{3, 3};
  {
    Rng a(99), b(99);
    const GroupAction ga = random_group_action(s, a);
    const GroupAction gb = random_group_action(s, b);
    CHECK(ga.rotation.isApprox(gb.rotation));
    CHECK(ga.permutation == gb.permutation);
  }
  Rng rng(3);
  Mat mean = Mat::Zero(3, 3);
  const int draws = 10000;
  for (int rep = 0; rep < draws; ++rep) {
    const GroupAction g = random_group_action(s, rng);
    CHECK((g.rotation.transpose() * g.rotation - Mat::Identity(3, 3)).cwiseAbs().maxCoeff() <
          1e-12);
    CHECK(std::abs(std::abs(g.rotation.determinant()) - 1.0) < 1e-12);
    mean += g.rotation;
  }
  mean /= draws;
  // per-entry std of a Haar-orthogonal entry is 1/sqrt(D)
  const double three_sigma = 3.0 / (std::sqrt(3.0) * std::sqrt(double(draws)));
  CHECK(mean.cwiseAbs().maxCoeff() < three_sigma);
}

TEST_CASE("pairwise distances") {
  Configuration x(SystemShape{2, 2}, (Vec(4) << 0, 0, 3, 4).finished());
  const auto pd = pairwise_distances(x);
  CHECK(pd.dist(0, 1) == doctest::Approx(5.0));
  CHECK(pd.dist(1, 0) == doctest::Approx(5.0));
  CHECK(pd.dist(0, 0) == 0.0);
  CHECK((pd.separation(0, 1) + pd.separation(1, 0)).cwiseAbs().maxCoeff() == 0.0);

  Configuration y(SystemShape{2, 2}, (Vec(4) << 1, 2, 1, 2).finished());
  CHECK(pairwise_distances(y).dist(0, 1) == 0.0);
}

TEST_CASE("prior sampling and likelihood") {
  const SystemShape s{4, 2};

  SUBCASE("samples are CoM-free and seed-reproducible") {
    Rng a(7), b(7);
    for (int rep = 0; rep < 100; ++rep) {
      const Configuration z = prior_sample(s, a);
      CHECK(center_of_mass(z).norm() < 1e-10);
      CHECK(prior_sample(s, b).coords == z.coords);
    }
  }

  SUBCASE("per-coordinate variance matches the projector diagonal") {
    Rng rng(21);
    const int m = 100000;
    Vec sq = Vec::Zero(s.n());
    for (int rep = 0; rep < m; ++rep) sq += prior_sample(s, rng).coords.cwiseAbs2();
    sq /= m;
    const double expected = double(s.n_particles - 1) / s.n_particles;
    const double three_sigma = 3.0 * expected * std::sqrt(2.0 / (m - 1));
    for (int k = 0; k < s.n(); ++k) CHECK(std::abs(sq[k] - expected) < three_sigma);
  }

  SUBCASE("logp at the origin") {
    Configuration zero(s, Vec::Zero(s.n()));
    CHECK(prior_logp(zero) ==
          doctest::Approx(-0.5 * (s.n_particles - 1) * s.dim * std::log(2 * std::numbers::pi)));
  }

  SUBCASE("logp invariant under group actions") {
    Rng rng(31);
    for (int rep = 0; rep < 100; ++rep) {
      const Configuration z = prior_sample(s, rng);
      const GroupAction g = random_group_action(s, rng);
      CHECK(std::abs(prior_logp(apply_group_action(z, g)) - prior_logp(z)) < 1e-12);
    }
  }

  SUBCASE("rejects off-subspace input") {
    Configuration x(s, Vec::Constant(s.n(), 0.1));
    CHECK_THROWS_AS(prior_logp(x), std::invalid_argument);
  }

  SUBCASE("density integrates to one over the subspace (two 2d particles)") {
    // orthonormal basis of the CoM-free subspace for N=2, D=2
    const SystemShape s2{2, 2};
    Vec u1 = (Vec(4) << 1, 0, -1, 0).finished() / std::sqrt(2.0);
    Vec u2 = (Vec(4) << 0, 1, 0, -1).finished() / std::sqrt(2.0);
    auto density_row = [&](double a) {
      return testsup::simpson(
          [&](double b) {
            return std::exp(prior_logp(Configuration(s2, a * u1 + b * u2)));
          },
          -8.0, 8.0, 320);
    };
    const double total = testsup::simpson(density_row, -8.0, 8.0, 320);
    CHECK(std::abs(total - 1.0) < 1e-6);
  }
}

TEST_CASE("sorted distance signature") {
  // equilateral triangle with side 2
  const double h = std::sqrt(3.0);
  Configuration x(SystemShape{3, 2}, (Vec(6) << -1, 0, 1, 0, 0, h).finished());
  const Vec sig = sorted_distance_signature(x);
  CHECK(sig.size() == 3);
  for (int k = 0; k < 3; ++k) CHECK(sig[k] == doctest::Approx(2.0));

  Rng rng(41);
  const SystemShape s{5, 3};
  for (int rep = 0; rep < 50; ++rep) {
    const Configuration y = random_config(s, rng, 2.0);
    const GroupAction g = random_group_action(s, rng);
    const Vec a = sorted_distance_signature(y);
    const Vec b = sorted_distance_signature(apply_group_action(y, g));
    CHECK((a - b).cwiseAbs().maxCoeff() < 1e-10);
  }
}
