#include "eqflow/geometry.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace eqflow {

Vec center_of_mass(const Configuration& x) {
  const int N = x.shape.n_particles, D = x.shape.dim;
  Vec com = Vec::Zero(D);
  for (int i = 0; i < N; ++i) com += x.particle(i);
  return com / N;
}

Configuration project_com_free(const Configuration& x) {
  const Vec com = center_of_mass(x);
  Configuration out = x;
  for (int i = 0; i < x.shape.n_particles; ++i) out.particle(i) -= com;
  return out;
}

Mat com_projector(SystemShape shape) {
  const int N = shape.n_particles, D = shape.dim, n = shape.n();
  Mat a = Mat::Zero(n, n);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j)
      for (int k = 0; k < D; ++k)
        a(i * D + k, j * D + k) = (i == j ? 1.0 : 0.0) - 1.0 / N;
  return a;
}

Configuration apply_group_action(const Configuration& x, const GroupAction& g) {
  const int N = x.shape.n_particles, D = x.shape.dim;
  if (g.rotation.rows() != D || g.rotation.cols() != D ||
      static_cast<int>(g.permutation.size()) != N)
    throw std::invalid_argument("apply_group_action: dimension mismatch");
  Configuration out = x;
  for (int j = 0; j < N; ++j) out.particle(g.permutation[j]) = g.rotation * x.particle(j);
  return out;
}

GroupAction random_group_action(SystemShape shape, Rng& rng) {
  const int N = shape.n_particles, D = shape.dim;
  Mat gauss(D, D);
  for (int i = 0; i < D; ++i)
    for (int j = 0; j < D; ++j) gauss(i, j) = rng.gaussian();
  Eigen::HouseholderQR<Mat> qr(gauss);
  Mat q = qr.householderQ();
  const Mat r = qr.matrixQR().triangularView<Eigen::Upper>();
  // Fixing the signs of R's diagonal makes the factorization unique and Q Haar-uniform.
  for (int j = 0; j < D; ++j)
    if (r(j, j) < 0) q.col(j) = -q.col(j);

  GroupAction g;
  g.rotation = q;
  g.permutation.resize(N);
  for (int i = 0; i < N; ++i) g.permutation[i] = i;
  for (int i = N - 1; i > 0; --i)
    std::swap(g.permutation[i], g.permutation[rng.uniform_int(0, static_cast<std::uint64_t>(i))]);
  return g;
}

PairwiseDistances pairwise_distances(const Configuration& x) {
  const int N = x.shape.n_particles, D = x.shape.dim;
  PairwiseDistances out;
  out.dist = Mat::Zero(N, N);
  out.diff = Mat::Zero(N * N, D);
  for (int i = 0; i < N; ++i) {
    for (int j = i + 1; j < N; ++j) {
      const Vec r = x.particle(i) - x.particle(j);
      const double d = r.norm();
      out.dist(i, j) = d;
      out.dist(j, i) = d;
      out.diff.row(i * N + j) = r.transpose();
      out.diff.row(j * N + i) = -r.transpose();
    }
  }
  return out;
}

Configuration prior_sample(SystemShape shape, Rng& rng) {
  Vec z(shape.n());
  for (int k = 0; k < shape.n(); ++k) z[k] = rng.gaussian();
  return project_com_free(Configuration(shape, std::move(z)));
}

double prior_logp(const Configuration& x) {
  if (center_of_mass(x).norm() >= 1e-8)
    throw std::invalid_argument("prior_logp: configuration is not CoM-free");
  const double dof = (x.shape.n_particles - 1) * static_cast<double>(x.shape.dim);
  return -0.5 * x.coords.squaredNorm() - 0.5 * dof * std::log(2.0 * std::numbers::pi);
}

Vec sorted_distance_signature(const Configuration& x) {
  const int N = x.shape.n_particles;
  Vec sig(N * (N - 1) / 2);
  int k = 0;
  for (int i = 0; i < N; ++i)
    for (int j = i + 1; j < N; ++j) sig[k++] = (x.particle(i) - x.particle(j)).norm();
  std::sort(sig.begin(), sig.end());
  return sig;
}

}  // namespace eqflow
