#pragma once

#include <vector>

#include "eqflow/rng.hpp"
#include "eqflow/types.hpp"

namespace eqflow {

// Orthogonal transform Q (D x D) combined with a relabeling of particles.
// Particle j of the input ends up in slot permutation[j] of the output.
struct GroupAction {
  Mat rotation;
  std::vector<int> permutation;
};

// All pairwise separations r_ij = x_i - x_j and their norms d_ij, stored densely.
struct PairwiseDistances {
  Mat dist;  // N x N, symmetric, zero diagonal
  Mat diff;  // N*N rows, D columns; row i*N+j holds x_i - x_j

  const Mat& distances() const { return dist; }
  auto separation(int i, int j) const { return diff.row(i * static_cast<int>(dist.rows()) + j); }
};

Vec center_of_mass(const Configuration& x);

// Applies the symmetric CoM projector A = I_D (x) (I_N - (1/N) 1 1^T).
Configuration project_com_free(const Configuration& x);

// Dense n x n matrix of the projector above; mostly useful for tests.
Mat com_projector(SystemShape shape);

Configuration apply_group_action(const Configuration& x, const GroupAction& g);

// Haar-uniform orthogonal matrix (QR of a Gaussian matrix, sign-fixed R diagonal)
// plus a uniform permutation.
GroupAction random_group_action(SystemShape shape, Rng& rng);

PairwiseDistances pairwise_distances(const Configuration& x);

// Draws z ~ N(0, I_n) and projects onto the CoM-free subspace.
Configuration prior_sample(SystemShape shape, Rng& rng);

// Log-density of the CoM-free Gaussian prior, normalized over its (N-1)*D
// dimensional support: -|x|^2/2 - ((N-1)*D/2) log(2 pi).
// Throws if the input's CoM norm exceeds 1e-8.
double prior_logp(const Configuration& x);

// Ascending vector of the N(N-1)/2 pairwise distances; invariant under
// rotations and permutations, used to compare structures without alignment.
Vec sorted_distance_signature(const Configuration& x);

}  // namespace eqflow
