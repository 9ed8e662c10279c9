// Seeded random matrices. Every generator takes the engine explicitly so a
// given seed reproduces bit-identical output.
#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>

namespace combkit {

using Rng = std::mt19937_64;

/// Independent stream seed from a base seed and a stream index (splitmix64).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

/// i.i.d. complex Gaussian entries, E|z|^2 = 1.
Eigen::MatrixXcd ginibre(Eigen::Index rows, Eigen::Index cols, Rng& rng);

/// Haar-distributed isometry mapping C^d_in into C^d_out (d_out x d_in).
Eigen::MatrixXcd haar_isometry(Eigen::Index d_in, Eigen::Index d_out, Rng& rng);
Eigen::MatrixXcd haar_unitary(Eigen::Index d, Rng& rng);

/// Column-orthonormalize with the phase convention that maps an isometry
/// onto itself.
Eigen::MatrixXcd orthonormalize(const Eigen::MatrixXcd& a);

Eigen::VectorXcd random_pure_state(Eigen::Index d, Rng& rng);

/// Hilbert-Schmidt random density matrix with the given rank.
Eigen::MatrixXcd random_density(Eigen::Index d, Rng& rng, Eigen::Index rank = -1);

/// Wishart-type PSD matrix G G^dagger, G of size d x rank.
Eigen::MatrixXcd random_psd(Eigen::Index d, Eigen::Index rank, Rng& rng);

Eigen::MatrixXcd random_hermitian(Eigen::Index d, Rng& rng);

}  // namespace combkit
