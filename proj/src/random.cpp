#include "combkit/random.hpp"

#include <Eigen/QR>

#include <cmath>

namespace combkit {

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

Eigen::MatrixXcd ginibre(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
  Eigen::MatrixXcd g(rows, cols);
  // Fill column-major explicitly so the draw order is part of the contract.
  for (Eigen::Index c = 0; c < cols; ++c)
    for (Eigen::Index r = 0; r < rows; ++r) {
      const double re = normal(rng);
      const double im = normal(rng);
      g(r, c) = {re, im};
    }
  return g;
}

Eigen::MatrixXcd orthonormalize(const Eigen::MatrixXcd& a) {
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(a);
  Eigen::MatrixXcd q = qr.householderQ() * Eigen::MatrixXcd::Identity(a.rows(), a.cols());
  const Eigen::MatrixXcd r = qr.matrixQR().topRows(a.cols()).triangularView<Eigen::Upper>();
  for (Eigen::Index k = 0; k < a.cols(); ++k) {
    const auto d = r(k, k);
    const double mag = std::abs(d);
    if (mag > 0) q.col(k) *= d / mag;
  }
  return q;
}

Eigen::MatrixXcd haar_isometry(Eigen::Index d_in, Eigen::Index d_out, Rng& rng) {
  return orthonormalize(ginibre(d_out, d_in, rng));
}

Eigen::MatrixXcd haar_unitary(Eigen::Index d, Rng& rng) { return haar_isometry(d, d, rng); }

Eigen::VectorXcd random_pure_state(Eigen::Index d, Rng& rng) {
  Eigen::VectorXcd v = ginibre(d, 1, rng).col(0);
  return v / v.norm();
}

Eigen::MatrixXcd random_density(Eigen::Index d, Rng& rng, Eigen::Index rank) {
  const Eigen::MatrixXcd g = ginibre(d, rank < 0 ? d : rank, rng);
  Eigen::MatrixXcd rho = g * g.adjoint();
  rho /= rho.trace().real();
  return 0.5 * (rho + rho.adjoint());
}

Eigen::MatrixXcd random_psd(Eigen::Index d, Eigen::Index rank, Rng& rng) {
  const Eigen::MatrixXcd g = ginibre(d, rank, rng);
  Eigen::MatrixXcd p = g * g.adjoint();
  return 0.5 * (p + p.adjoint());
}

Eigen::MatrixXcd random_hermitian(Eigen::Index d, Rng& rng) {
  const Eigen::MatrixXcd g = ginibre(d, d, rng);
  return 0.5 * (g + g.adjoint());
}

}  // namespace combkit
