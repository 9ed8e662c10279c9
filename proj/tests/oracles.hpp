// Reference computations written directly against Eigen, independent of the
// library code paths they are compared with.
#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <complex>

namespace oracle {

using Eigen::MatrixXcd;

inline MatrixXcd sqrt_psd(const MatrixXcd& a) {
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(a);
  return es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() *
         es.eigenvectors().adjoint();
}

inline double lambda_max(const MatrixXcd& a) {
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(a);
  return es.eigenvalues().maxCoeff();
}

inline MatrixXcd bloch(double x, double y, double z) {
  MatrixXcd s(2, 2);
  s << std::complex<double>(1 + z, 0), std::complex<double>(x, -y), std::complex<double>(x, y),
      std::complex<double>(1 - z, 0);
  return 0.5 * s;
}

inline MatrixXcd bloch(const Eigen::Vector3d& r) { return bloch(r(0), r(1), r(2)); }

/// I_d (x) a, first factor slowest.
inline MatrixXcd identity_kron(Eigen::Index d, const MatrixXcd& a) {
  const auto n = a.rows();
  MatrixXcd out = MatrixXcd::Zero(d * n, d * n);
  for (Eigen::Index k = 0; k < d; ++k) out.block(k * n, k * n, n, n) = a;
  return out;
}

inline MatrixXcd twirl(const MatrixXcd& gamma, const MatrixXcd& c) {
  const MatrixXcd s = sqrt_psd(gamma);
  return s * c * s;
}

/// Neyman-Pearson test: threshold lambda* where Tr[{rho > lambda sigma} rho]
/// crosses 1 - eps, the strict positive eigenspace of rho - lambda* sigma,
/// plus a fraction of its boundary eigenspace.
inline double np_beta(const MatrixXcd& rho, const MatrixXcd& sigma, double eps) {
  const double target = 1.0 - eps;
  auto accept = [&](double lambda, double cut, MatrixXcd* strict, MatrixXcd* boundary) {
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(rho - lambda * sigma);
    const auto d = rho.rows();
    MatrixXcd ps = MatrixXcd::Zero(d, d), pb = MatrixXcd::Zero(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
      const Eigen::VectorXcd v = es.eigenvectors().col(i);
      if (es.eigenvalues()(i) > cut) ps += v * v.adjoint();
      else if (es.eigenvalues()(i) >= -cut) pb += v * v.adjoint();
    }
    if (strict) *strict = ps;
    if (boundary) *boundary = pb;
    return (ps * rho).trace().real();
  };
  double lo = 0.0, hi = 1.0;
  while (accept(hi, 0.0, nullptr, nullptr) >= target && hi < 1e12) hi *= 2;
  for (int k = 0; k < 200; ++k) {
    const double mid = 0.5 * (lo + hi);
    if (accept(mid, 0.0, nullptr, nullptr) >= target) lo = mid; else hi = mid;
  }
  MatrixXcd ps, pb;
  accept(0.5 * (lo + hi), 1e-9, &ps, &pb);
  const double rb = (pb * rho).trace().real();
  double t = rb > 0 ? (target - (ps * rho).trace().real()) / rb : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return (ps * sigma).trace().real() + t * (pb * sigma).trace().real();
}

/// min over theta = I (x) sigma of lambda_max(theta^{-1/2} Omega theta^{-1/2})
/// by a Bloch-ball grid and a local pattern refinement (one qubit tooth).
inline double bloch_grid_wmax(const MatrixXcd& omega) {
  auto f = [&](const Eigen::Vector3d& r) {
    if (r.norm() > 1 - 1e-9) return 1e300;
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(bloch(r));
    const MatrixXcd inv = es.eigenvectors() * es.eigenvalues().cwiseInverse().cwiseSqrt().asDiagonal() *
                          es.eigenvectors().adjoint();
    const MatrixXcd t = identity_kron(2, inv);
    return lambda_max(t * omega * t);
  };
  double best = 1e300;
  Eigen::Vector3d arg = Eigen::Vector3d::Zero();
  for (double x = -0.9; x <= 0.9 + 1e-9; x += 0.05)
    for (double y = -0.9; y <= 0.9 + 1e-9; y += 0.05)
      for (double z = -0.9; z <= 0.9 + 1e-9; z += 0.05) {
        const Eigen::Vector3d r(x, y, z);
        const double v = f(r);
        if (v < best) { best = v; arg = r; }
      }
  for (double s = 0.025; s > 1e-7; s /= 2)
    for (bool moved = true; moved;) {
      moved = false;
      for (int a = 0; a < 3; ++a)
        for (int sg : {-1, 1}) {
          Eigen::Vector3d q = arg;
          q(a) += sg * s;
          const double v = f(q);
          if (v < best - 1e-15) { best = v; arg = q; moved = true; }
        }
    }
  return best;
}

}  // namespace oracle
