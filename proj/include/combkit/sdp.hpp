// Small dense semidefinite programs with duality certificates.
//
// Problem form (minimization over real scalars y):
//
//   min  c^T y   s.t.  S_b(y) = sum_i y_i F_i^b - F_0^b  is PSD for every block b,
//                       A y = b.
//
// Dual:  max  sum_b Tr(F_0^b X_b) + b^T mu
//        s.t. sum_b Tr(F_i^b X_b) + (A^T mu)_i = c_i,  X_b PSD.
//
// Blocks are complex Hermitian. Blocks whose data is real are solved as
// real symmetric blocks; the others go through the embedding
// H -> [[Re H, -Im H], [Im H, Re H]].
#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <complex>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace combkit {

using SparseHermitian = Eigen::SparseMatrix<std::complex<double>>;

struct LmiBlock {
  Eigen::Index dim = 0;
  SparseHermitian f0;
  /// (variable index, F_i); variables absent from the list have F_i = 0.
  std::vector<std::pair<std::size_t, SparseHermitian>> terms;
};

struct SdpProblem {
  std::size_t num_vars = 0;
  Eigen::VectorXd c;
  std::vector<LmiBlock> blocks;
  Eigen::MatrixXd a;  // equalities, rows x num_vars
  Eigen::VectorXd b;
};

struct SdpOptions {
  /// Stop when |primal - dual| <= gap_tol * max(1, |primal|).
  double gap_tol = 1e-7;
  double feas_tol = 1e-8;
  int max_iter = 100;
  /// Extra iterations taken after the stopping rule first holds, kept only
  /// while they shrink the gap.
  int polish_iters = 2;
  Eigen::Index max_block_dim = 256;

  /// Defaults, with gap_tol taken from COMBKIT_SOLVER_TOL when set.
  static SdpOptions from_env();
};

enum class SdpStatus { optimal, infeasible, unbounded, max_iter };

std::string to_string(SdpStatus s);

struct SdpSolution {
  SdpStatus status = SdpStatus::max_iter;
  Eigen::VectorXd y;
  double primal_value = 0.0;
  double dual_value = 0.0;
  double gap = 0.0;
  int iterations = 0;
  /// Complex dual matrices X_b, one per block, in the original dimension.
  std::vector<Eigen::MatrixXcd> dual_blocks;
  Eigen::VectorXd eq_multipliers;
  double primal_infeasibility = 0.0;
  double dual_infeasibility = 0.0;
};

SdpSolution solve(const SdpProblem& p, const SdpOptions& opts = SdpOptions::from_env());

/// Recomputed from the problem data and the returned point only.
struct CertificateReport {
  double min_lmi_eigenvalue = 0.0;
  double equality_residual = 0.0;
  double dual_min_eigenvalue = 0.0;
  double dual_residual = 0.0;
  double primal_value = 0.0;
  double dual_value = 0.0;
  double gap = 0.0;
  bool primal_feasible = false;
  bool dual_feasible = false;
  bool gap_ok = false;
  bool ok() const { return primal_feasible && dual_feasible && gap_ok; }
};

CertificateReport check_certificate(const SdpProblem& p, const SdpSolution& s,
                                    const SdpOptions& opts = SdpOptions::from_env());

/// Evaluate S_b(y) for block b.
Eigen::MatrixXcd lmi_value(const LmiBlock& block, const Eigen::VectorXd& y);

/// Plain-text dump, format "combkit-sdp v1". Entries are written with 17
/// significant digits so a dump round-trips exactly.
void write_problem(std::ostream& os, const SdpProblem& p);
SdpProblem read_problem(std::istream& is);

}  // namespace combkit
