// Labeled multipartite operators and the spectral primitives built on a
// single Hermitian eigendecomposition.
#pragma once

#include <Eigen/Dense>

#include <complex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "combkit/multipartite.hpp"

namespace combkit {

using cplx = std::complex<double>;

/// Relative Frobenius tolerance for accepting an input as Hermitian.
inline constexpr double kTolHerm = 1e-9;
/// Relative (to the spectral norm) clipping threshold for PSD checks.
inline constexpr double kTolPsd = 1e-8;

enum class Role { in, out };

std::string_view to_string(Role role);
Role role_from_string(std::string_view s);

struct SystemLabel {
  std::string name;
  Eigen::Index dim = 1;
  Role role = Role::in;
  int tooth = 1;

  friend bool operator==(const SystemLabel&, const SystemLabel&) = default;
};

/// A square complex matrix together with the ordered list of subsystems it
/// acts on. Row-major over `systems()`, first label slowest.
class LabeledOperator {
 public:
  LabeledOperator() = default;
  LabeledOperator(std::vector<SystemLabel> systems, Eigen::MatrixXcd matrix);

  /// Scalar (no subsystems).
  static LabeledOperator scalar(cplx value);
  static LabeledOperator identity(std::vector<SystemLabel> systems);

  const std::vector<SystemLabel>& systems() const { return systems_; }
  const Eigen::MatrixXcd& matrix() const { return matrix_; }
  Eigen::Index side() const { return matrix_.rows(); }
  Dims dims() const;
  std::vector<std::string> names() const;

  std::optional<std::size_t> find(std::string_view name) const;
  bool has(std::string_view name) const { return find(name).has_value(); }
  const SystemLabel& system(std::string_view name) const;

  /// Same labels, new matrix (checked for size).
  LabeledOperator with_matrix(Eigen::MatrixXcd matrix) const;

  cplx trace() const { return matrix_.trace(); }

 private:
  std::vector<SystemLabel> systems_;
  Eigen::MatrixXcd matrix_;
};

/// Label sets equal (order may differ).
bool same_label_set(const LabeledOperator& a, const LabeledOperator& b);

/// `b` expressed in `a`'s label order; throws unless the label sets agree.
LabeledOperator aligned_to(const LabeledOperator& a, const LabeledOperator& b);

LabeledOperator operator+(const LabeledOperator& a, const LabeledOperator& b);
LabeledOperator operator-(const LabeledOperator& a, const LabeledOperator& b);
LabeledOperator operator*(cplx s, const LabeledOperator& a);
LabeledOperator operator*(double s, const LabeledOperator& a);

/// Operator product after aligning labels.
LabeledOperator product(const LabeledOperator& a, const LabeledOperator& b);

double frobenius_distance(const LabeledOperator& a, const LabeledOperator& b);

LabeledOperator tensor(const LabeledOperator& a, const LabeledOperator& b);
LabeledOperator partial_trace(const LabeledOperator& a, const std::vector<std::string>& labels);
LabeledOperator partial_transpose(const LabeledOperator& a,
                                  const std::vector<std::string>& labels);
LabeledOperator reorder(const LabeledOperator& a, const std::vector<std::string>& new_order);
LabeledOperator adjoint(const LabeledOperator& a);
LabeledOperator transpose(const LabeledOperator& a);

// ---------------------------------------------------------------------------
// Spectral layer. All of it goes through eig_hermitian.

struct HermitianEigen {
  Eigen::VectorXd values;    // descending
  Eigen::MatrixXcd vectors;  // columns, unitary
};

bool is_hermitian(const Eigen::MatrixXcd& a, double rel_tol = kTolHerm);

/// Throws DomainError unless `a` is Hermitian to kTolHerm; the input is
/// symmetrized before the decomposition.
HermitianEigen eig_hermitian(const Eigen::MatrixXcd& a);
HermitianEigen eig_hermitian(const LabeledOperator& a);

/// Reassemble sum_i f(lambda_i) |v_i><v_i|.
template <typename F>
Eigen::MatrixXcd spectral_apply(const HermitianEigen& e, F&& f) {
  Eigen::VectorXd fv(e.values.size());
  for (Eigen::Index i = 0; i < fv.size(); ++i) fv(i) = f(e.values(i));
  return e.vectors * fv.asDiagonal() * e.vectors.adjoint();
}

double spectral_norm(const Eigen::MatrixXcd& a);

Eigen::MatrixXcd psd_sqrt(const Eigen::MatrixXcd& a);
LabeledOperator psd_sqrt(const LabeledOperator& a);

Eigen::MatrixXcd positive_part(const Eigen::MatrixXcd& a);
LabeledOperator positive_part(const LabeledOperator& a);

double trace_norm(const Eigen::MatrixXcd& a);
double trace_norm(const LabeledOperator& a);
double trace_distance(const LabeledOperator& a, const LabeledOperator& b);

double min_eigenvalue(const Eigen::MatrixXcd& a);
bool is_psd(const Eigen::MatrixXcd& a, double rel_tol = kTolPsd);

/// Orthonormal basis (columns) of the eigenspace with eigenvalue above
/// rel_tol * ||a||.
Eigen::MatrixXcd support_basis(const Eigen::MatrixXcd& a, double rel_tol = kTolPsd);

/// supp(a) within supp(b): the kernel projector of b annihilates a.
bool support_contains(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b,
                      double tol = kTolPsd);
bool support_contains(const LabeledOperator& a, const LabeledOperator& b, double tol = kTolPsd);

/// Projector {s >= t} onto the nonnegative eigenspace of s - t. Zero
/// eigenvalues are inside.
Eigen::MatrixXcd projector_geq(const Eigen::MatrixXcd& s, const Eigen::MatrixXcd& t);
LabeledOperator projector_geq(const LabeledOperator& s, const LabeledOperator& t);

}  // namespace combkit
