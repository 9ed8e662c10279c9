// Builder that turns Hermitian-matrix-valued affine expressions into an
// SdpProblem. A Hermitian variable of dimension k owns k^2 real scalars:
// the k diagonal entries, then Re and Im of each strictly upper entry in
// row-major order.
#pragma once

#include <functional>
#include <map>
#include <vector>

#include "combkit/sdp.hpp"

namespace combkit {

struct HermVar {
  std::size_t offset = 0;
  Eigen::Index dim = 0;
  std::size_t params() const { return static_cast<std::size_t>(dim * dim); }
};

/// Basis element number p of the Hermitian parameterization.
Eigen::MatrixXcd hermitian_basis(Eigen::Index dim, std::size_t p);

using HermitianMap = std::function<Eigen::MatrixXcd(const Eigen::MatrixXcd&)>;

/// constant + sum_v y_v T_v with Hermitian T_v.
class AffineHermitian {
 public:
  explicit AffineHermitian(Eigen::Index dim);

  Eigen::Index dim() const { return dim_; }

  AffineHermitian& add_constant(const Eigen::MatrixXcd& c);
  AffineHermitian& add_scalar(std::size_t var, const Eigen::MatrixXcd& coeff);
  /// + scale * H, where H must have this expression's dimension.
  AffineHermitian& add_var(const HermVar& v, double scale = 1.0);
  /// + map(H) for a real-linear map sending Hermitian to Hermitian matrices.
  AffineHermitian& add_mapped(const HermVar& v, const HermitianMap& map);

  const Eigen::MatrixXcd& constant() const { return constant_; }
  const std::map<std::size_t, Eigen::MatrixXcd>& terms() const { return terms_; }

  Eigen::MatrixXcd value(const Eigen::VectorXd& y) const;

 private:
  void accumulate(std::size_t var, const Eigen::MatrixXcd& m);

  Eigen::Index dim_;
  Eigen::MatrixXcd constant_;
  std::map<std::size_t, Eigen::MatrixXcd> terms_;
};

class SdpModel {
 public:
  std::size_t add_scalar();
  HermVar add_hermitian(Eigen::Index dim);
  std::size_t num_vars() const { return num_vars_; }

  /// Objective (minimized): + coeff * y_var.
  void add_cost(std::size_t var, double coeff);
  /// Objective: + Tr(W H) for Hermitian W.
  void add_cost(const HermVar& v, const Eigen::MatrixXcd& w);

  void add_psd(const AffineHermitian& e);
  /// Hermitian equation e(y) = 0, expanded into dim^2 real equations.
  void add_zero(const AffineHermitian& e);
  void add_equality(const std::vector<std::pair<std::size_t, double>>& coeffs, double rhs);

  SdpProblem problem() const;

  static Eigen::MatrixXcd value(const HermVar& v, const Eigen::VectorXd& y);

 private:
  std::size_t num_vars_ = 0;
  std::map<std::size_t, double> cost_;
  std::vector<LmiBlock> blocks_;
  std::vector<std::vector<std::pair<std::size_t, double>>> eq_rows_;
  std::vector<double> eq_rhs_;
};

}  // namespace combkit
