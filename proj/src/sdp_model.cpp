#include "combkit/sdp_model.hpp"

#include <cmath>

#include "combkit/errors.hpp"

namespace combkit {

namespace {

using Eigen::Index;
using cplx = std::complex<double>;

constexpr double kPrune = 1e-14;

SparseHermitian to_sparse(const Eigen::MatrixXcd& m) {
  const double cut = kPrune * std::max(1.0, m.cwiseAbs().maxCoeff());
  std::vector<Eigen::Triplet<cplx>> t;
  for (Index c = 0; c < m.cols(); ++c)
    for (Index r = 0; r < m.rows(); ++r) {
      cplx v = m(r, c);
      if (std::abs(v.real()) <= cut) v.real(0.0);
      if (std::abs(v.imag()) <= cut) v.imag(0.0);
      if (v != cplx(0.0)) t.emplace_back(r, c, v);
    }
  SparseHermitian s(m.rows(), m.cols());
  s.setFromTriplets(t.begin(), t.end());
  return s;
}

/// (row, col) of parameter p >= dim, i.e. the strictly upper pair.
std::pair<Index, Index> pair_of(Index dim, Index q) {
  Index r = 0;
  while (q >= dim - 1 - r) {
    q -= dim - 1 - r;
    ++r;
  }
  return {r, r + 1 + q};
}

}  // namespace

Eigen::MatrixXcd hermitian_basis(Index dim, std::size_t p) {
  Eigen::MatrixXcd e = Eigen::MatrixXcd::Zero(dim, dim);
  const auto pi = static_cast<Index>(p);
  if (pi < dim) {
    e(pi, pi) = 1.0;
    return e;
  }
  const Index q = pi - dim;
  const auto [r, s] = pair_of(dim, q / 2);
  if (q % 2 == 0) {
    e(r, s) = 1.0;
    e(s, r) = 1.0;
  } else {
    e(r, s) = cplx(0, 1);
    e(s, r) = cplx(0, -1);
  }
  return e;
}

AffineHermitian::AffineHermitian(Index dim) : dim_(dim), constant_(Eigen::MatrixXcd::Zero(dim, dim)) {}

void AffineHermitian::accumulate(std::size_t var, const Eigen::MatrixXcd& m) {
  if (m.rows() != dim_ || m.cols() != dim_)
    throw InputError("affine expression: term has dimension " + std::to_string(m.rows()) +
                     ", expected " + std::to_string(dim_));
  auto it = terms_.find(var);
  if (it == terms_.end()) {
    terms_.emplace(var, m);
  } else {
    it->second += m;
  }
}

AffineHermitian& AffineHermitian::add_constant(const Eigen::MatrixXcd& c) {
  if (c.rows() != dim_ || c.cols() != dim_) throw InputError("affine expression: bad constant");
  constant_ += c;
  return *this;
}

AffineHermitian& AffineHermitian::add_scalar(std::size_t var, const Eigen::MatrixXcd& coeff) {
  accumulate(var, coeff);
  return *this;
}

AffineHermitian& AffineHermitian::add_var(const HermVar& v, double scale) {
  if (v.dim != dim_) throw InputError("affine expression: variable dimension mismatch");
  for (std::size_t p = 0; p < v.params(); ++p)
    accumulate(v.offset + p, scale * hermitian_basis(v.dim, p));
  return *this;
}

AffineHermitian& AffineHermitian::add_mapped(const HermVar& v, const HermitianMap& map) {
  for (std::size_t p = 0; p < v.params(); ++p)
    accumulate(v.offset + p, map(hermitian_basis(v.dim, p)));
  return *this;
}

Eigen::MatrixXcd AffineHermitian::value(const Eigen::VectorXd& y) const {
  Eigen::MatrixXcd m = constant_;
  for (const auto& [v, t] : terms_) m += y(static_cast<Index>(v)) * t;
  return m;
}

std::size_t SdpModel::add_scalar() { return num_vars_++; }

HermVar SdpModel::add_hermitian(Index dim) {
  if (dim < 1) throw InputError("Hermitian variable needs dimension >= 1");
  HermVar v{num_vars_, dim};
  num_vars_ += v.params();
  return v;
}

void SdpModel::add_cost(std::size_t var, double coeff) { cost_[var] += coeff; }

void SdpModel::add_cost(const HermVar& v, const Eigen::MatrixXcd& w) {
  for (std::size_t p = 0; p < v.params(); ++p) {
    const double c = (w * hermitian_basis(v.dim, p)).trace().real();
    if (c != 0.0) cost_[v.offset + p] += c;
  }
}

void SdpModel::add_psd(const AffineHermitian& e) {
  LmiBlock b;
  b.dim = e.dim();
  b.f0 = to_sparse(-e.constant());
  for (const auto& [v, t] : e.terms()) {
    SparseHermitian s = to_sparse(t);
    if (s.nonZeros() > 0) b.terms.emplace_back(v, std::move(s));
  }
  blocks_.push_back(std::move(b));
}

void SdpModel::add_zero(const AffineHermitian& e) {
  const Index d = e.dim();
  auto emit = [&](auto coeff_of) {
    std::vector<std::pair<std::size_t, double>> row;
    double scale = 0.0;
    for (const auto& [v, t] : e.terms()) scale = std::max(scale, std::abs(coeff_of(t)));
    const double cut = kPrune * std::max(1.0, scale);
    for (const auto& [v, t] : e.terms()) {
      const double c = coeff_of(t);
      if (std::abs(c) > cut) row.emplace_back(v, c);
    }
    const double rhs = -coeff_of(e.constant());
    if (row.empty()) {
      if (std::abs(rhs) > 1e-12) throw DomainError("affine equation has no solution");
      return;
    }
    eq_rows_.push_back(std::move(row));
    eq_rhs_.push_back(rhs);
  };
  for (Index r = 0; r < d; ++r) emit([&](const Eigen::MatrixXcd& m) { return m(r, r).real(); });
  for (Index r = 0; r < d; ++r)
    for (Index s = r + 1; s < d; ++s) {
      emit([&](const Eigen::MatrixXcd& m) { return m(r, s).real(); });
      emit([&](const Eigen::MatrixXcd& m) { return m(r, s).imag(); });
    }
}

void SdpModel::add_equality(const std::vector<std::pair<std::size_t, double>>& coeffs, double rhs) {
  for (const auto& [v, c] : coeffs)
    if (v >= num_vars_) throw InputError("equality references unknown variable");
  eq_rows_.push_back(coeffs);
  eq_rhs_.push_back(rhs);
}

SdpProblem SdpModel::problem() const {
  SdpProblem p;
  p.num_vars = num_vars_;
  p.c = Eigen::VectorXd::Zero(static_cast<Index>(num_vars_));
  for (const auto& [v, c] : cost_) p.c(static_cast<Index>(v)) = c;
  p.blocks = blocks_;
  p.a = Eigen::MatrixXd::Zero(static_cast<Index>(eq_rows_.size()), static_cast<Index>(num_vars_));
  p.b = Eigen::VectorXd::Zero(static_cast<Index>(eq_rows_.size()));
  for (std::size_t r = 0; r < eq_rows_.size(); ++r) {
    for (const auto& [v, c] : eq_rows_[r]) p.a(static_cast<Index>(r), static_cast<Index>(v)) += c;
    p.b(static_cast<Index>(r)) = eq_rhs_[r];
  }
  return p;
}

Eigen::MatrixXcd SdpModel::value(const HermVar& v, const Eigen::VectorXd& y) {
  const Index d = v.dim;
  const auto off = static_cast<Index>(v.offset);
  Eigen::MatrixXcd h(d, d);
  for (Index r = 0; r < d; ++r) h(r, r) = y(off + r);
  Index q = d;
  for (Index r = 0; r < d; ++r)
    for (Index s = r + 1; s < d; ++s) {
      const cplx z(y(off + q), y(off + q + 1));
      h(r, s) = z;
      h(s, r) = std::conj(z);
      q += 2;
    }
  return h;
}

}  // namespace combkit
