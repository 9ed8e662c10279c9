#include "combkit/tensorspace.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <set>

#include "combkit/errors.hpp"

namespace combkit {

std::string_view to_string(Role role) { return role == Role::in ? "in" : "out"; }

Role role_from_string(std::string_view s) {
  if (s == "in") return Role::in;
  if (s == "out") return Role::out;
  throw InputError("unknown role '" + std::string(s) + "'");
}

LabeledOperator::LabeledOperator(std::vector<SystemLabel> systems, Eigen::MatrixXcd matrix)
    : systems_(std::move(systems)), matrix_(std::move(matrix)) {
  std::set<std::string> seen;
  Eigen::Index side = 1;
  for (const auto& s : systems_) {
    if (s.dim < 1) throw InputError("system '" + s.name + "' has dimension < 1");
    if (!seen.insert(s.name).second) throw InputError("duplicate label '" + s.name + "'");
    side *= s.dim;
  }
  if (matrix_.rows() != side || matrix_.cols() != side)
    throw InputError("matrix side " + std::to_string(matrix_.rows()) + "x" +
                     std::to_string(matrix_.cols()) + " does not match product of dims " +
                     std::to_string(side));
}

LabeledOperator LabeledOperator::scalar(cplx value) {
  Eigen::MatrixXcd m(1, 1);
  m(0, 0) = value;
  return LabeledOperator({}, m);
}

LabeledOperator LabeledOperator::identity(std::vector<SystemLabel> systems) {
  Eigen::Index side = 1;
  for (const auto& s : systems) side *= s.dim;
  return LabeledOperator(std::move(systems), Eigen::MatrixXcd::Identity(side, side));
}

Dims LabeledOperator::dims() const {
  Dims d;
  d.reserve(systems_.size());
  for (const auto& s : systems_) d.push_back(s.dim);
  return d;
}

std::vector<std::string> LabeledOperator::names() const {
  std::vector<std::string> n;
  n.reserve(systems_.size());
  for (const auto& s : systems_) n.push_back(s.name);
  return n;
}

std::optional<std::size_t> LabeledOperator::find(std::string_view name) const {
  for (std::size_t k = 0; k < systems_.size(); ++k)
    if (systems_[k].name == name) return k;
  return std::nullopt;
}

const SystemLabel& LabeledOperator::system(std::string_view name) const {
  auto k = find(name);
  if (!k) throw InputError("unknown label '" + std::string(name) + "'");
  return systems_[*k];
}

LabeledOperator LabeledOperator::with_matrix(Eigen::MatrixXcd matrix) const {
  return LabeledOperator(systems_, std::move(matrix));
}

bool same_label_set(const LabeledOperator& a, const LabeledOperator& b) {
  if (a.systems().size() != b.systems().size()) return false;
  for (const auto& s : a.systems()) {
    auto k = b.find(s.name);
    if (!k || b.systems()[*k].dim != s.dim) return false;
  }
  return true;
}

LabeledOperator aligned_to(const LabeledOperator& a, const LabeledOperator& b) {
  if (!same_label_set(a, b)) throw InputError("operators act on different label sets");
  return reorder(b, a.names());
}

LabeledOperator operator+(const LabeledOperator& a, const LabeledOperator& b) {
  return a.with_matrix(a.matrix() + aligned_to(a, b).matrix());
}

LabeledOperator operator-(const LabeledOperator& a, const LabeledOperator& b) {
  return a.with_matrix(a.matrix() - aligned_to(a, b).matrix());
}

LabeledOperator operator*(cplx s, const LabeledOperator& a) {
  return a.with_matrix(s * a.matrix());
}

LabeledOperator operator*(double s, const LabeledOperator& a) {
  return a.with_matrix(s * a.matrix());
}

LabeledOperator product(const LabeledOperator& a, const LabeledOperator& b) {
  return a.with_matrix(a.matrix() * aligned_to(a, b).matrix());
}

double frobenius_distance(const LabeledOperator& a, const LabeledOperator& b) {
  return (a.matrix() - aligned_to(a, b).matrix()).norm();
}

LabeledOperator tensor(const LabeledOperator& a, const LabeledOperator& b) {
  for (const auto& s : b.systems())
    if (a.has(s.name)) throw InputError("duplicate label '" + s.name + "' in tensor product");
  auto systems = a.systems();
  systems.insert(systems.end(), b.systems().begin(), b.systems().end());
  return LabeledOperator(std::move(systems), kron(a.matrix(), b.matrix()));
}

namespace {

std::vector<bool> mask_for(const LabeledOperator& a, const std::vector<std::string>& labels) {
  std::vector<bool> mask(a.systems().size(), false);
  for (const auto& l : labels) {
    auto k = a.find(l);
    if (!k) throw InputError("unknown label '" + l + "'");
    mask[*k] = true;
  }
  return mask;
}

}  // namespace

LabeledOperator partial_trace(const LabeledOperator& a, const std::vector<std::string>& labels) {
  const auto mask = mask_for(a, labels);
  std::vector<SystemLabel> kept;
  for (std::size_t k = 0; k < mask.size(); ++k)
    if (!mask[k]) kept.push_back(a.systems()[k]);
  return LabeledOperator(std::move(kept), partial_trace(a.matrix(), a.dims(), mask));
}

LabeledOperator partial_transpose(const LabeledOperator& a,
                                  const std::vector<std::string>& labels) {
  return a.with_matrix(partial_transpose(a.matrix(), a.dims(), mask_for(a, labels)));
}

LabeledOperator reorder(const LabeledOperator& a, const std::vector<std::string>& new_order) {
  if (new_order.size() != a.systems().size())
    throw InputError("reorder: new order is not a permutation of the labels");
  std::vector<std::size_t> perm;
  std::vector<bool> used(a.systems().size(), false);
  for (const auto& n : new_order) {
    auto k = a.find(n);
    if (!k || used[*k]) throw InputError("reorder: new order is not a permutation of the labels");
    used[*k] = true;
    perm.push_back(*k);
  }
  bool trivial = true;
  for (std::size_t k = 0; k < perm.size(); ++k) trivial = trivial && perm[k] == k;
  if (trivial) return a;
  std::vector<SystemLabel> systems;
  for (auto k : perm) systems.push_back(a.systems()[k]);
  return LabeledOperator(std::move(systems), permute_systems(a.matrix(), a.dims(), perm));
}

LabeledOperator adjoint(const LabeledOperator& a) { return a.with_matrix(a.matrix().adjoint()); }

LabeledOperator transpose(const LabeledOperator& a) {
  return a.with_matrix(a.matrix().transpose());
}

// ---------------------------------------------------------------------------

bool is_hermitian(const Eigen::MatrixXcd& a, double rel_tol) {
  if (a.rows() != a.cols()) return false;
  const double scale = std::max(a.norm(), 1e-300);
  return (a - a.adjoint()).norm() <= rel_tol * scale;
}

HermitianEigen eig_hermitian(const Eigen::MatrixXcd& a) {
  if (!is_hermitian(a)) throw DomainError("operator is not Hermitian");
  const Eigen::MatrixXcd h = 0.5 * (a + a.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
  if (es.info() != Eigen::Success) throw DomainError("eigendecomposition failed");
  HermitianEigen out;
  out.values = es.eigenvalues().reverse();
  out.vectors = es.eigenvectors().rowwise().reverse();
  return out;
}

HermitianEigen eig_hermitian(const LabeledOperator& a) { return eig_hermitian(a.matrix()); }

double spectral_norm(const Eigen::MatrixXcd& a) {
  const auto e = eig_hermitian(a);
  return e.values.size() == 0 ? 0.0 : std::max(std::abs(e.values(0)),
                                               std::abs(e.values(e.values.size() - 1)));
}

Eigen::MatrixXcd psd_sqrt(const Eigen::MatrixXcd& a) {
  const auto e = eig_hermitian(a);
  const double scale = e.values.cwiseAbs().maxCoeff();
  if (e.values.minCoeff() < -kTolPsd * scale)
    throw DomainError("psd_sqrt: operator has eigenvalue " + std::to_string(e.values.minCoeff()));
  return spectral_apply(e, [](double x) { return x > 0 ? std::sqrt(x) : 0.0; });
}

LabeledOperator psd_sqrt(const LabeledOperator& a) { return a.with_matrix(psd_sqrt(a.matrix())); }

Eigen::MatrixXcd positive_part(const Eigen::MatrixXcd& a) {
  return spectral_apply(eig_hermitian(a), [](double x) { return x > 0 ? x : 0.0; });
}

LabeledOperator positive_part(const LabeledOperator& a) {
  return a.with_matrix(positive_part(a.matrix()));
}

double trace_norm(const Eigen::MatrixXcd& a) { return eig_hermitian(a).values.cwiseAbs().sum(); }

double trace_norm(const LabeledOperator& a) { return trace_norm(a.matrix()); }

double trace_distance(const LabeledOperator& a, const LabeledOperator& b) {
  if (!same_label_set(a, b)) throw InputError("trace_distance: shape mismatch");
  return 0.5 * trace_norm((a - b).matrix());
}

double min_eigenvalue(const Eigen::MatrixXcd& a) {
  const auto e = eig_hermitian(a);
  return e.values(e.values.size() - 1);
}

bool is_psd(const Eigen::MatrixXcd& a, double rel_tol) {
  if (!is_hermitian(a)) return false;
  const auto e = eig_hermitian(a);
  const double scale = e.values.cwiseAbs().maxCoeff();
  return e.values.minCoeff() >= -rel_tol * scale;
}

Eigen::MatrixXcd support_basis(const Eigen::MatrixXcd& a, double rel_tol) {
  const auto e = eig_hermitian(a);
  const double scale = e.values.cwiseAbs().maxCoeff();
  Eigen::Index r = 0;
  while (r < e.values.size() && e.values(r) > rel_tol * scale) ++r;
  return e.vectors.leftCols(r);
}

bool support_contains(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b, double tol) {
  if (!is_psd(a) || !is_psd(b)) throw DomainError("support_contains: inputs must be PSD");
  const double na = spectral_norm(a);
  if (na == 0.0) return true;
  const Eigen::MatrixXcd v = support_basis(b, tol);
  const Eigen::MatrixXcd kernel =
      Eigen::MatrixXcd::Identity(b.rows(), b.cols()) - v * v.adjoint();
  const Eigen::MatrixXcd residue = kernel * a * kernel;
  return spectral_norm(0.5 * (residue + residue.adjoint())) <= tol * na;
}

bool support_contains(const LabeledOperator& a, const LabeledOperator& b, double tol) {
  return support_contains(a.matrix(), aligned_to(a, b).matrix(), tol);
}

Eigen::MatrixXcd projector_geq(const Eigen::MatrixXcd& s, const Eigen::MatrixXcd& t) {
  const auto e = eig_hermitian(s - t);
  const double tie = 1e-12 * std::max(1.0, s.norm() + t.norm());
  return spectral_apply(e, [tie](double x) { return x >= -tie ? 1.0 : 0.0; });
}

LabeledOperator projector_geq(const LabeledOperator& s, const LabeledOperator& t) {
  return s.with_matrix(projector_geq(s.matrix(), aligned_to(s, t).matrix()));
}

}  // namespace combkit
