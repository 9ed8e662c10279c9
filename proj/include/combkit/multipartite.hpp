// Index bookkeeping for operators on tensor products of finite-dimensional
// spaces. Everything here is templated on the Eigen scalar so the same code
// serves complex operators and the real-embedded blocks of the SDP solver.
//
// Convention: row-major tensor indexing, first subsystem slowest. For
// dims (d_0, ..., d_{k-1}) the multi-index (i_0, ..., i_{k-1}) sits at
// sum_j i_j * stride_j with stride_{k-1} = 1.
#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace combkit {

using Dims = std::vector<Eigen::Index>;

inline Eigen::Index total_dim(const Dims& dims) {
  return std::accumulate(dims.begin(), dims.end(), Eigen::Index{1},
                         std::multiplies<>());
}

namespace detail {

inline std::vector<Eigen::Index> strides(const Dims& dims) {
  std::vector<Eigen::Index> s(dims.size(), 1);
  for (std::size_t k = dims.size(); k-- > 1;) s[k - 1] = s[k] * dims[k];
  return s;
}

/// Linear offsets of all multi-indices over the subsystems listed in `which`
/// (enumerated row-major in the order given), embedded in the full index.
inline std::vector<Eigen::Index> offsets(const Dims& dims,
                                         const std::vector<std::size_t>& which) {
  const auto st = strides(dims);
  std::vector<Eigen::Index> out{0};
  for (std::size_t k : which) {
    std::vector<Eigen::Index> next;
    next.reserve(out.size() * static_cast<std::size_t>(dims[k]));
    for (Eigen::Index base : out)
      for (Eigen::Index i = 0; i < dims[k]; ++i) next.push_back(base + i * st[k]);
    out = std::move(next);
  }
  return out;
}

inline std::vector<std::size_t> selected(const std::vector<bool>& mask, bool value) {
  std::vector<std::size_t> idx;
  for (std::size_t k = 0; k < mask.size(); ++k)
    if (mask[k] == value) idx.push_back(k);
  return idx;
}

inline void check_shape(Eigen::Index rows, Eigen::Index cols, const Dims& dims) {
  const auto d = total_dim(dims);
  if (rows != d || cols != d)
    throw std::invalid_argument("matrix side does not match subsystem dimensions");
}

}  // namespace detail

template <typename DerivedA, typename DerivedB>
Eigen::Matrix<typename DerivedA::Scalar, Eigen::Dynamic, Eigen::Dynamic> kron(
    const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
  using Scalar = typename DerivedA::Scalar;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> out(a.rows() * b.rows(),
                                                            a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) =
          a(i, j) * b.template cast<Scalar>();
  return out;
}

/// Trace out every subsystem k with traced[k] == true.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> partial_trace(
    const Eigen::MatrixBase<Derived>& m, const Dims& dims, const std::vector<bool>& traced) {
  detail::check_shape(m.rows(), m.cols(), dims);
  const auto keep = detail::offsets(dims, detail::selected(traced, false));
  const auto gone = detail::offsets(dims, detail::selected(traced, true));
  const auto n = static_cast<Eigen::Index>(keep.size());
  Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> out(n, n);
  for (Eigen::Index c = 0; c < n; ++c)
    for (Eigen::Index r = 0; r < n; ++r) {
      typename Derived::Scalar acc(0);
      for (Eigen::Index t : gone) acc += m(keep[r] + t, keep[c] + t);
      out(r, c) = acc;
    }
  return out;
}

/// Transpose the subsystems k with transposed[k] == true, leaving the rest.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> partial_transpose(
    const Eigen::MatrixBase<Derived>& m, const Dims& dims,
    const std::vector<bool>& transposed) {
  detail::check_shape(m.rows(), m.cols(), dims);
  const auto st = detail::strides(dims);
  const Eigen::Index d = m.rows();
  std::vector<Eigen::Index> part(static_cast<std::size_t>(d), 0);
  for (Eigen::Index r = 0; r < d; ++r)
    for (std::size_t k = 0; k < dims.size(); ++k)
      if (transposed[k]) part[r] += ((r / st[k]) % dims[k]) * st[k];
  Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> out(d, d);
  for (Eigen::Index c = 0; c < d; ++c)
    for (Eigen::Index r = 0; r < d; ++r)
      out(r - part[r] + part[c], c - part[c] + part[r]) = m(r, c);
  return out;
}

/// Re-express `m` with subsystems in the order perm[0], perm[1], ... where
/// perm[k] is the old position of the subsystem that lands at position k.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> permute_systems(
    const Eigen::MatrixBase<Derived>& m, const Dims& dims, const std::vector<std::size_t>& perm) {
  detail::check_shape(m.rows(), m.cols(), dims);
  const auto map = detail::offsets(dims, perm);
  const auto n = static_cast<Eigen::Index>(map.size());
  Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> out(n, n);
  for (Eigen::Index c = 0; c < n; ++c)
    for (Eigen::Index r = 0; r < n; ++r) out(r, c) = m(map[r], map[c]);
  return out;
}

}  // namespace combkit
