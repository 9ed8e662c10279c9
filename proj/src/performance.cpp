#include "combkit/performance.hpp"

#include <algorithm>
#include <cmath>

#include "combkit/errors.hpp"
#include "combkit/sdp_model.hpp"

namespace combkit {

namespace {

using Eigen::Index;
using Eigen::MatrixXcd;

MatrixXcd herm(const MatrixXcd& a) { return 0.5 * (a + a.adjoint()); }

SystemLabel label(const NetworkSignature& sig, const std::string& name) {
  for (const auto& s : comb_systems(sig))
    if (s.name == name) return s;
  throw InputError("unknown label '" + name + "'");
}

Index dim_of(const std::vector<SystemLabel>& systems) {
  Index d = 1;
  for (const auto& s : systems) d *= s.dim;
  return d;
}

/// Systems of Gamma^(n): the first n-1 teeth, then in{n}.
std::vector<SystemLabel> theta_systems(const NetworkSignature& sig, std::size_t n) {
  auto sys = comb_systems(sig, n - 1);
  sys.push_back(label(sig, in_name(n)));
  return sys;
}

/// I_{name} (x) op, reordered to `order`.
MatrixXcd pad(const NetworkSignature& sig, const std::string& name, const LabeledOperator& op,
              const std::vector<std::string>& order) {
  return reorder(tensor(LabeledOperator::identity({label(sig, name)}), op), order).matrix();
}

double scale_of(const MatrixXcd& omega) {
  const double s = spectral_norm(omega);
  return s > 0 ? s : 1.0;
}

void require_optimal(const SdpSolution& s, const char* what) {
  if (s.status == SdpStatus::optimal) return;
  if (s.status == SdpStatus::infeasible || s.status == SdpStatus::unbounded)
    throw DomainError(std::string(what) + ": solver reported " + to_string(s.status));
  throw SolverError(std::string(what) + ": solver stopped at the iteration limit");
}

/// min Tr[P A] s.t. Tr[P W] = m, 0 <= P <= I, for PSD A and W with
/// 0 < m <= Tr W: bisection on the threshold kappa of {A < kappa W}, then a
/// convex combination of the two bracketing projectors.
MatrixXcd threshold_effect(const MatrixXcd& a, const MatrixXcd& w, double m) {
  // Eigenvalues within roundoff of zero count as zero, so the kernel of `a`
  // enters only through the interpolation below.
  const double na = spectral_norm(a);
  const double nw = spectral_norm(w);
  auto proj = [&](double kappa) {
    const double cut = 1e-12 * (na + kappa * nw);
    const auto e = eig_hermitian(herm(a - kappa * w));
    return spectral_apply(e, [cut](double x) { return x < -cut ? 1.0 : 0.0; });
  };
  auto mass = [&](const MatrixXcd& p) { return (p * w).trace().real(); };
  double lo = 0.0;
  double hi = 1.0;
  MatrixXcd p_hi = proj(hi);
  for (int k = 0; k < 200 && mass(p_hi) < m; ++k) {
    lo = hi;
    hi *= 2;
    p_hi = proj(hi);
  }
  MatrixXcd p_lo = proj(lo);
  for (int k = 0; k < 100; ++k) {
    const double mid = 0.5 * (lo + hi);
    MatrixXcd p = proj(mid);
    if (mass(p) < m) {
      lo = mid;
      p_lo = std::move(p);
    } else {
      hi = mid;
      p_hi = std::move(p);
    }
  }
  const double g_lo = mass(p_lo);
  const double g_hi = mass(p_hi);
  const double t = g_hi > g_lo ? std::clamp((m - g_lo) / (g_hi - g_lo), 0.0, 1.0) : 1.0;
  return (1 - t) * p_lo + t * p_hi;
}

/// The best Omega' for a fixed comb M: remove mass m where M scores least
/// and place it on the top eigenvector of M.
MatrixXcd best_response(const MatrixXcd& omega, const MatrixXcd& comb, double eps) {
  const double m = std::min(eps, omega.trace().real());
  if (m <= 0) return omega;
  const MatrixXcd sq = psd_sqrt(herm(omega));
  const MatrixXcd p = threshold_effect(herm(sq * comb * sq), herm(omega), m);
  const MatrixXcd removed = herm(sq * p * sq);
  const auto e = eig_hermitian(herm(comb));
  const Eigen::VectorXcd v = e.vectors.col(0);
  const double removed_mass = removed.trace().real();
  return herm(omega - removed + removed_mass * (v * v.adjoint()));
}

}  // namespace

PerformanceOperator make_performance_operator(const LabeledOperator& omega,
                                              const NetworkSignature& sig) {
  check_signature(sig);
  PerformanceOperator p;
  p.omega = canonical(omega, sig);
  p.signature = sig;
  if (!is_hermitian(p.omega.matrix())) throw DomainError("performance operator is not Hermitian");
  if (!is_psd(herm(p.omega.matrix())))
    throw DomainError("performance operator is not positive semidefinite");
  return p;
}

PerformanceOperator performance_from_tester(const Tester& t, const std::vector<double>& weights) {
  if (weights.size() != t.outcomes.size())
    throw InputError("performance_from_tester: one weight per outcome is required");
  const auto& sig = t.normalization.signature;
  MatrixXcd acc = MatrixXcd::Zero(sig.total_dim(), sig.total_dim());
  for (std::size_t x = 0; x < weights.size(); ++x)
    acc += weights[x] * canonical(t.outcomes[x].second, sig).matrix();
  PerformanceOperator p;
  p.omega = LabeledOperator(comb_systems(sig), herm(acc));
  p.signature = sig;
  p.tester = t;
  p.weights = weights;
  return p;
}

double reconstruction_residual(const PerformanceOperator& p) {
  if (!p.tester) return 0.0;
  MatrixXcd acc = MatrixXcd::Zero(p.omega.side(), p.omega.side());
  for (std::size_t x = 0; x < p.weights.size(); ++x)
    acc += p.weights[x] * canonical(p.tester->outcomes[x].second, p.signature).matrix();
  return (acc - canonical(p.omega, p.signature).matrix()).norm();
}

double score(const PerformanceOperator& p, const Comb& c) {
  if (!(p.signature == c.signature)) throw InputError("score: signature mismatch");
  const auto v = link_product(canonical(p.omega, p.signature), canonical(c.op, c.signature));
  return v.matrix()(0, 0).real();
}

double lipschitz_factor(const NetworkSignature& sig) {
  return static_cast<double>(sig.prod_out());
}

ScoreResult wmax_primal(const PerformanceOperator& p, const SdpOptions& opts) {
  const auto& sig = p.signature;
  check_signature(sig);
  const std::size_t big_n = sig.size();
  const auto names = comb_names(sig);
  const MatrixXcd omega = herm(canonical(p.omega, sig).matrix());
  const double s = scale_of(omega);

  SdpModel model;
  std::vector<HermVar> theta(big_n + 1);
  std::vector<std::vector<SystemLabel>> systems(big_n + 1);
  for (std::size_t n = 1; n <= big_n; ++n) {
    systems[n] = theta_systems(sig, n);
    theta[n] = model.add_hermitian(dim_of(systems[n]));
  }
  model.add_cost(theta[1], MatrixXcd::Identity(theta[1].dim, theta[1].dim));

  AffineHermitian lmi(sig.total_dim());
  lmi.add_mapped(theta[big_n], [&sig, &names, sys = systems[big_n], big_n](const MatrixXcd& b) {
    return pad(sig, out_name(big_n), LabeledOperator(sys, b), names);
  });
  lmi.add_constant(-omega / s);
  model.add_psd(lmi);

  for (std::size_t n = big_n; n >= 2; --n) {
    const auto lower_names = comb_names(sig, n - 1);
    AffineHermitian eq(dim_of(comb_systems(sig, n - 1)));
    eq.add_mapped(theta[n], [sys = systems[n], n](const MatrixXcd& b) {
      return partial_trace(LabeledOperator(sys, b), {in_name(n)}).matrix();
    });
    eq.add_mapped(theta[n - 1], [&sig, lower_names, sys = systems[n - 1], n](const MatrixXcd& b) {
      return MatrixXcd(-pad(sig, out_name(n - 1), LabeledOperator(sys, b), lower_names));
    });
    model.add_zero(eq);
  }

  ScoreResult r;
  r.certificate = solve(model.problem(), opts);
  require_optimal(r.certificate, "wmax_primal");
  r.value = r.upper = r.certificate.primal_value * s;
  r.lower = r.certificate.dual_value * s;
  const MatrixXcd th = SdpModel::value(theta[big_n], r.certificate.y);
  const double lam = r.certificate.primal_value;
  const MatrixXcd gamma = pad(sig, out_name(big_n), LabeledOperator(systems[big_n], th), names);
  r.optimizer = LabeledOperator(comb_systems(sig), lam > 0 ? MatrixXcd(gamma / lam) : gamma);
  r.witness = LabeledOperator(comb_systems(sig), herm(r.certificate.dual_blocks.at(0)));
  return r;
}

ScoreResult wmax_dual(const PerformanceOperator& p, const SdpOptions& opts) {
  const auto& sig = p.signature;
  check_signature(sig);
  const std::size_t big_n = sig.size();
  const MatrixXcd omega = herm(canonical(p.omega, sig).matrix());
  const double s = scale_of(omega);

  SdpModel model;
  std::vector<HermVar> level(big_n + 1);
  std::vector<std::vector<SystemLabel>> systems(big_n + 1);
  for (std::size_t k = 1; k <= big_n; ++k) {
    systems[k] = comb_systems(sig, k);
    level[k] = model.add_hermitian(dim_of(systems[k]));
  }
  model.add_cost(level[big_n], -omega / s);
  AffineHermitian pos(sig.total_dim());
  pos.add_var(level[big_n]);
  model.add_psd(pos);

  // Tr_{out k} M^(k) = M^(k-1) (x) I_{in k}, M^(0) = 1.
  for (std::size_t k = big_n; k >= 1; --k) {
    auto reduced = comb_systems(sig, k - 1);
    reduced.push_back(label(sig, in_name(k)));
    AffineHermitian eq(dim_of(reduced));
    eq.add_mapped(level[k], [sys = systems[k], k](const MatrixXcd& b) {
      return partial_trace(LabeledOperator(sys, b), {out_name(k)}).matrix();
    });
    const Index d_in = sig.teeth[k - 1].d_in;
    const MatrixXcd id = MatrixXcd::Identity(d_in, d_in);
    if (k == 1) {
      eq.add_constant(-id);
    } else {
      eq.add_mapped(level[k - 1], [id](const MatrixXcd& b) -> MatrixXcd { return -kron(b, id); });
    }
    model.add_zero(eq);
  }

  ScoreResult r;
  r.certificate = solve(model.problem(), opts);
  require_optimal(r.certificate, "wmax_dual");
  r.value = r.lower = -r.certificate.primal_value * s;
  r.upper = -r.certificate.dual_value * s;
  r.optimizer = LabeledOperator(comb_systems(sig), SdpModel::value(level[big_n], r.certificate.y));
  return r;
}

SmoothBracket wmax_smooth(const PerformanceOperator& p, double eps, int iters,
                          const SdpOptions& opts) {
  if (eps < 0) throw InputError("wmax_smooth: eps must be nonnegative");
  const auto& sig = p.signature;
  const MatrixXcd omega = herm(canonical(p.omega, sig).matrix());
  auto base = wmax_primal(p, opts);
  SmoothBracket b;
  b.lower = base.lower;
  b.upper = base.upper + eps * lipschitz_factor(sig);
  b.omega_prime = canonical(p.omega, sig);
  if (eps == 0) return b;

  MatrixXcd comb = base.witness.matrix();
  for (int k = 0; k < iters; ++k) {
    const MatrixXcd cand = best_response(omega, comb, eps);
    PerformanceOperator q = p;
    q.omega = LabeledOperator(comb_systems(sig), cand);
    q.tester.reset();
    const auto res = wmax_primal(q, opts);
    ++b.rounds;
    const bool better = res.lower > b.lower * (1 + 1e-12);
    if (res.lower > b.lower) {
      b.lower = res.lower;
      b.omega_prime = q.omega;
    }
    comb = res.witness.matrix();
    if (!better) break;
  }
  return b;
}

PerformanceOperator tensor_power(const PerformanceOperator& p, int n) {
  PerformanceOperator q;
  q.signature = tensor_power(p.signature, n);
  q.omega = canonical(tensor_power(p.omega, p.signature, n), q.signature);
  return q;
}

MultiplicativityReport multiplicativity_check(const PerformanceOperator& p, int n, double rel_tol,
                                              const SdpOptions& opts) {
  if (n < 1 || n > 3) throw InputError("multiplicativity_check: n must lie in 1..3");
  const NetworkSignature big = tensor_power(p.signature, n);
  if (big.total_dim() > opts.max_block_dim)
    throw InputError("multiplicativity_check: tensor power exceeds the solver block cap");
  MultiplicativityReport r;
  r.n = n;
  r.wmax = wmax_primal(p, opts).value;
  r.wmax_power = n == 1 ? r.wmax : wmax_primal(tensor_power(p, n), opts).value;
  const double expected = std::pow(r.wmax, n);
  r.relative_difference = std::abs(r.wmax_power - expected) / std::max(std::abs(expected), 1e-300);
  r.ok = r.relative_difference <= rel_tol;
  return r;
}

std::vector<SeriesRow> asymptotic_series(const PerformanceOperator& p, double eps, int n_max,
                                         int iters, const SdpOptions& opts) {
  if (n_max < 1 || n_max > 3) throw InputError("asymptotic_series: n_max must lie in 1..3");
  const double w = wmax_primal(p, opts).value;
  std::vector<SeriesRow> rows;
  for (int n = 1; n <= n_max; ++n) {
    const NetworkSignature big = tensor_power(p.signature, n);
    if (big.total_dim() > opts.max_block_dim) break;
    SeriesRow row;
    row.n = n;
    row.wmax_pow = std::pow(w, n);
    const auto br = wmax_smooth(n == 1 ? p : tensor_power(p, n), eps, iters, opts);
    row.lower = br.lower;
    row.upper = br.upper;
    row.bound = eps * lipschitz_factor(big) + row.wmax_pow;
    row.rate_lower = std::log2(row.lower) / n;
    row.rate_upper = std::log2(row.upper) / n;
    const double tol = 1e-5 * std::max(1.0, row.bound);
    row.left = check_leq(row.wmax_pow, row.lower, tol, true);
    row.middle = check_leq(row.lower, row.upper, tol, true);
    row.right = check_leq(row.upper, row.bound, tol, true);
    rows.push_back(row);
  }
  return rows;
}

LipschitzReport lipschitz_check(const PerformanceOperator& m1, const PerformanceOperator& m2,
                                const SdpOptions& opts) {
  if (!(m1.signature == m2.signature)) throw InputError("lipschitz_check: signature mismatch");
  const auto& sig = m1.signature;
  const LabeledOperator a = canonical(m1.omega, sig);
  const LabeledOperator b = canonical(m2.omega, sig);
  const double ta = a.trace().real();
  const double tb = b.trace().real();
  if (std::abs(ta - tb) > 1e-9 * std::max(1.0, std::abs(ta)))
    throw InputError("lipschitz_check: operators must have equal trace");
  const auto w1 = wmax_primal(m1, opts);
  const auto w2 = wmax_primal(m2, opts);
  LipschitzReport r;
  r.difference = std::max({w1.upper - w2.lower, w2.upper - w1.lower, 0.0});
  r.trace_distance = trace_distance(a, b);
  r.factor = lipschitz_factor(sig);
  r.check = check_leq(r.difference, r.factor * r.trace_distance,
                      1e-6 * std::max({1.0, w1.upper, w2.upper, spectral_norm(a.matrix()),
                                       spectral_norm(b.matrix())}),
                      true);
  return r;
}

}  // namespace combkit
