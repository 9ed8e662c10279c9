#include "combkit/entropy.hpp"

#include <algorithm>
#include <cmath>

#include "combkit/errors.hpp"
#include "combkit/multipartite.hpp"
#include "combkit/sdp_model.hpp"

namespace combkit {

namespace {

using Eigen::Index;
using Eigen::MatrixXcd;

MatrixXcd herm(const MatrixXcd& a) { return 0.5 * (a + a.adjoint()); }

void require_psd(const MatrixXcd& a, const char* what) {
  if (!is_hermitian(a)) throw DomainError(std::string(what) + " is not Hermitian");
  if (!is_psd(herm(a))) throw DomainError(std::string(what) + " is not positive semidefinite");
}

double log2_or_inf(double t) {
  if (!std::isfinite(t)) return kInf;
  if (t <= 0) return -kInf;
  return std::log2(t);
}

/// The solution must be optimal; infeasibility maps to +inf.
bool usable(const SdpSolution& s, const char* what) {
  switch (s.status) {
    case SdpStatus::optimal: return true;
    case SdpStatus::infeasible: return false;
    case SdpStatus::unbounded:
      throw SolverError(std::string(what) + ": solver reported an unbounded problem");
    case SdpStatus::max_iter:
      throw SolverError(std::string(what) + ": solver stopped at the iteration limit");
  }
  return false;
}

/// Shared part of the smoothing SDPs: C = V X V^dagger with X PSD on the
/// support of sigma, C <= t sigma, and 1/2 ||C - rho||_1 <= eps written as
/// P >= 0, P >= C - rho, Tr P <= eps (valid because Tr C = Tr rho).
struct SmoothingModel {
  SdpModel model;
  std::size_t t = 0;
  HermVar x;
  HermVar p;
  MatrixXcd v;

  SmoothingModel(const MatrixXcd& rho, const MatrixXcd& sigma, double eps) {
    v = support_basis(sigma);
    if (v.cols() == sigma.rows()) v = MatrixXcd::Identity(sigma.rows(), sigma.rows());
    const Index r = v.cols();
    const Index d = rho.rows();
    const MatrixXcd sig_r = herm(v.adjoint() * sigma * v);
    t = model.add_scalar();
    x = model.add_hermitian(r);
    p = model.add_hermitian(d);
    model.add_cost(t, 1.0);

    AffineHermitian xpos(r);
    xpos.add_var(x);
    model.add_psd(xpos);

    AffineHermitian dom(r);
    dom.add_scalar(t, sig_r).add_var(x, -1.0);
    model.add_psd(dom);

    AffineHermitian ppos(d);
    ppos.add_var(p);
    model.add_psd(ppos);

    const MatrixXcd vv = v;
    AffineHermitian pdom(d);
    pdom.add_var(p).add_mapped(x, [vv](const MatrixXcd& b) -> MatrixXcd {
      return -(vv * b * vv.adjoint());
    });
    pdom.add_constant(herm(rho));
    model.add_psd(pdom);

    AffineHermitian budget(1);
    for (Index k = 0; k < d; ++k) budget.add_scalar(p.offset + static_cast<std::size_t>(k),
                                                    -MatrixXcd::Identity(1, 1));
    budget.add_constant(eps * MatrixXcd::Identity(1, 1));
    model.add_psd(budget);
  }

  MatrixXcd embed(const Eigen::VectorXd& y) const { return v * SdpModel::value(x, y) * v.adjoint(); }
};

SmoothResult finish_smooth(const SmoothingModel& sm, const SdpSolution& s, const char* what) {
  SmoothResult r;
  r.certificate = s;
  if (!usable(s, what)) {
    r.value = kInf;
    r.lower = kInf;
    return r;
  }
  r.value = log2_or_inf(s.primal_value);
  r.lower = log2_or_inf(std::max(s.dual_value, 0.0));
  r.optimizer = sm.embed(s.y);
  return r;
}

std::vector<bool> mask_one(std::size_t n, std::size_t k) {
  std::vector<bool> m(n, false);
  m[k] = true;
  return m;
}

}  // namespace

// ---------------------------------------------------------------------------

double dmax_spectral(const MatrixXcd& m, const MatrixXcd& n) {
  if (m.rows() != n.rows() || m.cols() != n.cols())
    throw InputError("dmax: operands have different dimensions");
  if (!support_contains(m, n)) return kInf;
  const MatrixXcd v = support_basis(n);
  const MatrixXcd nr = herm(v.adjoint() * n * v);
  const MatrixXcd mr = herm(v.adjoint() * m * v);
  const auto en = eig_hermitian(nr);
  const MatrixXcd inv_sqrt =
      spectral_apply(en, [](double x) { return x > 0 ? 1.0 / std::sqrt(x) : 0.0; });
  const auto e = eig_hermitian(herm(inv_sqrt * mr * inv_sqrt));
  return log2_or_inf(std::max(e.values(0), 0.0));
}

double dmax_sdp(const MatrixXcd& m, const MatrixXcd& n, const SdpOptions& opts) {
  if (!support_contains(m, n)) return kInf;
  const MatrixXcd v = support_basis(n);
  // Normalized data keep the optimum of order one.
  const double sm = std::max(spectral_norm(m), 1e-300);
  const double sn = spectral_norm(n);
  const MatrixXcd nr = herm(v.adjoint() * n * v) / sn;
  const MatrixXcd mr = herm(v.adjoint() * m * v) / sm;
  SdpModel model;
  const auto t = model.add_scalar();
  model.add_cost(t, 1.0);
  AffineHermitian e(nr.rows());
  e.add_scalar(t, nr).add_constant(-mr);
  model.add_psd(e);
  const auto s = solve(model.problem(), opts);
  if (!usable(s, "dmax")) return kInf;
  return log2_or_inf(s.primal_value) + std::log2(sm) - std::log2(sn);
}

DmaxReport dmax_report(const LabeledOperator& m, const LabeledOperator& n) {
  const LabeledOperator na = aligned_to(m, n);
  require_psd(m.matrix(), "dmax: first operand");
  require_psd(na.matrix(), "dmax: second operand");
  DmaxReport r;
  r.value = dmax_spectral(m.matrix(), na.matrix());
  r.sdp = dmax_sdp(m.matrix(), na.matrix());
  r.difference = (std::isinf(r.value) && r.value == r.sdp) ? 0.0 : std::abs(r.value - r.sdp);
  return r;
}

double dmax(const LabeledOperator& m, const LabeledOperator& n) {
  const auto r = dmax_report(m, n);
  if (!(r.difference <= 1e-6))
    throw SolverError("dmax: closed form and SDP disagree by " + std::to_string(r.difference));
  return r.value;
}

// ---------------------------------------------------------------------------

SmoothResult dmax_smooth_state(const MatrixXcd& rho, const MatrixXcd& sigma, double eps,
                               const SdpOptions& opts) {
  if (eps < 0) throw InputError("smoothing parameter must be nonnegative");
  if (rho.rows() != sigma.rows()) throw InputError("dmax_smooth_state: dimension mismatch");
  if (eps == 0.0) {
    SmoothResult r;
    r.value = r.lower = dmax_spectral(rho, sigma);
    r.optimizer = rho;
    return r;
  }
  SmoothingModel sm(rho, sigma, eps);
  std::vector<std::pair<std::size_t, double>> tr;
  for (Index k = 0; k < sm.x.dim; ++k) tr.emplace_back(sm.x.offset + static_cast<std::size_t>(k), 1.0);
  sm.model.add_equality(tr, rho.trace().real());
  return finish_smooth(sm, solve(sm.model.problem(), opts), "dmax_smooth_state");
}

SmoothResult dmax_smooth_comb(const Comb& m, const Comb& n, double eps, const SdpOptions& opts) {
  if (eps < 0 || eps >= 1) throw InputError("smoothing parameter must lie in [0, 1)");
  if (!(m.signature == n.signature)) throw InputError("dmax_smooth_comb: signature mismatch");
  const auto& sig = m.signature;
  const LabeledOperator mc = canonical(m.op, sig);
  const LabeledOperator nc = canonical(n.op, sig);
  if (eps == 0.0) {
    SmoothResult r;
    r.value = r.lower = dmax_spectral(mc.matrix(), nc.matrix());
    r.optimizer = mc.matrix();
    return r;
  }
  SmoothingModel sm(mc.matrix(), nc.matrix(), eps);

  // Comb hierarchy Tr_{out n} M^(n) = M^(n-1) (x) I_{in n}, M^(N) = V X V^dagger,
  // M^(0) = 1, with auxiliary Hermitian M^(1..N-1).
  const std::size_t nt = sig.size();
  std::vector<HermVar> level(nt + 1);
  for (std::size_t k = 1; k < nt; ++k) {
    Index dk = 1;
    for (std::size_t j = 0; j < k; ++j) dk *= sig.teeth[j].d_in * sig.teeth[j].d_out;
    level[k] = sm.model.add_hermitian(dk);
  }
  for (std::size_t k = nt; k >= 1; --k) {
    Dims dims;
    for (std::size_t j = 0; j < k; ++j) {
      dims.push_back(sig.teeth[j].d_out);
      dims.push_back(sig.teeth[j].d_in);
    }
    const Index d_in = sig.teeth[k - 1].d_in;
    const auto traced = mask_one(dims.size(), 2 * (k - 1));
    Index reduced = 1;
    for (std::size_t j = 0; j < dims.size(); ++j)
      if (!traced[j]) reduced *= dims[j];
    AffineHermitian eq(reduced);
    if (k == nt) {
      const MatrixXcd vv = sm.v;
      eq.add_mapped(sm.x, [vv, dims, traced](const MatrixXcd& b) -> MatrixXcd {
        return partial_trace(vv * b * vv.adjoint(), dims, traced);
      });
    } else {
      eq.add_mapped(level[k], [dims, traced](const MatrixXcd& b) -> MatrixXcd {
        return partial_trace(b, dims, traced);
      });
    }
    const MatrixXcd id = MatrixXcd::Identity(d_in, d_in);
    if (k == 1) {
      eq.add_constant(-id);
    } else {
      eq.add_mapped(level[k - 1], [id](const MatrixXcd& b) -> MatrixXcd { return -kron(b, id); });
    }
    sm.model.add_zero(eq);
  }
  auto r = finish_smooth(sm, solve(sm.model.problem(), opts), "dmax_smooth_comb");
  return r;
}

SmoothResult dmax_smooth(const SmoothingBall& ball, const LabeledOperator& n, const SdpOptions& opts) {
  if (ball.constraint == SmoothingConstraint::comb_constrained)
    return dmax_smooth_comb(Comb{ball.center, ball.signature}, Comb{n, ball.signature},
                            ball.epsilon, opts);
  const LabeledOperator na = aligned_to(ball.center, n);
  return dmax_smooth_state(ball.center.matrix(), na.matrix(), ball.epsilon, opts);
}

// ---------------------------------------------------------------------------

LabeledOperator gamma_twirl(const DualCombElement& gamma, const LabeledOperator& c) {
  const LabeledOperator cc = canonical(c, gamma.signature);
  const LabeledOperator g = canonical(gamma.op, gamma.signature);
  const MatrixXcd sq = psd_sqrt(herm(g.matrix()));
  return g.with_matrix(herm(sq * cc.matrix() * sq));
}

TwirledPair twirl_pair(const Comb& c0, const Comb& c1, const DualCombElement& gamma) {
  if (!(c0.signature == c1.signature) || !(c0.signature == gamma.signature))
    throw InputError("twirl: signature mismatch");
  const LabeledOperator g = canonical(gamma.op, gamma.signature);
  const MatrixXcd sq = psd_sqrt(herm(g.matrix()));
  const MatrixXcd a = canonical(c0.op, c0.signature).matrix();
  const MatrixXcd b = canonical(c1.op, c1.signature).matrix();
  return {herm(sq * a * sq), herm(sq * b * sq)};
}

double delta_trace(const TwirledPair& p, double lambda) {
  if (lambda < 0) throw InputError("lambda must be nonnegative");
  const auto e = eig_hermitian(herm(p.rho - lambda * p.sigma));
  double s = 0.0;
  for (Index i = 0; i < e.values.size(); ++i)
    if (e.values(i) > 0) s += e.values(i);
  return s;
}

double delta_trace(const Comb& c0, const Comb& c1, const DualCombElement& gamma, double lambda) {
  return delta_trace(twirl_pair(c0, c1, gamma), lambda);
}

double g_from_trace(double t) { return std::sqrt(std::max(0.0, t * (2.0 - t))); }

double g_of_lambda(const Comb& c0, const Comb& c1, const DualCombElement& gamma, double lambda) {
  return g_from_trace(delta_trace(c0, c1, gamma, lambda));
}

double lambda_for_target(const TwirledPair& p, double target, LambdaTarget which) {
  if (!(target > 0 && target < 1)) throw InputError("target must lie strictly between 0 and 1");
  // g = sqrt(t (2 - t)) is increasing in t on [0, 1], so a g-target is a
  // trace target 1 - sqrt(1 - g^2).
  const double t = which == LambdaTarget::g ? 1.0 - std::sqrt(1.0 - target * target) : target;
  double lo = 0.0;
  double hi = std::exp2(dmax_spectral(p.rho, p.sigma));
  if (!std::isfinite(hi)) {
    hi = 1.0;
    while (delta_trace(p, hi) > t) {
      hi *= 2;
      if (hi > 1e15) throw DomainError("lambda_for_target: target not reachable (support violation)");
    }
  }
  while (hi - lo > 1e-10) {
    const double mid = 0.5 * (lo + hi);
    if (delta_trace(p, mid) > t)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

double lambda_for_target(const Comb& c0, const Comb& c1, const DualCombElement& gamma,
                         double target, LambdaTarget which) {
  return lambda_for_target(twirl_pair(c0, c1, gamma), target, which);
}

double rel_entropy(const MatrixXcd& rho, const MatrixXcd& sigma) {
  if (rho.rows() != sigma.rows()) throw InputError("rel_entropy: dimension mismatch");
  if (!support_contains(rho, sigma)) return kInf;
  const auto er = eig_hermitian(herm(rho));
  const auto es = eig_hermitian(herm(sigma));
  const double cut_r = kTolPsd * std::max(1.0, er.values.cwiseAbs().maxCoeff());
  const double cut_s = kTolPsd * std::max(1.0, es.values.cwiseAbs().maxCoeff());
  double s = 0.0;
  for (Index i = 0; i < er.values.size(); ++i)
    if (er.values(i) > cut_r) s += er.values(i) * std::log2(er.values(i));
  const MatrixXcd log_sigma =
      spectral_apply(es, [cut_s](double x) { return x > cut_s ? std::log2(x) : 0.0; });
  s -= (rho * log_sigma).trace().real();
  return s;
}

// ---------------------------------------------------------------------------

namespace {

bool dual_comb_set_is_point(const NetworkSignature& sig) {
  return sig.size() == 1 && sig.teeth[0].d_in == 1;
}

MatrixXcd bloch_state(const Eigen::Vector3d& r) {
  MatrixXcd s(2, 2);
  s << std::complex<double>(1 + r(2), 0), std::complex<double>(r(0), -r(1)),
      std::complex<double>(r(0), r(1)), std::complex<double>(1 - r(2), 0);
  return 0.5 * s;
}

Eigen::Vector3d into_ball(Eigen::Vector3d r) {
  const double n = r.norm();
  if (n > 1) r /= n;
  return r;
}

struct Tracker {
  const GammaObjective& f;
  GammaSearchResult best;

  double eval(const DualCombElement& g) {
    const double v = f(g);
    ++best.evaluations;
    if (v > best.value || best.evaluations == 1) {
      best.value = v;
      best.gamma = g;
    }
    return v;
  }
};

GammaSearchResult bloch_search(const NetworkSignature& sig, const GammaObjective& f,
                               const GammaSearchConfig& cfg) {
  Tracker tr{f, {}};
  auto at = [&](const Eigen::Vector3d& r) {
    return tr.eval(dual_comb_from_state(sig, bloch_state(r)));
  };
  // Coarse scan of the ball.
  std::vector<std::pair<double, Eigen::Vector3d>> coarse;
  const int k = 3;
  for (int a = -k; a <= k; ++a)
    for (int b = -k; b <= k; ++b)
      for (int c = -k; c <= k; ++c) {
        const Eigen::Vector3d r(a / double(k), b / double(k), c / double(k));
        if (r.norm() > 1 + 1e-12) continue;
        coarse.emplace_back(at(into_ball(r)), into_ball(r));
        if (coarse.back().first == kInf) return tr.best;
      }
  std::stable_sort(coarse.begin(), coarse.end(),
                   [](const auto& x, const auto& y) { return x.first > y.first; });
  // Pattern search from the best coarse points: step grid_step, then refine.
  const std::size_t starts = std::min<std::size_t>(3, coarse.size());
  for (std::size_t s = 0; s < starts; ++s) {
    Eigen::Vector3d r = coarse[s].second;
    double v = coarse[s].first;
    for (double step = cfg.grid_step; step >= cfg.grid_step / 64; step /= 4) {
      bool moved = true;
      int guard = 0;
      while (moved && guard++ < 200) {
        moved = false;
        for (int axis = 0; axis < 3; ++axis)
          for (int sign : {-1, 1}) {
            Eigen::Vector3d q = r;
            q(axis) += sign * step;
            q = into_ball(q);
            if ((q - r).norm() < 1e-15) continue;
            const double w = at(q);
            if (w == kInf) return tr.best;
            if (w > v + 1e-12) {
              v = w;
              r = q;
              moved = true;
            }
          }
      }
    }
  }
  return tr.best;
}

}  // namespace

std::vector<DualCombElement> sample_dual_combs(const NetworkSignature& sig,
                                               const GammaSearchConfig& cfg) {
  std::vector<DualCombElement> out;
  out.push_back(maximally_mixed_dual_comb(sig));
  if (dual_comb_set_is_point(sig)) return out;
  RandomOptions ro;
  ro.memory_dim = cfg.memory_dim;
  for (int k = 0; k < cfg.samples; ++k) {
    Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(k)));
    out.push_back(dual_comb_of(random_tester_circuit(sig, rng, ro)));
  }
  return out;
}

GammaSearchResult maximize_over_dual_combs(const NetworkSignature& sig, const GammaObjective& f,
                                           const GammaSearchConfig& cfg) {
  check_signature(sig);
  if (dual_comb_set_is_point(sig)) {
    Tracker tr{f, {}};
    tr.eval(maximally_mixed_dual_comb(sig));
    tr.best.exhaustive = true;
    return tr.best;
  }
  if (cfg.bloch_grid && sig.size() == 1 && sig.teeth[0].d_in == 2) return bloch_search(sig, f, cfg);

  Tracker tr{f, {}};
  tr.eval(maximally_mixed_dual_comb(sig));
  RandomOptions ro;
  ro.memory_dim = cfg.memory_dim;
  TesterCircuit best_circuit;
  double best_circuit_value = -kInf;
  for (int k = 0; k < cfg.samples; ++k) {
    Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(k)));
    TesterCircuit c = random_tester_circuit(sig, rng, ro);
    const double v = tr.eval(dual_comb_of(c));
    if (k == 0 || v > best_circuit_value) {
      best_circuit_value = v;
      best_circuit = std::move(c);
    }
    if (v == kInf) return tr.best;
  }
  if (cfg.samples < 1) return tr.best;

  // Coordinate ascent over the circuit generators.
  Rng rng(derive_seed(cfg.seed, 0xA5CE47ULL));
  double step = cfg.step_size;
  for (int round = 0; round < cfg.ascent_steps; ++round) {
    bool improved = false;
    for (std::size_t j = 0; j < best_circuit.generators(); ++j) {
      TesterCircuit cand = perturbed(best_circuit, j, step, rng);
      const double v = tr.eval(dual_comb_of(cand));
      if (v > best_circuit_value) {
        best_circuit_value = v;
        best_circuit = std::move(cand);
        improved = true;
      }
      if (v == kInf) return tr.best;
    }
    if (!improved) step *= 0.5;
  }
  return tr.best;
}

double dmax_tilde_at(const TwirledPair& p, double eps, const SdpOptions& opts) {
  return dmax_smooth_state(p.rho, p.sigma, eps, opts).lower;
}

double dmax_tilde_at(const Comb& c0, const Comb& c1, double eps, const DualCombElement& gamma,
                     const SdpOptions& opts) {
  return dmax_tilde_at(twirl_pair(c0, c1, gamma), eps, opts);
}

GammaSearchResult dmax_tilde_lower(const Comb& c0, const Comb& c1, double eps,
                                   const GammaSearchConfig& cfg) {
  if (eps < 0) throw InputError("smoothing parameter must be nonnegative");
  if (!(c0.signature == c1.signature)) throw InputError("dmax_tilde_lower: signature mismatch");
  const auto opts = SdpOptions::from_env();
  return maximize_over_dual_combs(
      c0.signature,
      [&](const DualCombElement& g) { return dmax_tilde_at(c0, c1, eps, g, opts); }, cfg);
}

GammaSearchResult theorem4_rhs(const Comb& c0, const Comb& c1, const GammaSearchConfig& cfg) {
  if (!(c0.signature == c1.signature)) throw InputError("theorem4_rhs: signature mismatch");
  return maximize_over_dual_combs(
      c0.signature,
      [&](const DualCombElement& g) {
        const auto p = twirl_pair(c0, c1, g);
        return rel_entropy(p.rho, p.sigma);
      },
      cfg);
}

}  // namespace combkit
