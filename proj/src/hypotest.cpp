#include "combkit/hypotest.hpp"

#include <algorithm>
#include <cmath>

#include "combkit/errors.hpp"
#include "combkit/sdp_model.hpp"

namespace combkit {

namespace {

using Eigen::Index;
using Eigen::MatrixXcd;

MatrixXcd herm(const MatrixXcd& a) { return 0.5 * (a + a.adjoint()); }

void check_instance(const TestingInstance& inst) {
  if (!(inst.c0.signature == inst.c1.signature))
    throw InputError("testing instance: signature mismatch");
  if (!(inst.epsilon > 0 && inst.epsilon < 1))
    throw InputError("testing instance: epsilon must lie in (0, 1)");
}

double minus_log2(double beta) {
  if (!(beta > 0)) return kInf;
  return -std::log2(beta);
}

}  // namespace

ErrorPair errors_of_strategy(const TestingInstance& inst, const TestStrategy& strat) {
  if (!(inst.c0.signature == inst.c1.signature) || !(inst.c0.signature == strat.gamma.signature))
    throw InputError("errors_of_strategy: signature mismatch");
  const auto& sig = strat.gamma.signature;
  const MatrixXcd pi = canonical(strat.pi, sig).matrix();
  if (!is_hermitian(pi)) throw DomainError("errors_of_strategy: Pi is not Hermitian");
  const MatrixXcd id = MatrixXcd::Identity(pi.rows(), pi.rows());
  if (min_eigenvalue(herm(pi)) < -kTolPsd || min_eigenvalue(herm(id - pi)) < -kTolPsd)
    throw DomainError("errors_of_strategy: Pi must satisfy 0 <= Pi <= I");
  const auto p = twirl_pair(inst.c0, inst.c1, strat.gamma);
  ErrorPair e;
  e.alpha = ((id - pi) * p.rho).trace().real();
  e.beta = (pi * p.sigma).trace().real();
  return e;
}

BetaResult beta_states(const MatrixXcd& rho, const MatrixXcd& sigma, double eps,
                       const SdpOptions& opts) {
  if (!(eps > 0 && eps < 1)) throw InputError("beta: epsilon must lie in (0, 1)");
  if (rho.rows() != sigma.rows()) throw InputError("beta: dimension mismatch");
  const Index d = rho.rows();
  BetaResult r;

  // Mass of rho on the kernel of sigma.
  const MatrixXcd supp = support_basis(sigma);
  const MatrixXcd ker = MatrixXcd::Identity(d, d) - supp * supp.adjoint();
  if ((ker * rho).trace().real() >= 1.0 - eps) {
    r.beta = r.beta_lower = 0.0;
    r.pi = ker;
    r.certificate.status = SdpStatus::optimal;
    return r;
  }

  SdpModel model;
  const HermVar pi = model.add_hermitian(d);
  model.add_cost(pi, herm(sigma));
  AffineHermitian lo(d);
  lo.add_var(pi);
  model.add_psd(lo);
  AffineHermitian hi(d);
  hi.add_var(pi, -1.0).add_constant(MatrixXcd::Identity(d, d));
  model.add_psd(hi);
  const MatrixXcd rh = herm(rho);
  AffineHermitian acc(1);
  acc.add_mapped(pi, [rh](const MatrixXcd& b) -> MatrixXcd {
    return MatrixXcd::Constant(1, 1, (b * rh).trace().real());
  });
  acc.add_constant(MatrixXcd::Constant(1, 1, -(1.0 - eps)));
  model.add_psd(acc);

  r.certificate = solve(model.problem(), opts);
  if (r.certificate.status != SdpStatus::optimal)
    throw SolverError("beta: solver finished with status " + to_string(r.certificate.status));
  r.pi = SdpModel::value(pi, r.certificate.y);
  r.beta = std::max(0.0, r.certificate.primal_value);
  r.beta_lower = std::max(0.0, r.certificate.dual_value);
  return r;
}

BetaResult beta_fixed_gamma(const TestingInstance& inst, const DualCombElement& gamma,
                            const SdpOptions& opts) {
  check_instance(inst);
  const auto p = twirl_pair(inst.c0, inst.c1, gamma);
  return beta_states(p.rho, p.sigma, inst.epsilon, opts);
}

BetaMinResult beta_min(const TestingInstance& inst, const GammaSearchConfig& cfg) {
  check_instance(inst);
  const auto opts = SdpOptions::from_env();
  const auto found = maximize_over_dual_combs(
      inst.c0.signature,
      [&](const DualCombElement& g) { return -beta_fixed_gamma(inst, g, opts).beta; }, cfg);
  BetaMinResult r;
  r.evaluations = found.evaluations;
  r.exhaustive = found.exhaustive;
  const auto best = beta_fixed_gamma(inst, found.gamma, opts);
  r.beta_upper = best.beta;
  const LabeledOperator g = canonical(found.gamma.op, found.gamma.signature);
  r.strategy = {found.gamma, g.with_matrix(best.pi)};
  return r;
}

TestStrategy projector_strategy(const TestingInstance& inst, const DualCombElement& gamma,
                                double lambda) {
  if (lambda < 0) throw InputError("projector_strategy: lambda must be nonnegative");
  const auto p = twirl_pair(inst.c0, inst.c1, gamma);
  const LabeledOperator g = canonical(gamma.op, gamma.signature);
  return {gamma, g.with_matrix(projector_geq(p.rho, lambda * p.sigma))};
}

SandwichReport theorem3_sandwich(const TestingInstance& inst, double eps_prime,
                                 const GammaSearchConfig& cfg, double margin) {
  check_instance(inst);
  const double eps = inst.epsilon;
  if (!(eps_prime > 0 && eps_prime < eps))
    throw InputError("theorem3_sandwich: requires 0 < eps' < eps");
  const auto opts = SdpOptions::from_env();
  SandwichReport r;
  r.eps = eps;
  r.eps_prime = eps_prime;
  r.f_eps = std::sqrt(1.0 - (1.0 - eps) * (1.0 - eps));
  r.log_term = std::log2(1.0 / (eps - eps_prime));

  TestingInstance flipped = inst;
  flipped.epsilon = 1.0 - eps;

  struct AtGamma {
    double dtilde_f_upper;   // primal value of the f(eps)-smoothed program
    double mlb_lower;        // -log2 of the primal beta
    double mlb_upper;        // -log2 of the dual beta
    double dtilde_prime;     // dual value of the eps'-smoothed program
  };
  auto evaluate = [&](const DualCombElement& g) {
    const auto p = twirl_pair(inst.c0, inst.c1, g);
    const auto b = beta_states(p.rho, p.sigma, flipped.epsilon, opts);
    return AtGamma{dmax_smooth_state(p.rho, p.sigma, r.f_eps, opts).value, minus_log2(b.beta),
                   minus_log2(b.beta_lower), dmax_smooth_state(p.rho, p.sigma, eps_prime, opts).lower};
  };

  const auto ga = maximize_over_dual_combs(
      inst.c0.signature,
      [&](const DualCombElement& g) { return dmax_tilde_at(twirl_pair(inst.c0, inst.c1, g), r.f_eps, opts); },
      cfg);
  const auto gb = beta_min(flipped, cfg);
  const auto gc = maximize_over_dual_combs(
      inst.c0.signature,
      [&](const DualCombElement& g) {
        return dmax_tilde_at(twirl_pair(inst.c0, inst.c1, g), eps_prime, opts);
      },
      cfg);
  r.exhaustive = ga.exhaustive && gb.exhaustive && gc.exhaustive;

  const AtGamma a = evaluate(ga.gamma);
  const AtGamma b = evaluate(gb.strategy.gamma);
  const AtGamma c = evaluate(gc.gamma);

  // Lower inequality on the Gammas {a, b}; upper inequality on {b, c}.
  r.dtilde_f = std::max(a.dtilde_f_upper, b.dtilde_f_upper);
  r.minus_log_beta = std::max({a.mlb_lower, b.mlb_lower, c.mlb_lower});
  r.lower = check_leq(r.dtilde_f, std::max(a.mlb_lower, b.mlb_lower), margin, r.exhaustive);
  r.dtilde_prime = std::max({a.dtilde_prime, b.dtilde_prime, c.dtilde_prime});
  r.upper = check_leq(std::max(b.mlb_upper, c.mlb_upper),
                      std::max(b.dtilde_prime, c.dtilde_prime) + r.log_term, margin, r.exhaustive);
  return r;
}

}  // namespace combkit
