// Discrimination of two combs with a tester: type-I/II errors, the optimal
// test for a fixed dual comb, the joint search over dual combs, and the
// sandwich between smooth entropies and -log2 beta.
#pragma once

#include <Eigen/Dense>

#include "combkit/checks.hpp"
#include "combkit/entropy.hpp"
#include "combkit/network.hpp"
#include "combkit/sdp.hpp"

namespace combkit {

/// H0: c0, H1: c1, with type-I error budget epsilon in (0, 1).
struct TestingInstance {
  Comb c0;
  Comb c1;
  double epsilon = 0.1;
};

/// Gamma together with the accepting element Pi of {Pi, I - Pi}; Pi is
/// labeled like Gamma in canonical order.
struct TestStrategy {
  DualCombElement gamma;
  LabeledOperator pi;
};

struct ErrorPair {
  double alpha = 0.0;  // Tr[(I - Pi) sqrt(G) C0 sqrt(G)]
  double beta = 0.0;   // Tr[Pi sqrt(G) C1 sqrt(G)]
};

/// Throws InputError on mismatched signatures and DomainError unless
/// 0 <= Pi <= I.
ErrorPair errors_of_strategy(const TestingInstance& inst, const TestStrategy& strat);

struct BetaResult {
  double beta = 0.0;
  /// Lower bound from the SDP dual (equals beta when the program is
  /// decided without the solver).
  double beta_lower = 0.0;
  Eigen::MatrixXcd pi;
  SdpSolution certificate;
};

/// min Tr[Pi sigma] s.t. Tr[Pi rho] >= 1 - eps, 0 <= Pi <= I. When the kernel
/// of sigma carries rho-mass >= 1 - eps the answer is exactly 0 with Pi the
/// kernel projector.
BetaResult beta_states(const Eigen::MatrixXcd& rho, const Eigen::MatrixXcd& sigma, double eps,
                       const SdpOptions& opts = SdpOptions::from_env());

/// beta for the twirled pair of the instance at this Gamma.
BetaResult beta_fixed_gamma(const TestingInstance& inst, const DualCombElement& gamma,
                            const SdpOptions& opts = SdpOptions::from_env());

struct BetaMinResult {
  /// Attained by `strategy`, hence an upper bound on the minimum over all
  /// dual combs.
  double beta_upper = 1.0;
  TestStrategy strategy;
  int evaluations = 0;
  bool exhaustive = false;
};

BetaMinResult beta_min(const TestingInstance& inst, const GammaSearchConfig& cfg);

/// Pi = {sqrt(G) C0 sqrt(G) >= lambda sqrt(G) C1 sqrt(G)}.
TestStrategy projector_strategy(const TestingInstance& inst, const DualCombElement& gamma,
                                double lambda);

/// D~^{f(eps)} <= -log2 beta_{1-eps} <= D~^{eps'} + log2(1/(eps - eps')),
/// f(eps) = sqrt(1 - (1 - eps)^2). Each inequality is checked at a common
/// Gamma: the search optimum of its left side, with the right side
/// evaluated there as well as at its own search optimum.
struct SandwichReport {
  double eps = 0.0;
  double eps_prime = 0.0;
  double f_eps = 0.0;
  double dtilde_f = 0.0;       // lower bound on D~^{f(eps)}
  double minus_log_beta = 0.0;  // lower bound on -log2 beta_{1-eps}
  double dtilde_prime = 0.0;   // lower bound on D~^{eps'}
  double log_term = 0.0;       // log2(1/(eps - eps'))
  InequalityCheck lower;       // D~^{f(eps)} <= -log2 beta
  InequalityCheck upper;       // -log2 beta <= D~^{eps'} + log term
  bool exhaustive = false;
};

SandwichReport theorem3_sandwich(const TestingInstance& inst, double eps_prime,
                                 const GammaSearchConfig& cfg, double margin = 1e-4);

}  // namespace combkit
