#include <gtest/gtest.h>

#include <cmath>

#include "combkit/errors.hpp"
#include "combkit/hypotest.hpp"
#include "combkit/random.hpp"
#include "oracles.hpp"

using namespace combkit;
using Eigen::MatrixXcd;
using namespace oracle;

namespace {

const NetworkSignature kQubit{{{2, 2}}};
const NetworkSignature kStates{{{1, 2}}};

Comb state_comb(const MatrixXcd& rho) {
  return make_comb(LabeledOperator({{"out1", 2, Role::out, 1}}, rho), kStates);
}

Comb noisy_comb(const NetworkSignature& sig, std::uint64_t seed) {
  RandomOptions o;
  o.white_noise = 0.1;
  return random_comb(sig, seed, o);
}

}  // namespace

TEST(ErrorsOfStrategy, TrivialStrategies) {
  TestingInstance inst{noisy_comb(kQubit, 1), noisy_comb(kQubit, 2), 0.1};
  const auto g = random_dual_comb(kQubit, 3);
  const auto id = LabeledOperator::identity(comb_systems(kQubit));
  auto e = errors_of_strategy(inst, {g, id});
  EXPECT_NEAR(e.alpha, 0.0, 1e-12);
  EXPECT_NEAR(e.beta, 1.0, 1e-12);
  e = errors_of_strategy(inst, {g, 0.0 * id});
  EXPECT_NEAR(e.alpha, 1.0, 1e-12);
  EXPECT_NEAR(e.beta, 0.0, 1e-12);
}

TEST(ErrorsOfStrategy, ComplementarityOnRandomStrategies) {
  Rng rng(4);
  for (int k = 0; k < 20; ++k) {
    TestingInstance inst{random_comb(kQubit, 10 + k), random_comb(kQubit, 50 + k), 0.2};
    const auto g = random_dual_comb(kQubit, 90 + k);
    // A random effect 0 <= Pi <= I.
    const MatrixXcd h = random_density(4, rng);
    const MatrixXcd pi = h / h.operatorNorm();
    const LabeledOperator pl(comb_systems(kQubit), pi);
    const auto e = errors_of_strategy(inst, {g, pl});
    const MatrixXcd rho = twirl(canonical(g.op, kQubit).matrix(), inst.c0.op.matrix());
    EXPECT_NEAR(e.alpha + (pi * rho).trace().real(), 1.0, 1e-10);
    EXPECT_GE(e.alpha, -1e-12);
    EXPECT_GE(e.beta, -1e-12);
  }
}

TEST(ErrorsOfStrategy, MalformedEffectRejected) {
  TestingInstance inst{random_comb(kQubit, 1), random_comb(kQubit, 2), 0.2};
  const auto g = maximally_mixed_dual_comb(kQubit);
  const auto id = LabeledOperator::identity(comb_systems(kQubit));
  EXPECT_THROW(errors_of_strategy(inst, {g, 2.0 * id}), DomainError);
  EXPECT_THROW(errors_of_strategy(inst, {g, -1.0 * id}), DomainError);
}

TEST(BetaFixedGamma, EqualCombsGiveOneMinusEps) {
  const auto c = noisy_comb(kQubit, 5);
  for (double eps : {0.05, 0.3, 0.7}) {
    TestingInstance inst{c, c, eps};
    const auto r = beta_fixed_gamma(inst, random_dual_comb(kQubit, 6));
    EXPECT_NEAR(r.beta, 1.0 - eps, 1e-6);
  }
}

TEST(BetaFixedGamma, OrthogonalStatesGiveZero) {
  TestingInstance inst{state_comb(bloch(0, 0, 1)), state_comb(bloch(0, 0, -1)), 0.1};
  const auto r = beta_fixed_gamma(inst, maximally_mixed_dual_comb(kStates));
  EXPECT_EQ(r.beta, 0.0);
}

TEST(BetaFixedGamma, MatchesNeymanPearsonOracle) {
  for (int k = 0; k < 40; ++k) {
    TestingInstance inst{noisy_comb(kQubit, 100 + k), noisy_comb(kQubit, 200 + k),
                         0.05 + 0.02 * (k % 20)};
    const auto g = random_dual_comb(kQubit, 300 + k);
    const MatrixXcd gm = canonical(g.op, kQubit).matrix();
    const double oracle = np_beta(twirl(gm, inst.c0.op.matrix()), twirl(gm, inst.c1.op.matrix()),
                                  inst.epsilon);
    const auto r = beta_fixed_gamma(inst, g);
    EXPECT_NEAR(r.beta, oracle, 1e-4) << k;
    EXPECT_LE(r.beta_lower, r.beta + 1e-12);
  }
}

TEST(BetaFixedGamma, MonotoneAndSlack) {
  TestingInstance inst{noisy_comb(kQubit, 7), noisy_comb(kQubit, 8), 0.0};
  const auto g = random_dual_comb(kQubit, 9);
  const auto p = twirl_pair(inst.c0, inst.c1, g);
  double prev = 1.0;
  for (double eps = 0.05; eps < 0.96; eps += 0.1) {
    inst.epsilon = eps;
    const auto r = beta_fixed_gamma(inst, g);
    EXPECT_LE(r.beta, prev + 1e-8);
    EXPECT_LE(r.beta, 1.0 - eps + 1e-8);
    EXPECT_GE(r.beta, -1e-12);
    if (r.beta > 1e-6) EXPECT_NEAR((r.pi * p.rho).trace().real(), 1.0 - eps, 1e-6);
    prev = r.beta;
  }
}

TEST(BetaMin, EqualCombs) {
  const auto c = noisy_comb(kQubit, 11);
  GammaSearchConfig cfg;
  cfg.samples = 3;
  cfg.ascent_steps = 2;
  const auto r = beta_min({c, c, 0.2}, cfg);
  EXPECT_NEAR(r.beta_upper, 0.8, 1e-6);
}

TEST(BetaMin, TrivialDualCombSetIsExact) {
  Rng rng(12);
  TestingInstance inst{state_comb(random_density(2, rng)), state_comb(random_density(2, rng)), 0.3};
  const auto r = beta_min(inst, GammaSearchConfig{});
  EXPECT_TRUE(r.exhaustive);
  EXPECT_NEAR(r.beta_upper, beta_fixed_gamma(inst, maximally_mixed_dual_comb(kStates)).beta, 1e-12);
}

TEST(BetaMin, QubitCombMatchesBlochGridSearch) {
  TestingInstance inst{noisy_comb(kQubit, 13), noisy_comb(kQubit, 14), 0.2};
  const MatrixXcd c0 = inst.c0.op.matrix(), c1 = inst.c1.op.matrix();
  auto beta_at = [&](const Eigen::Vector3d& r) {
    const MatrixXcd gm = kron(MatrixXcd::Identity(2, 2), bloch(r(0), r(1), r(2)));
    return np_beta(twirl(gm, c0), twirl(gm, c1), inst.epsilon);
  };
  // Grid oracle with local refinement.
  double best = 2.0;
  Eigen::Vector3d arg = Eigen::Vector3d::Zero();
  const double h = 0.1;
  for (double x = -1; x <= 1 + 1e-9; x += h)
    for (double y = -1; y <= 1 + 1e-9; y += h)
      for (double z = -1; z <= 1 + 1e-9; z += h) {
        const Eigen::Vector3d r(x, y, z);
        if (r.norm() > 1) continue;
        const double b = beta_at(r);
        if (b < best) { best = b; arg = r; }
      }
  for (double s = h / 2; s > 1e-4; s /= 2)
    for (int it = 0; it < 50; ++it) {
      bool moved = false;
      for (int a = 0; a < 3; ++a)
        for (int sg : {-1, 1}) {
          Eigen::Vector3d q = arg;
          q(a) += sg * s;
          if (q.norm() > 1) q.normalize();
          const double b = beta_at(q);
          if (b < best - 1e-13) { best = b; arg = q; moved = true; }
        }
      if (!moved) break;
    }
  GammaSearchConfig cfg;
  cfg.bloch_grid = true;
  const auto r = beta_min(inst, cfg);
  EXPECT_NEAR(r.beta_upper, best, 1e-3);
}

TEST(ProjectorStrategy, Endpoints) {
  TestingInstance inst{noisy_comb(kQubit, 15), noisy_comb(kQubit, 16), 0.1};
  const auto g = random_dual_comb(kQubit, 17);
  auto s = projector_strategy(inst, g, 0.0);
  EXPECT_NEAR(errors_of_strategy(inst, s).alpha, 0.0, 1e-10);
  const auto p = twirl_pair(inst.c0, inst.c1, g);
  const double lam = 1.01 * std::exp2(dmax_spectral(p.rho, p.sigma));
  EXPECT_NEAR(delta_trace(p, lam), 0.0, 1e-12);
  s = projector_strategy(inst, g, lam);
  const MatrixXcd pi = canonical(s.pi, kQubit).matrix();
  EXPECT_LE((pi * (p.rho - lam * p.sigma)).trace().real(), 1e-10);
}

TEST(ProjectorStrategy, ProofInequalities) {
  const NetworkSignature two{{{2, 2}, {2, 2}}};
  for (int k = 0; k < 100; ++k) {
    const auto& sig = k % 2 ? two : kQubit;
    TestingInstance inst{random_comb(sig, 400 + k), noisy_comb(sig, 500 + k), 0.1};
    const auto g = random_dual_comb(sig, 600 + k);
    const double lambda = 0.1 + 0.05 * k;
    const auto s = projector_strategy(inst, g, lambda);
    const auto p = twirl_pair(inst.c0, inst.c1, g);
    const double td = delta_trace(p, lambda);
    const MatrixXcd pi = canonical(s.pi, sig).matrix();
    const auto e = errors_of_strategy(inst, s);
    EXPECT_GE((pi * p.rho).trace().real(), td - 1e-9);
    EXPECT_LE(e.beta, (1.0 - td) / lambda + 1e-9);
  }
}

TEST(Sandwich, ExhaustiveQubitStates) {
  Rng rng(18);
  for (int k = 0; k < 10; ++k) {
    TestingInstance inst{state_comb(random_density(2, rng)), state_comb(random_density(2, rng)), 0.3};
    const auto r = theorem3_sandwich(inst, 0.1, GammaSearchConfig{});
    EXPECT_TRUE(r.exhaustive);
    EXPECT_EQ(r.lower.status, CheckStatus::pass) << r.lower.lhs << " " << r.lower.rhs;
    EXPECT_EQ(r.upper.status, CheckStatus::pass) << r.upper.lhs << " " << r.upper.rhs;
  }
}

TEST(Sandwich, EqualCombs) {
  Rng rng(19);
  const auto c = state_comb(random_density(2, rng));
  const auto r = theorem3_sandwich({c, c, 0.3}, 0.1, GammaSearchConfig{});
  EXPECT_NEAR(r.minus_log_beta, -std::log2(0.3), 1e-6);
  EXPECT_NEAR(r.dtilde_f, 0.0, 1e-6);
  EXPECT_EQ(r.lower.status, CheckStatus::pass);
}

TEST(Sandwich, OrthogonalPureStatesAreInconclusive) {
  TestingInstance inst{state_comb(bloch(0, 0, 1)), state_comb(bloch(0, 0, -1)), 0.3};
  const auto r = theorem3_sandwich(inst, 0.1, GammaSearchConfig{});
  EXPECT_TRUE(std::isinf(r.minus_log_beta));
  EXPECT_TRUE(std::isinf(r.dtilde_prime));
  EXPECT_EQ(r.upper.status, CheckStatus::inconclusive);
}

TEST(Sandwich, ParameterOrder) {
  const auto c = noisy_comb(kQubit, 20);
  EXPECT_THROW(theorem3_sandwich({c, c, 0.3}, 0.4, GammaSearchConfig{}), InputError);
  EXPECT_THROW(theorem3_sandwich({c, c, 0.3}, 0.0, GammaSearchConfig{}), InputError);
}

TEST(CheckLeq, InfinityBookkeeping) {
  EXPECT_EQ(check_leq(1.0, kInf, 0, true).status, CheckStatus::pass);
  EXPECT_EQ(check_leq(kInf, kInf, 0, true).status, CheckStatus::inconclusive);
  EXPECT_EQ(check_leq(kInf, 3.0, 0, true).status, CheckStatus::fail);
  EXPECT_EQ(check_leq(1.0, 1.0 - 1e-6, 1e-5, true).status, CheckStatus::pass);
  EXPECT_EQ(check_leq(1.0, 0.9, 1e-5, true).status, CheckStatus::fail);
}
