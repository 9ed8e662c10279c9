// Performance operators Omega = sum_x w_x T_x and the optimal score
// w_max(Omega) over combs, its smoothed version, and the tensor-power
// behaviour of w_max.
#pragma once

#include <optional>
#include <vector>

#include "combkit/checks.hpp"
#include "combkit/network.hpp"
#include "combkit/sdp.hpp"

namespace combkit {

struct PerformanceOperator {
  LabeledOperator omega;  // canonical order
  NetworkSignature signature;
  std::optional<Tester> tester;
  std::vector<double> weights;
};

/// Canonicalizes and checks that omega is Hermitian and PSD (relative
/// tolerance kTolPsd); DomainError otherwise.
PerformanceOperator make_performance_operator(const LabeledOperator& omega,
                                              const NetworkSignature& sig);

/// Omega = sum_x w_x T_x, keeping the tester as provenance.
PerformanceOperator performance_from_tester(const Tester& t, const std::vector<double>& weights);

/// Frobenius distance between omega and sum_x w_x T_x (0 without provenance).
double reconstruction_residual(const PerformanceOperator& p);

/// Omega * C (the link product), i.e. Tr[Omega C^T]. Equal to
/// sum_x w_x p_x for operators built from a tester.
double score(const PerformanceOperator& p, const Comb& c);

struct ScoreResult {
  double value = 0.0;  // primal value of the program that was solved
  double lower = 0.0;  // certified bounds on w_max
  double upper = 0.0;
  /// wmax_primal: the dual comb theta with w_max theta >= Omega.
  /// wmax_dual: the maximizing comb M.
  LabeledOperator optimizer;
  /// wmax_primal only: the comb recovered from the dual block.
  LabeledOperator witness;
  SdpSolution certificate;
};

/// min lambda s.t. lambda (I_outN (x) Gamma^(N)) >= Omega over the dual-comb
/// hierarchy.
ScoreResult wmax_primal(const PerformanceOperator& p,
                        const SdpOptions& opts = SdpOptions::from_env());

/// max Tr[Omega M] over combs M.
ScoreResult wmax_dual(const PerformanceOperator& p,
                      const SdpOptions& opts = SdpOptions::from_env());

/// prod_j d_j^out.
double lipschitz_factor(const NetworkSignature& sig);

struct SmoothBracket {
  double lower = 0.0;
  double upper = 0.0;
  /// Ball element attaining `lower`.
  LabeledOperator omega_prime;
  int rounds = 0;
};

/// Bracket on sup w_max(Omega') over PSD Omega' with Tr Omega' = Tr Omega and
/// 1/2 ||Omega' - Omega||_1 <= eps. The lower side alternates between the
/// best comb for Omega' and the best Omega' for that comb; the upper side is
/// w_max(Omega) + eps prod_j d_j^out.
SmoothBracket wmax_smooth(const PerformanceOperator& p, double eps, int iters = 25,
                          const SdpOptions& opts = SdpOptions::from_env());

PerformanceOperator tensor_power(const PerformanceOperator& p, int n);

struct MultiplicativityReport {
  int n = 1;
  double wmax = 0.0;        // w_max(Omega)
  double wmax_power = 0.0;  // w_max(Omega^{(x)n})
  double relative_difference = 0.0;
  bool ok = false;
};

/// Throws InputError when Omega^{(x)n} exceeds the solver block cap or n is
/// outside 1..3.
MultiplicativityReport multiplicativity_check(const PerformanceOperator& p, int n,
                                              double rel_tol = 1e-5,
                                              const SdpOptions& opts = SdpOptions::from_env());

struct SeriesRow {
  int n = 1;
  double wmax_pow = 0.0;  // w_max(Omega)^n
  double lower = 0.0;     // bracket on w^eps_max(Omega^{(x)n})
  double upper = 0.0;
  double bound = 0.0;     // eps prod d^n + w_max(Omega)^n
  double rate_lower = 0.0;  // (1/n) log2 lower
  double rate_upper = 0.0;
  InequalityCheck left;    // w_max^n <= lower
  InequalityCheck middle;  // lower <= upper
  InequalityCheck right;   // upper <= bound
};

/// Rows n = 1..n_max; rows whose tensor power exceeds the block cap are
/// omitted.
std::vector<SeriesRow> asymptotic_series(const PerformanceOperator& p, double eps, int n_max,
                                         int iters = 25,
                                         const SdpOptions& opts = SdpOptions::from_env());

struct LipschitzReport {
  double difference = 0.0;  // certified upper bound on |w_max(m1) - w_max(m2)|
  double trace_distance = 0.0;
  double factor = 0.0;
  InequalityCheck check;
};

/// Throws InputError unless Tr m1 = Tr m2 and the signatures agree.
LipschitzReport lipschitz_check(const PerformanceOperator& m1, const PerformanceOperator& m2,
                                const SdpOptions& opts = SdpOptions::from_env());

}  // namespace combkit
