// Max-relative entropies of combs and states, the twirled family
// sqrt(Gamma) C sqrt(Gamma) indexed by dual combs, and the searches over
// dual combs used to bound the revised smooth entropy.
//
// All logarithms are base 2. An infinite entropy is returned as
// +infinity (std::numeric_limits<double>::infinity()).
#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "combkit/network.hpp"
#include "combkit/sdp.hpp"

namespace combkit {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// ---------------------------------------------------------------------------
// Plain max-relative entropy

/// Closed form log2 lambda_max(N^{-1/2} M N^{-1/2}) on supp N; +inf when
/// supp M is not inside supp N.
double dmax_spectral(const Eigen::MatrixXcd& m, const Eigen::MatrixXcd& n);

/// log2 of min{t : t N - M PSD} solved as an SDP on supp N.
double dmax_sdp(const Eigen::MatrixXcd& m, const Eigen::MatrixXcd& n,
                const SdpOptions& opts = SdpOptions::from_env());

struct DmaxReport {
  double value = 0.0;  // closed form
  double sdp = 0.0;
  double difference = 0.0;
};

/// Both evaluations of D_max(m || n). Throws DomainError for inputs that
/// are not PSD and InputError for mismatched labels.
DmaxReport dmax_report(const LabeledOperator& m, const LabeledOperator& n);

/// D_max(m || n); throws SolverError if the two evaluations differ by more
/// than 1e-6.
double dmax(const LabeledOperator& m, const LabeledOperator& n);

// ---------------------------------------------------------------------------
// Smoothed versions

enum class SmoothingConstraint { comb_constrained, state_constrained };

struct SmoothingBall {
  double epsilon = 0.0;
  LabeledOperator center;
  SmoothingConstraint constraint = SmoothingConstraint::state_constrained;
  NetworkSignature signature;  // used by comb_constrained balls
};

struct SmoothResult {
  /// log2 of the SDP primal value (an upper bound on the minimum).
  double value = 0.0;
  /// log2 of the SDP dual value (a lower bound on the minimum).
  double lower = 0.0;
  Eigen::MatrixXcd optimizer;
  SdpSolution certificate;
};

/// min D_max(C || sigma) over states C with 1/2 ||C - rho||_1 <= eps.
SmoothResult dmax_smooth_state(const Eigen::MatrixXcd& rho, const Eigen::MatrixXcd& sigma,
                               double eps, const SdpOptions& opts = SdpOptions::from_env());

/// min D_max(M~ || n) over combs M~ with 1/2 ||M~ - m||_1 <= eps.
SmoothResult dmax_smooth_comb(const Comb& m, const Comb& n, double eps,
                              const SdpOptions& opts = SdpOptions::from_env());

/// Dispatch on the ball's constraint family.
SmoothResult dmax_smooth(const SmoothingBall& ball, const LabeledOperator& n,
                         const SdpOptions& opts = SdpOptions::from_env());

// ---------------------------------------------------------------------------
// Twirled pairs

/// sqrt(Gamma) C sqrt(Gamma), labeled like Gamma.
LabeledOperator gamma_twirl(const DualCombElement& gamma, const LabeledOperator& c);

struct TwirledPair {
  Eigen::MatrixXcd rho;    // twirl of c0
  Eigen::MatrixXcd sigma;  // twirl of c1
};

TwirledPair twirl_pair(const Comb& c0, const Comb& c1, const DualCombElement& gamma);

/// Tr [sqrt(Gamma)(C0 - lambda C1) sqrt(Gamma)]_+
double delta_trace(const Comb& c0, const Comb& c1, const DualCombElement& gamma, double lambda);
double delta_trace(const TwirledPair& p, double lambda);

/// sqrt(t (2 - t)) for t = Tr Delta.
double g_from_trace(double trace_delta);
double g_of_lambda(const Comb& c0, const Comb& c1, const DualCombElement& gamma, double lambda);

enum class LambdaTarget { trace_delta, g };

/// Bisection for the lambda at which Tr Delta (or g) equals `target`,
/// accurate to 1e-9 in lambda. Throws InputError unless 0 < target < 1.
double lambda_for_target(const Comb& c0, const Comb& c1, const DualCombElement& gamma,
                         double target, LambdaTarget which);
double lambda_for_target(const TwirledPair& p, double target, LambdaTarget which);

/// Umegaki relative entropy in bits; +inf when supp rho is not inside supp sigma.
double rel_entropy(const Eigen::MatrixXcd& rho, const Eigen::MatrixXcd& sigma);

// ---------------------------------------------------------------------------
// Searches over dual combs

struct GammaSearchConfig {
  int samples = 8;
  int ascent_steps = 6;
  double step_size = 0.3;
  std::uint64_t seed = 1;
  /// For one tooth with a qubit input: scan Gamma = I (x) sigma over a
  /// Bloch-ball grid, then climb with step `grid_step` and refine.
  bool bloch_grid = false;
  double grid_step = 0.05;
  Eigen::Index memory_dim = 2;
};

using GammaObjective = std::function<double(const DualCombElement&)>;

struct GammaSearchResult {
  double value = -kInf;
  DualCombElement gamma;
  int evaluations = 0;
  /// True when the dual-comb set is a single point, so the search is exact.
  bool exhaustive = false;
};

/// Heuristic maximization of f over the dual combs of `sig`. The returned
/// value is attained at the returned Gamma.
GammaSearchResult maximize_over_dual_combs(const NetworkSignature& sig, const GammaObjective& f,
                                           const GammaSearchConfig& cfg);

/// The maximally mixed dual comb followed by cfg.samples random ones.
std::vector<DualCombElement> sample_dual_combs(const NetworkSignature& sig,
                                               const GammaSearchConfig& cfg);

/// min D_max(C || twirl(c1)) over states C in the eps-ball around twirl(c0),
/// as a certified lower bound (SDP dual value).
double dmax_tilde_at(const Comb& c0, const Comb& c1, double eps, const DualCombElement& gamma,
                     const SdpOptions& opts = SdpOptions::from_env());
double dmax_tilde_at(const TwirledPair& p, double eps,
                     const SdpOptions& opts = SdpOptions::from_env());

/// Lower bound on the revised smooth entropy together with the Gamma that
/// attains it.
GammaSearchResult dmax_tilde_lower(const Comb& c0, const Comb& c1, double eps,
                                   const GammaSearchConfig& cfg);

/// Lower bound on max_Gamma D(twirl(c0) || twirl(c1)).
GammaSearchResult theorem4_rhs(const Comb& c0, const Comb& c1, const GammaSearchConfig& cfg);

}  // namespace combkit
