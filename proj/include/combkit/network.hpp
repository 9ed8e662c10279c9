// Choi operators, the link product, and the structure of combs, dual combs
// and testers.
//
// Label conventions: tooth j of a network carries the systems "in{j}" and
// "out{j}". Canonical order of a comb-shaped operator is
// out1, in1, out2, in2, ..., outN, inN. Choi operators of maps are ordered
// outputs first, then inputs.
#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "combkit/random.hpp"
#include "combkit/tensorspace.hpp"

namespace combkit {

/// Absolute Frobenius tolerance for the comb and dual-comb hierarchies.
inline constexpr double kTolComb = 1e-8;

struct Tooth {
  Eigen::Index d_in = 1;
  Eigen::Index d_out = 1;
  friend bool operator==(const Tooth&, const Tooth&) = default;
};

struct NetworkSignature {
  std::vector<Tooth> teeth;

  std::size_t size() const { return teeth.size(); }
  Eigen::Index prod_in() const;
  Eigen::Index prod_out() const;
  Eigen::Index total_dim() const { return prod_in() * prod_out(); }

  /// "d_in,d_out;d_in,d_out;..." e.g. "2,2;2,2".
  static NetworkSignature parse(std::string_view text);
  std::string str() const;

  friend bool operator==(const NetworkSignature&, const NetworkSignature&) = default;
};

/// Throws InputError unless N >= 1 and every dimension is >= 1.
void check_signature(const NetworkSignature& sig);

std::string in_name(std::size_t tooth);
std::string out_name(std::size_t tooth);

/// Canonical systems of the first `teeth` teeth (all by default).
std::vector<SystemLabel> comb_systems(const NetworkSignature& sig, std::size_t teeth = SIZE_MAX);
std::vector<std::string> comb_names(const NetworkSignature& sig, std::size_t teeth = SIZE_MAX);

/// Recover the signature from in{j}/out{j} labels. Missing labels count as
/// dimension 1; any other label is an error.
NetworkSignature signature_of(const LabeledOperator& op);

/// Pad missing dimension-1 labels and reorder to canonical order. Throws
/// InputError if the labels do not fit the signature.
LabeledOperator canonical(const LabeledOperator& op, const NetworkSignature& sig);

struct Comb {
  LabeledOperator op;
  NetworkSignature signature;
};

/// Gamma = I_{outN} (x) Gamma^(N). hierarchy[n-1] holds Gamma^(n) on the
/// canonical systems of teeth 1..n-1 followed by in{n}.
struct DualCombElement {
  LabeledOperator op;
  std::vector<LabeledOperator> hierarchy;
  NetworkSignature signature;
};

struct Tester {
  std::vector<std::pair<std::string, LabeledOperator>> outcomes;
  DualCombElement normalization;
};

struct StructureReport {
  bool valid = false;
  double min_eigenvalue = 0.0;
  /// Per-level factorization residuals from tooth N down to tooth 1, then
  /// the normalization residual.
  std::vector<double> residuals;
  std::string message;
};

// ---------------------------------------------------------------------------
// Choi isomorphism and link product

/// Choi operator sum_k |K_k>><<K_k| of the map with the given Kraus operators,
/// labeled outputs first then inputs.
LabeledOperator choi_of_map(const std::vector<Eigen::MatrixXcd>& kraus,
                            const std::vector<SystemLabel>& outputs,
                            const std::vector<SystemLabel>& inputs);

/// Single-tooth convenience: labels out1, in1.
LabeledOperator choi_of_map(const std::vector<Eigen::MatrixXcd>& kraus, Eigen::Index d_in,
                            Eigen::Index d_out);

/// Action of the map with Choi operator m on x, where x lives on a subset of
/// m's labels: Tr_x[(x^T (x) I) m].
LabeledOperator apply_choi(const LabeledOperator& m, const LabeledOperator& x);

/// n * m, contracting all labels the two operators share. Result labels are
/// the labels only in n, then the labels only in m.
LabeledOperator link_product(const LabeledOperator& n, const LabeledOperator& m);

// ---------------------------------------------------------------------------
// Validators

StructureReport validate_comb(const LabeledOperator& op, const NetworkSignature& sig,
                              double tol = kTolComb);

/// Also returns the extracted Gamma^(n) when `hierarchy` is non-null.
StructureReport validate_dual_comb(const LabeledOperator& op, const NetworkSignature& sig,
                                   double tol = kTolComb,
                                   std::vector<LabeledOperator>* hierarchy = nullptr);

/// Validates the operator and checks the stored hierarchy against it.
StructureReport validate_dual_comb(const DualCombElement& gamma, double tol = kTolComb);

StructureReport validate_tester(const Tester& t, double tol = kTolComb);

/// Throwing constructors: canonicalize and certify, DomainError on failure.
Comb make_comb(const LabeledOperator& op, const NetworkSignature& sig, double tol = kTolComb);
DualCombElement make_dual_comb(const LabeledOperator& op, const NetworkSignature& sig,
                               double tol = kTolComb);

/// I / prod d_in, the dual comb every comb pairs with to 1.
DualCombElement maximally_mixed_dual_comb(const NetworkSignature& sig);

/// Single-tooth dual comb I_out (x) sigma for a state sigma on in1.
DualCombElement dual_comb_from_state(const NetworkSignature& sig, const Eigen::MatrixXcd& sigma);

/// p_x = T_x * C for every outcome.
std::vector<double> outcome_probabilities(const Comb& c, const Tester& t);

/// Tr[Gamma C] (equal to the full link product of Gamma^T with C).
double pairing(const DualCombElement& gamma, const Comb& c);

// ---------------------------------------------------------------------------
// Tensor powers. The n copies of a tooth are merged into one tooth of
// dimensions (d_in^n, d_out^n), so the n-fold network keeps N teeth.

NetworkSignature tensor_power(const NetworkSignature& sig, int n);
LabeledOperator tensor_power(const LabeledOperator& op, const NetworkSignature& sig, int n);
Comb tensor_power(const Comb& c, int n);

// ---------------------------------------------------------------------------
// Random networks

struct RandomOptions {
  Eigen::Index memory_dim = 2;
  /// Mixing weight w in (1 - w) C + w I / prod d_out for combs.
  double white_noise = 0.0;
};

/// One physical map of a circuit: Kraus operators from `inputs` to `outputs`.
struct CircuitMap {
  std::vector<SystemLabel> inputs;
  std::vector<SystemLabel> outputs;
  std::vector<Eigen::MatrixXcd> kraus;
  LabeledOperator choi() const { return choi_of_map(kraus, outputs, inputs); }
};

/// Sequential circuit realizing a comb: tooth j maps in{j} (x) mem{j-1} to
/// out{j} (x) mem{j}; the last tooth discards its environment.
struct CombCircuit {
  NetworkSignature signature;
  std::vector<CircuitMap> teeth;
};

/// Circuit realizing a tester: pure state on in1 (x) anc1, isometries
/// out{j} (x) anc{j} -> in{j+1} (x) anc{j+1}, and a final measurement on
/// out{N} (x) anc{N}.
struct TesterCircuit {
  NetworkSignature signature;
  std::vector<Eigen::Index> ancilla;  // anc1..ancN
  Eigen::VectorXcd state;
  std::vector<Eigen::MatrixXcd> isometries;

  std::size_t generators() const { return 1 + isometries.size(); }
  std::vector<SystemLabel> state_systems() const;
  std::vector<SystemLabel> measured_systems() const;
  CircuitMap isometry_map(std::size_t j) const;  // j = 1..N-1
};

CombCircuit random_comb_circuit(const NetworkSignature& sig, Rng& rng,
                                const RandomOptions& opts = {});
Comb comb_of(const CombCircuit& circuit, double white_noise = 0.0);
Comb random_comb(const NetworkSignature& sig, std::uint64_t seed, const RandomOptions& opts = {});

TesterCircuit random_tester_circuit(const NetworkSignature& sig, Rng& rng,
                                    const RandomOptions& opts = {});

/// Same circuit with generator `which` (0 = state, j = isometry j) moved by
/// a Gaussian step of size `step` and re-normalized.
TesterCircuit perturbed(const TesterCircuit& circuit, std::size_t which, double step, Rng& rng);

DualCombElement dual_comb_of(const TesterCircuit& circuit);
Tester tester_of(const TesterCircuit& circuit, const std::vector<Eigen::MatrixXcd>& povm);

/// Random POVM with `outcomes` elements on dimension d.
std::vector<Eigen::MatrixXcd> random_povm(Eigen::Index d, std::size_t outcomes, Rng& rng);

DualCombElement random_dual_comb(const NetworkSignature& sig, std::uint64_t seed,
                                 const RandomOptions& opts = {});
Tester random_tester(const NetworkSignature& sig, std::uint64_t seed, std::size_t outcomes,
                     const RandomOptions& opts = {});

}  // namespace combkit
