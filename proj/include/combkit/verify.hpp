// Randomized verification suites for the inequality chains, and the report
// format they produce (JSON plus a CSV twin).
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "combkit/checks.hpp"
#include "combkit/io.hpp"

namespace combkit {

struct CheckRecord {
  std::string suite;
  std::string name;
  std::string paper_ref;  // short description of the inequality
  CheckStatus status = CheckStatus::inconclusive;
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;
  bool direction_certified = false;
  std::vector<std::uint64_t> seeds;
  std::optional<double> runtime_ms;
  /// Set when the check could not be evaluated (e.g. a solver error).
  std::string note;
};

struct SuiteOptions {
  std::uint64_t seed = 1;
  /// Number of random instances; <= 0 picks the suite default.
  int trials = 0;
  /// Record per-check wall time (makes reports non-reproducible).
  bool timing = false;
  /// Worker threads for the trial loops; results are merged in trial order.
  int jobs = 1;
  /// Smoothing parameter of the t9 series; negative picks 0.01.
  double epsilon = -1.0;
};

/// Suite names accepted by run_suite.
const std::vector<std::string>& suite_names();

/// One of t1, t2, t3, t4, t9, lemma8 or all. Throws InputError otherwise.
std::vector<CheckRecord> run_suite(const std::string& name, const SuiteOptions& opts);

// Individual parts, used by run_suite with its default sizes.
std::vector<CheckRecord> suite_t1(const SuiteOptions& opts, int pairs);
std::vector<CheckRecord> suite_t2(const SuiteOptions& opts, int pairs);
std::vector<CheckRecord> suite_t3_states(const SuiteOptions& opts, int pairs);
std::vector<CheckRecord> suite_t3_combs(const SuiteOptions& opts, int pairs);
std::vector<CheckRecord> suite_t4(const SuiteOptions& opts, int pairs);
std::vector<CheckRecord> suite_t9_multiplicativity(const SuiteOptions& opts, int operators);
std::vector<CheckRecord> suite_t9_series(const SuiteOptions& opts, int operators);
std::vector<CheckRecord> suite_lemma8(const SuiteOptions& opts, int pairs);

struct ReportSummary {
  int pass = 0;
  int fail = 0;
  int inconclusive = 0;
};

ReportSummary summarize(const std::vector<CheckRecord>& checks);

Json report_json(const std::string& suite, const SuiteOptions& opts,
                 const std::vector<CheckRecord>& checks);
std::string report_csv(const std::vector<CheckRecord>& checks);

}  // namespace combkit
