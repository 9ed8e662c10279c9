// Acceptance run: one PASS/FAIL line per criterion with its runtime.
// Exit status is nonzero when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>

#include "combkit/entropy.hpp"
#include "combkit/hypotest.hpp"
#include "combkit/network.hpp"
#include "combkit/performance.hpp"
#include "combkit/random.hpp"
#include "combkit/verify.hpp"
#include "oracles.hpp"

#ifndef COMBKIT_CLI_PATH
#error "COMBKIT_CLI_PATH must name the command-line binary"
#endif

using namespace combkit;
using Eigen::MatrixXcd;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

const NetworkSignature kQubit{{{2, 2}}};

/// Summary of suite records: zero failures and zero unevaluated checks.
Outcome from_records(const std::vector<CheckRecord>& recs, std::size_t expected_min) {
  const auto s = summarize(recs);
  std::ostringstream os;
  os << recs.size() << " checks, " << s.pass << " pass, " << s.fail << " fail, " << s.inconclusive
     << " inconclusive";
  for (const auto& r : recs)
    if (r.status != CheckStatus::pass) {
      os << "; first non-pass: " << r.name << " lhs=" << r.lhs << " rhs=" << r.rhs << ' ' << r.note;
      break;
    }
  return {s.fail == 0 && s.inconclusive == 0 && recs.size() >= expected_min, os.str()};
}

// 1 ---------------------------------------------------------------------------
Outcome link_algebra() {
  Rng rng(101);
  double worst_assoc = 0.0, worst_herm = 0.0, worst_psd = 0.0;
  auto op = [&](const std::string& a, const std::string& b) {
    std::vector<SystemLabel> sys{{a, 2, Role::out, 1}, {b, 2, Role::in, 1}};
    if (std::uniform_int_distribution<int>(0, 1)(rng)) std::swap(sys[0], sys[1]);
    MatrixXcd m = random_psd(4, 1 + std::uniform_int_distribution<int>(0, 3)(rng), rng);
    return LabeledOperator(sys, m / m.trace().real());
  };
  for (int k = 0; k < 500; ++k) {
    const auto a = op("a", "b");
    const auto b = op("b", "c");
    const auto c = op("c", "d");
    const auto left = link_product(link_product(a, b), c);
    const auto right = link_product(a, link_product(b, c));
    worst_assoc = std::max(worst_assoc, frobenius_distance(left, right));
    for (const auto& x : {link_product(a, b), link_product(b, c), left}) {
      worst_herm = std::max(worst_herm, (x.matrix() - x.matrix().adjoint()).norm());
      worst_psd = std::max(worst_psd, -min_eigenvalue(0.5 * (x.matrix() + x.matrix().adjoint())));
    }
  }
  std::ostringstream os;
  os << "500 triples, max assoc residual " << worst_assoc << ", max anti-Hermitian part "
     << worst_herm << ", most negative eigenvalue " << -worst_psd;
  return {worst_assoc <= 1e-10 && worst_herm <= 1e-10 && worst_psd <= 1e-10, os.str()};
}

// 2 ---------------------------------------------------------------------------
Outcome structure() {
  int bad_combs = 0, bad_duals = 0;
  double worst_pairing = 0.0;
  RandomOptions o;
  o.memory_dim = 2;
  for (int k = 0; k < 1000; ++k) {
    const NetworkSignature sig{std::vector<Tooth>(static_cast<std::size_t>(1 + k % 3), Tooth{2, 2})};
    const auto c = random_comb(sig, derive_seed(202, 2 * k), o);
    const auto g = random_dual_comb(sig, derive_seed(202, 2 * k + 1), o);
    if (!validate_comb(c.op, sig, 1e-8).valid) ++bad_combs;
    if (!validate_dual_comb(g.op, sig, 1e-8).valid) ++bad_duals;
    worst_pairing = std::max(worst_pairing, std::abs(pairing(g, c) - 1.0));
  }
  std::ostringstream os;
  os << "invalid combs " << bad_combs << "/1000, invalid dual combs " << bad_duals
     << "/1000, max |Tr[Gamma C] - 1| " << worst_pairing << " over 1000 pairs";
  return {bad_combs == 0 && bad_duals == 0 && worst_pairing <= 1e-9, os.str()};
}

// 3 ---------------------------------------------------------------------------
Outcome dmax_consistency() {
  Rng rng(303);
  double worst = 0.0;
  int inf_wrong = 0;
  for (int k = 0; k < 200; ++k) {
    const Eigen::Index d = Eigen::Index{2} << (k % 4);
    const std::vector<SystemLabel> sys{{"out1", d, Role::out, 1}};
    // Every third pair has a rank-deficient n whose support contains m.
    MatrixXcd n, m;
    if (k % 3 == 2) {
      const MatrixXcd v = haar_isometry(std::max<Eigen::Index>(1, d / 2), d, rng);
      n = v * random_psd(v.cols(), v.cols(), rng) * v.adjoint();
      m = v * random_psd(v.cols(), 1 + k % static_cast<int>(v.cols()), rng) * v.adjoint();
    } else {
      n = random_psd(d, d, rng);
      m = random_psd(d, 1 + k % static_cast<int>(d), rng);
    }
    const auto r = dmax_report(LabeledOperator(sys, m), LabeledOperator(sys, n));
    worst = std::max(worst, std::abs(r.value - r.sdp));
  }
  for (int k = 0; k < 20; ++k) {
    const Eigen::Index d = 2 + k % 3;
    const std::vector<SystemLabel> sys{{"out1", d, Role::out, 1}};
    const MatrixXcd v = haar_isometry(d - 1, d, rng);
    const MatrixXcd n = v * random_psd(d - 1, d - 1, rng) * v.adjoint();
    const MatrixXcd m = random_psd(d, d, rng);
    const auto r = dmax_report(LabeledOperator(sys, m), LabeledOperator(sys, n));
    if (!(std::isinf(r.value) && r.value > 0 && std::isinf(r.sdp) && r.sdp > 0)) ++inf_wrong;
  }
  std::ostringstream os;
  os << "200 pairs, max |SDP - closed form| " << worst << "; support violations not reported as inf: "
     << inf_wrong << "/20";
  return {worst <= 1e-6 && inf_wrong == 0, os.str()};
}

// 4, 5, 6 ---------------------------------------------------------------------
Outcome theorem1() { return from_records(suite_t1(SuiteOptions{}, 50), 100); }
Outcome theorem2() { return from_records(suite_t2(SuiteOptions{}, 50), 450); }
Outcome theorem3() {
  auto recs = suite_t3_states(SuiteOptions{}, 100);
  for (auto& r : suite_t3_combs(SuiteOptions{}, 20)) recs.push_back(std::move(r));
  auto out = from_records(recs, 240);
  for (const auto& r : recs)
    if (r.name.starts_with("t3/states") && !r.direction_certified) {
      out.pass = false;
      out.detail += "; state instance not exhaustive: " + r.name;
      break;
    }
  return out;
}

// 7 ---------------------------------------------------------------------------
Outcome neyman_pearson() {
  Rng rng(707);
  double worst = 0.0;
  RandomOptions noisy;
  noisy.white_noise = 0.1;
  for (int k = 0; k < 200; ++k) {
    const auto c0 = random_comb(kQubit, derive_seed(707, 3 * k), noisy);
    const auto c1 = random_comb(kQubit, derive_seed(707, 3 * k + 1), noisy);
    const auto g = random_dual_comb(kQubit, derive_seed(707, 3 * k + 2));
    const double eps = std::uniform_real_distribution<double>(0.02, 0.5)(rng);
    const TestingInstance inst{c0, c1, eps};
    const double beta = beta_fixed_gamma(inst, g).beta;
    const MatrixXcd gm = canonical(g.op, kQubit).matrix();
    const double ref = oracle::np_beta(oracle::twirl(gm, canonical(c0.op, kQubit).matrix()),
                                       oracle::twirl(gm, canonical(c1.op, kQubit).matrix()), eps);
    worst = std::max(worst, std::abs(beta - ref));
  }
  std::ostringstream os;
  os << "200 qubit instances, max |beta - NP oracle| " << worst;
  return {worst <= 1e-4, os.str()};
}

// 8 ---------------------------------------------------------------------------
Outcome multiplicativity() {
  auto recs = suite_t9_multiplicativity(SuiteOptions{}, 50);
  auto out = from_records(recs, 101);
  Eigen::VectorXcd phi = Eigen::VectorXcd::Zero(4);
  phi(0) = phi(3) = 1.0;
  const MatrixXcd id = phi * phi.adjoint();
  const double w = wmax_primal(make_performance_operator(
                                   LabeledOperator(comb_systems(kQubit), id), kQubit))
                       .value;
  const double grid = oracle::bloch_grid_wmax(id);
  const bool ok = std::abs(w - 4.0) <= 1e-5 && std::abs(w - grid) <= 1e-5;
  std::ostringstream os;
  os << "; identity Choi w_max " << w << " (Bloch-grid oracle " << grid << ")";
  out.detail += os.str();
  out.pass = out.pass && ok;
  return out;
}

// 9, 10 -----------------------------------------------------------------------
Outcome lemma8() { return from_records(suite_lemma8(SuiteOptions{}, 200), 400); }

Outcome series() {
  SuiteOptions o;
  o.epsilon = 0.01;
  const auto recs = suite_t9_series(o, 20);
  std::size_t rows3 = 0;
  for (const auto& r : recs)
    if (r.name.ends_with("/n3/left")) ++rows3;
  auto out = from_records(recs, 20 * 3 * 3);
  out.detail += "; rows with n = 3: " + std::to_string(rows3);
  return out;
}

// 11 --------------------------------------------------------------------------
Outcome determinism() {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "combkit_acceptance";
  fs::create_directories(dir);
  for (const char* run : {"a", "b"}) {
    const std::string cmd = std::string("\"") + COMBKIT_CLI_PATH +
                            "\" verify-theorems --suite all --trials 2 --seed 11 --out \"" +
                            (dir / (std::string(run) + ".json")).string() + "\" > /dev/null";
    if (std::system(cmd.c_str()) != 0) return {false, std::string("run ") + run + " failed"};
  }
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  const bool json_same = slurp(dir / "a.json") == slurp(dir / "b.json");
  const bool csv_same = slurp(dir / "a.csv") == slurp(dir / "b.csv");
  const bool nonempty = !slurp(dir / "a.json").empty();
  return {json_same && csv_same && nonempty,
          std::string("verify-theorems --suite all --trials 2 --seed 11 twice: JSON ") +
              (json_same ? "identical" : "differs") + ", CSV " + (csv_same ? "identical" : "differs")};
}

}  // namespace

int main() {
  struct Criterion {
    const char* title;
    std::function<Outcome()> run;
    double limit_s;  // 0: no individual limit
  };
  const std::vector<Criterion> criteria{
      {"link-product algebra", link_algebra, 10},
      {"structure validators and pairing", structure, 60},
      {"D_max SDP vs closed form", dmax_consistency, 60},
      {"comb smoothing upper-bounds the revised entropy", theorem1, 0},
      {"revised entropy vs lambda bound, monotone Delta", theorem2, 0},
      {"hypothesis-testing sandwich", theorem3, 0},
      {"Neyman-Pearson oracle", neyman_pearson, 0},
      {"w_max multiplicativity", multiplicativity, 0},
      {"w_max Lipschitz bound", lemma8, 0},
      {"smoothed w_max series", series, 0},
      {"report determinism", determinism, 0},
  };
  bool all = true;
  double total_1_10 = 0.0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (i < 10) total_1_10 += secs;
    if (criteria[i].limit_s > 0 && secs > criteria[i].limit_s) {
      o.pass = false;
      o.detail += "; exceeded the " + std::to_string(static_cast<int>(criteria[i].limit_s)) + " s limit";
    }
    all = all && o.pass;
    std::printf("criterion %2zu: %s  %-48s %8.2f s  %s\n", i + 1, o.pass ? "PASS" : "FAIL",
                criteria[i].title, secs, o.detail.c_str());
    std::fflush(stdout);
  }
  const bool budget = total_1_10 <= 15 * 60;
  std::printf("criteria 1-10 total runtime %.1f s (budget 900 s): %s\n", total_1_10,
              budget ? "within" : "EXCEEDED");
  return all && budget ? 0 : 1;
}
