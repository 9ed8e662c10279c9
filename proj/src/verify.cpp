#include "combkit/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <functional>
#include <sstream>
#include <thread>

#include "combkit/entropy.hpp"
#include "combkit/errors.hpp"
#include "combkit/hypotest.hpp"
#include "combkit/performance.hpp"
#include "combkit/random.hpp"

namespace combkit {

namespace {

using Eigen::MatrixXcd;

const NetworkSignature kQubit{{{2, 2}}};
const NetworkSignature kQubitStates{{{1, 2}}};

// Stream tags keep the instance families of different suites independent,
// except that t1 and t2 share their comb pairs.
enum Tag : std::uint64_t {
  kCombPairs = 0x11,
  kStatePairs = 0x33,
  kBlochPairs = 0x34,
  kEntropyPairs = 0x44,
  kOmegas = 0x99,
  kSeries = 0x9A,
  kPerturbed = 0x88,
};

std::uint64_t trial_seed(const SuiteOptions& o, Tag tag, int i) {
  return derive_seed(derive_seed(o.seed, tag), static_cast<std::uint64_t>(i));
}

std::string pad2(int i) {
  std::string s = std::to_string(i);
  return s.size() < 3 ? std::string(3 - s.size(), '0') + s : s;
}

CheckRecord record(const char* suite, std::string name, const char* ref, const InequalityCheck& c,
                   std::vector<std::uint64_t> seeds) {
  CheckRecord r;
  r.suite = suite;
  r.name = std::move(name);
  r.paper_ref = ref;
  r.status = c.status;
  r.lhs = c.lhs;
  r.rhs = c.rhs;
  r.margin = c.margin;
  r.direction_certified = c.certified;
  r.seeds = std::move(seeds);
  return r;
}

using TrialFn = std::function<std::vector<CheckRecord>(int)>;

/// Runs fn(0..n-1) on opts.jobs threads and concatenates in trial order.
/// Exceptions become one inconclusive record for the trial. Per-trial wall
/// time is attached to every record of the trial when timing is on.
std::vector<CheckRecord> run_trials(const SuiteOptions& opts, const char* suite, int n,
                                    const TrialFn& fn) {
  std::vector<std::vector<CheckRecord>> out(static_cast<std::size_t>(std::max(n, 0)));
  auto one = [&](int i) {
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<CheckRecord> recs;
    try {
      recs = fn(i);
    } catch (const std::exception& e) {
      CheckRecord r;
      r.suite = suite;
      r.name = std::string(suite) + "/trial" + pad2(i);
      r.paper_ref = "evaluation error";
      r.lhs = r.rhs = NAN;
      r.note = e.what();
      recs.push_back(std::move(r));
    }
    if (opts.timing) {
      const double ms =
          std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
      for (auto& r : recs) r.runtime_ms = ms / static_cast<double>(recs.size());
    }
    out[static_cast<std::size_t>(i)] = std::move(recs);
  };
  const int jobs = std::clamp(opts.jobs, 1, std::max(n, 1));
  if (jobs == 1) {
    for (int i = 0; i < n; ++i) one(i);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < jobs; ++w)
      pool.emplace_back([&, w] {
        for (int i = w; i < n; i += jobs) one(i);
      });
    for (auto& t : pool) t.join();
  }
  std::vector<CheckRecord> flat;
  for (auto& v : out)
    for (auto& r : v) flat.push_back(std::move(r));
  return flat;
}

Comb noisy_comb(const NetworkSignature& sig, std::uint64_t seed) {
  RandomOptions o;
  o.white_noise = 0.1;
  return random_comb(sig, seed, o);
}

struct CombPair {
  Comb c0;
  Comb c1;
  std::uint64_t s0;
  std::uint64_t s1;
};

/// Pair i of the shared comb family: one tooth for even i, two for odd i.
CombPair comb_pair(const SuiteOptions& o, int i) {
  const NetworkSignature sig{std::vector<Tooth>(static_cast<std::size_t>(1 + i % 2), Tooth{2, 2})};
  const auto base = trial_seed(o, kCombPairs, i);
  const auto s0 = derive_seed(base, 0);
  const auto s1 = derive_seed(base, 1);
  return {noisy_comb(sig, s0), noisy_comb(sig, s1), s0, s1};
}

GammaSearchConfig search_config(const NetworkSignature& sig, std::uint64_t seed) {
  GammaSearchConfig cfg;
  const bool small = sig.total_dim() <= 4;
  cfg.samples = small ? 4 : 3;
  cfg.ascent_steps = small ? 3 : 2;
  cfg.seed = seed;
  return cfg;
}

Comb state_comb(const MatrixXcd& rho) {
  return make_comb(LabeledOperator({{"out1", rho.rows(), Role::out, 1}}, rho),
                   NetworkSignature{{{1, rho.rows()}}});
}

}  // namespace

// ---------------------------------------------------------------------------

std::vector<CheckRecord> suite_t1(const SuiteOptions& opts, int pairs) {
  const char* ref = "revised smooth entropy at inflated eps <= comb-smoothed max-entropy";
  return run_trials(opts, "t1", pairs, [&](int i) {
    const auto p = comb_pair(opts, i);
    const auto& sig = p.c0.signature;
    std::vector<CheckRecord> recs;
    for (double eps : {0.01, 0.05}) {
      const auto cfg = search_config(sig, derive_seed(p.s0, 7));
      const double lhs =
          dmax_tilde_lower(p.c0, p.c1, eps * lipschitz_factor(sig), cfg).value;
      const double rhs = dmax_smooth_comb(p.c0, p.c1, eps).value;
      std::ostringstream name;
      name << "t1/pair" << pad2(i) << "/N" << sig.size() << "/eps" << eps;
      recs.push_back(record("t1", name.str(), ref, check_leq(lhs, rhs, 1e-5, true), {p.s0, p.s1}));
    }
    return recs;
  });
}

std::vector<CheckRecord> suite_t2(const SuiteOptions& opts, int pairs) {
  const char* ref = "revised smooth entropy at g(lambda) <= max log2(lambda / sqrt(1 - g^2))";
  const char* mono_ref = "Tr Delta(lambda) and g(lambda) nonincreasing in lambda";
  return run_trials(opts, "t2", pairs, [&](int i) {
    const auto p = comb_pair(opts, i);
    const auto& sig = p.c0.signature;
    auto cfg = search_config(sig, derive_seed(p.s0, 11));
    cfg.samples = sig.size() == 1 ? 4 : 1;
    std::vector<TwirledPair> twirled;
    for (const auto& g : sample_dual_combs(sig, cfg)) twirled.push_back(twirl_pair(p.c0, p.c1, g));
    const double top = std::exp2(dmax_spectral(canonical(p.c0.op, sig).matrix(),
                                               canonical(p.c1.op, sig).matrix()));
    const auto opts_sdp = SdpOptions::from_env();
    std::vector<CheckRecord> recs;
    for (int k = 1; k <= 8; ++k) {
      const double lambda = top * k / 8.0;
      double g = 0.0;
      double rhs = -kInf;
      for (const auto& tp : twirled) {
        const double td = delta_trace(tp, lambda);
        g = std::max(g, g_from_trace(td));
        rhs = std::max(rhs, td >= 1.0 ? kInf : std::log2(lambda / (1.0 - td)));
      }
      double lhs = -kInf;
      for (const auto& tp : twirled) lhs = std::max(lhs, dmax_tilde_at(tp, g, opts_sdp));
      std::ostringstream name;
      name << "t2/pair" << pad2(i) << "/N" << sig.size() << "/lambda" << k;
      recs.push_back(record("t2", name.str(), ref, check_leq(lhs, rhs, 1e-5, true), {p.s0, p.s1}));
    }
    // Monotonicity over 64 lambda samples.
    // g is an increasing function of Tr Delta on [0, 1], so monotonicity of
    // the trace carries over; g itself amplifies roundoff near zero.
    double worst = 0.0;
    double slack = 0.0;
    for (const auto& tp : twirled) {
      slack = std::max(slack, 1.25 * top * std::max(0.0, -min_eigenvalue(tp.sigma)));
      double prev = kInf;
      for (int j = 0; j < 64; ++j) {
        const double td = delta_trace(tp, 1.25 * top * j / 63.0);
        if (j > 0) worst = std::max(worst, td - prev);
        prev = td;
      }
    }
    recs.push_back(record("t2", "t2/pair" + pad2(i) + "/monotone", mono_ref,
                          check_leq(worst, 0.0, 1e-10 + 2.0 * slack, true), {p.s0, p.s1}));
    return recs;
  });
}

namespace {

std::vector<CheckRecord> sandwich_records(const char* kind, int i, const SandwichReport& r,
                                          std::vector<std::uint64_t> seeds) {
  const std::string base = std::string("t3/") + kind + pad2(i);
  CheckRecord lo = record("t3", base + "/lower", "D~^{f(eps)} <= -log2 beta_{1-eps}", r.lower, seeds);
  CheckRecord up = record("t3", base + "/upper",
                          "-log2 beta_{1-eps} <= D~^{eps'} + log2(1/(eps - eps'))", r.upper,
                          std::move(seeds));
  return {lo, up};
}

}  // namespace

std::vector<CheckRecord> suite_t3_states(const SuiteOptions& opts, int pairs) {
  return run_trials(opts, "t3", pairs, [&](int i) {
    const auto s = trial_seed(opts, kStatePairs, i);
    Rng rng(s);
    const MatrixXcd rho = random_density(2, rng);
    const MatrixXcd sigma = random_density(2, rng);
    TestingInstance inst{state_comb(rho), state_comb(sigma), 0.3};
    const auto r = theorem3_sandwich(inst, 0.1, GammaSearchConfig{}, 1e-4);
    return sandwich_records("states", i, r, {s});
  });
}

std::vector<CheckRecord> suite_t3_combs(const SuiteOptions& opts, int pairs) {
  return run_trials(opts, "t3", pairs, [&](int i) {
    const auto base = trial_seed(opts, kBlochPairs, i);
    const auto s0 = derive_seed(base, 0);
    const auto s1 = derive_seed(base, 1);
    TestingInstance inst{noisy_comb(kQubit, s0), noisy_comb(kQubit, s1), 0.3};
    GammaSearchConfig cfg;
    cfg.bloch_grid = true;
    cfg.grid_step = 0.05;
    const auto r = theorem3_sandwich(inst, 0.1, cfg, 1e-3);
    return sandwich_records("combs", i, r, {s0, s1});
  });
}

std::vector<CheckRecord> suite_t4(const SuiteOptions& opts, int pairs) {
  const char* ref = "(1/k) D~^eps(C0^k || C1^k) >= max relative entropy - 0.05";
  return run_trials(opts, "t4", pairs, [&](int i) {
    const auto s = trial_seed(opts, kEntropyPairs, i);
    Rng rng(s);
    const Comb c0 = state_comb(random_density(2, rng));
    const Comb c1 = state_comb(random_density(2, rng));
    const GammaSearchConfig cfg;
    const double rhs = theorem4_rhs(c0, c1, cfg).value;
    std::vector<CheckRecord> recs;
    for (int k = 1; k <= 3; ++k) {
      const auto a = tensor_power(c0, k);
      const auto b = tensor_power(c1, k);
      const auto row = dmax_tilde_lower(a, b, 0.01, cfg);
      recs.push_back(record("t4", "t4/pair" + pad2(i) + "/k" + std::to_string(k), ref,
                            check_leq(rhs - 0.05, row.value / k, 0.0, row.exhaustive), {s}));
    }
    return recs;
  });
}

std::vector<CheckRecord> suite_t9_multiplicativity(const SuiteOptions& opts, int operators) {
  return run_trials(opts, "t9", operators, [&](int i) {
    const auto s = trial_seed(opts, kOmegas, i);
    Rng rng(s);
    const auto p = make_performance_operator(
        LabeledOperator(comb_systems(kQubit), random_psd(4, 4, rng)), kQubit);
    std::vector<CheckRecord> recs;
    const auto m = multiplicativity_check(p, 2);
    recs.push_back(record("t9", "t9/omega" + pad2(i) + "/multiplicative",
                          "w_max(Omega^2) = w_max(Omega)^2 (relative)",
                          check_leq(m.relative_difference, 1e-5, 0.0, true), {s}));
    const auto g = random_dual_comb(kQubit, derive_seed(s, 1));
    const double w = wmax_primal(make_performance_operator(g.op, kQubit)).value;
    recs.push_back(record("t9", "t9/omega" + pad2(i) + "/dualcomb", "|w_max(Gamma) - 1|",
                          check_leq(std::abs(w - 1.0), 1e-7, 0.0, true), {derive_seed(s, 1)}));
    if (i == 0) {
      Eigen::VectorXcd phi = Eigen::VectorXcd::Zero(4);
      phi(0) = phi(3) = 1.0;
      const auto id = make_performance_operator(
          LabeledOperator(comb_systems(kQubit), phi * phi.adjoint()), kQubit);
      recs.push_back(record("t9", "t9/identity-choi", "|w_max(identity Choi) - d^2|",
                            check_leq(std::abs(wmax_primal(id).value - 4.0), 1e-5, 0.0, true), {}));
    }
    return recs;
  });
}

std::vector<CheckRecord> suite_t9_series(const SuiteOptions& opts, int operators) {
  const double eps = opts.epsilon >= 0 ? opts.epsilon : 0.01;
  return run_trials(opts, "t9", operators, [&](int i) {
    const auto s = trial_seed(opts, kSeries, i);
    Rng rng(s);
    const auto p = make_performance_operator(
        LabeledOperator(comb_systems(kQubit), random_psd(4, 4, rng)), kQubit);
    std::vector<CheckRecord> recs;
    for (const auto& row : asymptotic_series(p, eps, 3)) {
      const std::string base = "t9/series" + pad2(i) + "/n" + std::to_string(row.n);
      recs.push_back(record("t9", base + "/left", "w_max(Omega)^n <= w^eps lower", row.left, {s}));
      recs.push_back(record("t9", base + "/middle", "w^eps lower <= w^eps upper", row.middle, {s}));
      recs.push_back(
          record("t9", base + "/right", "w^eps upper <= eps prod d^n + w_max(Omega)^n", row.right, {s}));
    }
    return recs;
  });
}

std::vector<CheckRecord> suite_lemma8(const SuiteOptions& opts, int pairs) {
  return run_trials(opts, "lemma8", pairs, [&](int i) {
    const auto s = trial_seed(opts, kPerturbed, i);
    Rng rng(s);
    const NetworkSignature sig = i % 4 == 3 ? NetworkSignature{{{2, 2}, {2, 2}}} : kQubit;
    const auto d = sig.total_dim();
    const MatrixXcd a = random_psd(d, d, rng);
    MatrixXcd b;
    if (i % 2 == 0) {
      const double w = 0.3 * std::uniform_real_distribution<double>(0.0, 1.0)(rng);
      b = (1 - w) * a + w * a.trace().real() * random_density(d, rng);
    } else {
      MatrixXcd h = random_hermitian(d, rng);
      h -= (h.trace() / static_cast<double>(d)) * MatrixXcd::Identity(d, d);
      const double t = 0.5 * min_eigenvalue(a) / spectral_norm(h);
      b = a + t * h;
    }
    const auto m1 = make_performance_operator(LabeledOperator(comb_systems(sig), a), sig);
    const auto m2 = make_performance_operator(LabeledOperator(comb_systems(sig), b), sig);
    const auto r = lipschitz_check(m1, m2);
    std::vector<CheckRecord> recs;
    recs.push_back(record("lemma8", "lemma8/pair" + pad2(i) + "/lipschitz",
                          "|w_max(M1) - w_max(M2)| <= prod d_out * trace distance", r.check, {s}));
    const auto w = wmax_primal(m1);
    const auto br = wmax_smooth(m1, 0.0);
    const double dev = std::max(std::abs(br.lower - w.value), std::abs(br.upper - w.value));
    recs.push_back(record("lemma8", "lemma8/pair" + pad2(i) + "/eps0",
                          "eps = 0 bracket of w^eps equals w_max",
                          check_leq(dev, 1e-6 * std::max(1.0, w.value), 0.0, true), {s}));
    return recs;
  });
}

// ---------------------------------------------------------------------------

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"t1", "t2", "t3", "t4", "t9", "lemma8", "all"};
  return names;
}

std::vector<CheckRecord> run_suite(const std::string& name, const SuiteOptions& opts) {
  auto n = [&](int def) { return opts.trials > 0 ? opts.trials : def; };
  auto fifth = [&](int def) { return opts.trials > 0 ? std::max(1, opts.trials / 5) : def; };
  std::vector<CheckRecord> out;
  auto add = [&](std::vector<CheckRecord> v) {
    for (auto& r : v) out.push_back(std::move(r));
  };
  const bool all = name == "all";
  if (std::find(suite_names().begin(), suite_names().end(), name) == suite_names().end())
    throw InputError("unknown suite '" + name + "'");
  if (all || name == "t1") add(suite_t1(opts, n(50)));
  if (all || name == "t2") add(suite_t2(opts, n(50)));
  if (all || name == "t3") {
    add(suite_t3_states(opts, n(100)));
    add(suite_t3_combs(opts, fifth(20)));
  }
  if (all || name == "t4") add(suite_t4(opts, n(20)));
  if (all || name == "t9") {
    add(suite_t9_multiplicativity(opts, n(50)));
    add(suite_t9_series(opts, opts.trials > 0 ? opts.trials : 20));
  }
  if (all || name == "lemma8") add(suite_lemma8(opts, n(200)));
  return out;
}

ReportSummary summarize(const std::vector<CheckRecord>& checks) {
  ReportSummary s;
  for (const auto& c : checks) {
    switch (c.status) {
      case CheckStatus::pass: ++s.pass; break;
      case CheckStatus::fail: ++s.fail; break;
      case CheckStatus::inconclusive: ++s.inconclusive; break;
    }
  }
  return s;
}

Json report_json(const std::string& suite, const SuiteOptions& opts,
                 const std::vector<CheckRecord>& checks) {
  Json arr = Json::array();
  for (const auto& c : checks) {
    Json j{{"suite", c.suite},
           {"name", c.name},
           {"paper_ref", c.paper_ref},
           {"status", std::string(to_string(c.status))},
           {"lhs", number_to_json(c.lhs)},
           {"rhs", number_to_json(c.rhs)},
           {"margin", number_to_json(c.margin)},
           {"direction_certified", c.direction_certified},
           {"seeds", c.seeds},
           {"runtime_ms", c.runtime_ms ? Json(*c.runtime_ms) : Json(nullptr)}};
    if (!c.note.empty()) j["note"] = c.note;
    arr.push_back(std::move(j));
  }
  const auto s = summarize(checks);
  return {{"version", 1},
          {"suite", suite},
          {"seed", opts.seed},
          {"trials", opts.trials},
          {"summary", {{"pass", s.pass}, {"fail", s.fail}, {"inconclusive", s.inconclusive}}},
          {"checks", std::move(arr)}};
}

std::string report_csv(const std::vector<CheckRecord>& checks) {
  auto quoted = [](const std::string& s) {
    std::string q = "\"";
    for (char ch : s) {
      if (ch == '"') q += '"';
      q += ch;
    }
    return q + "\"";
  };
  std::ostringstream os;
  os << "suite,name,status,lhs,rhs,margin,direction_certified,seeds,runtime_ms,paper_ref,note\n";
  for (const auto& c : checks) {
    std::string seeds;
    for (std::size_t k = 0; k < c.seeds.size(); ++k)
      seeds += (k ? " " : "") + std::to_string(c.seeds[k]);
    os << c.suite << ',' << c.name << ',' << to_string(c.status) << ',' << format_number(c.lhs)
       << ',' << format_number(c.rhs) << ',' << format_number(c.margin) << ','
       << (c.direction_certified ? "true" : "false") << ',' << seeds << ','
       << (c.runtime_ms ? format_number(*c.runtime_ms) : "") << ',' << quoted(c.paper_ref) << ','
       << quoted(c.note) << '\n';
  }
  return os.str();
}

}  // namespace combkit
