// combkit command-line front end.
//
// Exit codes: 0 success (or a valid structure), 1 domain error or invalid
// structure, 2 malformed input or usage, 3 solver stopped at its iteration
// limit.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "combkit/entropy.hpp"
#include "combkit/errors.hpp"
#include "combkit/hypotest.hpp"
#include "combkit/io.hpp"
#include "combkit/network.hpp"
#include "combkit/performance.hpp"
#include "combkit/verify.hpp"

using namespace combkit;

namespace {

constexpr int kExitDomain = 1;
constexpr int kExitInput = 2;
constexpr int kExitSolver = 3;

struct Common {
  double eps = 0.1;
  std::uint64_t seed = 1;
  bool json = false;
  std::string optimizer_out;
  int samples = GammaSearchConfig{}.samples;
  int ascent = GammaSearchConfig{}.ascent_steps;
  bool bloch = false;
  double grid_step = 0.05;
};

GammaSearchConfig search(const Common& c) {
  GammaSearchConfig cfg;
  cfg.seed = c.seed;
  cfg.samples = c.samples;
  cfg.ascent_steps = c.ascent;
  cfg.bloch_grid = c.bloch;
  cfg.grid_step = c.grid_step;
  return cfg;
}

Comb load_comb(const std::string& path) {
  const auto op = read_operator_file(path);
  return make_comb(op, signature_of(op));
}

/// Prints the value to 12 significant digits (full precision and extra
/// fields with --json) and writes the optional optimizer file.
void emit(const Common& c, const std::string& command, double value, Json extra = Json::object(),
          const LabeledOperator* optimizer = nullptr) {
  if (optimizer && !c.optimizer_out.empty()) write_operator_file(c.optimizer_out, *optimizer);
  if (c.json) {
    Json j{{"command", command}, {"value", number_to_json(value)}};
    for (auto& [k, v] : extra.items()) j[k] = v;
    std::cout << j.dump() << '\n';
  } else if (std::isfinite(value)) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", value);
    std::cout << buf << '\n';
  } else {
    std::cout << format_number(value) << '\n';
  }
}

LabeledOperator canonical_matrix(const NetworkSignature& sig, const Eigen::MatrixXcd& m) {
  return LabeledOperator(comb_systems(sig), m);
}

void print_report(const std::string& kind, const StructureReport& r) {
  std::cout << kind << ": " << (r.valid ? "valid" : "invalid") << " (" << r.message << ")\n";
  std::cout << "min_eigenvalue " << format_number(r.min_eigenvalue) << '\n';
  for (std::size_t k = 0; k < r.residuals.size(); ++k)
    std::cout << "residual[" << k << "] " << format_number(r.residuals[k]) << '\n';
}

int cmd_validate(const std::string& path, const std::string& kind, double tol) {
  if (kind == "tester") {
    auto outcomes = tester_outcomes_from_json(read_json_file(path));
    const NetworkSignature sig = signature_of(outcomes.front().second);
    Eigen::MatrixXcd sum = Eigen::MatrixXcd::Zero(sig.total_dim(), sig.total_dim());
    for (const auto& [name, op] : outcomes) sum += canonical(op, sig).matrix();
    const LabeledOperator norm = canonical_matrix(sig, sum);
    std::vector<LabeledOperator> hierarchy;
    const auto nr = validate_dual_comb(norm, sig, tol, &hierarchy);
    if (!nr.valid) {
      print_report("tester normalization", nr);
      return 1;
    }
    Tester t{std::move(outcomes), DualCombElement{norm, std::move(hierarchy), sig}};
    const auto r = validate_tester(t, tol);
    print_report("tester", r);
    return r.valid ? 0 : 1;
  }
  const auto op = read_operator_file(path);
  const auto sig = signature_of(op);
  const auto r = kind == "comb" ? validate_comb(op, sig, tol) : validate_dual_comb(op, sig, tol);
  print_report(kind, r);
  return r.valid ? 0 : 1;
}

int cmd_random(const std::string& kind, const std::string& signature, std::uint64_t seed,
               const std::string& out, int outcomes, double noise, Eigen::Index memory) {
  const auto sig = NetworkSignature::parse(signature);
  check_signature(sig);
  RandomOptions o;
  o.memory_dim = memory;
  o.white_noise = noise;
  Json j;
  if (kind == "comb") {
    j = operator_to_json(random_comb(sig, seed, o).op);
  } else if (kind == "dualcomb") {
    j = operator_to_json(random_dual_comb(sig, seed, o).op);
  } else {
    if (outcomes < 1) throw InputError("--outcomes must be positive");
    j = tester_to_json(random_tester(sig, seed, static_cast<std::size_t>(outcomes), o));
  }
  if (out.empty()) {
    std::cout << j.dump(1) << '\n';
  } else {
    std::ofstream f(out);
    if (!f) throw InputError("cannot write '" + out + "'");
    f << j.dump(1) << '\n';
  }
  return 0;
}

int cmd_verify(const std::string& suite, const SuiteOptions& opts, const std::string& out,
               std::string csv) {
  const auto checks = run_suite(suite, opts);
  const auto summary = summarize(checks);
  if (csv.empty()) {
    std::filesystem::path p(out);
    p.replace_extension(".csv");
    csv = p.string();
  }
  {
    std::ofstream f(out);
    if (!f) throw InputError("cannot write '" + out + "'");
    f << report_json(suite, opts, checks).dump(1) << '\n';
  }
  {
    std::ofstream f(csv);
    if (!f) throw InputError("cannot write '" + csv + "'");
    f << report_csv(checks);
  }
  std::cout << suite << ": " << checks.size() << " checks, " << summary.pass << " pass, "
            << summary.fail << " fail, " << summary.inconclusive << " inconclusive\n";
  for (const auto& c : checks)
    if (c.status == CheckStatus::fail)
      std::cout << "FAIL " << c.name << " lhs=" << format_number(c.lhs)
                << " rhs=" << format_number(c.rhs) << '\n';
  return summary.fail == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Entropies, hypothesis tests and performance scores of quantum combs"};
  app.require_subcommand(1);
  int exit_code = 0;

  // validate ---------------------------------------------------------------
  std::string v_path, v_kind = "comb";
  double v_tol = kTolComb;
  auto* validate = app.add_subcommand("validate", "check comb, dual-comb or tester structure");
  validate->add_option("path", v_path, "operator or tester file")->required();
  validate->add_option("--kind", v_kind)->check(CLI::IsMember({"comb", "dualcomb", "tester"}));
  validate->add_option("--tol", v_tol, "absolute Frobenius tolerance");
  validate->callback([&] { exit_code = cmd_validate(v_path, v_kind, v_tol); });

  // compute subcommands ------------------------------------------------------
  Common common;
  std::string in_a, in_b, mode = "auto", out_path;
  bool use_dual = false;
  int iters = 25;
  auto add_common = [&](CLI::App* s, bool eps, bool seed) {
    s->add_flag("--json", common.json, "machine-readable output");
    if (eps) s->add_option("--eps", common.eps, "smoothing or error parameter");
    if (seed) {
      s->add_option("--seed", common.seed, "seed of the dual-comb search");
      s->add_option("--samples", common.samples, "random dual combs in the search");
      s->add_option("--ascent", common.ascent, "coordinate-ascent rounds");
      s->add_flag("--bloch-grid", common.bloch, "Bloch-ball grid search (one qubit tooth)");
      s->add_option("--grid-step", common.grid_step);
    }
  };
  auto two_inputs = [&](CLI::App* s) {
    s->add_option("first", in_a)->required();
    s->add_option("second", in_b)->required();
  };

  auto* dmax_cmd = app.add_subcommand("dmax", "max-relative entropy D_max(A || B) in bits");
  two_inputs(dmax_cmd);
  add_common(dmax_cmd, false, false);
  dmax_cmd->callback([&] {
    const auto r = dmax_report(read_operator_file(in_a), read_operator_file(in_b));
    if (std::isfinite(r.value) && r.difference > 1e-6)
      throw SolverError("closed form and SDP disagree");
    emit(common, "dmax", r.value, {{"sdp", number_to_json(r.sdp)}});
  });

  auto* relent_cmd = app.add_subcommand("relent", "relative entropy D(A || B) in bits");
  two_inputs(relent_cmd);
  add_common(relent_cmd, false, false);
  relent_cmd->callback([&] {
    const auto a = read_operator_file(in_a);
    const auto b = aligned_to(a, read_operator_file(in_b));
    emit(common, "relent", rel_entropy(a.matrix(), b.matrix()));
  });

  auto* smooth_cmd = app.add_subcommand("dmax-smooth", "smooth max-relative entropy");
  two_inputs(smooth_cmd);
  add_common(smooth_cmd, true, false);
  smooth_cmd->add_option("--ball", mode, "comb: ball of combs; state: ball of states; auto")
      ->check(CLI::IsMember({"auto", "comb", "state"}));
  smooth_cmd->add_option("--optimizer-out", common.optimizer_out);
  smooth_cmd->callback([&] {
    const auto a = read_operator_file(in_a);
    const auto b = read_operator_file(in_b);
    const auto sig = signature_of(a);
    bool comb_ball = mode == "comb";
    if (mode == "auto") comb_ball = validate_comb(a, sig).valid && validate_comb(b, sig).valid;
    SmoothResult r;
    LabeledOperator opt;
    if (comb_ball) {
      r = dmax_smooth_comb(make_comb(a, sig), make_comb(b, sig), common.eps);
      if (r.optimizer.size()) opt = canonical_matrix(sig, r.optimizer);
    } else {
      r = dmax_smooth_state(a.matrix(), aligned_to(a, b).matrix(), common.eps);
      if (r.optimizer.size()) opt = a.with_matrix(r.optimizer);
    }
    emit(common, "dmax-smooth", r.value,
         {{"lower", number_to_json(r.lower)}, {"ball", comb_ball ? "comb" : "state"}},
         r.optimizer.size() ? &opt : nullptr);
  });

  auto* tilde_cmd = app.add_subcommand("dmax-tilde", "revised smooth entropy (lower bound)");
  two_inputs(tilde_cmd);
  add_common(tilde_cmd, true, true);
  tilde_cmd->add_option("--optimizer-out", common.optimizer_out, "write the best dual comb");
  tilde_cmd->callback([&] {
    const auto r = dmax_tilde_lower(load_comb(in_a), load_comb(in_b), common.eps, search(common));
    emit(common, "dmax-tilde", r.value,
         {{"exhaustive", r.exhaustive}, {"evaluations", r.evaluations}}, &r.gamma.op);
  });

  auto* beta_cmd = app.add_subcommand("beta", "type-II error of the best test (upper bound)");
  two_inputs(beta_cmd);
  add_common(beta_cmd, true, true);
  beta_cmd->add_option("--optimizer-out", common.optimizer_out, "write the accepting effect");
  beta_cmd->callback([&] {
    TestingInstance inst{load_comb(in_a), load_comb(in_b), common.eps};
    const auto r = beta_min(inst, search(common));
    emit(common, "beta", r.beta_upper,
         {{"exhaustive", r.exhaustive}, {"evaluations", r.evaluations}}, &r.strategy.pi);
  });

  auto* wmax_cmd = app.add_subcommand("wmax", "optimal score of a performance operator");
  wmax_cmd->add_option("omega", in_a)->required();
  add_common(wmax_cmd, false, false);
  wmax_cmd->add_flag("--dual", use_dual, "solve the comb-side program");
  wmax_cmd->add_option("--optimizer-out", common.optimizer_out, "write the optimal comb");
  wmax_cmd->callback([&] {
    const auto op = read_operator_file(in_a);
    const auto p = make_performance_operator(op, signature_of(op));
    const auto r = use_dual ? wmax_dual(p) : wmax_primal(p);
    const LabeledOperator& comb = use_dual ? r.optimizer : r.witness;
    emit(common, "wmax", r.value,
         {{"lower", number_to_json(r.lower)}, {"upper", number_to_json(r.upper)}}, &comb);
  });

  auto* wsmooth_cmd = app.add_subcommand("wmax-smooth", "bracket on the smoothed optimal score");
  wsmooth_cmd->add_option("omega", in_a)->required();
  add_common(wsmooth_cmd, true, false);
  wsmooth_cmd->add_option("--iters", iters, "alternation rounds");
  wsmooth_cmd->add_option("--optimizer-out", common.optimizer_out, "write the smoothed operator");
  wsmooth_cmd->callback([&] {
    const auto op = read_operator_file(in_a);
    const auto p = make_performance_operator(op, signature_of(op));
    const auto r = wmax_smooth(p, common.eps, iters);
    emit(common, "wmax-smooth", r.lower,
         {{"lower", number_to_json(r.lower)}, {"upper", number_to_json(r.upper)},
          {"rounds", r.rounds}},
         &r.omega_prime);
  });

  auto* score_cmd = app.add_subcommand("score", "score Omega * C of a comb");
  score_cmd->add_option("omega", in_a)->required();
  score_cmd->add_option("comb", in_b)->required();
  add_common(score_cmd, false, false);
  score_cmd->callback([&] {
    const auto op = read_operator_file(in_a);
    const auto p = make_performance_operator(op, signature_of(op));
    emit(common, "score", score(p, make_comb(read_operator_file(in_b), p.signature)));
  });

  auto* link_cmd = app.add_subcommand("linkprod", "link product A * B");
  two_inputs(link_cmd);
  add_common(link_cmd, false, false);
  link_cmd->add_option("--out", out_path, "file for a non-scalar result (default: stdout)");
  link_cmd->callback([&] {
    const auto r = link_product(read_operator_file(in_a), read_operator_file(in_b));
    if (r.systems().empty()) {
      emit(common, "linkprod", r.trace().real(), {{"imag", r.trace().imag()}});
    } else if (!out_path.empty()) {
      write_operator_file(out_path, r);
      emit(common, "linkprod", r.trace().real(), {{"out", out_path}});
    } else {
      write_operator(std::cout, r);
    }
  });

  // random ---------------------------------------------------------------------
  std::string r_kind = "comb", r_sig, r_out;
  std::uint64_t r_seed = 1;
  int r_outcomes = 2;
  double r_noise = 0.0;
  Eigen::Index r_memory = 2;
  auto* random_cmd = app.add_subcommand("random", "sample a comb, dual comb or tester");
  random_cmd->add_option("--kind", r_kind)->check(CLI::IsMember({"comb", "dualcomb", "tester"}));
  random_cmd->add_option("--signature", r_sig, "teeth as d_in,d_out;d_in,d_out;...")->required();
  random_cmd->add_option("--seed", r_seed);
  random_cmd->add_option("--out", r_out, "output file (default: stdout)");
  random_cmd->add_option("--outcomes", r_outcomes, "tester outcomes");
  random_cmd->add_option("--noise", r_noise, "white-noise weight for combs");
  random_cmd->add_option("--memory", r_memory, "memory dimension between teeth");
  random_cmd->callback([&] {
    exit_code = cmd_random(r_kind, r_sig, r_seed, r_out, r_outcomes, r_noise, r_memory);
  });

  // verify-theorems ----------------------------------------------------------
  std::string t_suite = "all", t_out = "report.json", t_csv;
  SuiteOptions t_opts;
  auto* verify_cmd = app.add_subcommand("verify-theorems", "run the randomized inequality suites");
  verify_cmd->add_option("--suite", t_suite)->check(CLI::IsMember(suite_names()));
  verify_cmd->add_option("--trials", t_opts.trials, "instances per suite (default per suite)");
  verify_cmd->add_option("--seed", t_opts.seed);
  verify_cmd->add_option("--out", t_out, "JSON report");
  verify_cmd->add_option("--csv", t_csv, "CSV report (default: --out with .csv)");
  verify_cmd->add_flag("--timing", t_opts.timing, "record per-check runtimes");
  verify_cmd->add_option("--jobs", t_opts.jobs, "worker threads")->check(CLI::PositiveNumber);
  verify_cmd->add_option("--eps", t_opts.epsilon, "smoothing parameter of the t9 series");
  verify_cmd->callback([&] { exit_code = cmd_verify(t_suite, t_opts, t_out, t_csv); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInput;
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kExitInput;
  } catch (const DomainError& e) {
    std::cerr << "domain error: " << e.what() << '\n';
    return kExitDomain;
  } catch (const SolverError& e) {
    std::cerr << "solver error: " << e.what() << '\n';
    return kExitSolver;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  }
  return exit_code;
}
