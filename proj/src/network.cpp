#include "combkit/network.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "combkit/errors.hpp"

namespace combkit {

Eigen::Index NetworkSignature::prod_in() const {
  Eigen::Index p = 1;
  for (const auto& t : teeth) p *= t.d_in;
  return p;
}

Eigen::Index NetworkSignature::prod_out() const {
  Eigen::Index p = 1;
  for (const auto& t : teeth) p *= t.d_out;
  return p;
}

namespace {

Eigen::Index parse_dim(std::string_view s) {
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
  long long v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || v < 1)
    throw InputError("bad dimension '" + std::string(s) + "' in signature");
  return static_cast<Eigen::Index>(v);
}

}  // namespace

NetworkSignature NetworkSignature::parse(std::string_view text) {
  NetworkSignature sig;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = std::min(text.find(';', start), text.size());
    const auto part = text.substr(start, end - start);
    const auto comma = part.find(',');
    if (comma == std::string_view::npos || part.find(',', comma + 1) != std::string_view::npos)
      throw InputError("signature tooth '" + std::string(part) + "' is not 'd_in,d_out'");
    sig.teeth.push_back({parse_dim(part.substr(0, comma)), parse_dim(part.substr(comma + 1))});
    start = end + 1;
  }
  check_signature(sig);
  return sig;
}

std::string NetworkSignature::str() const {
  std::ostringstream os;
  for (std::size_t j = 0; j < teeth.size(); ++j)
    os << (j ? ";" : "") << teeth[j].d_in << "," << teeth[j].d_out;
  return os.str();
}

void check_signature(const NetworkSignature& sig) {
  if (sig.teeth.empty()) throw InputError("signature needs at least one tooth");
  for (const auto& t : sig.teeth)
    if (t.d_in < 1 || t.d_out < 1) throw InputError("signature dimensions must be >= 1");
}

std::string in_name(std::size_t tooth) { return "in" + std::to_string(tooth); }
std::string out_name(std::size_t tooth) { return "out" + std::to_string(tooth); }

std::vector<SystemLabel> comb_systems(const NetworkSignature& sig, std::size_t teeth) {
  std::vector<SystemLabel> s;
  const std::size_t n = std::min(teeth, sig.size());
  for (std::size_t j = 1; j <= n; ++j) {
    const auto& t = sig.teeth[j - 1];
    s.push_back({out_name(j), t.d_out, Role::out, static_cast<int>(j)});
    s.push_back({in_name(j), t.d_in, Role::in, static_cast<int>(j)});
  }
  return s;
}

std::vector<std::string> comb_names(const NetworkSignature& sig, std::size_t teeth) {
  std::vector<std::string> names;
  for (const auto& s : comb_systems(sig, teeth)) names.push_back(s.name);
  return names;
}

NetworkSignature signature_of(const LabeledOperator& op) {
  std::map<std::size_t, Tooth> found;
  std::size_t n = 0;
  for (const auto& s : op.systems()) {
    const bool is_in = s.name.rfind("in", 0) == 0;
    const bool is_out = s.name.rfind("out", 0) == 0;
    const std::string_view digits = std::string_view(s.name).substr(is_in ? 2 : 3);
    std::size_t j = 0;
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), j);
    if ((!is_in && !is_out) || digits.empty() || ec != std::errc() ||
        ptr != digits.data() + digits.size() || j < 1)
      throw InputError("label '" + s.name + "' is not of the form in{j} or out{j}");
    (is_in ? found[j].d_in : found[j].d_out) = s.dim;
    n = std::max(n, j);
  }
  if (n == 0) throw InputError("operator carries no network labels");
  NetworkSignature sig;
  for (std::size_t j = 1; j <= n; ++j) sig.teeth.push_back(found.count(j) ? found[j] : Tooth{});
  return sig;
}

LabeledOperator canonical(const LabeledOperator& op, const NetworkSignature& sig) {
  check_signature(sig);
  const auto systems = comb_systems(sig);
  for (const auto& s : op.systems()) {
    auto it = std::find_if(systems.begin(), systems.end(),
                           [&](const SystemLabel& c) { return c.name == s.name; });
    if (it == systems.end())
      throw InputError("label '" + s.name + "' does not belong to signature " + sig.str());
    if (it->dim != s.dim)
      throw InputError("label '" + s.name + "' has dim " + std::to_string(s.dim) +
                       ", signature expects " + std::to_string(it->dim));
  }
  std::vector<SystemLabel> missing;
  for (const auto& c : systems) {
    if (op.has(c.name)) continue;
    if (c.dim != 1) throw InputError("operator lacks label '" + c.name + "'");
    missing.push_back(c);
  }
  LabeledOperator padded =
      missing.empty() ? op : tensor(op, LabeledOperator::identity(std::move(missing)));
  LabeledOperator ordered = reorder(padded, comb_names(sig));
  return LabeledOperator(systems, ordered.matrix());
}

// ---------------------------------------------------------------------------

LabeledOperator choi_of_map(const std::vector<Eigen::MatrixXcd>& kraus,
                            const std::vector<SystemLabel>& outputs,
                            const std::vector<SystemLabel>& inputs) {
  Eigen::Index d_out = 1, d_in = 1;
  for (const auto& s : outputs) d_out *= s.dim;
  for (const auto& s : inputs) d_in *= s.dim;
  if (kraus.empty()) throw InputError("choi_of_map: no Kraus operators");
  Eigen::MatrixXcd sum = Eigen::MatrixXcd::Zero(d_in, d_in);
  Eigen::MatrixXcd choi = Eigen::MatrixXcd::Zero(d_out * d_in, d_out * d_in);
  for (const auto& k : kraus) {
    if (k.rows() != d_out || k.cols() != d_in)
      throw InputError("choi_of_map: Kraus operator is " + std::to_string(k.rows()) + "x" +
                       std::to_string(k.cols()) + ", expected " + std::to_string(d_out) + "x" +
                       std::to_string(d_in));
    Eigen::VectorXcd v(d_out * d_in);
    for (Eigen::Index o = 0; o < d_out; ++o)
      for (Eigen::Index i = 0; i < d_in; ++i) v(o * d_in + i) = k(o, i);
    choi += v * v.adjoint();
    sum += k.adjoint() * k;
  }
  if (eig_hermitian(sum).values(0) > 1.0 + 1e-9)
    throw DomainError("choi_of_map: sum of K^dagger K exceeds the identity");
  auto systems = outputs;
  systems.insert(systems.end(), inputs.begin(), inputs.end());
  return LabeledOperator(std::move(systems), choi);
}

LabeledOperator choi_of_map(const std::vector<Eigen::MatrixXcd>& kraus, Eigen::Index d_in,
                            Eigen::Index d_out) {
  return choi_of_map(kraus, {{out_name(1), d_out, Role::out, 1}},
                     {{in_name(1), d_in, Role::in, 1}});
}

LabeledOperator apply_choi(const LabeledOperator& m, const LabeledOperator& x) {
  std::vector<SystemLabel> rest;
  for (const auto& s : x.systems())
    if (!m.has(s.name) || m.system(s.name).dim != s.dim)
      throw InputError("apply_choi: label '" + s.name + "' is not an input of the map");
  for (const auto& s : m.systems())
    if (!x.has(s.name)) rest.push_back(s);
  const LabeledOperator padded = tensor(transpose(x), LabeledOperator::identity(rest));
  return partial_trace(product(padded, m), x.names());
}

LabeledOperator link_product(const LabeledOperator& n, const LabeledOperator& m) {
  std::vector<std::string> shared, n_only, m_only;
  std::vector<SystemLabel> out_systems;
  for (const auto& s : n.systems()) {
    if (auto k = m.find(s.name)) {
      if (m.systems()[*k].dim != s.dim)
        throw InputError("link_product: label '" + s.name + "' has dims " +
                         std::to_string(s.dim) + " and " +
                         std::to_string(m.systems()[*k].dim));
      shared.push_back(s.name);
    } else {
      n_only.push_back(s.name);
      out_systems.push_back(s);
    }
  }
  for (const auto& s : m.systems())
    if (!n.has(s.name)) {
      m_only.push_back(s.name);
      out_systems.push_back(s);
    }
  if (shared.empty()) return tensor(n, m);

  auto order_n = n_only;
  order_n.insert(order_n.end(), shared.begin(), shared.end());
  auto order_m = shared;
  order_m.insert(order_m.end(), m_only.begin(), m_only.end());
  const Eigen::MatrixXcd nn = reorder(n, order_n).matrix();
  const Eigen::MatrixXcd mm = reorder(m, order_m).matrix();

  Eigen::Index s = 1;
  for (const auto& name : shared) s *= n.system(name).dim;
  const Eigen::Index a = n.side() / s;
  const Eigen::Index b = m.side() / s;

  // R[(al,be),(al',be')] = sum N[(al,s),(al',s')] M[(s,be),(s',be')]
  Eigen::MatrixXcd nt(a * a, s * s);
  for (Eigen::Index al = 0; al < a; ++al)
    for (Eigen::Index alp = 0; alp < a; ++alp)
      for (Eigen::Index si = 0; si < s; ++si)
        for (Eigen::Index sp = 0; sp < s; ++sp)
          nt(al * a + alp, si * s + sp) = nn(al * s + si, alp * s + sp);
  Eigen::MatrixXcd mt(s * s, b * b);
  for (Eigen::Index si = 0; si < s; ++si)
    for (Eigen::Index sp = 0; sp < s; ++sp)
      for (Eigen::Index be = 0; be < b; ++be)
        for (Eigen::Index bep = 0; bep < b; ++bep)
          mt(si * s + sp, be * b + bep) = mm(si * b + be, sp * b + bep);
  const Eigen::MatrixXcd rt = nt * mt;
  Eigen::MatrixXcd r(a * b, a * b);
  for (Eigen::Index al = 0; al < a; ++al)
    for (Eigen::Index alp = 0; alp < a; ++alp)
      for (Eigen::Index be = 0; be < b; ++be)
        for (Eigen::Index bep = 0; bep < b; ++bep)
          r(al * b + be, alp * b + bep) = rt(al * a + alp, be * b + bep);
  return LabeledOperator(std::move(out_systems), r);
}

// ---------------------------------------------------------------------------

namespace {

double psd_floor(const Eigen::VectorXd& values) {
  const double scale = std::max(1.0, values.cwiseAbs().maxCoeff());
  return -kTolPsd * scale;
}

LabeledOperator identity_on(const NetworkSignature& sig, const std::string& name) {
  for (const auto& s : comb_systems(sig))
    if (s.name == name) return LabeledOperator::identity({s});
  throw InputError("unknown label '" + name + "'");
}

void finish(StructureReport& r, double tol) {
  bool ok = r.valid;
  for (double x : r.residuals) ok = ok && x <= tol;
  r.valid = ok;
}

StructureReport spectral_part(const LabeledOperator& op) {
  StructureReport r;
  if (!is_hermitian(op.matrix())) {
    r.message = "operator is not Hermitian";
    r.min_eigenvalue = -std::numeric_limits<double>::infinity();
    return r;
  }
  const auto e = eig_hermitian(op.matrix());
  r.min_eigenvalue = e.values(e.values.size() - 1);
  r.valid = r.min_eigenvalue >= psd_floor(e.values);
  if (!r.valid) r.message = "operator is not positive semidefinite";
  return r;
}

}  // namespace

StructureReport validate_comb(const LabeledOperator& op, const NetworkSignature& sig, double tol) {
  const LabeledOperator c = canonical(op, sig);
  StructureReport r = spectral_part(c);
  if (!std::isfinite(r.min_eigenvalue)) return r;
  const bool psd = r.valid;
  LabeledOperator cur = c;
  for (std::size_t n = sig.size(); n >= 1; --n) {
    const auto t = partial_trace(cur, {out_name(n)});
    const auto prev = (1.0 / static_cast<double>(sig.teeth[n - 1].d_in)) *
                      partial_trace(t, {in_name(n)});
    r.residuals.push_back(frobenius_distance(t, tensor(prev, identity_on(sig, in_name(n)))));
    cur = prev;
  }
  r.residuals.push_back(std::abs(cur.trace() - 1.0));
  r.valid = psd;
  finish(r, tol);
  if (r.valid) {
    r.message = "valid comb";
  } else if (r.message.empty()) {
    r.message = "comb hierarchy violated";
  }
  return r;
}

StructureReport validate_dual_comb(const LabeledOperator& op, const NetworkSignature& sig,
                                   double tol, std::vector<LabeledOperator>* hierarchy) {
  const LabeledOperator g = canonical(op, sig);
  StructureReport r = spectral_part(g);
  if (!std::isfinite(r.min_eigenvalue)) return r;
  const bool psd = r.valid;
  const std::size_t big_n = sig.size();
  std::vector<LabeledOperator> h(big_n);
  h[big_n - 1] = (1.0 / static_cast<double>(sig.teeth[big_n - 1].d_out)) *
                 partial_trace(g, {out_name(big_n)});
  r.residuals.push_back(
      frobenius_distance(g, tensor(identity_on(sig, out_name(big_n)), h[big_n - 1])));
  for (std::size_t n = big_n; n >= 2; --n) {
    const auto t = partial_trace(h[n - 1], {in_name(n)});
    h[n - 2] = (1.0 / static_cast<double>(sig.teeth[n - 2].d_out)) *
               partial_trace(t, {out_name(n - 1)});
    r.residuals.push_back(
        frobenius_distance(t, tensor(identity_on(sig, out_name(n - 1)), h[n - 2])));
  }
  r.residuals.push_back(std::abs(h[0].trace() - 1.0));
  r.valid = psd;
  finish(r, tol);
  if (r.valid) {
    r.message = "valid dual comb";
  } else if (r.message.empty()) {
    r.message = "dual comb hierarchy violated";
  }
  if (hierarchy) *hierarchy = std::move(h);
  return r;
}

StructureReport validate_dual_comb(const DualCombElement& gamma, double tol) {
  std::vector<LabeledOperator> extracted;
  StructureReport r = validate_dual_comb(gamma.op, gamma.signature, tol, &extracted);
  if (gamma.hierarchy.size() != extracted.size()) {
    r.valid = false;
    r.message = "stored hierarchy has the wrong number of levels";
    return r;
  }
  for (std::size_t n = 0; n < extracted.size(); ++n) {
    double d = std::numeric_limits<double>::infinity();
    if (same_label_set(gamma.hierarchy[n], extracted[n]))
      d = frobenius_distance(extracted[n], gamma.hierarchy[n]);
    r.residuals.push_back(d);
    if (!(d <= tol)) {
      r.valid = false;
      r.message = "stored hierarchy disagrees with the operator at level " + std::to_string(n + 1);
    }
  }
  return r;
}

StructureReport validate_tester(const Tester& t, double tol) {
  const auto& sig = t.normalization.signature;
  StructureReport r = validate_dual_comb(t.normalization, tol);
  if (t.outcomes.empty()) {
    r.valid = false;
    r.message = "tester has no outcomes";
    return r;
  }
  const LabeledOperator norm = canonical(t.normalization.op, sig);
  Eigen::MatrixXcd sum = Eigen::MatrixXcd::Zero(norm.side(), norm.side());
  double min_eig = std::numeric_limits<double>::infinity();
  for (const auto& [name, op] : t.outcomes) {
    const LabeledOperator c = canonical(op, sig);
    const StructureReport s = spectral_part(c);
    min_eig = std::min(min_eig, s.min_eigenvalue);
    if (!s.valid) {
      r.valid = false;
      r.message = "outcome '" + name + "': " + s.message;
    }
    sum += c.matrix();
  }
  r.min_eigenvalue = std::min(r.min_eigenvalue, min_eig);
  const double resid = (sum - norm.matrix()).norm();
  r.residuals.push_back(resid);
  if (!(resid <= tol)) {
    r.valid = false;
    r.message = "outcomes do not sum to the normalization";
  }
  if (r.valid) r.message = "valid tester";
  return r;
}

Comb make_comb(const LabeledOperator& op, const NetworkSignature& sig, double tol) {
  LabeledOperator c = canonical(op, sig);
  const auto r = validate_comb(c, sig, tol);
  if (!r.valid) throw DomainError("not a comb: " + r.message);
  return {std::move(c), sig};
}

DualCombElement make_dual_comb(const LabeledOperator& op, const NetworkSignature& sig,
                               double tol) {
  DualCombElement g{canonical(op, sig), {}, sig};
  const auto r = validate_dual_comb(g.op, sig, tol, &g.hierarchy);
  if (!r.valid) throw DomainError("not a dual comb: " + r.message);
  return g;
}

DualCombElement maximally_mixed_dual_comb(const NetworkSignature& sig) {
  check_signature(sig);
  DualCombElement g;
  g.signature = sig;
  double din = 1.0;
  for (std::size_t n = 1; n <= sig.size(); ++n) {
    din *= static_cast<double>(sig.teeth[n - 1].d_in);
    auto systems = comb_systems(sig, n - 1);
    systems.push_back({in_name(n), sig.teeth[n - 1].d_in, Role::in, static_cast<int>(n)});
    g.hierarchy.push_back((1.0 / din) * LabeledOperator::identity(systems));
  }
  g.op = (1.0 / din) * LabeledOperator::identity(comb_systems(sig));
  return g;
}

DualCombElement dual_comb_from_state(const NetworkSignature& sig, const Eigen::MatrixXcd& sigma) {
  check_signature(sig);
  if (sig.size() != 1) throw InputError("dual_comb_from_state needs a single-tooth signature");
  const auto systems = comb_systems(sig);
  const LabeledOperator s({systems[1]}, sigma);
  return {tensor(LabeledOperator::identity({systems[0]}), s), {s}, sig};
}

std::vector<double> outcome_probabilities(const Comb& c, const Tester& t) {
  if (!(c.signature == t.normalization.signature))
    throw InputError("outcome_probabilities: signature mismatch");
  std::vector<double> p;
  for (const auto& [name, op] : t.outcomes) {
    const auto v = link_product(canonical(op, c.signature), c.op);
    p.push_back(v.matrix()(0, 0).real());
  }
  return p;
}

double pairing(const DualCombElement& gamma, const Comb& c) {
  if (!(c.signature == gamma.signature)) throw InputError("pairing: signature mismatch");
  return product(gamma.op, c.op).trace().real();
}

// ---------------------------------------------------------------------------

NetworkSignature tensor_power(const NetworkSignature& sig, int n) {
  check_signature(sig);
  if (n < 1) throw InputError("tensor power must be >= 1");
  NetworkSignature out;
  for (const auto& t : sig.teeth) {
    Tooth p{1, 1};
    for (int k = 0; k < n; ++k) {
      p.d_in *= t.d_in;
      p.d_out *= t.d_out;
    }
    out.teeth.push_back(p);
  }
  return out;
}

LabeledOperator tensor_power(const LabeledOperator& op, const NetworkSignature& sig, int n) {
  const NetworkSignature big = tensor_power(sig, n);
  const LabeledOperator c = canonical(op, sig);
  auto renamed = [&](int k) {
    auto systems = c.systems();
    for (auto& s : systems) s.name += "#" + std::to_string(k);
    return LabeledOperator(std::move(systems), c.matrix());
  };
  LabeledOperator acc = renamed(0);
  for (int k = 1; k < n; ++k) acc = tensor(acc, renamed(k));
  std::vector<std::string> order;
  for (const auto& name : comb_names(sig))
    for (int k = 0; k < n; ++k) order.push_back(name + "#" + std::to_string(k));
  return LabeledOperator(comb_systems(big), reorder(acc, order).matrix());
}

Comb tensor_power(const Comb& c, int n) {
  return {tensor_power(c.op, c.signature, n), tensor_power(c.signature, n)};
}

// ---------------------------------------------------------------------------

namespace {

Eigen::Index ceil_div(Eigen::Index a, Eigen::Index b) { return (a + b - 1) / b; }

std::string mem_name(std::size_t j) { return "mem" + std::to_string(j); }
std::string anc_name(std::size_t j) { return "anc" + std::to_string(j); }

}  // namespace

CombCircuit random_comb_circuit(const NetworkSignature& sig, Rng& rng, const RandomOptions& opts) {
  check_signature(sig);
  if (opts.memory_dim < 1) throw InputError("memory dimension must be >= 1");
  CombCircuit circuit{sig, {}};
  Eigen::Index m_prev = 1;
  const std::size_t big_n = sig.size();
  for (std::size_t j = 1; j <= big_n; ++j) {
    const auto [a, b] = sig.teeth[j - 1];
    const int tj = static_cast<int>(j);
    CircuitMap map;
    map.inputs.push_back({in_name(j), a, Role::in, tj});
    if (j > 1) map.inputs.push_back({mem_name(j - 1), m_prev, Role::out, tj - 1});
    map.outputs.push_back({out_name(j), b, Role::out, tj});
    if (j < big_n) {
      const Eigen::Index m = std::max(opts.memory_dim, ceil_div(a * m_prev, b));
      map.outputs.push_back({mem_name(j), m, Role::out, tj});
      map.kraus.push_back(haar_isometry(a * m_prev, b * m, rng));
      m_prev = m;
    } else {
      const Eigen::Index e = std::max<Eigen::Index>(1, ceil_div(a * m_prev, b));
      const Eigen::MatrixXcd v = haar_isometry(a * m_prev, b * e, rng);
      for (Eigen::Index k = 0; k < e; ++k) {
        Eigen::MatrixXcd kk(b, a * m_prev);
        for (Eigen::Index o = 0; o < b; ++o) kk.row(o) = v.row(o * e + k);
        map.kraus.push_back(std::move(kk));
      }
    }
    circuit.teeth.push_back(std::move(map));
  }
  return circuit;
}

Comb comb_of(const CombCircuit& circuit, double white_noise) {
  LabeledOperator c = circuit.teeth.front().choi();
  for (std::size_t j = 1; j < circuit.teeth.size(); ++j)
    c = link_product(c, circuit.teeth[j].choi());
  c = canonical(c, circuit.signature);
  if (white_noise != 0.0) {
    if (white_noise < 0.0 || white_noise > 1.0) throw InputError("white noise must be in [0,1]");
    const double dout = static_cast<double>(circuit.signature.prod_out());
    c = c.with_matrix((1.0 - white_noise) * c.matrix() +
                      (white_noise / dout) * Eigen::MatrixXcd::Identity(c.side(), c.side()));
  }
  return {std::move(c), circuit.signature};
}

Comb random_comb(const NetworkSignature& sig, std::uint64_t seed, const RandomOptions& opts) {
  Rng rng(seed);
  return comb_of(random_comb_circuit(sig, rng, opts), opts.white_noise);
}

std::vector<SystemLabel> TesterCircuit::state_systems() const {
  return {{in_name(1), signature.teeth[0].d_in, Role::in, 1},
          {anc_name(1), ancilla[0], Role::in, 1}};
}

std::vector<SystemLabel> TesterCircuit::measured_systems() const {
  const std::size_t n = signature.size();
  const int tn = static_cast<int>(n);
  return {{out_name(n), signature.teeth[n - 1].d_out, Role::out, tn},
          {anc_name(n), ancilla[n - 1], Role::in, tn}};
}

CircuitMap TesterCircuit::isometry_map(std::size_t j) const {
  const int tj = static_cast<int>(j);
  CircuitMap map;
  map.inputs = {{out_name(j), signature.teeth[j - 1].d_out, Role::out, tj},
                {anc_name(j), ancilla[j - 1], Role::in, tj}};
  map.outputs = {{in_name(j + 1), signature.teeth[j].d_in, Role::in, tj + 1},
                 {anc_name(j + 1), ancilla[j], Role::in, tj + 1}};
  map.kraus = {isometries[j - 1]};
  return map;
}

TesterCircuit random_tester_circuit(const NetworkSignature& sig, Rng& rng,
                                    const RandomOptions& opts) {
  check_signature(sig);
  if (opts.memory_dim < 1) throw InputError("memory dimension must be >= 1");
  TesterCircuit c;
  c.signature = sig;
  c.ancilla.push_back(opts.memory_dim);
  c.state = random_pure_state(sig.teeth[0].d_in * opts.memory_dim, rng);
  for (std::size_t j = 1; j < sig.size(); ++j) {
    const Eigen::Index from = sig.teeth[j - 1].d_out * c.ancilla[j - 1];
    const Eigen::Index a_next = sig.teeth[j].d_in;
    const Eigen::Index anc = std::max(opts.memory_dim, ceil_div(from, a_next));
    c.ancilla.push_back(anc);
    c.isometries.push_back(haar_isometry(from, a_next * anc, rng));
  }
  return c;
}

TesterCircuit perturbed(const TesterCircuit& circuit, std::size_t which, double step, Rng& rng) {
  TesterCircuit c = circuit;
  if (which == 0) {
    c.state += step * ginibre(c.state.size(), 1, rng).col(0);
    c.state /= c.state.norm();
  } else if (which <= c.isometries.size()) {
    auto& v = c.isometries[which - 1];
    v = orthonormalize(v + step * ginibre(v.rows(), v.cols(), rng));
  } else {
    throw InputError("perturbed: generator index out of range");
  }
  return c;
}

namespace {

/// rho * D_1 * ... * D_{n-1}, with every intermediate Gamma^(n) recorded.
LabeledOperator run_tester_circuit(const TesterCircuit& c, std::vector<LabeledOperator>* levels) {
  const auto& sig = c.signature;
  LabeledOperator cur(c.state_systems(), c.state * c.state.adjoint());
  auto record = [&](std::size_t n) {
    if (!levels) return;
    auto order = comb_names(sig, n - 1);
    order.push_back(in_name(n));
    levels->push_back(reorder(partial_trace(cur, {anc_name(n)}), order));
  };
  record(1);
  for (std::size_t j = 1; j < sig.size(); ++j) {
    cur = link_product(cur, c.isometry_map(j).choi());
    record(j + 1);
  }
  return cur;
}

}  // namespace

DualCombElement dual_comb_of(const TesterCircuit& circuit) {
  DualCombElement g;
  g.signature = circuit.signature;
  run_tester_circuit(circuit, &g.hierarchy);
  const std::size_t n = circuit.signature.size();
  const SystemLabel out_n{out_name(n), circuit.signature.teeth[n - 1].d_out, Role::out,
                          static_cast<int>(n)};
  g.op = canonical(tensor(LabeledOperator::identity({out_n}), g.hierarchy.back()),
                   circuit.signature);
  return g;
}

Tester tester_of(const TesterCircuit& circuit, const std::vector<Eigen::MatrixXcd>& povm) {
  Tester t;
  t.normalization = dual_comb_of(circuit);
  const LabeledOperator body = run_tester_circuit(circuit, nullptr);
  const auto measured = circuit.measured_systems();
  for (std::size_t x = 0; x < povm.size(); ++x) {
    const LabeledOperator p(measured, povm[x].transpose());
    t.outcomes.emplace_back(std::to_string(x),
                            canonical(link_product(body, p), circuit.signature));
  }
  return t;
}

std::vector<Eigen::MatrixXcd> random_povm(Eigen::Index d, std::size_t outcomes, Rng& rng) {
  if (outcomes < 1) throw InputError("a POVM needs at least one outcome");
  if (outcomes == 1) return {Eigen::MatrixXcd::Identity(d, d)};
  std::vector<Eigen::MatrixXcd> g;
  Eigen::MatrixXcd s = Eigen::MatrixXcd::Zero(d, d);
  for (std::size_t x = 0; x < outcomes; ++x) {
    g.push_back(random_psd(d, d, rng));
    s += g.back();
  }
  const Eigen::MatrixXcd s_inv_half =
      spectral_apply(eig_hermitian(s), [](double v) { return 1.0 / std::sqrt(v); });
  for (auto& e : g) {
    e = s_inv_half * e * s_inv_half;
    e = 0.5 * (e + e.adjoint()).eval();
  }
  return g;
}

DualCombElement random_dual_comb(const NetworkSignature& sig, std::uint64_t seed,
                                 const RandomOptions& opts) {
  Rng rng(seed);
  return dual_comb_of(random_tester_circuit(sig, rng, opts));
}

Tester random_tester(const NetworkSignature& sig, std::uint64_t seed, std::size_t outcomes,
                     const RandomOptions& opts) {
  Rng rng(seed);
  const TesterCircuit c = random_tester_circuit(sig, rng, opts);
  const auto measured = c.measured_systems();
  return tester_of(c, random_povm(measured[0].dim * measured[1].dim, outcomes, rng));
}

}  // namespace combkit
