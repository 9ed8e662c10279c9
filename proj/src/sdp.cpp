#include "combkit/sdp.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <iomanip>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

#include "combkit/errors.hpp"

namespace combkit {

SdpOptions SdpOptions::from_env() {
  SdpOptions o;
  if (const char* env = std::getenv("COMBKIT_SOLVER_TOL")) {
    char* end = nullptr;
    const double v = std::strtod(env, &end);
    if (end != env && v > 0 && std::isfinite(v)) o.gap_tol = v;
  }
  return o;
}

std::string to_string(SdpStatus s) {
  switch (s) {
    case SdpStatus::optimal: return "optimal";
    case SdpStatus::infeasible: return "infeasible";
    case SdpStatus::unbounded: return "unbounded";
    case SdpStatus::max_iter: return "max_iter";
  }
  return "unknown";
}

Eigen::MatrixXcd lmi_value(const LmiBlock& block, const Eigen::VectorXd& y) {
  Eigen::MatrixXcd s = -Eigen::MatrixXcd(block.f0);
  for (const auto& [i, f] : block.terms) s += y(static_cast<Eigen::Index>(i)) * Eigen::MatrixXcd(f);
  return s;
}

namespace {

/// Dual equality residuals are held to this multiple of feas_tol.
constexpr double kDualTolFactor = 10.0;

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

struct Entry {
  Index r, s;
  double g;
};

struct RealBlock {
  Index n = 0;
  Index orig = 0;
  bool embedded = false;
  MatrixXd f0;
  std::vector<std::size_t> vars;
  std::vector<std::vector<Entry>> f;
  std::vector<MatrixXd> dense;  // filled for terms with many entries
  std::vector<std::vector<Index>> touched_cols;
};

bool has_imaginary(const SparseHermitian& m) {
  for (Index k = 0; k < m.outerSize(); ++k)
    for (SparseHermitian::InnerIterator it(m, k); it; ++it)
      if (it.value().imag() != 0.0) return true;
  return false;
}

std::vector<Entry> real_entries(const SparseHermitian& m, bool embed) {
  std::vector<Entry> out;
  const Index d = m.rows();
  for (Index k = 0; k < m.outerSize(); ++k)
    for (SparseHermitian::InnerIterator it(m, k); it; ++it) {
      const Index r = it.row(), s = it.col();
      const double re = it.value().real(), im = it.value().imag();
      if (re != 0.0) {
        out.push_back({r, s, re});
        if (embed) out.push_back({r + d, s + d, re});
      }
      if (embed && im != 0.0) {
        out.push_back({r, s + d, -im});
        out.push_back({r + d, s, im});
      }
    }
  return out;
}

MatrixXd dense_of(const std::vector<Entry>& e, Index n) {
  MatrixXd m = MatrixXd::Zero(n, n);
  for (const auto& x : e) m(x.r, x.s) += x.g;
  return m;
}

double trace_with(const std::vector<Entry>& f, const MatrixXd& m) {
  double acc = 0.0;
  for (const auto& e : f) acc += e.g * m(e.s, e.r);
  return acc;
}

MatrixXd sym(const MatrixXd& m) { return 0.5 * (m + m.transpose()); }

/// Largest alpha with x + alpha dx PSD (infinity if unbounded); x must be PD.
double max_step(const MatrixXd& x, const MatrixXd& dx) {
  Eigen::LLT<MatrixXd> llt(x);
  if (llt.info() != Eigen::Success) return 0.0;
  MatrixXd t = llt.matrixL().solve(dx);
  t = llt.matrixL().solve(t.transpose()).transpose();
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(sym(t), Eigen::EigenvaluesOnly);
  const double lmin = es.eigenvalues()(0);
  return lmin < 0 ? -1.0 / lmin : std::numeric_limits<double>::infinity();
}

Eigen::MatrixXcd recover_complex(const MatrixXd& x, const RealBlock& b) {
  if (!b.embedded) return x.cast<std::complex<double>>();
  const Index d = b.orig;
  Eigen::MatrixXcd out(d, d);
  const MatrixXd re = x.topLeftCorner(d, d) + x.bottomRightCorner(d, d);
  const MatrixXd im = x.bottomLeftCorner(d, d) - x.topRightCorner(d, d);
  out.real() = re;
  out.imag() = im;
  return out;
}

class Solver {
 public:
  Solver(const SdpProblem& p, const SdpOptions& o) : p_(p), o_(o) {}

  SdpSolution run();

 private:
  void setup();
  MatrixXd lmi(std::size_t bi, const VectorXd& y) const;
  /// Newton direction for the current iterate. Returns false if the linear
  /// system could not be solved.
  bool direction(double nu, const std::vector<MatrixXd>* z, VectorXd& dy, VectorXd& dmu,
                 std::vector<MatrixXd>& dx, std::vector<MatrixXd>& ds);
  void factor_schur();
  double primal_obj() const { return p_.c.dot(y_); }
  double dual_obj() const;
  SdpSolution finish(SdpStatus status, int iter);

  const SdpProblem& p_;
  SdpOptions o_;
  std::vector<RealBlock> blocks_;
  Index nv_ = 0;
  MatrixXd a_;  // independent, row-normalized equalities
  VectorXd b_;
  std::vector<Index> eq_rows_;
  VectorXd eq_scale_;

  VectorXd y_, mu_;
  std::vector<MatrixXd> x_, s_, sinv_, rp_;
  VectorXd rd_, re_;
  // Magnitude of the terms summed into rd_, used to make it relative.
  double rd_scale_ = 0.0;

  // Factorizations for the current iterate.
  MatrixXd h_;
  Eigen::LLT<MatrixXd> h_llt_;
  bool h_pd_ = false;
  double h_shift_ = 0.0;

  MatrixXd solve_h(const MatrixXd& rhs) const {
    MatrixXd x = h_llt_.solve(rhs);
    if (h_shift_ > 0)
      for (int k = 0; k < 3; ++k) x += h_llt_.solve(rhs - h_ * x);
    return x;
  }
  double aug_ = 0.0;
  Eigen::LDLT<MatrixXd> schur_a_;
  Eigen::PartialPivLU<MatrixXd> kkt_lu_;
};

void Solver::setup() {
  nv_ = static_cast<Index>(p_.num_vars);
  if (p_.c.size() != nv_) throw InputError("sdp: objective size does not match num_vars");
  if (p_.a.rows() > 0 && p_.a.cols() != nv_)
    throw InputError("sdp: equality matrix has wrong column count");
  if (p_.a.rows() != p_.b.size()) throw InputError("sdp: equality rhs size mismatch");
  for (const auto& blk : p_.blocks) {
    if (blk.dim < 1) throw InputError("sdp: empty LMI block");
    if (blk.dim > o_.max_block_dim)
      throw InputError("sdp: block dimension " + std::to_string(blk.dim) + " exceeds cap " +
                       std::to_string(o_.max_block_dim));
    bool embed = has_imaginary(blk.f0);
    for (const auto& [i, f] : blk.terms) {
      if (i >= p_.num_vars) throw InputError("sdp: variable index out of range");
      if (f.rows() != blk.dim || f.cols() != blk.dim)
        throw InputError("sdp: coefficient matrix has wrong size");
      embed = embed || has_imaginary(f);
    }
    RealBlock rb;
    rb.orig = blk.dim;
    rb.embedded = embed;
    rb.n = embed ? 2 * blk.dim : blk.dim;
    rb.f0 = dense_of(real_entries(blk.f0, embed), rb.n);
    for (const auto& [i, f] : blk.terms) {
      auto e = real_entries(f, embed);
      if (e.empty()) continue;
      rb.vars.push_back(i);
      std::vector<Index> cols;
      for (const auto& x : e) cols.push_back(x.s);
      std::sort(cols.begin(), cols.end());
      cols.erase(std::unique(cols.begin(), cols.end()), cols.end());
      const bool dense = static_cast<Index>(cols.size()) * 2 > rb.n;
      rb.dense.push_back(dense ? dense_of(e, rb.n) : MatrixXd());
      rb.touched_cols.push_back(std::move(cols));
      rb.f.push_back(std::move(e));
    }
    blocks_.push_back(std::move(rb));
  }

  // Equalities: normalize rows, drop dependent ones.
  const Index m = p_.a.rows();
  if (m > 0) {
    MatrixXd an = p_.a;
    VectorXd bn = p_.b;
    eq_scale_ = VectorXd::Ones(m);
    for (Index r = 0; r < m; ++r) {
      const double nr = an.row(r).norm();
      if (nr > 0) {
        eq_scale_(r) = nr;
        an.row(r) /= nr;
        bn(r) /= nr;
      }
    }
    Eigen::ColPivHouseholderQR<MatrixXd> qr(an.transpose());
    qr.setThreshold(1e-10);
    const Index rank = qr.rank();
    for (Index k = 0; k < rank; ++k) eq_rows_.push_back(qr.colsPermutation().indices()(k));
    std::sort(eq_rows_.begin(), eq_rows_.end());
    a_.resize(rank, nv_);
    b_.resize(rank);
    for (Index k = 0; k < rank; ++k) {
      a_.row(k) = an.row(eq_rows_[k]);
      b_(k) = bn(eq_rows_[k]);
    }
  } else {
    a_.resize(0, nv_);
    b_.resize(0);
  }
}

MatrixXd Solver::lmi(std::size_t bi, const VectorXd& y) const {
  const auto& b = blocks_[bi];
  MatrixXd s = -b.f0;
  for (std::size_t k = 0; k < b.vars.size(); ++k) {
    const double yk = y(static_cast<Index>(b.vars[k]));
    if (yk == 0.0) continue;
    for (const auto& e : b.f[k]) s(e.r, e.s) += yk * e.g;
  }
  return s;
}

double Solver::dual_obj() const {
  double d = b_.dot(mu_);
  for (std::size_t bi = 0; bi < blocks_.size(); ++bi) d += (blocks_[bi].f0.cwiseProduct(x_[bi])).sum();
  return d;
}

void Solver::factor_schur() {
  h_ = MatrixXd::Zero(nv_, nv_);
  for (std::size_t bi = 0; bi < blocks_.size(); ++bi) {
    const auto& b = blocks_[bi];
    const MatrixXd& sinv = sinv_[bi];
    const MatrixXd& x = x_[bi];
    MatrixXd w(b.n, b.n), t(b.n, b.n);
    for (std::size_t ka = 0; ka < b.vars.size(); ++ka) {
      if (b.dense[ka].size()) {
        w.noalias() = sinv * b.dense[ka] * x;
      } else {
        // S^{-1} F X accumulated through the columns F actually touches.
        for (Index col : b.touched_cols[ka]) t.col(col).setZero();
        for (const auto& e : b.f[ka]) t.col(e.s) += e.g * sinv.col(e.r);
        w.setZero();
        for (Index col : b.touched_cols[ka]) w.noalias() += t.col(col) * x.row(col);
      }
      const auto i = static_cast<Index>(b.vars[ka]);
      for (std::size_t kb = ka; kb < b.vars.size(); ++kb) {
        const auto j = static_cast<Index>(b.vars[kb]);
        const double v = trace_with(b.f[kb], w);
        h_(i, j) += v;
        if (kb != ka) h_(j, i) += v;
      }
    }
  }
  h_ = sym(h_);
  const Index m = a_.rows();
  // Variables that enter no LMI leave H singular. Adding A^T A keeps
  // the solution of the KKT system unchanged since A dy = r_e.
  aug_ = 0.0;
  if (m > 0) {
    VectorXd col_norm = a_.colwise().squaredNorm().transpose();
    const double hmax = std::max(1e-300, h_.diagonal().cwiseAbs().maxCoeff());
    bool needs = false;
    for (Index i = 0; i < nv_; ++i)
      if (h_(i, i) <= 1e-12 * hmax && col_norm(i) > 0) needs = true;
    if (needs) {
      aug_ = 1.0;
      h_.noalias() += aug_ * (a_.transpose() * a_);
    }
  }
  // Cholesky of H, with a growing diagonal shift when H has lost
  // definiteness to rounding; solves then use iterative refinement.
  const double hdiag = std::max(1.0, h_.diagonal().cwiseAbs().maxCoeff());
  h_shift_ = 0.0;
  h_pd_ = false;
  for (double shift : {0.0, 1e-14, 1e-12, 1e-10}) {
    h_shift_ = shift * hdiag;
    if (shift == 0.0)
      h_llt_.compute(h_);
    else
      h_llt_.compute(h_ + h_shift_ * MatrixXd::Identity(nv_, nv_));
    if (h_llt_.info() != Eigen::Success) continue;
    const VectorXd diag = h_llt_.matrixLLT().diagonal();
    if (diag.minCoeff() > 1e-13 * std::max(1.0, diag.maxCoeff())) {
      h_pd_ = true;
      break;
    }
  }
  if (h_pd_) {
    if (m > 0) schur_a_.compute(a_ * solve_h(a_.transpose()));
  } else {
    MatrixXd kkt = MatrixXd::Zero(nv_ + m, nv_ + m);
    kkt.topLeftCorner(nv_, nv_) = h_;
    kkt.topRightCorner(nv_, m) = a_.transpose();
    kkt.bottomLeftCorner(m, nv_) = a_;
    kkt_lu_.compute(kkt);
  }
}

bool Solver::direction(double nu, const std::vector<MatrixXd>* z, VectorXd& dy, VectorXd& dmu,
                       std::vector<MatrixXd>& dx, std::vector<MatrixXd>& ds) {
  VectorXd g = -rd_;
  std::vector<MatrixXd> base(blocks_.size());
  for (std::size_t bi = 0; bi < blocks_.size(); ++bi) {
    const auto& b = blocks_[bi];
    MatrixXd corr = x_[bi] * rp_[bi];
    if (z) corr += (*z)[bi];
    base[bi] = nu * sinv_[bi] - x_[bi] - corr * sinv_[bi];
    const MatrixXd gs = sym(base[bi]);
    for (std::size_t k = 0; k < b.vars.size(); ++k)
      g(static_cast<Index>(b.vars[k])) += trace_with(b.f[k], gs);
  }
  const Index m = a_.rows();
  if (aug_ > 0) g.noalias() += aug_ * (a_.transpose() * re_);
  VectorXd w;
  if (h_pd_) {
    const VectorXd hg = solve_h(g);
    if (m > 0) {
      w = schur_a_.solve(a_ * hg - re_);
      dy = hg - solve_h(a_.transpose() * w);
    } else {
      w.resize(0);
      dy = hg;
    }
  } else {
    VectorXd rhs(nv_ + m);
    rhs << g, re_;
    const VectorXd sol = kkt_lu_.solve(rhs);
    dy = sol.head(nv_);
    w = sol.tail(m);
  }
  dmu = -w;
  if (!dy.allFinite() || !dmu.allFinite()) return false;
  dx.resize(blocks_.size());
  ds.resize(blocks_.size());
  for (std::size_t bi = 0; bi < blocks_.size(); ++bi) {
    const auto& b = blocks_[bi];
    MatrixXd d = rp_[bi];
    for (std::size_t k = 0; k < b.vars.size(); ++k) {
      const double v = dy(static_cast<Index>(b.vars[k]));
      if (v == 0.0) continue;
      for (const auto& e : b.f[k]) d(e.r, e.s) += v * e.g;
    }
    ds[bi] = sym(d);
    // base already holds nu S^-1 - X - (Z + X Rp) S^-1; add the dy part.
    MatrixXd xds = x_[bi] * (ds[bi] - rp_[bi]);
    dx[bi] = sym(base[bi] - xds * sinv_[bi]);
  }
  return true;
}

SdpSolution Solver::finish(SdpStatus status, int iter) {
  SdpSolution s;
  s.status = status;
  s.y = y_;
  s.iterations = iter;
  s.primal_value = primal_obj();
  s.dual_value = dual_obj();
  s.gap = std::abs(s.primal_value - s.dual_value);
  for (std::size_t bi = 0; bi < blocks_.size(); ++bi)
    s.dual_blocks.push_back(recover_complex(x_[bi], blocks_[bi]));
  s.eq_multipliers = VectorXd::Zero(p_.a.rows());
  for (std::size_t k = 0; k < eq_rows_.size(); ++k)
    s.eq_multipliers(eq_rows_[k]) = mu_(static_cast<Index>(k)) / eq_scale_(eq_rows_[k]);
  double pinf = re_.size() ? re_.norm() / (1 + b_.norm()) : 0.0;
  double f0n = 0.0;
  for (const auto& b : blocks_) f0n = std::max(f0n, b.f0.norm());
  for (const auto& r : rp_) pinf = std::max(pinf, r.norm() / (1 + f0n));
  s.primal_infeasibility = pinf;
  s.dual_infeasibility = rd_.norm() / (1 + rd_scale_);
  return s;
}

SdpSolution Solver::run() {
  setup();
  const std::size_t nb = blocks_.size();
  const Index m = a_.rows();

  // Consistency of the equality system.
  y_ = VectorXd::Zero(nv_);
  mu_ = VectorXd::Zero(m);
  if (p_.a.rows() > 0) {
    const VectorXd yls = p_.a.colPivHouseholderQr().solve(p_.b);
    if ((p_.a * yls - p_.b).norm() > 1e-8 * (1 + p_.b.norm())) {
      x_.assign(nb, MatrixXd());
      for (std::size_t bi = 0; bi < nb; ++bi) x_[bi] = MatrixXd::Zero(blocks_[bi].n, blocks_[bi].n);
      rp_.assign(nb, MatrixXd());
      for (std::size_t bi = 0; bi < nb; ++bi) rp_[bi] = MatrixXd::Zero(blocks_[bi].n, blocks_[bi].n);
      rd_ = p_.c;
      re_ = b_;
      return finish(SdpStatus::infeasible, 0);
    }
  }

  // Starting point in the spirit of SDPT3's default.
  x_.resize(nb);
  s_.resize(nb);
  double total_n = 0;
  for (std::size_t bi = 0; bi < nb; ++bi) {
    const auto& b = blocks_[bi];
    const double n = static_cast<double>(b.n);
    total_n += n;
    double xi = std::max(10.0, std::sqrt(n));
    double eta = std::max({10.0, std::sqrt(n), b.f0.norm()});
    for (std::size_t k = 0; k < b.vars.size(); ++k) {
      const double fn = std::sqrt(std::accumulate(b.f[k].begin(), b.f[k].end(), 0.0,
                                                  [](double a, const Entry& e) { return a + e.g * e.g; }));
      const double ck = std::abs(p_.c(static_cast<Index>(b.vars[k])));
      xi = std::max(xi, n * (1 + ck) / (1 + fn));
      eta = std::max(eta, fn);
    }
    x_[bi] = xi * MatrixXd::Identity(b.n, b.n);
    s_[bi] = eta * MatrixXd::Identity(b.n, b.n);
  }
  if (nb == 0) total_n = 1;

  sinv_.resize(nb);
  rp_.resize(nb);
  const double cnorm = p_.c.norm();
  double f0n = 0.0;
  for (const auto& b : blocks_) f0n = std::max(f0n, b.f0.norm());

  SdpSolution best;
  bool have_best = false;
  double best_score = std::numeric_limits<double>::infinity();
  int stalls = 0;
  int since_best = 0;
  SdpSolution converged;
  int polish_left = -1;

  for (int iter = 0; iter <= o_.max_iter; ++iter) {
    // Residuals.
    rd_ = p_.c - (m ? VectorXd(a_.transpose() * mu_) : VectorXd::Zero(nv_));
    VectorXd rd_abs = p_.c.cwiseAbs();
    if (m) rd_abs += a_.cwiseAbs().transpose() * mu_.cwiseAbs();
    double pinf = 0.0;
    for (std::size_t bi = 0; bi < nb; ++bi) {
      const auto& b = blocks_[bi];
      for (std::size_t k = 0; k < b.vars.size(); ++k) {
        const double t = trace_with(b.f[k], x_[bi]);
        rd_(static_cast<Index>(b.vars[k])) -= t;
        rd_abs(static_cast<Index>(b.vars[k])) += std::abs(t);
      }
      rp_[bi] = lmi(bi, y_) - s_[bi];
      pinf = std::max(pinf, rp_[bi].norm() / (1 + f0n));
    }
    re_ = b_ - a_ * y_;
    if (m) pinf = std::max(pinf, re_.norm() / (1 + b_.norm()));
    rd_scale_ = std::max(cnorm, rd_abs.norm());
    const double dinf = rd_.norm() / (1 + rd_scale_);
    const double pobj = primal_obj();
    const double dobj = dual_obj();
    const double gap = std::abs(pobj - dobj);

    double complementarity = 0.0;
    for (std::size_t bi = 0; bi < nb; ++bi) complementarity += x_[bi].cwiseProduct(s_[bi]).sum();
    const double mu = complementarity / total_n;

    const double gap_scale = std::max(1.0, std::abs(pobj));
    const bool good = gap <= o_.gap_tol * gap_scale && pinf <= o_.feas_tol && dinf <= kDualTolFactor * o_.feas_tol;
    if (polish_left >= 0) {
      if (!good || gap >= converged.gap) return converged;
      converged = finish(SdpStatus::optimal, iter);
      if (polish_left-- == 0 || gap <= 1e-4 * o_.gap_tol * gap_scale) return converged;
    } else if (good) {
      converged = finish(SdpStatus::optimal, iter);
      if (o_.polish_iters <= 0 || gap <= 1e-4 * o_.gap_tol * gap_scale) return converged;
      polish_left = o_.polish_iters - 1;
    }

    // Track the best iterate for a max_iter return.
    const double score = std::max({gap / (o_.gap_tol * gap_scale), pinf / o_.feas_tol, dinf / (kDualTolFactor * o_.feas_tol)});
    if (score < best_score) {
      best_score = score;
      since_best = 0;
      best = finish(SdpStatus::max_iter, iter);
      have_best = true;
    } else if (++since_best > 12 && polish_left < 0) {
      break;
    }

    // Certificates of infeasibility along diverging iterates.
    {
      VectorXd ray = p_.c - rd_;  // A^* X + A^T mu
      if (dobj > 0 && ray.norm() / dobj < 1e-8 && dobj > 1e6) {
        return finish(SdpStatus::infeasible, iter);
      }
      if (pobj < 0) {
        double lmi_viol = f0n;
        for (const auto& r : rp_) lmi_viol += r.norm();
        const double eq_res = m ? (a_ * y_).norm() : 0.0;
        if ((lmi_viol + eq_res) / (-pobj) < 1e-8 && -pobj > 1e6)
          return finish(SdpStatus::unbounded, iter);
      }
    }
    if (iter == o_.max_iter) break;

    // Factorizations.
    bool ok = true;
    for (std::size_t bi = 0; bi < nb && ok; ++bi) {
      Eigen::LLT<MatrixXd> llt(s_[bi]);
      if (llt.info() != Eigen::Success) {
        ok = false;
        break;
      }
      sinv_[bi] = sym(llt.solve(MatrixXd::Identity(blocks_[bi].n, blocks_[bi].n)));
    }
    if (!ok) break;
    factor_schur();

    // Predictor.
    VectorXd dy, dmu;
    std::vector<MatrixXd> dx, ds;
    if (!direction(0.0, nullptr, dy, dmu, dx, ds)) break;
    double ap = std::numeric_limits<double>::infinity(), ad = ap;
    for (std::size_t bi = 0; bi < nb; ++bi) {
      ap = std::min(ap, max_step(x_[bi], dx[bi]));
      ad = std::min(ad, max_step(s_[bi], ds[bi]));
    }
    ap = std::min(1.0, ap);
    ad = std::min(1.0, ad);
    double mu_aff = 0.0;
    for (std::size_t bi = 0; bi < nb; ++bi)
      mu_aff += ((x_[bi] + ap * dx[bi]).cwiseProduct(s_[bi] + ad * ds[bi])).sum();
    mu_aff /= total_n;
    double sigma = mu > 0 ? std::pow(std::max(0.0, mu_aff) / mu, 3) : 0.0;
    sigma = std::clamp(sigma, 0.0, 1.0);

    // Corrector.
    std::vector<MatrixXd> z(nb);
    for (std::size_t bi = 0; bi < nb; ++bi) z[bi] = dx[bi] * ds[bi];
    VectorXd dy2, dmu2;
    std::vector<MatrixXd> dx2, ds2;
    if (!direction(sigma * mu, &z, dy2, dmu2, dx2, ds2)) break;
    ap = std::numeric_limits<double>::infinity();
    ad = ap;
    for (std::size_t bi = 0; bi < nb; ++bi) {
      ap = std::min(ap, max_step(x_[bi], dx2[bi]));
      ad = std::min(ad, max_step(s_[bi], ds2[bi]));
    }
    const double tau = 0.98;
    ap = std::min(1.0, tau * ap);
    ad = std::min(1.0, tau * ad);
    if (ap < 1e-12 && ad < 1e-12) {
      if (++stalls > 3) break;
    } else {
      stalls = 0;
    }

    for (std::size_t bi = 0; bi < nb; ++bi) {
      x_[bi] = sym(x_[bi] + ap * dx2[bi]);
      s_[bi] = sym(s_[bi] + ad * ds2[bi]);
    }
    mu_ += ap * dmu2;
    y_ += ad * dy2;
  }
  if (polish_left >= 0) return converged;
  if (have_best) return best;
  return finish(SdpStatus::max_iter, o_.max_iter);
}

}  // namespace

SdpSolution solve(const SdpProblem& p, const SdpOptions& opts) { return Solver(p, opts).run(); }

CertificateReport check_certificate(const SdpProblem& p, const SdpSolution& s,
                                    const SdpOptions& opts) {
  CertificateReport r;
  const auto nb = p.blocks.size();
  r.min_lmi_eigenvalue = std::numeric_limits<double>::infinity();
  r.dual_min_eigenvalue = std::numeric_limits<double>::infinity();
  Eigen::VectorXd dual_lhs = Eigen::VectorXd::Zero(static_cast<Index>(p.num_vars));
  double dual_value = 0.0;
  double scale = 1.0;
  for (std::size_t bi = 0; bi < nb; ++bi) {
    const auto& blk = p.blocks[bi];
    const Eigen::MatrixXcd sv = lmi_value(blk, s.y);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (sv + sv.adjoint()),
                                                       Eigen::EigenvaluesOnly);
    r.min_lmi_eigenvalue = std::min(r.min_lmi_eigenvalue, es.eigenvalues()(0));
    scale = std::max(scale, Eigen::MatrixXcd(blk.f0).norm());
    if (bi < s.dual_blocks.size()) {
      const Eigen::MatrixXcd& x = s.dual_blocks[bi];
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> ex(0.5 * (x + x.adjoint()),
                                                         Eigen::EigenvaluesOnly);
      r.dual_min_eigenvalue = std::min(r.dual_min_eigenvalue, ex.eigenvalues()(0));
      dual_value += (Eigen::MatrixXcd(blk.f0) * x).trace().real();
      for (const auto& [i, f] : blk.terms)
        dual_lhs(static_cast<Index>(i)) += (Eigen::MatrixXcd(f) * x).trace().real();
    }
  }
  if (nb == 0) {
    r.min_lmi_eigenvalue = 0.0;
    r.dual_min_eigenvalue = 0.0;
  }
  if (p.a.rows() > 0) {
    r.equality_residual = (p.a * s.y - p.b).cwiseAbs().maxCoeff();
    if (s.eq_multipliers.size() == p.a.rows()) {
      dual_lhs += p.a.transpose() * s.eq_multipliers;
      dual_value += p.b.dot(s.eq_multipliers);
    }
  }
  r.dual_residual = (p.c - dual_lhs).cwiseAbs().maxCoeff();
  if (p.num_vars == 0) r.dual_residual = 0.0;
  r.primal_value = p.c.dot(s.y);
  r.dual_value = dual_value;
  r.gap = std::abs(r.primal_value - r.dual_value);
  // Residual checks use a 10x margin over the solver's stopping rule.
  const double ftol = 10 * opts.feas_tol;
  r.primal_feasible = r.min_lmi_eigenvalue >= -ftol * (1 + scale) &&
                      r.equality_residual <= ftol * (1 + (p.b.size() ? p.b.norm() : 0.0));
  r.dual_feasible = r.dual_min_eigenvalue >= -ftol * (1 + scale) &&
                    r.dual_residual <= ftol * (1 + p.c.norm());
  r.gap_ok = r.gap <= 10 * opts.gap_tol * std::max(1.0, std::abs(r.primal_value));
  return r;
}

// ---------------------------------------------------------------------------

namespace {

void write_sparse(std::ostream& os, const SparseHermitian& m) {
  os << m.nonZeros() << "\n";
  for (Index k = 0; k < m.outerSize(); ++k)
    for (SparseHermitian::InnerIterator it(m, k); it; ++it)
      os << it.row() << " " << it.col() << " " << it.value().real() << " " << it.value().imag()
         << "\n";
}

SparseHermitian read_sparse(std::istream& is, Index dim) {
  long long nnz = 0;
  if (!(is >> nnz) || nnz < 0) throw InputError("sdp dump: bad nonzero count");
  std::vector<Eigen::Triplet<std::complex<double>>> t;
  for (long long k = 0; k < nnz; ++k) {
    Index r = 0, c = 0;
    double re = 0, im = 0;
    if (!(is >> r >> c >> re >> im) || r < 0 || c < 0 || r >= dim || c >= dim)
      throw InputError("sdp dump: bad matrix entry");
    t.emplace_back(r, c, std::complex<double>(re, im));
  }
  SparseHermitian m(dim, dim);
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

void expect(std::istream& is, const std::string& word) {
  std::string w;
  if (!(is >> w) || w != word) throw InputError("sdp dump: expected '" + word + "'");
}

}  // namespace

void write_problem(std::ostream& os, const SdpProblem& p) {
  const auto flags = os.flags();
  const auto prec = os.precision();
  os << std::setprecision(17);
  os << "combkit-sdp v1\n";
  os << "vars " << p.num_vars << "\n";
  os << "objective";
  for (Index i = 0; i < p.c.size(); ++i) os << " " << p.c(i);
  os << "\n";
  os << "blocks " << p.blocks.size() << "\n";
  for (const auto& b : p.blocks) {
    os << "block " << b.dim << " " << b.terms.size() << "\n";
    os << "F0 ";
    write_sparse(os, b.f0);
    for (const auto& [i, f] : b.terms) {
      os << "F " << i << " ";
      write_sparse(os, f);
    }
  }
  os << "equalities " << p.a.rows() << "\n";
  for (Index r = 0; r < p.a.rows(); ++r) {
    for (Index c = 0; c < p.a.cols(); ++c) os << p.a(r, c) << " ";
    os << "= " << p.b(r) << "\n";
  }
  os.flags(flags);
  os.precision(prec);
}

SdpProblem read_problem(std::istream& is) {
  SdpProblem p;
  expect(is, "combkit-sdp");
  expect(is, "v1");
  expect(is, "vars");
  if (!(is >> p.num_vars)) throw InputError("sdp dump: bad variable count");
  expect(is, "objective");
  p.c.resize(static_cast<Index>(p.num_vars));
  for (Index i = 0; i < p.c.size(); ++i)
    if (!(is >> p.c(i))) throw InputError("sdp dump: bad objective");
  expect(is, "blocks");
  std::size_t nb = 0;
  if (!(is >> nb)) throw InputError("sdp dump: bad block count");
  for (std::size_t k = 0; k < nb; ++k) {
    LmiBlock b;
    std::size_t nterms = 0;
    expect(is, "block");
    if (!(is >> b.dim >> nterms) || b.dim < 1) throw InputError("sdp dump: bad block header");
    expect(is, "F0");
    b.f0 = read_sparse(is, b.dim);
    for (std::size_t t = 0; t < nterms; ++t) {
      expect(is, "F");
      std::size_t i = 0;
      if (!(is >> i) || i >= p.num_vars) throw InputError("sdp dump: bad variable index");
      b.terms.emplace_back(i, read_sparse(is, b.dim));
    }
    p.blocks.push_back(std::move(b));
  }
  expect(is, "equalities");
  Index m = 0;
  if (!(is >> m) || m < 0) throw InputError("sdp dump: bad equality count");
  p.a.resize(m, static_cast<Index>(p.num_vars));
  p.b.resize(m);
  for (Index r = 0; r < m; ++r) {
    for (Index c = 0; c < p.a.cols(); ++c)
      if (!(is >> p.a(r, c))) throw InputError("sdp dump: bad equality row");
    expect(is, "=");
    if (!(is >> p.b(r))) throw InputError("sdp dump: bad equality rhs");
  }
  return p;
}

}  // namespace combkit
