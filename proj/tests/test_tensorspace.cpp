#include <gtest/gtest.h>

#include <cmath>

#include "combkit/errors.hpp"
#include "combkit/random.hpp"
#include "combkit/tensorspace.hpp"

using namespace combkit;
using Eigen::MatrixXcd;

namespace {

SystemLabel q(const std::string& name, Eigen::Index dim = 2) { return {name, dim, Role::in, 1}; }

LabeledOperator random_op(std::vector<SystemLabel> systems, Rng& rng) {
  Eigen::Index d = 1;
  for (const auto& s : systems) d *= s.dim;
  return LabeledOperator(std::move(systems), ginibre(d, d, rng));
}

MatrixXcd diag(std::initializer_list<double> v) {
  Eigen::VectorXcd d(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) d(i++) = x;
  return d.asDiagonal();
}

MatrixXcd pauli_x() {
  MatrixXcd x(2, 2);
  x << 0, 1, 1, 0;
  return x;
}

/// Unnormalized maximally entangled projector sum_ij |ii><jj| on d x d.
MatrixXcd phi_plus(Eigen::Index d) {
  MatrixXcd m = MatrixXcd::Zero(d * d, d * d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) m(i * d + i, j * d + j) = 1.0;
  return m;
}

}  // namespace

TEST(Tensor, IdentityTimesIdentity) {
  auto a = LabeledOperator::identity({q("a")});
  auto b = LabeledOperator::identity({q("b")});
  auto c = tensor(a, b);
  EXPECT_EQ(c.names(), (std::vector<std::string>{"a", "b"}));
  EXPECT_TRUE(c.matrix().isApprox(MatrixXcd::Identity(4, 4)));
}

TEST(Tensor, ComputationalBasis) {
  auto c = tensor(LabeledOperator({q("q0")}, diag({1, 0})), LabeledOperator({q("q1")}, diag({0, 1})));
  EXPECT_TRUE(c.matrix().isApprox(diag({0, 1, 0, 0})));
}

TEST(Tensor, IndexFormula) {
  Rng rng(3);
  auto a = random_op({q("a")}, rng);
  auto b = random_op({q("b")}, rng);
  auto c = tensor(a, b);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l)
          EXPECT_NEAR(std::abs(c.matrix()(i * 2 + k, j * 2 + l) - a.matrix()(i, j) * b.matrix()(k, l)),
                      0.0, 1e-15);
}

TEST(Tensor, DuplicateLabelRejected) {
  auto a = LabeledOperator::identity({q("a")});
  try {
    tensor(a, a);
    FAIL();
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("'a'"), std::string::npos);
  }
}

TEST(PartialTrace, MaximallyEntangledMarginal) {
  LabeledOperator phi({q("A"), q("B")}, phi_plus(2));
  auto r = partial_trace(phi, {"B"});
  EXPECT_EQ(r.names(), std::vector<std::string>{"A"});
  EXPECT_TRUE(r.matrix().isApprox(MatrixXcd::Identity(2, 2)));
}

TEST(PartialTrace, FullTraceOfState) {
  Rng rng(5);
  LabeledOperator rho({q("a"), q("b", 3)}, random_density(6, rng));
  auto s = partial_trace(rho, {"a", "b"});
  EXPECT_EQ(s.side(), 1);
  EXPECT_NEAR(std::abs(s.matrix()(0, 0) - 1.0), 0.0, 1e-12);
}

TEST(PartialTrace, SequentialEqualsJoint) {
  Rng rng(7);
  auto x = random_op({q("A"), q("B", 3), q("C")}, rng);
  auto seq = partial_trace(partial_trace(x, {"C"}), {"B"});
  auto joint = partial_trace(x, {"B", "C"});
  EXPECT_LE((seq.matrix() - joint.matrix()).norm(), 1e-12);
  // Independent index oracle for Tr_B.
  auto tb = partial_trace(x, {"B"});
  for (int a = 0; a < 2; ++a)
    for (int c = 0; c < 2; ++c)
      for (int a2 = 0; a2 < 2; ++a2)
        for (int c2 = 0; c2 < 2; ++c2) {
          std::complex<double> acc = 0;
          for (int b = 0; b < 3; ++b) acc += x.matrix()(a * 6 + b * 2 + c, a2 * 6 + b * 2 + c2);
          EXPECT_NEAR(std::abs(tb.matrix()(a * 2 + c, a2 * 2 + c2) - acc), 0.0, 1e-13);
        }
}

TEST(PartialTrace, TracePreserved) {
  Rng rng(9);
  auto x = random_op({q("A"), q("B", 3), q("C")}, rng);
  EXPECT_NEAR(std::abs(partial_trace(x, {"B"}).trace() - x.trace()), 0.0, 1e-12);
}

TEST(PartialTrace, UnknownLabel) {
  auto a = LabeledOperator::identity({q("a")});
  EXPECT_THROW(partial_trace(a, {"zz"}), InputError);
}

TEST(PartialTranspose, SingleSystemIsTranspose) {
  Rng rng(11);
  auto x = random_op({q("a", 3)}, rng);
  EXPECT_TRUE(partial_transpose(x, {"a"}).matrix().isApprox(x.matrix().transpose()));
}

TEST(PartialTranspose, Involution) {
  Rng rng(13);
  auto x = random_op({q("a"), q("b", 3)}, rng);
  auto twice = partial_transpose(partial_transpose(x, {"b"}), {"b"});
  EXPECT_EQ(twice.matrix(), x.matrix());
}

TEST(PartialTranspose, PhiPlusGivesSwap) {
  LabeledOperator phi({q("A"), q("B")}, phi_plus(2));
  auto pt = partial_transpose(phi, {"B"});
  MatrixXcd swap = MatrixXcd::Zero(4, 4);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) swap(i * 2 + j, j * 2 + i) = 1.0;
  EXPECT_TRUE(pt.matrix().isApprox(swap));
}

TEST(PartialTranspose, ElementwiseOracle) {
  Rng rng(17);
  auto x = random_op({q("a"), q("b", 3)}, rng);
  auto pt = partial_transpose(x, {"a"});
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 3; ++b)
      for (int a2 = 0; a2 < 2; ++a2)
        for (int b2 = 0; b2 < 3; ++b2)
          EXPECT_EQ(pt.matrix()(a * 3 + b, a2 * 3 + b2), x.matrix()(a2 * 3 + b, a * 3 + b2));
}

TEST(Reorder, SwapsFactors) {
  Rng rng(19);
  auto a = random_op({q("A")}, rng);
  auto b = random_op({q("B", 3)}, rng);
  auto r = reorder(tensor(a, b), {"B", "A"});
  EXPECT_LE((r.matrix() - tensor(b, a).matrix()).norm(), 1e-14);
  EXPECT_EQ(r.names(), (std::vector<std::string>{"B", "A"}));
}

TEST(Reorder, IdentityPermutationBitwise) {
  Rng rng(23);
  auto x = random_op({q("A"), q("B")}, rng);
  EXPECT_EQ(reorder(x, {"A", "B"}).matrix(), x.matrix());
}

TEST(Reorder, RoundTripAndTraceInvariance) {
  Rng rng(29);
  auto x = random_op({q("A"), q("B", 3), q("C")}, rng);
  auto y = reorder(x, {"C", "A", "B"});
  EXPECT_EQ(reorder(y, {"A", "B", "C"}).matrix(), x.matrix());
  EXPECT_LE(frobenius_distance(partial_trace(y, {"B"}), partial_trace(x, {"B"})), 1e-12);
}

TEST(Reorder, SpectrumInvariant) {
  Rng rng(31);
  LabeledOperator h({q("A"), q("B", 3), q("C")}, random_hermitian(12, rng));
  auto y = reorder(h, {"B", "C", "A"});
  EXPECT_LE((eig_hermitian(h).values - eig_hermitian(y).values).norm(), 1e-12);
}

TEST(Reorder, NotAPermutation) {
  auto x = LabeledOperator::identity({q("A"), q("B")});
  EXPECT_THROW(reorder(x, {"A", "A"}), InputError);
  EXPECT_THROW(reorder(x, {"A"}), InputError);
}

TEST(Eig, Diagonal) {
  auto e = eig_hermitian(diag({1, 3}));
  EXPECT_NEAR(e.values(0), 3, 1e-14);
  EXPECT_NEAR(e.values(1), 1, 1e-14);
}

TEST(Eig, PauliX) {
  auto e = eig_hermitian(pauli_x());
  EXPECT_NEAR(e.values(0), 1, 1e-14);
  EXPECT_NEAR(e.values(1), -1, 1e-14);
}

TEST(Eig, Reconstruction) {
  Rng rng(37);
  for (int k = 0; k < 20; ++k) {
    MatrixXcd a = random_hermitian(8, rng);
    auto e = eig_hermitian(a);
    MatrixXcd r = e.vectors * e.values.cast<std::complex<double>>().asDiagonal() * e.vectors.adjoint();
    EXPECT_LE((r - a).norm(), 1e-10 * a.norm());
    EXPECT_LE((e.vectors.adjoint() * e.vectors - MatrixXcd::Identity(8, 8)).norm(), 1e-12);
  }
}

TEST(Eig, NonHermitianRejected) {
  MatrixXcd a(2, 2);
  a << 0, 1, 0, 0;
  EXPECT_THROW(eig_hermitian(a), DomainError);
}

TEST(PsdSqrt, Examples) {
  EXPECT_TRUE(psd_sqrt(MatrixXcd(MatrixXcd::Identity(3, 3))).isApprox(MatrixXcd::Identity(3, 3)));
  EXPECT_TRUE(psd_sqrt(diag({4, 9})).isApprox(diag({2, 3})));
}

TEST(PsdSqrt, SquaringAndCommutation) {
  Rng rng(41);
  for (int k = 0; k < 20; ++k) {
    MatrixXcd a = random_psd(6, 3, rng);
    MatrixXcd s = psd_sqrt(a);
    EXPECT_LE((s * s - a).norm(), 1e-9 * a.norm());
    EXPECT_LE((a * s - s * a).norm(), 1e-9 * a.norm());
    EXPECT_GE(min_eigenvalue(s), -1e-10);
  }
}

TEST(PsdSqrt, NegativeRejected) { EXPECT_THROW(psd_sqrt(diag({1, -0.5})), DomainError); }

TEST(PositivePart, Examples) {
  Rng rng(43);
  MatrixXcd p = random_psd(4, 4, rng);
  EXPECT_LE((positive_part(p) - p).norm(), 1e-12);
  EXPECT_TRUE(positive_part(diag({1, -2})).isApprox(diag({1, 0})));
}

TEST(PositivePart, JordanDecomposition) {
  Rng rng(47);
  for (int k = 0; k < 20; ++k) {
    MatrixXcd h = random_hermitian(5, rng);
    MatrixXcd pp = positive_part(h);
    MatrixXcd pm = positive_part(MatrixXcd(-h));
    EXPECT_NEAR(std::abs(pp.trace() - pm.trace() - h.trace()), 0, 1e-12);
    EXPECT_LE((pp - pm - h).norm(), 1e-10);
    EXPECT_GE(min_eigenvalue(pp), -1e-12);
  }
}

TEST(TraceDistance, Examples) {
  Rng rng(53);
  LabeledOperator r({q("a")}, random_density(2, rng));
  EXPECT_NEAR(trace_distance(r, r), 0, 1e-15);
  LabeledOperator z({q("a")}, diag({1, 0})), o({q("a")}, diag({0, 1}));
  EXPECT_NEAR(trace_distance(z, o), 1, 1e-14);
}

TEST(TraceDistance, BlochFormula) {
  Rng rng(59);
  std::uniform_real_distribution<double> u(-0.57, 0.57);
  for (int k = 0; k < 50; ++k) {
    Eigen::Vector3d r(u(rng), u(rng), u(rng)), s(u(rng), u(rng), u(rng));
    auto bloch = [](const Eigen::Vector3d& v) {
      MatrixXcd m(2, 2);
      m << 1 + v(2), std::complex<double>(v(0), -v(1)), std::complex<double>(v(0), v(1)), 1 - v(2);
      return LabeledOperator({q("a")}, 0.5 * m);
    };
    EXPECT_NEAR(trace_distance(bloch(r), bloch(s)), (r - s).norm() / 2, 1e-12);
  }
}

TEST(TraceDistance, MetricAxioms) {
  Rng rng(61);
  for (int k = 0; k < 30; ++k) {
    LabeledOperator a({q("a", 3)}, random_density(3, rng)), b({q("a", 3)}, random_density(3, rng)),
        c({q("a", 3)}, random_density(3, rng));
    EXPECT_EQ(trace_distance(a, b), trace_distance(a, b));
    EXPECT_NEAR(trace_distance(a, b), trace_distance(b, a), 1e-14);
    EXPECT_LE(trace_distance(a, c), trace_distance(a, b) + trace_distance(b, c) + 1e-10);
  }
}

TEST(TraceDistance, ShapeMismatch) {
  auto a = LabeledOperator::identity({q("a")});
  auto b = LabeledOperator::identity({q("b")});
  EXPECT_THROW(trace_distance(a, b), InputError);
}

TEST(Support, Examples) {
  Rng rng(67);
  MatrixXcd rho = random_density(3, rng);
  EXPECT_TRUE(support_contains(rho, MatrixXcd(MatrixXcd::Identity(3, 3))));
  EXPECT_FALSE(support_contains(diag({1, 0}), diag({0, 1})));
  EXPECT_THROW(support_contains(diag({1, -1}), diag({1, 1})), DomainError);
}

TEST(Support, RankOracle) {
  Rng rng(71);
  for (int k = 0; k < 40; ++k) {
    MatrixXcd ga = ginibre(4, 1 + k % 2, rng);
    MatrixXcd gb = ginibre(4, 2, rng);
    if (k % 3 == 0) ga = gb * ginibre(2, ga.cols(), rng);
    MatrixXcd a = ga * ga.adjoint(), b = gb * gb.adjoint();
    MatrixXcd stacked(4, ga.cols() + gb.cols());
    stacked << ga, gb;
    Eigen::FullPivLU<MatrixXcd> lu_b(gb), lu_s(stacked);
    lu_b.setThreshold(1e-9);
    lu_s.setThreshold(1e-9);
    EXPECT_EQ(support_contains(a, b), lu_s.rank() == lu_b.rank());
  }
}

TEST(ProjectorGeq, Examples) {
  Rng rng(73);
  MatrixXcd s = random_hermitian(3, rng);
  EXPECT_TRUE(projector_geq(s, s).isApprox(MatrixXcd::Identity(3, 3)));
  EXPECT_TRUE(projector_geq(diag({2, 0}), diag({1, 1})).isApprox(diag({1, 0})));
}

TEST(ProjectorGeq, PositivePartOracle) {
  Rng rng(79);
  for (int k = 0; k < 20; ++k) {
    MatrixXcd s = random_hermitian(4, rng), t = random_hermitian(4, rng);
    MatrixXcd p = projector_geq(s, t);
    EXPECT_LE((p * p - p).norm(), 1e-10);
    EXPECT_NEAR(std::abs((p * (s - t)).trace() - positive_part(MatrixXcd(s - t)).trace()), 0, 1e-10);
  }
}

TEST(LabeledOperator, ConstructorChecks) {
  EXPECT_THROW(LabeledOperator({q("a"), q("a")}, MatrixXcd::Identity(4, 4)), InputError);
  EXPECT_THROW(LabeledOperator({q("a")}, MatrixXcd::Identity(3, 3)), InputError);
  EXPECT_THROW(LabeledOperator({q("a", 0)}, MatrixXcd::Identity(0, 0)), InputError);
}
