#include <cmath>
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "qpercept/operators.hpp"
#include "qpercept/quantum_core.hpp"

using namespace qpercept;

namespace {

Matrix diag2(double a, double b) {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 0) = a;
  m(1, 1) = b;
  return m;
}

Vector random_vector(std::mt19937_64& gen, Eigen::Index d) {
  std::normal_distribution<double> n;
  Vector v(d);
  for (Eigen::Index i = 0; i < d; ++i) v[i] = Complex(n(gen), n(gen));
  return v.normalized();
}

// Full-rank mixed state from a Ginibre matrix.
DensityOperator random_mixed(std::mt19937_64& gen, Eigen::Index d) {
  std::normal_distribution<double> n;
  Matrix g(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) g(i, j) = Complex(n(gen), n(gen));
  Matrix m = g * g.adjoint();
  m /= m.trace().real();
  return DensityOperator(0.5 * (m + m.adjoint()));
}

}  // namespace

TEST(DensityOperator, RejectsBrokenInvariants) {
  Matrix m = diag2(0.5, 0.5);
  m(0, 1) = Complex(0.1, 0.0);
  EXPECT_THROW(DensityOperator{m}, InvalidState);
  EXPECT_THROW(DensityOperator{diag2(0.6, 0.6)}, InvalidState);
  EXPECT_THROW(DensityOperator{diag2(1.1, -0.1)}, InvalidState);
  EXPECT_THROW(DensityOperator{Matrix::Zero(2, 3)}, DimensionMismatch);
  EXPECT_NO_THROW(DensityOperator{diag2(0.75, 0.25)});
}

TEST(DensityOperator, RepairClipsOnlySmallNegatives) {
  DensityOperator fixed = DensityOperator::repaired(diag2(1.0 + 5e-10, -5e-10));
  EXPECT_GE(fixed.matrix()(1, 1).real(), 0.0);
  EXPECT_NEAR(fixed.matrix().trace().real(), 1.0, 1e-15);
  EXPECT_THROW(DensityOperator::repaired(diag2(1.01, -0.01)), InvalidState);
}

TEST(Purity, Examples) {
  EXPECT_NEAR(purity(DensityOperator::pure(ops::plus_state())), 1.0, 1e-15);
  EXPECT_NEAR(purity(DensityOperator::maximally_mixed(4)), 0.25, 1e-15);
  EXPECT_NEAR(purity(DensityOperator(diag2(0.75, 0.25))), 0.625, 1e-15);
}

TEST(Entropy, Examples) {
  EXPECT_NEAR(von_neumann_entropy(DensityOperator::pure(ops::plus_state())), 0.0, 1e-12);
  EXPECT_NEAR(von_neumann_entropy(DensityOperator::maximally_mixed(2)), std::log(2.0), 1e-12);
  EXPECT_NEAR(von_neumann_entropy(DensityOperator(diag2(0.75, 0.25))), 0.562335, 1e-6);
}

TEST(SurpriseSecondMoment, Examples) {
  EXPECT_NEAR(surprise_second_moment(DensityOperator::pure(ops::basis_state(3, 1))), 0.0, 1e-12);
  double l2 = std::log(2.0) * std::log(2.0);
  EXPECT_NEAR(surprise_second_moment(DensityOperator::maximally_mixed(2)), l2, 1e-12);
  // 0.75 ln²0.75 + 0.25 ln²0.25
  EXPECT_NEAR(surprise_second_moment(DensityOperator(diag2(0.75, 0.25))), 0.542524, 1e-6);
}

TEST(TraceDistance, Examples) {
  auto zero = DensityOperator::pure(ops::basis_state(2, 0));
  auto one = DensityOperator::pure(ops::basis_state(2, 1));
  auto plus = DensityOperator::pure(ops::plus_state());
  EXPECT_NEAR(trace_distance(plus, plus), 0.0, 1e-15);
  EXPECT_NEAR(trace_distance(zero, one), 1.0, 1e-15);
  EXPECT_NEAR(trace_distance(plus, DensityOperator::maximally_mixed(2)), 0.5, 1e-15);
  EXPECT_THROW(trace_distance(zero, DensityOperator::maximally_mixed(3)), DimensionMismatch);
}

TEST(RelativeEntropyPure, Examples) {
  auto zero = DensityOperator::pure(ops::basis_state(2, 0));
  auto one = DensityOperator::pure(ops::basis_state(2, 1));
  EXPECT_NEAR(relative_entropy_pure(zero, zero), 0.0, 1e-12);
  EXPECT_NEAR(relative_entropy_pure(zero, DensityOperator::maximally_mixed(2)), std::log(2.0), 1e-12);
  EXPECT_EQ(relative_entropy_pure(zero, one), std::numeric_limits<double>::infinity());
  EXPECT_THROW(relative_entropy_pure(DensityOperator::maximally_mixed(2), zero), NotPure);
}

TEST(CommutatorNorm, Examples) {
  ObservableOperator z(ops::pauli_z());
  EXPECT_NEAR(commutator_2norm_sq(DensityOperator(diag2(0.75, 0.25)), z), 0.0, 1e-15);
  // [|+><+|, σ_z] = [[0, -1], [1, 0]].
  EXPECT_NEAR(commutator_2norm_sq(DensityOperator::pure(ops::plus_state()), z), 2.0, 1e-14);
  EXPECT_NEAR(commutator_2norm_sq(DensityOperator::maximally_mixed(2),
                                  ObservableOperator(ops::pauli_x())),
              0.0, 1e-15);
}

TEST(Spectral, ReconstructsAndSortsDescending) {
  std::mt19937_64 gen(7);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::Index d = 2 + trial % 7;
    DensityOperator rho = random_mixed(gen, d);
    SpectralDecomposition s = spectral_decomposition(rho.matrix());
    EXPECT_LE((s.reconstruct() - rho.matrix()).norm(), 1e-8 * static_cast<double>(d));
    for (Eigen::Index i = 1; i < d; ++i) EXPECT_GE(s.values[i - 1], s.values[i]);
  }
}

TEST(Properties, PurityAndEntropyRanges) {
  std::mt19937_64 gen(11);
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::Index d = 2 + trial % 6;
    DensityOperator rho = random_mixed(gen, d);
    double p = purity(rho);
    EXPECT_GE(p, 1.0 / static_cast<double>(d) - 1e-12);
    EXPECT_LE(p, 1.0 + 1e-12);
    EXPECT_LE(von_neumann_entropy(rho), std::log(static_cast<double>(d)) + 1e-12);
  }
}

TEST(Properties, TraceDistanceIsAMetric) {
  std::mt19937_64 gen(13);
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::Index d = 2 + trial % 5;
    auto a = random_mixed(gen, d), b = random_mixed(gen, d), c = random_mixed(gen, d);
    EXPECT_EQ(trace_distance(a, b), trace_distance(b, a));
    EXPECT_LE(trace_distance(a, c), trace_distance(a, b) + trace_distance(b, c) + 1e-10);
    EXPECT_GE(trace_distance(a, b), 0.0);
    EXPECT_LE(trace_distance(a, b), 1.0 + 1e-12);
  }
}

TEST(Properties, FidelitySandwichForPureStates) {
  std::mt19937_64 gen(17);
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::Index d = 2 + trial % 5;
    auto psi = DensityOperator::pure(random_vector(gen, d));
    auto sigma = random_mixed(gen, d);
    double f = overlap(psi, sigma);
    double t = trace_distance(psi, sigma);
    EXPECT_LE(1.0 - f, t + 1e-12);
    EXPECT_LE(t, std::sqrt(1.0 - f) + 1e-12);
  }
}

TEST(Properties, RelativeEntropyAgainstMatrixLog) {
  std::mt19937_64 gen(19);
  for (int trial = 0; trial < 30; ++trial) {
    Eigen::Index d = 2 + trial % 5;
    Vector v = random_vector(gen, d);
    auto psi = DensityOperator::pure(v);
    auto sigma = random_mixed(gen, d);
    Matrix log_sigma =
        spectral_decomposition(sigma.matrix()).apply([](double x) { return std::log(x); });
    double oracle = -(v.adjoint() * log_sigma * v)(0, 0).real();
    double s = relative_entropy_pure(psi, sigma);
    EXPECT_NEAR(s, oracle, 1e-10);
    EXPECT_GT(s, 0.0);
    EXPECT_GT(trace_distance(psi, sigma), 1e-8);
  }
  auto psi = DensityOperator::pure(random_vector(gen, 4));
  EXPECT_NEAR(relative_entropy_pure(psi, psi), 0.0, 1e-10);
}
