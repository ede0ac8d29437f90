#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "qpercept/bounds.hpp"
#include "qpercept/operators.hpp"
#include "qpercept/trajectory.hpp"

using namespace qpercept;
using namespace qpercept::bounds;

namespace {

Matrix diag2(double a, double b) {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 0) = a;
  m(1, 1) = b;
  return m;
}

// |+><+| after dephasing for time t under σ_z with τ_m = tau.
DensityOperator dephased_plus(double t, double tau = 1.0) {
  Matrix m = diag2(0.5, 0.5);
  m(0, 1) = m(1, 0) = 0.5 * std::exp(-t / (2.0 * tau));
  return DensityOperator(m);
}

std::vector<MeasurementChannel> z_channel(double tau = 1.0) {
  return {MeasurementChannel(ObservableOperator(ops::pauli_z()), tau)};
}

}  // namespace

TEST(PuritySandwich, Examples) {
  BoundPair pure = purity_sandwich(DensityOperator::pure(ops::plus_state()));
  EXPECT_NEAR(pure.lower, 0.0, 1e-12);
  EXPECT_NEAR(pure.upper, 0.0, 1e-6);
  // purity 0.75: eigenvalues (1 ± 1/√2)/2
  double l = 0.5 * (1.0 + std::sqrt(0.5));
  BoundPair p = purity_sandwich(DensityOperator(diag2(l, 1.0 - l)));
  EXPECT_NEAR(p.lower, 0.25, 1e-12);
  EXPECT_NEAR(p.upper, 0.5, 1e-12);
  BoundPair mixed = purity_sandwich(DensityOperator::maximally_mixed(2));
  EXPECT_NEAR(mixed.lower, 0.5, 1e-15);
  EXPECT_NEAR(mixed.upper, 0.707107, 1e-6);
}

TEST(EntropyIdentityRhs, Examples) {
  EXPECT_NEAR(entropy_identity_rhs(DensityOperator::pure(ops::plus_state())), 0.0, 1e-12);
  EXPECT_NEAR(entropy_identity_rhs(DensityOperator::maximally_mixed(2)), std::log(2.0), 1e-12);
  double t = 0.7, c = std::exp(-t / 2.0);
  double p1 = 0.5 * (1.0 + c), p2 = 0.5 * (1.0 - c);
  EXPECT_NEAR(entropy_identity_rhs(dephased_plus(t)), -p1 * std::log(p1) - p2 * std::log(p2),
              1e-12);
}

TEST(VarianceBounds, Examples) {
  EXPECT_NEAR(trace_distance_variance_bound(DensityOperator::pure(ops::plus_state())), 0.0, 1e-12);
  EXPECT_NEAR(trace_distance_variance_bound(DensityOperator::maximally_mixed(2)), 0.25, 1e-15);
  // purity 0.9: eigenvalues (1 ± √0.8)/2
  double l = 0.5 * (1.0 + std::sqrt(0.8));
  EXPECT_NEAR(trace_distance_variance_bound(DensityOperator(diag2(l, 1.0 - l))), 0.09, 1e-12);

  EXPECT_NEAR(relative_entropy_variance_bound(DensityOperator::pure(ops::plus_state())), 0.0,
              1e-12);
  EXPECT_NEAR(relative_entropy_variance_bound(DensityOperator::maximally_mixed(5)), 0.0, 1e-12);
  EXPECT_NEAR(relative_entropy_variance_bound(DensityOperator(diag2(0.75, 0.25))), 0.226303,
              1e-6);
}

TEST(DecoherenceRate, Examples) {
  DensityOperator plus = DensityOperator::pure(ops::plus_state());
  EXPECT_NEAR(decoherence_rate(plus, z_channel(2.0)), 1.0 / 8.0, 1e-15);
  EXPECT_NEAR(decoherence_rate(DensityOperator::pure(ops::basis_state(2, 0)), z_channel()), 0.0,
              1e-15);
  auto two = z_channel(2.0);
  two.push_back(two.front());
  EXPECT_NEAR(decoherence_rate(plus, two), 2.0 / 8.0, 1e-15);
  EXPECT_THROW(decoherence_rate(DensityOperator::maximally_mixed(2), two), NotPure);
}

TEST(ShortTimeBounds, Examples) {
  DensityOperator plus = DensityOperator::pure(ops::plus_state());
  BoundPair zero = short_time_bounds(plus, z_channel(), 0.0);
  EXPECT_EQ(zero.lower, 0.0);
  EXPECT_EQ(zero.upper, 0.0);
  BoundPair edge = short_time_bounds(plus, z_channel(), 4.0);
  EXPECT_NEAR(edge.lower, 1.0, 1e-15);
  EXPECT_NEAR(edge.upper, 1.0, 1e-15);
  BoundPair b = short_time_bounds(plus, z_channel(), 0.04);
  EXPECT_NEAR(b.lower, 0.01, 1e-15);
  EXPECT_NEAR(b.upper, 0.1, 1e-15);
  EXPECT_THROW(short_time_bounds(plus, z_channel(), 4.1), OutOfRegime);
}

TEST(CommutatorRateIdentity, DephasingQubit) {
  auto residual = [](double dt) {
    std::vector<DensityOperator> series;
    for (int n = 0; n * dt <= 1.0 + 1e-12; ++n) series.push_back(dephased_plus(n * dt));
    double identity = commutator_rate_identity(series, z_channel(), dt);
    // 1 - P = (1 - e^{-T})/2 at T = τ_m
    EXPECT_NEAR(1.0 - purity(series.back()), 0.5 * (1.0 - std::exp(-1.0)), 1e-12);
    return identity - (1.0 - purity(series.back()));
  };
  double r1 = residual(0.02), r2 = residual(0.01);
  EXPECT_LT(std::abs(r1), 1e-4);
  EXPECT_NEAR(r1 / r2, 4.0, 0.05);
}

TEST(CommutatorRateIdentity, CommutingSeriesAndEmpty) {
  std::vector<DensityOperator> series(10, DensityOperator::pure(ops::basis_state(2, 0)));
  EXPECT_EQ(commutator_rate_identity(series, z_channel(), 0.1), 0.0);
  EXPECT_THROW(commutator_rate_identity(std::vector<DensityOperator>{}, z_channel(), 0.1),
               EmptySeries);
}

TEST(CommutatorRateIdentity, HoldsWithHamiltonian) {
  ObservableOperator h(0.5 * ops::pauli_x());
  SimulationConfig cfg(h, z_channel(), 1e-3, 1000, 0);
  std::vector<std::uint64_t> steps(1001);
  for (std::uint64_t i = 0; i <= 1000; ++i) steps[i] = i;
  auto path = unconditioned_path(cfg, DensityOperator::pure(ops::basis_state(2, 0)), steps);
  double identity = commutator_rate_identity(path, cfg.channels(), 1e-3);
  EXPECT_NEAR(identity, 1.0 - purity(path.back()), 1e-6);
}

TEST(TriangleBounds, Examples) {
  DensityOperator plus = DensityOperator::pure(ops::plus_state());
  BoundPair both = multi_agent_triangle_bounds(plus, plus);
  EXPECT_NEAR(both.lower, 0.0, 1e-12);
  EXPECT_NEAR(both.upper, 0.0, 1e-5);
  BoundPair b = multi_agent_triangle_bounds(plus, DensityOperator::maximally_mixed(2));
  EXPECT_NEAR(b.lower, 0.5, 1e-12);
  EXPECT_NEAR(b.upper, std::sqrt(0.5), 1e-5);
  BoundPair eq = multi_agent_triangle_bounds(DensityOperator(diag2(0.75, 0.25)),
                                             DensityOperator(diag2(0.25, 0.75)));
  EXPECT_NEAR(eq.lower, 0.0, 1e-15);
  EXPECT_THROW(multi_agent_triangle_bounds(plus, DensityOperator::maximally_mixed(3)),
               DimensionMismatch);
}

TEST(HeisenbergRate, Examples) {
  ObservableOperator zero_h(Matrix::Zero(2, 2));
  ObservableOperator x(ops::pauli_x());
  auto ch = z_channel(2.0);
  Matrix v = heisenberg_rate_operator(x, zero_h, ch).matrix();
  EXPECT_LE((v + ops::pauli_x() / 4.0).norm(), 1e-15);
  ObservableOperator z(ops::pauli_z());
  EXPECT_LE(heisenberg_rate_operator(z, ObservableOperator(ops::pauli_z()), ch).matrix().norm(),
            1e-15);
  EXPECT_LE(heisenberg_rate_operator(ObservableOperator(Matrix::Identity(2, 2)),
                                     ObservableOperator(ops::pauli_x()), ch)
                .matrix()
                .norm(),
            1e-15);
  // H = σ_x/2, X = σ_z: i[H, σ_z] = σ_y.
  Matrix vz = heisenberg_rate_operator(z, ObservableOperator(0.5 * ops::pauli_x()), ch).matrix();
  EXPECT_LE((vz - ops::pauli_y()).norm(), 1e-15);
}

// Oracle: d/dt tr(ρ(t) X) along the unconditioned evolution is tr(ρ V_X).
TEST(HeisenbergRate, MatchesFiniteDifferenceOfExpectation) {
  ObservableOperator h(0.3 * ops::pauli_x() + 0.2 * ops::pauli_z());
  ObservableOperator x(ops::pauli_y() + 0.5 * ops::pauli_x());
  SimulationConfig cfg(h, z_channel(1.5), 1e-4, 1, 0);
  Vector psi(2);
  psi << 0.6, Complex(0.0, 0.8);
  DensityOperator rho = DensityOperator::pure(psi);
  DensityOperator next = step_unconditioned(rho, cfg);
  double fd = (next.expectation(x) - rho.expectation(x)) / 1e-4;
  double v = rho.expectation(heisenberg_rate_operator(x, h, cfg.channels()));
  EXPECT_NEAR(fd, v, 1e-3);
}

TEST(ObservableGapBound, Examples) {
  ObservableOperator zero_h(Matrix::Zero(2, 2));
  ObservableOperator z(ops::pauli_z());
  std::vector<DensityOperator> series;
  for (int n = 0; n <= 100; ++n) series.push_back(dephased_plus(n * 0.01));
  EXPECT_EQ(observable_gap_bound(series, z, zero_h, z_channel(), 1.0), 0.0);
  EXPECT_EQ(observable_gap_bound(series, ObservableOperator(ops::pauli_x()), zero_h, z_channel(),
                                 0.0),
            0.0);
  EXPECT_THROW(observable_gap_bound(std::vector<DensityOperator>{}, z, zero_h, z_channel(), 1.0),
               EmptySeries);

  // X = σ_x: V = -σ_x/2, V² = 1/4, tr(ρV) = -e^{-t/2}/2, so Var = (1 - e^{-t})/4.
  std::vector<double> var;
  for (int n = 0; n <= 100; ++n) var.push_back(0.25 * (1.0 - std::exp(-n * 0.01)));
  double avg = trapezoid(var, 0.01);
  double bound =
      observable_gap_bound(series, ObservableOperator(ops::pauli_x()), zero_h, z_channel(), 1.0);
  EXPECT_NEAR(bound, 2.0 * std::sqrt(avg), 1e-12);
  EXPECT_NEAR(avg, 0.25 * std::exp(-1.0), 2e-5);
}

TEST(TwoObserverGapRate, Examples) {
  ObservableOperator zero_h(Matrix::Zero(2, 2));
  ObservableOperator x(ops::pauli_x());
  DensityOperator plus = DensityOperator::pure(ops::plus_state());
  EXPECT_EQ(two_observer_gap_rate(plus, plus, x, zero_h, z_channel()), 0.0);
  EXPECT_EQ(two_observer_gap_rate(plus, DensityOperator::maximally_mixed(2),
                                  ObservableOperator(ops::pauli_z()), zero_h, z_channel()),
            0.0);
  // ⟨V⟩ = -⟨σ_x⟩/2 gives 1/2 vs 0, gap 1/2.
  EXPECT_NEAR(two_observer_gap_rate(plus, DensityOperator::maximally_mixed(2), x, zero_h,
                                    z_channel()),
              0.25, 1e-15);
}

TEST(Trapezoid, Basics) {
  std::vector<double> v{0.0, 1.0, 4.0};
  EXPECT_EQ(trapezoid(v, 0.5), 1.5);
  EXPECT_THROW(trapezoid(std::vector<double>{}, 0.1), EmptySeries);
}
