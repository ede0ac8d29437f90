#pragma once

#include <span>
#include <vector>

#include "qpercept/sme.hpp"

// Bounds and identities computable from the less-informed agent's state
// alone. Nothing here needs the omniscient state.
namespace qpercept::bounds {

struct BoundPair {
  double lower = 0.0;
  double upper = 0.0;
};

/// (1 - P, √(1 - P)) bracketing ⟨T(ρ_O, ρ_agent)⟩.
BoundPair purity_sandwich(const DensityOperator& rho_agent);

/// S(ρ_agent), which equals ⟨S(ρ_O ‖ ρ_agent)⟩.
double entropy_identity_rhs(const DensityOperator& rho_agent);

/// P - P², bounding the variance of the trace distance.
double trace_distance_variance_bound(const DensityOperator& rho_agent);

/// tr(ρ log² ρ) - S(ρ)², the variance of the surprise.
double relative_entropy_variance_bound(const DensityOperator& rho_agent);

/// 1/τ_D = Σ_α Var_ρ0(A_α) / (4 τ_m^α) for a pure initial state.
double decoherence_rate(const DensityOperator& rho0,
                        std::span<const MeasurementChannel> channels);

/// (T/τ_D, √(T/τ_D)); throws OutOfRegime when T/τ_D > 1.
BoundPair short_time_bounds(const DensityOperator& rho0,
                            std::span<const MeasurementChannel> channels,
                            double T);

/// Σ_α (1/(4τ_m^α)) ∫ ‖[ρ_A(t), A_α]‖₂² dt over a uniformly sampled series
/// (spacing dt), trapezoid rule. Equals 1 - P(ρ_A(T)) for a pure start.
double commutator_rate_identity(std::span<const DensityOperator> rho_a_series,
                                std::span<const MeasurementChannel> channels,
                                double dt);

/// (|P_A - P_B|, √(1 - P_A) + √(1 - P_B)) bracketing ⟨T(ρ_A, ρ_B)⟩.
BoundPair multi_agent_triangle_bounds(const DensityOperator& rho_a,
                                      const DensityOperator& rho_b);

/// V_X = i[H, X] + D[X]: the Heisenberg-picture rate of change of X.
ObservableOperator heisenberg_rate_operator(
    const ObservableOperator& x, const ObservableOperator& hamiltonian,
    std::span<const MeasurementChannel> channels);

/// tr(ρ V²) - tr(ρ V)²
double rate_variance(const DensityOperator& rho, const ObservableOperator& v);

/// 2T‖X‖ √(time-average of Var_ρ(V_X)) bounding ⟨(tr ρ_A X - tr ρ_O X)²⟩ at
/// time T. The series is sampled uniformly on [0, T].
double observable_gap_bound(std::span<const DensityOperator> rho_agent_series,
                            const ObservableOperator& x,
                            const ObservableOperator& hamiltonian,
                            std::span<const MeasurementChannel> channels,
                            double T);

/// Right side of the self-referential form
/// ⟨T^X_T⟩ ≤ 2T √(avg ⟨T^X⟩) √(avg Var(V_X)), given the time-averaged gap.
/// Exposed as a diagnostic; observable_gap_bound is the explicit bound.
double observable_gap_implicit_rhs(double time_averaged_gap,
                                   std::span<const DensityOperator> rho_agent_series,
                                   const ObservableOperator& x,
                                   const ObservableOperator& hamiltonian,
                                   std::span<const MeasurementChannel> channels,
                                   double T);

/// tr((ρ_A - ρ_B) V_X)²
double two_observer_gap_rate(const DensityOperator& rho_a,
                             const DensityOperator& rho_b,
                             const ObservableOperator& x,
                             const ObservableOperator& hamiltonian,
                             std::span<const MeasurementChannel> channels);

/// Trapezoid rule on a uniform grid with spacing h.
double trapezoid(std::span<const double> values, double h);

}  // namespace qpercept::bounds
