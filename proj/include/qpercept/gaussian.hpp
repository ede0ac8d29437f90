#pragma once

#include <cstdint>
#include <vector>

#include "qpercept/errors.hpp"

// Position-monitored harmonic oscillator in the Gaussian-state picture,
// natural units ħ = m = 1.
namespace qpercept::gaussian {

struct OscillatorState {
  double mean_x = 0.0;
  double mean_p = 0.0;
  double v_x = 0.5;
  double v_p = 0.5;
  double c_xp = 0.0;
  double omega = 1.0;
  double tau_m = 1.0;
  double eta = 1.0;

  double covariance_determinant() const { return v_x * v_p - c_xp * c_xp; }
};

/// Throws InvalidState unless the covariance is positive definite and obeys
/// det ≥ 1/4 (within 1e-9), and the parameters are in range.
void validate(const OscillatorState& s);

struct MomentRates {
  double dv_x = 0.0;
  double dv_p = 0.0;
  double dc_xp = 0.0;
};

MomentRates moment_derivatives(const OscillatorState& s);

/// RK4 on the second moments (and the drift of the means), n_steps + 1
/// states including the start. Throws StepTooLarge if dt > 0.01·min(τ_m, 1/ω).
std::vector<OscillatorState> integrate_moments(const OscillatorState& s0,
                                               double dt, std::uint64_t n_steps);

/// Long-time second moments (means zero). η must be in (0, 1].
OscillatorState steady_state(double omega, double tau_m, double eta);

/// 1 / (2 √det σ)
double purity_from_covariance(const OscillatorState& s);

/// Entropy of a one-mode Gaussian state of purity P, in nats.
double gaussian_entropy_from_purity(double purity);

struct TransitionRow {
  double eta = 0.0;
  double lower = 0.0;        // 1 - √η
  double upper = 0.0;        // √(1 - √η)
  double rel_entropy = 0.0;  // S at purity √η; +inf as η → 0
};

/// Long-time trace-distance bounds and mean relative entropy versus η.
/// Entries must lie in [0, 1]; η = 0 reports the limits (1, 1, +inf).
std::vector<TransitionRow> transition_curves(const std::vector<double>& eta_grid);

/// d⟨S⟩/dη = log((1 - √η)/(1 + √η)) / (4 η^{3/2}) on (0, 1); -inf at η = 1.
double entropy_eta_derivative(double eta);

}  // namespace qpercept::gaussian
