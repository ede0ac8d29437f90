#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "qpercept/quantum_core.hpp"
#include "qpercept/rng.hpp"

namespace qpercept {

/// A continuously monitored observable A with measurement time τ_m and the
/// fraction η of its record available to a filtering agent. The eigenbasis of
/// A is cached; all conditioning and dephasing happen in it.
class MeasurementChannel {
 public:
  MeasurementChannel(ObservableOperator a, double tau_m, double eta = 1.0);

  const ObservableOperator& observable() const { return a_; }
  double tau_m() const { return tau_m_; }
  double eta() const { return eta_; }
  Eigen::Index dim() const { return a_.dim(); }

  const RealVector& eigenvalues() const { return spectrum_.values; }
  /// True when A is diagonal in the computational basis (no basis change).
  bool diagonal() const { return diagonal_; }

  Matrix to_eigenbasis(const Matrix& m) const;
  Matrix from_eigenbasis(const Matrix& m) const;

  MeasurementChannel with_efficiency(double eta) const;

 private:
  ObservableOperator a_;
  double tau_m_;
  double eta_;
  SpectralDecomposition spectrum_;
  bool diagonal_;
};

/// Hamiltonian, monitored channels, and the time grid of one simulation.
class SimulationConfig {
 public:
  /// Throws InvalidConfig on dt > 0.01·min τ_m, dimension mismatch, or
  /// non-positive step counts.
  SimulationConfig(ObservableOperator hamiltonian,
                   std::vector<MeasurementChannel> channels, double dt,
                   std::uint64_t n_steps, std::uint64_t seed);

  const ObservableOperator& hamiltonian() const { return h_; }
  const std::vector<MeasurementChannel>& channels() const { return channels_; }
  double dt() const { return dt_; }
  std::uint64_t n_steps() const { return n_steps_; }
  std::uint64_t seed() const { return seed_; }
  Eigen::Index dim() const { return h_.dim(); }

  bool has_hamiltonian() const { return has_h_; }
  /// exp(-i H dt)
  const Matrix& unitary_step() const { return unitary_; }

  /// Same system with every channel's efficiency replaced.
  SimulationConfig with_efficiencies(std::span<const double> etas) const;

 private:
  ObservableOperator h_;
  std::vector<MeasurementChannel> channels_;
  double dt_;
  std::uint64_t n_steps_;
  std::uint64_t seed_;
  bool has_h_;
  Matrix unitary_;
};

/// -Σ_α [A_α, [A_α, ρ]] / (8 τ_m^α), evaluated for any square matrix (RK4
/// stages are not states).
Matrix dissipator_action(const Matrix& m,
                         std::span<const MeasurementChannel> channels);

Matrix lindblad_dissipator(const DensityOperator& rho,
                           std::span<const MeasurementChannel> channels);

/// ({A, ρ} - 2 tr(Aρ) ρ) / √(4 τ_m)
Matrix innovation(const DensityOperator& rho, const ObservableOperator& a,
                  double tau_m);

/// -i[H, m] + D[m]
Matrix lindblad_generator(const Matrix& m, const SimulationConfig& config);

/// One RK4 step of the outcome-averaged master equation.
DensityOperator step_unconditioned(const DensityOperator& rho,
                                   const SimulationConfig& config);

/// Euler–Maruyama step of the conditioned SME with per-channel Wiener
/// increments dW (variance dt), followed by repair.
DensityOperator step_conditioned_diffusive(const DensityOperator& rho,
                                           const SimulationConfig& config,
                                           std::span<const double> dW);

/// Euler–Maruyama step for an agent with efficiencies η_α (taken from the
/// channels): full dephasing, innovation scaled by √η_α, driven by the
/// agent's own innovation noise dV.
DensityOperator step_filtered(const DensityOperator& rho,
                              const SimulationConfig& config,
                              std::span<const double> dV);

struct KrausStep {
  DensityOperator rho;
  std::vector<double> records;  // one readout per channel
};

/// Random-number slot of sub-channel `piece` of channel `channel`.
inline constexpr std::uint32_t noise_slot(std::size_t channel,
                                          std::size_t piece) {
  return static_cast<std::uint32_t>(channel * 64 + piece);
}
inline constexpr std::size_t kMaxPiecesPerChannel = 64;

/// Gaussian weak measurement of every channel followed by exp(-iH dt).
/// Randomness comes from noise.draw(step, noise_slot(channel, 0)).
KrausStep step_conditioned_kraus(const DensityOperator& rho,
                                 const SimulationConfig& config,
                                 const NoiseSource& noise, std::uint64_t step);

/// Physical-record noise dW for O, given another agent's innovation noise dV
/// on the same record: dW = (tr(ρ_self A) - tr(ρ_O A)) dt/√τ_m + dV.
double consistent_noises(const DensityOperator& rho_self,
                         const DensityOperator& rho_o,
                         const ObservableOperator& a, double tau_m, double dt,
                         double dV);

/// Inverse of consistent_noises: the agent's dV given O's dW.
double innovation_noise(const DensityOperator& rho_self,
                        const DensityOperator& rho_o,
                        const ObservableOperator& a, double tau_m, double dt,
                        double dW);

/// Gaussian Kraus primitives, acting on a matrix expressed in the eigenbasis
/// of the measured observable (eigenvalues `a`). K(r) ∝ exp(-dt (r - A)²/(4τ)).
namespace kraus {

/// Readout r ~ Σ_i p_i N(a_i, τ/dt), p_i the populations in the eigenbasis.
double sample_readout(const Matrix& rho_eig, const RealVector& a, double tau,
                      double dt, const StepDraw& draw);

/// ρ ← K(r) ρ K(r) / tr.
void condition(Matrix& rho_eig, const RealVector& a, double tau, double dt,
               double r);

/// ρ_ij ← ρ_ij exp(-(a_i - a_j)² dt / (8τ)): the readout-averaged Kraus map,
/// equal to exact Lindblad dephasing over dt.
void dephase(Matrix& rho_eig, const RealVector& a, double tau, double dt);

/// The elementwise factors dephase() applies, for reuse across steps.
Eigen::MatrixXd dephasing_factors(const RealVector& a, double tau, double dt);
void dephase(Matrix& rho_eig, const Eigen::MatrixXd& factors);

}  // namespace kraus

}  // namespace qpercept
