#pragma once

#include "qpercept/quantum_core.hpp"

// Standard operators and states used by the experiments.
namespace qpercept::ops {

Matrix pauli_x();
Matrix pauli_y();
Matrix pauli_z();

/// J_z = Σ m |m⟩⟨m| over `levels` consecutive integers starting at
/// -levels/2 (for 50 levels: m = -25, ..., 24).
Matrix angular_momentum_z(Eigen::Index levels);
RealVector angular_momentum_levels(Eigen::Index levels);

// Truncated harmonic oscillator in the number basis, ħ = m = 1.
Matrix annihilation(Eigen::Index dim);
Matrix position(Eigen::Index dim);  // (a + a†)/√2
Matrix momentum(Eigen::Index dim);  // i(a† - a)/√2
/// ω (n + 1/2), diagonal.
Matrix oscillator_hamiltonian(Eigen::Index dim, double omega);

Vector basis_state(Eigen::Index dim, Eigen::Index k);
/// (|0⟩ + |1⟩)/√2
Vector plus_state();

/// Pure state whose populations over `levels` follow a normal profile with
/// the given mean and standard deviation (amplitudes are square roots).
Vector gaussian_level_state(const RealVector& levels, double mean, double std_dev);

}  // namespace qpercept::ops
