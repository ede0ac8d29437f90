#pragma once

#include <complex>
#include <Eigen/Dense>

#include "qpercept/errors.hpp"

namespace qpercept {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

namespace tolerance {
inline constexpr double hermitian = 1e-10;  // max |M - M†|
inline constexpr double trace = 1e-10;      // |tr ρ - 1|
inline constexpr double psd = 1e-9;         // most negative eigenvalue clipped by repair
inline constexpr double eig_floor = 1e-14;  // eigenvalues below are exact zeros for log
inline constexpr double support = 1e-10;    // weight on a null space that makes S(ψ‖σ) infinite
inline constexpr double pure = 1e-8;        // 1 - tr ρ² accepted as pure
}  // namespace tolerance

/// Eigen-decomposition of a Hermitian matrix, eigenvalues sorted descending.
struct SpectralDecomposition {
  RealVector values;
  Matrix vectors;  // columns are orthonormal eigenvectors

  Matrix reconstruct() const;
  /// f applied to the spectrum: Σ f(λ_j) |j⟩⟨j|.
  template <typename F>
  Matrix apply(F&& f) const {
    RealVector mapped = values.unaryExpr(std::forward<F>(f));
    return vectors * mapped.cast<Complex>().asDiagonal() * vectors.adjoint();
  }
};

SpectralDecomposition spectral_decomposition(const Matrix& hermitian);

/// Largest elementwise |M - M†|.
double hermiticity_defect(const Matrix& m);

/// Hermitian operator; measured observables, Hamiltonians, Heisenberg rates.
class ObservableOperator {
 public:
  explicit ObservableOperator(Matrix m);

  Eigen::Index dim() const { return m_.rows(); }
  const Matrix& matrix() const { return m_; }

  /// Largest absolute eigenvalue.
  double operator_norm() const;

 private:
  Matrix m_;
};

/// A finite-dimensional density matrix: Hermitian, unit trace, positive
/// semidefinite. Every constructor either establishes these or throws.
class DensityOperator {
 public:
  /// Validates all three invariants; throws InvalidState otherwise.
  explicit DensityOperator(Matrix m);

  /// Hermitizes, renormalizes the trace, and clips negative eigenvalues no
  /// more negative than `psd_tolerance`. Anything worse throws InvalidState.
  static DensityOperator repaired(const Matrix& m,
                                  double psd_tolerance = tolerance::psd);

  /// For matrices produced by a completely positive update of a valid state
  /// (Kraus conditioning, Schur-product dephasing, unitary conjugation).
  /// Hermitizes and renormalizes; positivity holds by construction so the
  /// spectral check is skipped.
  static DensityOperator from_positive_map(const Matrix& m);

  static DensityOperator pure(const Vector& psi);
  static DensityOperator maximally_mixed(Eigen::Index dim);

  Eigen::Index dim() const { return m_.rows(); }
  const Matrix& matrix() const { return m_; }

  /// tr(ρ X)
  double expectation(const ObservableOperator& x) const;

 private:
  struct Unchecked {};
  DensityOperator(Matrix m, Unchecked) : m_(std::move(m)) {}

  Matrix m_;
};

/// Throws InvalidState describing the first violated invariant.
void check_density_invariants(const Matrix& m);

Matrix commutator(const Matrix& a, const Matrix& b);
Matrix anticommutator(const Matrix& a, const Matrix& b);

double purity(const DensityOperator& rho);

/// -Σ p log p in nats.
double von_neumann_entropy(const DensityOperator& rho);

/// Σ p log² p, the second moment of the surprise -log p.
double surprise_second_moment(const DensityOperator& rho);

/// S(ρ) and tr(ρ log² ρ) from one diagonalization.
struct EntropyMoments {
  double entropy = 0.0;
  double surprise_second_moment = 0.0;
};
EntropyMoments entropy_moments(const DensityOperator& rho);
/// Same, from a decomposition of ρ the caller already holds.
EntropyMoments entropy_moments(const SpectralDecomposition& rho);

/// ½‖ρ1 - ρ2‖₁
double trace_distance(const DensityOperator& rho1, const DensityOperator& rho2);

/// tr(ρσ)
double overlap(const DensityOperator& rho, const DensityOperator& sigma);

/// S(ψ‖σ) = -⟨ψ|log σ|ψ⟩ for a pure first argument. Returns +infinity when
/// ψ has weight above tolerance::support on the null space of σ.
double relative_entropy_pure(const DensityOperator& psi,
                             const DensityOperator& sigma);

/// Same, reusing a decomposition of σ computed by the caller.
double relative_entropy_pure(const DensityOperator& psi,
                             const SpectralDecomposition& sigma);

/// ‖[ρ, A]‖₂²
double commutator_2norm_sq(const DensityOperator& rho,
                           const ObservableOperator& a);

}  // namespace qpercept
