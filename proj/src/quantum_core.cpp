#include "qpercept/quantum_core.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace qpercept {

namespace {

void require_square(const Matrix& m, const char* what) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    std::ostringstream msg;
    msg << what << " must be a non-empty square matrix, got " << m.rows() << "x"
        << m.cols();
    throw DimensionMismatch(msg.str());
  }
}

void require_same_dim(Eigen::Index a, Eigen::Index b) {
  if (a != b) {
    std::ostringstream msg;
    msg << "dimension mismatch: " << a << " vs " << b;
    throw DimensionMismatch(msg.str());
  }
}

Matrix hermitian_part(const Matrix& m) { return 0.5 * (m + m.adjoint()); }

}  // namespace

Matrix SpectralDecomposition::reconstruct() const {
  return vectors * values.cast<Complex>().asDiagonal() * vectors.adjoint();
}

SpectralDecomposition spectral_decomposition(const Matrix& hermitian) {
  require_square(hermitian, "spectral decomposition input");
  Eigen::SelfAdjointEigenSolver<Matrix> solver(hermitian);
  if (solver.info() != Eigen::Success) {
    throw InvalidState("Hermitian eigensolver did not converge");
  }
  // Eigen returns ascending order.
  SpectralDecomposition out;
  out.values = solver.eigenvalues().reverse();
  out.vectors = solver.eigenvectors().rowwise().reverse();
  return out;
}

double hermiticity_defect(const Matrix& m) {
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

ObservableOperator::ObservableOperator(Matrix m) : m_(std::move(m)) {
  require_square(m_, "observable");
  if (hermiticity_defect(m_) > tolerance::hermitian) {
    throw InvalidState("observable is not Hermitian");
  }
  m_ = hermitian_part(m_);
}

double ObservableOperator::operator_norm() const {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(m_, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

void check_density_invariants(const Matrix& m) {
  require_square(m, "density operator");
  double herm = hermiticity_defect(m);
  if (herm > tolerance::hermitian) {
    std::ostringstream msg;
    msg << "density operator not Hermitian (defect " << herm << ")";
    throw InvalidState(msg.str());
  }
  double tr = m.trace().real();
  if (std::abs(tr - 1.0) > tolerance::trace) {
    std::ostringstream msg;
    msg << "density operator trace is " << tr;
    throw InvalidState(msg.str());
  }
  Eigen::SelfAdjointEigenSolver<Matrix> solver(hermitian_part(m),
                                               Eigen::EigenvaluesOnly);
  double lowest = solver.eigenvalues().minCoeff();
  if (lowest < -tolerance::psd) {
    std::ostringstream msg;
    msg << "density operator has negative eigenvalue " << lowest;
    throw InvalidState(msg.str());
  }
}

DensityOperator::DensityOperator(Matrix m) : m_(std::move(m)) {
  check_density_invariants(m_);
}

DensityOperator DensityOperator::repaired(const Matrix& m,
                                          double psd_tolerance) {
  require_square(m, "density operator");
  Matrix h = hermitian_part(m);
  double tr = h.trace().real();
  if (!(tr > 0.0) || !std::isfinite(tr)) {
    throw InvalidState("cannot repair a matrix with non-positive trace");
  }
  h /= tr;
  // Eigenvalues alone decide whether anything needs clipping; vectors are
  // computed only then. Negatives below the log floor are roundoff.
  Eigen::SelfAdjointEigenSolver<Matrix> check(h, Eigen::EigenvaluesOnly);
  double lowest = check.eigenvalues().minCoeff();
  if (lowest >= -tolerance::eig_floor) {
    return DensityOperator(std::move(h), Unchecked{});
  }
  if (lowest < -psd_tolerance) {
    std::ostringstream msg;
    msg << "negative eigenvalue " << lowest << " beyond repair tolerance "
        << psd_tolerance;
    throw InvalidState(msg.str());
  }
  SpectralDecomposition spec = spectral_decomposition(h);
  spec.values = spec.values.cwiseMax(0.0);
  spec.values /= spec.values.sum();
  Matrix fixed = hermitian_part(spec.reconstruct());
  return DensityOperator(std::move(fixed), Unchecked{});
}

DensityOperator DensityOperator::from_positive_map(const Matrix& m) {
  require_square(m, "density operator");
  Matrix h = hermitian_part(m);
  double tr = h.trace().real();
  if (!(tr > 0.0) || !std::isfinite(tr)) {
    throw InvalidState("positive map produced a matrix with trace " +
                       std::to_string(tr));
  }
  h /= tr;
  return DensityOperator(std::move(h), Unchecked{});
}

DensityOperator DensityOperator::pure(const Vector& psi) {
  double norm = psi.norm();
  if (!(norm > 0.0)) throw InvalidState("zero state vector");
  Vector unit = psi / norm;
  return DensityOperator(unit * unit.adjoint(), Unchecked{});
}

DensityOperator DensityOperator::maximally_mixed(Eigen::Index dim) {
  if (dim <= 0) throw DimensionMismatch("dimension must be positive");
  Matrix m = Matrix::Identity(dim, dim) / static_cast<double>(dim);
  return DensityOperator(std::move(m), Unchecked{});
}

double DensityOperator::expectation(const ObservableOperator& x) const {
  require_same_dim(dim(), x.dim());
  // tr(ρX) = Σ_ij ρ_ij X_ji = Σ_ij ρ_ij conj(X_ij) for Hermitian X.
  return (m_.array() * x.matrix().conjugate().array()).sum().real();
}

Matrix commutator(const Matrix& a, const Matrix& b) { return a * b - b * a; }

Matrix anticommutator(const Matrix& a, const Matrix& b) {
  return a * b + b * a;
}

double purity(const DensityOperator& rho) {
  return rho.matrix().squaredNorm();
}

namespace {

EntropyMoments moments_of_spectrum(const RealVector& values) {
  EntropyMoments out;
  for (double p : values) {
    if (p < tolerance::eig_floor) continue;  // 0 log 0 = 0
    double lp = std::log(p);
    out.entropy -= p * lp;
    out.surprise_second_moment += p * lp * lp;
  }
  return out;
}

}  // namespace

EntropyMoments entropy_moments(const DensityOperator& rho) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(rho.matrix(),
                                               Eigen::EigenvaluesOnly);
  return moments_of_spectrum(solver.eigenvalues());
}

EntropyMoments entropy_moments(const SpectralDecomposition& rho) {
  return moments_of_spectrum(rho.values);
}

double von_neumann_entropy(const DensityOperator& rho) {
  return entropy_moments(rho).entropy;
}

double surprise_second_moment(const DensityOperator& rho) {
  return entropy_moments(rho).surprise_second_moment;
}

double trace_distance(const DensityOperator& rho1,
                      const DensityOperator& rho2) {
  require_same_dim(rho1.dim(), rho2.dim());
  // Subtract in a canonical order so that T(a, b) == T(b, a) bit for bit.
  const Matrix& a = rho1.matrix();
  const Matrix& b = rho2.matrix();
  bool swap = false;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const Complex x = a.data()[i], y = b.data()[i];
    if (x == y) continue;
    swap = x.real() != y.real() ? x.real() < y.real() : x.imag() < y.imag();
    break;
  }
  Matrix diff = swap ? Matrix(b - a) : Matrix(a - b);
  Eigen::SelfAdjointEigenSolver<Matrix> solver(diff, Eigen::EigenvaluesOnly);
  return 0.5 * solver.eigenvalues().cwiseAbs().sum();
}

double overlap(const DensityOperator& rho, const DensityOperator& sigma) {
  require_same_dim(rho.dim(), sigma.dim());
  return (rho.matrix().array() * sigma.matrix().conjugate().array())
      .sum()
      .real();
}

double relative_entropy_pure(const DensityOperator& psi,
                             const SpectralDecomposition& sigma) {
  require_same_dim(psi.dim(), sigma.values.size());
  if (1.0 - purity(psi) > tolerance::pure) {
    throw NotPure("first argument of relative_entropy_pure is not pure");
  }
  // Weights of ψ on σ's eigenvectors: w_j = ⟨j|ρ_ψ|j⟩.
  RealVector weights =
      (sigma.vectors.adjoint() * psi.matrix() * sigma.vectors)
          .diagonal()
          .real();
  double kept_mass = 0.0;
  double null_weight = 0.0;
  for (Eigen::Index j = 0; j < sigma.values.size(); ++j) {
    if (sigma.values[j] < tolerance::eig_floor) {
      null_weight += weights[j];
    } else {
      kept_mass += sigma.values[j];
    }
  }
  if (null_weight > tolerance::support) {
    return std::numeric_limits<double>::infinity();
  }
  // log σ on the retained support, with the clipped mass renormalized.
  double value = 0.0;
  for (Eigen::Index j = 0; j < sigma.values.size(); ++j) {
    if (sigma.values[j] < tolerance::eig_floor) continue;
    value -= weights[j] * std::log(sigma.values[j] / kept_mass);
  }
  return std::max(value, 0.0);
}

double relative_entropy_pure(const DensityOperator& psi,
                             const DensityOperator& sigma) {
  require_same_dim(psi.dim(), sigma.dim());
  return relative_entropy_pure(psi, spectral_decomposition(sigma.matrix()));
}

double commutator_2norm_sq(const DensityOperator& rho,
                           const ObservableOperator& a) {
  require_same_dim(rho.dim(), a.dim());
  return commutator(rho.matrix(), a.matrix()).squaredNorm();
}

}  // namespace qpercept
