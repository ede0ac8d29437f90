#include "qpercept/operators.hpp"

#include <cmath>

namespace qpercept::ops {

Matrix pauli_x() {
  Matrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

Matrix pauli_y() {
  Matrix m(2, 2);
  m << 0, Complex(0, -1), Complex(0, 1), 0;
  return m;
}

Matrix pauli_z() {
  Matrix m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

RealVector angular_momentum_levels(Eigen::Index levels) {
  RealVector m(levels);
  Eigen::Index lowest = -(levels / 2);
  for (Eigen::Index i = 0; i < levels; ++i) {
    m[i] = static_cast<double>(lowest + i);
  }
  return m;
}

Matrix angular_momentum_z(Eigen::Index levels) {
  return angular_momentum_levels(levels).cast<Complex>().asDiagonal();
}

Matrix annihilation(Eigen::Index dim) {
  Matrix a = Matrix::Zero(dim, dim);
  for (Eigen::Index n = 1; n < dim; ++n) {
    a(n - 1, n) = std::sqrt(static_cast<double>(n));
  }
  return a;
}

Matrix position(Eigen::Index dim) {
  Matrix a = annihilation(dim);
  return (a + a.adjoint()) / std::sqrt(2.0);
}

Matrix momentum(Eigen::Index dim) {
  Matrix a = annihilation(dim);
  return Complex(0, 1) * (a.adjoint() - a) / std::sqrt(2.0);
}

Matrix oscillator_hamiltonian(Eigen::Index dim, double omega) {
  Matrix h = Matrix::Zero(dim, dim);
  for (Eigen::Index n = 0; n < dim; ++n) {
    h(n, n) = omega * (static_cast<double>(n) + 0.5);
  }
  return h;
}

Vector basis_state(Eigen::Index dim, Eigen::Index k) {
  Vector v = Vector::Zero(dim);
  v[k] = 1.0;
  return v;
}

Vector plus_state() {
  Vector v(2);
  v << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  return v;
}

Vector gaussian_level_state(const RealVector& levels, double mean,
                            double std_dev) {
  Vector psi(levels.size());
  for (Eigen::Index i = 0; i < levels.size(); ++i) {
    double z = (levels[i] - mean) / std_dev;
    psi[i] = std::exp(-0.25 * z * z);  // sqrt of exp(-z²/2)
  }
  return psi / psi.norm();
}

}  // namespace qpercept::ops
