#include "qpercept/sme.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace qpercept {

namespace {

bool is_diagonal(const Matrix& m) {
  Matrix off = m;
  off.diagonal().setZero();
  return off.cwiseAbs().maxCoeff() == 0.0;
}

void require_dim(Eigen::Index got, Eigen::Index want) {
  if (got != want) {
    std::ostringstream msg;
    msg << "dimension mismatch: " << got << " vs " << want;
    throw DimensionMismatch(msg.str());
  }
}

void require_channel_count(std::size_t got, std::size_t want) {
  if (got != want) {
    std::ostringstream msg;
    msg << "expected " << want << " noise increments, got " << got;
    throw DimensionMismatch(msg.str());
  }
}

// (a_i - a_j)²
Eigen::MatrixXd squared_gaps(const RealVector& a) {
  Eigen::Index n = a.size();
  Eigen::MatrixXd g(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      double d = a[i] - a[j];
      g(i, j) = d * d;
    }
  }
  return g;
}

DensityOperator euler_maruyama(const DensityOperator& rho,
                               const SimulationConfig& config,
                               std::span<const double> xi) {
  const double dt = config.dt();
  Matrix next = rho.matrix() + lindblad_generator(rho.matrix(), config) * dt;
  // EM does not preserve positivity; a pure state picks up a negative
  // eigenvalue of order (dt - ξ²)·‖A‖²/(4τ). Clip within that scale.
  double tol = tolerance::psd;
  const auto& channels = config.channels();
  for (std::size_t c = 0; c < channels.size(); ++c) {
    const auto& ch = channels[c];
    next += innovation(rho, ch.observable(), ch.tau_m()) * xi[c];
    double norm = ch.eigenvalues().cwiseAbs().maxCoeff();
    tol += 2.0 * norm * norm * (dt + xi[c] * xi[c]) / (4.0 * ch.tau_m());
  }
  return DensityOperator::repaired(next, tol);
}

}  // namespace

MeasurementChannel::MeasurementChannel(ObservableOperator a, double tau_m,
                                       double eta)
    : a_(std::move(a)), tau_m_(tau_m), eta_(eta) {
  if (!(tau_m_ > 0.0) || !std::isfinite(tau_m_)) {
    throw InvalidConfig("measurement time must be positive");
  }
  if (!(eta_ >= 0.0 && eta_ <= 1.0)) {
    throw InvalidEfficiency("efficiency must lie in [0, 1]");
  }
  diagonal_ = is_diagonal(a_.matrix());
  if (diagonal_) {
    spectrum_.values = a_.matrix().diagonal().real();
    spectrum_.vectors = Matrix::Identity(a_.dim(), a_.dim());
  } else {
    spectrum_ = spectral_decomposition(a_.matrix());
  }
}

Matrix MeasurementChannel::to_eigenbasis(const Matrix& m) const {
  if (diagonal_) return m;
  return spectrum_.vectors.adjoint() * m * spectrum_.vectors;
}

Matrix MeasurementChannel::from_eigenbasis(const Matrix& m) const {
  if (diagonal_) return m;
  return spectrum_.vectors * m * spectrum_.vectors.adjoint();
}

MeasurementChannel MeasurementChannel::with_efficiency(double eta) const {
  MeasurementChannel copy = *this;
  if (!(eta >= 0.0 && eta <= 1.0)) {
    throw InvalidEfficiency("efficiency must lie in [0, 1]");
  }
  copy.eta_ = eta;
  return copy;
}

SimulationConfig::SimulationConfig(ObservableOperator hamiltonian,
                                   std::vector<MeasurementChannel> channels,
                                   double dt, std::uint64_t n_steps,
                                   std::uint64_t seed)
    : h_(std::move(hamiltonian)),
      channels_(std::move(channels)),
      dt_(dt),
      n_steps_(n_steps),
      seed_(seed) {
  if (!(dt_ > 0.0) || !std::isfinite(dt_)) {
    throw InvalidConfig("dt must be positive");
  }
  if (n_steps_ == 0) throw InvalidConfig("n_steps must be positive");
  if (n_steps_ > 0xFFFFFFFFull) throw InvalidConfig("n_steps exceeds 2^32 - 1");
  for (const auto& ch : channels_) {
    if (ch.dim() != h_.dim()) {
      throw InvalidConfig("channel dimension differs from the Hamiltonian's");
    }
    // Stability guard: keep the per-step measurement strength weak.
    if (dt_ > 0.01 * ch.tau_m() * (1.0 + 1e-12)) {
      std::ostringstream msg;
      msg << "dt = " << dt_ << " exceeds 0.01 * tau_m = " << 0.01 * ch.tau_m();
      throw InvalidConfig(msg.str());
    }
  }
  has_h_ = h_.matrix().cwiseAbs().maxCoeff() > 0.0;
  if (has_h_) {
    SpectralDecomposition spec = spectral_decomposition(h_.matrix());
    Vector phases = (spec.values * -dt_).unaryExpr([](double theta) {
      return std::polar(1.0, theta);
    });
    unitary_ = spec.vectors * phases.asDiagonal() * spec.vectors.adjoint();
  } else {
    unitary_ = Matrix::Identity(h_.dim(), h_.dim());
  }
}

SimulationConfig SimulationConfig::with_efficiencies(
    std::span<const double> etas) const {
  require_channel_count(etas.size(), channels_.size());
  SimulationConfig copy = *this;
  for (std::size_t c = 0; c < etas.size(); ++c) {
    copy.channels_[c] = channels_[c].with_efficiency(etas[c]);
  }
  return copy;
}

Matrix dissipator_action(const Matrix& m,
                         std::span<const MeasurementChannel> channels) {
  Matrix out = Matrix::Zero(m.rows(), m.cols());
  for (const auto& ch : channels) {
    require_dim(m.rows(), ch.dim());
    Matrix local = ch.to_eigenbasis(m);
    local.array() *= squared_gaps(ch.eigenvalues()).cast<Complex>().array() *
                     (-1.0 / (8.0 * ch.tau_m()));
    out += ch.from_eigenbasis(local);
  }
  return out;
}

Matrix lindblad_dissipator(const DensityOperator& rho,
                           std::span<const MeasurementChannel> channels) {
  return dissipator_action(rho.matrix(), channels);
}

Matrix innovation(const DensityOperator& rho, const ObservableOperator& a,
                  double tau_m) {
  require_dim(rho.dim(), a.dim());
  double mean = rho.expectation(a);
  return (anticommutator(a.matrix(), rho.matrix()) -
          2.0 * mean * rho.matrix()) /
         std::sqrt(4.0 * tau_m);
}

Matrix lindblad_generator(const Matrix& m, const SimulationConfig& config) {
  Matrix out = dissipator_action(m, config.channels());
  if (config.has_hamiltonian()) {
    out += Complex(0, -1) * commutator(config.hamiltonian().matrix(), m);
  }
  return out;
}

DensityOperator step_unconditioned(const DensityOperator& rho,
                                   const SimulationConfig& config) {
  require_dim(rho.dim(), config.dim());
  const double dt = config.dt();
  const Matrix& y = rho.matrix();
  Matrix k1 = lindblad_generator(y, config);
  Matrix k2 = lindblad_generator(y + 0.5 * dt * k1, config);
  Matrix k3 = lindblad_generator(y + 0.5 * dt * k2, config);
  Matrix k4 = lindblad_generator(y + dt * k3, config);
  return DensityOperator::repaired(y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
}

DensityOperator step_conditioned_diffusive(const DensityOperator& rho,
                                           const SimulationConfig& config,
                                           std::span<const double> dW) {
  require_dim(rho.dim(), config.dim());
  require_channel_count(dW.size(), config.channels().size());
  return euler_maruyama(rho, config, dW);
}

DensityOperator step_filtered(const DensityOperator& rho,
                              const SimulationConfig& config,
                              std::span<const double> dV) {
  require_dim(rho.dim(), config.dim());
  const auto& channels = config.channels();
  require_channel_count(dV.size(), channels.size());
  bool blind = true;
  std::vector<double> xi(channels.size());
  for (std::size_t c = 0; c < channels.size(); ++c) {
    xi[c] = std::sqrt(channels[c].eta()) * dV[c];
    blind = blind && channels[c].eta() == 0.0;
  }
  // No record at all: the deterministic stepper, not its Euler version.
  if (blind) return step_unconditioned(rho, config);
  return euler_maruyama(rho, config, xi);
}

KrausStep step_conditioned_kraus(const DensityOperator& rho,
                                 const SimulationConfig& config,
                                 const NoiseSource& noise, std::uint64_t step) {
  require_dim(rho.dim(), config.dim());
  const double dt = config.dt();
  Matrix state = rho.matrix();
  std::vector<double> records;
  records.reserve(config.channels().size());
  for (std::size_t c = 0; c < config.channels().size(); ++c) {
    const auto& ch = config.channels()[c];
    Matrix local = ch.to_eigenbasis(state);
    double r = kraus::sample_readout(local, ch.eigenvalues(), ch.tau_m(), dt,
                                     noise.draw(step, noise_slot(c, 0)));
    kraus::condition(local, ch.eigenvalues(), ch.tau_m(), dt, r);
    state = ch.from_eigenbasis(local);
    records.push_back(r);
  }
  if (config.has_hamiltonian()) {
    const Matrix& u = config.unitary_step();
    state = u * state * u.adjoint();
  }
  return {DensityOperator::from_positive_map(state), std::move(records)};
}

double consistent_noises(const DensityOperator& rho_self,
                         const DensityOperator& rho_o,
                         const ObservableOperator& a, double tau_m, double dt,
                         double dV) {
  require_dim(rho_self.dim(), rho_o.dim());
  double gap = rho_self.expectation(a) - rho_o.expectation(a);
  return gap * dt / std::sqrt(tau_m) + dV;
}

double innovation_noise(const DensityOperator& rho_self,
                        const DensityOperator& rho_o,
                        const ObservableOperator& a, double tau_m, double dt,
                        double dW) {
  require_dim(rho_self.dim(), rho_o.dim());
  double gap = rho_self.expectation(a) - rho_o.expectation(a);
  return dW - gap * dt / std::sqrt(tau_m);
}

namespace kraus {

double sample_readout(const Matrix& rho_eig, const RealVector& a, double tau,
                      double dt, const StepDraw& draw) {
  RealVector pops = rho_eig.diagonal().real().cwiseMax(0.0);
  double total = pops.sum();
  double target = draw.uniform * total;
  Eigen::Index pick = a.size() - 1;
  double acc = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    acc += pops[i];
    if (target < acc) {
      pick = i;
      break;
    }
  }
  return a[pick] + std::sqrt(tau / dt) * draw.normal;
}

void condition(Matrix& rho_eig, const RealVector& a, double tau, double dt,
               double r) {
  const double strength = dt / (4.0 * tau);
  RealVector exponent = (a.array() - r).square() * strength;
  exponent.array() -= exponent.minCoeff();
  RealVector k = (-exponent.array()).exp();
  // K is real and diagonal here, so K ρ K scales entries by k_i k_j.
  const Eigen::Index n = k.size();
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) rho_eig(i, j) *= k[i] * k[j];
  }
  double tr = rho_eig.trace().real();
  if (!(tr > 0.0)) throw InvalidState("Kraus update annihilated the state");
  rho_eig /= tr;
}

Eigen::MatrixXd dephasing_factors(const RealVector& a, double tau, double dt) {
  return (squared_gaps(a).array() * (-dt / (8.0 * tau))).exp().matrix();
}

void dephase(Matrix& rho_eig, const Eigen::MatrixXd& factors) {
  rho_eig.array() *= factors.array().cast<Complex>();
}

void dephase(Matrix& rho_eig, const RealVector& a, double tau, double dt) {
  dephase(rho_eig, dephasing_factors(a, tau, dt));
}

}  // namespace kraus

}  // namespace qpercept
