#include "qpercept/bounds.hpp"

#include <cmath>
#include <sstream>

namespace qpercept::bounds {

namespace {

void require_pure(const DensityOperator& rho) {
  if (1.0 - purity(rho) > tolerance::pure) {
    throw NotPure("initial state must be pure");
  }
}

double time_average(std::span<const double> values, double T) {
  if (values.empty()) throw EmptySeries("empty state series");
  if (values.size() == 1 || T == 0.0) return values.front();
  double h = T / static_cast<double>(values.size() - 1);
  return trapezoid(values, h) / T;
}

std::vector<double> rate_variances(std::span<const DensityOperator> series,
                                   const ObservableOperator& v) {
  std::vector<double> out;
  out.reserve(series.size());
  for (const auto& rho : series) out.push_back(rate_variance(rho, v));
  return out;
}

}  // namespace

double trapezoid(std::span<const double> values, double h) {
  if (values.empty()) throw EmptySeries("trapezoid of an empty series");
  double sum = 0.0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    sum += 0.5 * (values[i - 1] + values[i]);
  }
  return sum * h;
}

BoundPair purity_sandwich(const DensityOperator& rho_agent) {
  double mixedness = std::max(0.0, 1.0 - purity(rho_agent));
  return {mixedness, std::sqrt(mixedness)};
}

double entropy_identity_rhs(const DensityOperator& rho_agent) {
  return von_neumann_entropy(rho_agent);
}

double trace_distance_variance_bound(const DensityOperator& rho_agent) {
  double p = purity(rho_agent);
  return p - p * p;
}

double relative_entropy_variance_bound(const DensityOperator& rho_agent) {
  EntropyMoments m = entropy_moments(rho_agent);
  return m.surprise_second_moment - m.entropy * m.entropy;
}

double decoherence_rate(const DensityOperator& rho0,
                        std::span<const MeasurementChannel> channels) {
  require_pure(rho0);
  double rate = 0.0;
  for (const auto& ch : channels) {
    const Matrix& a = ch.observable().matrix();
    double mean = rho0.expectation(ch.observable());
    double second = (rho0.matrix() * a * a).trace().real();
    rate += (second - mean * mean) / (4.0 * ch.tau_m());
  }
  return rate;
}

BoundPair short_time_bounds(const DensityOperator& rho0,
                            std::span<const MeasurementChannel> channels,
                            double T) {
  double x = T * decoherence_rate(rho0, channels);
  if (x > 1.0 + 1e-12) {
    std::ostringstream msg;
    msg << "T/tau_D = " << x << " > 1: short-time bounds are vacuous";
    throw OutOfRegime(msg.str());
  }
  x = std::min(x, 1.0);  // rounding at the boundary
  return {x, std::sqrt(x)};
}

double commutator_rate_identity(std::span<const DensityOperator> rho_a_series,
                                std::span<const MeasurementChannel> channels,
                                double dt) {
  if (rho_a_series.empty()) throw EmptySeries("empty state series");
  std::vector<double> integrand;
  integrand.reserve(rho_a_series.size());
  for (const auto& rho : rho_a_series) {
    double f = 0.0;
    for (const auto& ch : channels) {
      f += commutator_2norm_sq(rho, ch.observable()) / (4.0 * ch.tau_m());
    }
    integrand.push_back(f);
  }
  return trapezoid(integrand, dt);
}

BoundPair multi_agent_triangle_bounds(const DensityOperator& rho_a,
                                      const DensityOperator& rho_b) {
  if (rho_a.dim() != rho_b.dim()) {
    throw DimensionMismatch("agents' states have different dimensions");
  }
  double pa = purity(rho_a);
  double pb = purity(rho_b);
  return {std::abs(pa - pb),
          std::sqrt(std::max(0.0, 1.0 - pa)) + std::sqrt(std::max(0.0, 1.0 - pb))};
}

ObservableOperator heisenberg_rate_operator(
    const ObservableOperator& x, const ObservableOperator& hamiltonian,
    std::span<const MeasurementChannel> channels) {
  if (x.dim() != hamiltonian.dim()) {
    throw DimensionMismatch("observable and Hamiltonian dimensions differ");
  }
  Matrix v = dissipator_action(x.matrix(), channels) +
             Complex(0, 1) * commutator(hamiltonian.matrix(), x.matrix());
  return ObservableOperator(0.5 * (v + v.adjoint()));
}

double rate_variance(const DensityOperator& rho, const ObservableOperator& v) {
  double mean = rho.expectation(v);
  double second = (rho.matrix() * v.matrix() * v.matrix()).trace().real();
  return std::max(0.0, second - mean * mean);
}

double observable_gap_bound(std::span<const DensityOperator> rho_agent_series,
                            const ObservableOperator& x,
                            const ObservableOperator& hamiltonian,
                            std::span<const MeasurementChannel> channels,
                            double T) {
  if (rho_agent_series.empty()) throw EmptySeries("empty state series");
  if (rho_agent_series.front().dim() != x.dim()) {
    throw DimensionMismatch("state and observable dimensions differ");
  }
  if (T == 0.0) return 0.0;
  ObservableOperator v = heisenberg_rate_operator(x, hamiltonian, channels);
  double avg = time_average(rate_variances(rho_agent_series, v), T);
  return 2.0 * T * x.operator_norm() * std::sqrt(avg);
}

double observable_gap_implicit_rhs(double time_averaged_gap,
                                   std::span<const DensityOperator> rho_agent_series,
                                   const ObservableOperator& x,
                                   const ObservableOperator& hamiltonian,
                                   std::span<const MeasurementChannel> channels,
                                   double T) {
  if (rho_agent_series.empty()) throw EmptySeries("empty state series");
  if (T == 0.0) return 0.0;
  ObservableOperator v = heisenberg_rate_operator(x, hamiltonian, channels);
  double avg = time_average(rate_variances(rho_agent_series, v), T);
  return 2.0 * T * std::sqrt(std::max(0.0, time_averaged_gap)) * std::sqrt(avg);
}

double two_observer_gap_rate(const DensityOperator& rho_a,
                             const DensityOperator& rho_b,
                             const ObservableOperator& x,
                             const ObservableOperator& hamiltonian,
                             std::span<const MeasurementChannel> channels) {
  if (rho_a.dim() != rho_b.dim() || rho_a.dim() != x.dim()) {
    throw DimensionMismatch("dimensions differ");
  }
  ObservableOperator v = heisenberg_rate_operator(x, hamiltonian, channels);
  double gap = rho_a.expectation(v) - rho_b.expectation(v);
  return gap * gap;
}

}  // namespace qpercept::bounds
