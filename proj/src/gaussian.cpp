#include "qpercept/gaussian.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace qpercept::gaussian {

namespace {

constexpr double kHeisenbergSlack = 1e-9;

struct Moments {
  double mx, mp, vx, vp, c;
};

Moments rates(const Moments& y, double omega, double tau_m, double eta) {
  const double k = eta / tau_m;
  return {omega * y.mp,
          -omega * y.mx,
          2.0 * omega * y.c - k * y.vx * y.vx,
          -2.0 * omega * y.c + 1.0 / (4.0 * tau_m) - k * y.c * y.c,
          omega * y.vp - omega * y.vx - k * y.vx * y.c};
}

Moments axpy(const Moments& y, double h, const Moments& k) {
  return {y.mx + h * k.mx, y.mp + h * k.mp, y.vx + h * k.vx, y.vp + h * k.vp,
          y.c + h * k.c};
}

}  // namespace

void validate(const OscillatorState& s) {
  if (!(s.omega > 0.0) || !(s.tau_m > 0.0)) {
    throw InvalidState("omega and tau_m must be positive");
  }
  if (!(s.eta >= 0.0 && s.eta <= 1.0)) {
    throw InvalidEfficiency("efficiency must lie in [0, 1]");
  }
  if (!(s.v_x > 0.0) || !(s.v_p > 0.0)) {
    throw InvalidState("variances must be positive");
  }
  double det = s.covariance_determinant();
  if (!(det > 0.0) || det < 0.25 - kHeisenbergSlack) {
    std::ostringstream msg;
    msg << "covariance determinant " << det << " violates the uncertainty bound";
    throw InvalidState(msg.str());
  }
}

MomentRates moment_derivatives(const OscillatorState& s) {
  validate(s);
  Moments r = rates({s.mean_x, s.mean_p, s.v_x, s.v_p, s.c_xp}, s.omega,
                    s.tau_m, s.eta);
  return {r.vx, r.vp, r.c};
}

std::vector<OscillatorState> integrate_moments(const OscillatorState& s0,
                                               double dt, std::uint64_t n_steps) {
  validate(s0);
  double limit = 0.01 * std::min(s0.tau_m, 1.0 / s0.omega);
  if (!(dt > 0.0) || dt > limit * (1.0 + 1e-12)) {
    std::ostringstream msg;
    msg << "dt = " << dt << " exceeds 0.01 * min(tau_m, 1/omega) = " << limit;
    throw StepTooLarge(msg.str());
  }
  std::vector<OscillatorState> out;
  out.reserve(n_steps + 1);
  out.push_back(s0);
  Moments y{s0.mean_x, s0.mean_p, s0.v_x, s0.v_p, s0.c_xp};
  for (std::uint64_t n = 0; n < n_steps; ++n) {
    Moments k1 = rates(y, s0.omega, s0.tau_m, s0.eta);
    Moments k2 = rates(axpy(y, 0.5 * dt, k1), s0.omega, s0.tau_m, s0.eta);
    Moments k3 = rates(axpy(y, 0.5 * dt, k2), s0.omega, s0.tau_m, s0.eta);
    Moments k4 = rates(axpy(y, dt, k3), s0.omega, s0.tau_m, s0.eta);
    y.mx += dt / 6.0 * (k1.mx + 2 * k2.mx + 2 * k3.mx + k4.mx);
    y.mp += dt / 6.0 * (k1.mp + 2 * k2.mp + 2 * k3.mp + k4.mp);
    y.vx += dt / 6.0 * (k1.vx + 2 * k2.vx + 2 * k3.vx + k4.vx);
    y.vp += dt / 6.0 * (k1.vp + 2 * k2.vp + 2 * k3.vp + k4.vp);
    y.c += dt / 6.0 * (k1.c + 2 * k2.c + 2 * k3.c + k4.c);
    OscillatorState s = s0;
    s.mean_x = y.mx;
    s.mean_p = y.mp;
    s.v_x = y.vx;
    s.v_p = y.vp;
    s.c_xp = y.c;
    validate(s);
    out.push_back(s);
  }
  return out;
}

OscillatorState steady_state(double omega, double tau_m, double eta) {
  if (!(eta > 0.0 && eta <= 1.0)) {
    throw InvalidEfficiency("steady state needs efficiency in (0, 1]");
  }
  if (!(omega > 0.0) || !(tau_m > 0.0)) {
    throw InvalidState("omega and tau_m must be positive");
  }
  const double wt = omega * tau_m;
  // Non-negative root of η c² + 2ωτ c - 1/4 = 0; the other makes v_x imaginary.
  // Written in the cancellation-free form of (√(ω²τ² + η/4) - ωτ)/η.
  const double c = 0.25 / (std::sqrt(wt * wt + 0.25 * eta) + wt);
  OscillatorState s;
  s.omega = omega;
  s.tau_m = tau_m;
  s.eta = eta;
  s.c_xp = c;
  s.v_x = std::sqrt(2.0 * wt * c / eta);
  s.v_p = s.v_x * (1.0 + eta * c / wt);
  return s;
}

double purity_from_covariance(const OscillatorState& s) {
  validate(s);
  return 1.0 / (2.0 * std::sqrt(s.covariance_determinant()));
}

double gaussian_entropy_from_purity(double purity) {
  if (!(purity > 0.0 && purity <= 1.0)) {
    throw OutOfRange("purity must lie in (0, 1]");
  }
  double a = 0.5 / purity + 0.5;
  double b = 0.5 / purity - 0.5;
  double s = a * std::log(a);
  if (b > 0.0) s -= b * std::log(b);
  return s;
}

std::vector<TransitionRow> transition_curves(const std::vector<double>& eta_grid) {
  std::vector<TransitionRow> rows;
  rows.reserve(eta_grid.size());
  for (double eta : eta_grid) {
    if (!(eta >= 0.0 && eta <= 1.0)) {
      std::ostringstream msg;
      msg << "efficiency " << eta << " outside [0, 1]";
      throw OutOfRange(msg.str());
    }
    TransitionRow row{eta, 1.0, 1.0, std::numeric_limits<double>::infinity()};
    if (eta > 0.0) {
      double p = std::sqrt(eta);
      row.lower = 1.0 - p;
      row.upper = std::sqrt(1.0 - p);
      row.rel_entropy = gaussian_entropy_from_purity(p);
    }
    rows.push_back(row);
  }
  return rows;
}

double entropy_eta_derivative(double eta) {
  if (!(eta > 0.0 && eta <= 1.0)) {
    throw OutOfRange("entropy derivative defined for efficiency in (0, 1]");
  }
  if (eta == 1.0) return -std::numeric_limits<double>::infinity();
  double r = std::sqrt(eta);
  return std::log((1.0 - r) / (1.0 + r)) / (4.0 * eta * r);
}

}  // namespace qpercept::gaussian
