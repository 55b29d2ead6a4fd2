#ifndef MEMRC_HARMONICS_HPP
#define MEMRC_HARMONICS_HPP

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "memrc/device.hpp"
#include "memrc/errors.hpp"

namespace memrc {

// Closed-form steady-state analysis for the volatile nonlinear model driven
// by mu I = m + alpha sin(omega t), plus a least-squares empirical oracle.
// All functions here are pure.

struct SteadyState {
  double x_bar = 0.0;              // asymptotic mean state
  double epsilon = 0.0;            // m - lambda
  std::optional<double> t_c = {};  // pole of the mean evolution, when real
};

struct HarmonicCoeffs {
  double a_w = 0.0;   // sine amplitude at omega
  double b_w = 0.0;   // cosine amplitude at omega
  double a_2w = 0.0;  // sine amplitude at 2 omega
  double b_2w = 0.0;  // cosine amplitude at 2 omega
  double dc = 0.0;    // effective-resistor constant term
  double phi = 0.0;   // delay phase at omega
};

// Mean state under constant drive: (m - lambda)/m, nonzero only when the
// drive exceeds the decay rate.
inline SteadyState steady_state_mean(double m, double lambda) {
  if (m < 0.0 || lambda < 0.0) throw Error("steady_state_mean: need m, lambda >= 0");
  SteadyState s;
  s.epsilon = m - lambda;
  s.x_bar = (m > lambda && m > 0.0) ? (m - lambda) / m : 0.0;
  return s;
}

// t_c = 1/(lambda-m) ln[(m/(lambda-m)) (x0/(1-x0))]; real only for m < lambda
// with a positive log argument, otherwise empty.
inline std::optional<double> convergence_pole_time(double m, double lambda, double x0) {
  if (!(x0 > 0.0 && x0 < 1.0)) throw Error("convergence_pole_time: need 0 < x0 < 1");
  const double denom = lambda - m;
  if (denom == 0.0) return std::nullopt;
  const double arg = (m / denom) * (x0 / (1.0 - x0));
  if (arg <= 0.0) return std::nullopt;
  return std::log(arg) / denom;
}

// sin(phi) = omega / sqrt(omega^2 + eps^2); phi in (0, pi/2].
inline double delay_phase(double omega, double epsilon) {
  if (omega <= 0.0) throw Error("delay_phase: need omega > 0");
  if (epsilon < 0.0) throw Error("delay_phase: need epsilon >= 0");
  return std::asin(omega / std::hypot(omega, epsilon));
}

inline double expansion_amplitude_bound(double m, double lambda, double omega) {
  const double eps = m - lambda;
  if (lambda <= 0.0) return std::numeric_limits<double>::infinity();
  return m * std::hypot(omega, eps) / lambda;
}

// First-order steady state response
//   x(t) = (eps/m) (1 - (lambda/(m omega)) alpha sin(phi) sin(omega t - phi))^-1.
inline double first_order_state_response(double t, double m, double lambda, double alpha,
                                         double omega) {
  const double eps = m - lambda;
  if (!(alpha < expansion_amplitude_bound(m, lambda, omega)))
    throw ExpansionDivergesError("first_order_state_response: amplitude outside expansion bound");
  const double phi = delay_phase(omega, eps);
  const double b = lambda / (m * omega) * alpha * std::sin(phi);
  return eps / m / (1.0 - b * std::sin(omega * t - phi));
}

// First-order harmonic coefficients of the steady-state voltage for
// mu I = m + alpha sin(omega t). Obtained by expanding the three voltage
// terms H_bar*I, m*dx*(-dr)/mu and gamma*dx*(-dr)/mu and collecting
// sin/cos(k omega t); the sine term at omega carries the effective-resistor
// contribution (alpha/m)(r m/mu).
inline HarmonicCoeffs harmonic_coeffs(const MemristorParams& p, double m, double alpha,
                                      double omega) {
  p.validate();
  if (m <= 0.0 || omega <= 0.0) throw Error("harmonic_coeffs: need m > 0 and omega > 0");
  if (!(alpha < expansion_amplitude_bound(m, p.lambda, omega)))
    throw ExpansionDivergesError("harmonic_coeffs: amplitude outside expansion bound");
  const double eps = m - p.lambda;
  const double denom = omega * omega + eps * eps;
  const double k = p.delta_r() * p.lambda / p.mu;  // dr*lambda/mu
  const double ratio = alpha / m;
  HarmonicCoeffs h;
  h.a_w = ratio * (k * omega * omega / denom + p.r * m / p.mu);
  h.b_w = ratio * k * omega * eps / denom;
  h.a_2w = 0.5 * ratio * h.b_w;
  h.b_2w = 0.5 * ratio * ratio * k * eps * eps / denom;
  h.dc = (p.r * m + p.delta_r() * p.lambda) / p.mu;
  h.phi = delay_phase(omega, eps > 0.0 ? eps : 0.0);
  return h;
}

// Parameter map making the first-order Wiener model match the first-order
// nonlinear response: lambda_l = eps (delay), z_s fixes the mean value.
inline WienerParams wiener_equivalent_params(double m, double lambda, double x0,
                                             const MemristorParams& base) {
  if (!(m > lambda && lambda > 0.0))
    throw InvalidRegimeError("wiener_equivalent_params: requires m > lambda > 0");
  if (!(x0 > 0.0 && x0 < 1.0)) throw InvalidRegimeError("wiener_equivalent_params: need 0 < x0 < 1");
  const double eps = m - lambda;
  WienerParams wp;
  wp.base = base;
  wp.base.x0 = x0;
  wp.lambda_l = eps;
  wp.z_s = -std::log((x0 / (1.0 - x0)) * (lambda / eps)) - m / eps;
  wp.z0 = 0.0;  // H(z0; x0) starts at the same x0 as the nonlinear model
  return wp;
}

// First-order truncation of the Wiener output state for
// mu I = m + sum_i alpha_i sin(omega_i t):
//   1/x = 1 + (1-x0)/x0 e^{-eps_l} [1 - sum_i (alpha_i/omega_i) sin(phi_i) sin(omega_i t - phi_i)].
inline double first_order_wiener_state(double t, const WienerParams& wp, double x0, double m,
                                       const std::vector<double>& alphas,
                                       const std::vector<double>& omegas) {
  if (alphas.size() != omegas.size())
    throw LengthMismatchError("first_order_wiener_state: alphas/omegas size mismatch");
  const double eps_l = m / wp.lambda_l + wp.z_s;
  double osc = 0.0;
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    const double sin_phi = omegas[i] / std::hypot(omegas[i], wp.lambda_l);
    const double phi = std::asin(sin_phi);
    osc += alphas[i] / omegas[i] * sin_phi * std::sin(omegas[i] * t - phi);
  }
  const double inv_x = 1.0 + (1.0 - x0) / x0 * std::exp(-eps_l) * (1.0 - osc);
  return 1.0 / inv_x;
}

struct HarmonicFit {
  double dc = 0.0;
  std::vector<double> sine;    // sine[k-1]: amplitude at k*omega
  std::vector<double> cosine;  // cosine[k-1]: amplitude at k*omega
};

namespace detail {

// Least-squares projection of (times, values) onto {1, sin(k w t), cos(k w t)}.
// The first third of the trace is discarded as transient and the remainder is
// truncated to an integer number of periods; fitting at the known frequencies
// avoids the leakage a generic FFT bin would suffer on unaligned grids.
inline HarmonicFit project_harmonics(const std::vector<double>& times,
                                     const std::vector<double>& values, double omega,
                                     int n_harmonics) {
  if (times.size() != values.size())
    throw LengthMismatchError("empirical_harmonics: times/values size mismatch");
  if (omega <= 0.0 || n_harmonics < 1) throw Error("empirical_harmonics: bad omega/n_harmonics");
  const double period = 2.0 * M_PI / omega;
  const double span = times.back() - times.front();
  const double t_start = times.front() + span / 3.0;
  std::size_t i0 = 0;
  while (i0 < times.size() && times[i0] < t_start) ++i0;
  const double n_periods = std::floor((times.back() - times[i0]) / period);
  if (n_periods < 4.0)
    throw InsufficientPeriodsError("empirical_harmonics: fewer than 4 full periods after transient");
  const double t_end = times[i0] + n_periods * period;
  std::size_t i1 = i0;
  while (i1 < times.size() && times[i1] <= t_end) ++i1;

  const auto rows = static_cast<Eigen::Index>(i1 - i0);
  const Eigen::Index cols = 2 * n_harmonics + 1;
  Eigen::MatrixXd basis(rows, cols);
  Eigen::VectorXd rhs(rows);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const double t = times[i0 + static_cast<std::size_t>(i)];
    basis(i, 0) = 1.0;
    for (int k = 1; k <= n_harmonics; ++k) {
      basis(i, 2 * k - 1) = std::sin(k * omega * t);
      basis(i, 2 * k) = std::cos(k * omega * t);
    }
    rhs(i) = values[i0 + static_cast<std::size_t>(i)];
  }
  const Eigen::VectorXd coef = basis.colPivHouseholderQr().solve(rhs);
  HarmonicFit fit;
  fit.dc = coef(0);
  fit.sine.resize(static_cast<std::size_t>(n_harmonics));
  fit.cosine.resize(static_cast<std::size_t>(n_harmonics));
  for (int k = 1; k <= n_harmonics; ++k) {
    fit.sine[static_cast<std::size_t>(k - 1)] = coef(2 * k - 1);
    fit.cosine[static_cast<std::size_t>(k - 1)] = coef(2 * k);
  }
  return fit;
}

}  // namespace detail

// Harmonic content of the voltage trace at k*omega, k = 1..n_harmonics.
inline HarmonicFit empirical_harmonics(const Trajectory& traj, double omega, int n_harmonics) {
  return detail::project_harmonics(traj.times, traj.voltages, omega, n_harmonics);
}

// Same projection applied to the internal state; used to measure the delay
// phase and to check harmonic purity of the Wiener linear state.
inline HarmonicFit empirical_state_harmonics(const Trajectory& traj, double omega, int n_harmonics) {
  return detail::project_harmonics(traj.times, traj.states, omega, n_harmonics);
}

// Phase lag of the state oscillation: x ~ x_bar (1 + B sin(omega t - phi))
// gives sine coefficient B cos(phi) and cosine coefficient -B sin(phi).
inline double measured_delay_phase(const Trajectory& traj, double omega) {
  const HarmonicFit fit = empirical_state_harmonics(traj, omega, 1);
  return std::atan2(-fit.cosine[0], fit.sine[0]);
}

}  // namespace memrc

#endif  // MEMRC_HARMONICS_HPP
