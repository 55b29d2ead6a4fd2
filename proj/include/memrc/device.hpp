#ifndef MEMRC_DEVICE_HPP
#define MEMRC_DEVICE_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "memrc/csv.hpp"
#include "memrc/errors.hpp"
#include "memrc/signal.hpp"

namespace memrc {

// Device constants for one unit. Immutable after construction; integrations
// never share mutable state, so banks of devices can run fully in parallel.
struct MemristorParams {
  double mu = 1.0;      // effective ionic mobility (1/charge)
  double lambda = 0.0;  // diffusion rate (1/time); 0 recovers the nonvolatile models
  double R = 2.0;       // high resistance
  double r = 1.0;       // low resistance
  double x0 = 0.5;      // initial internal state, in (0,1)

  double delta_r() const { return R - r; }

  void validate() const {
    if (!(R > r && r > 0.0)) throw Error("MemristorParams: need R > r > 0");
    if (!(x0 > 0.0 && x0 < 1.0)) throw Error("MemristorParams: need 0 < x0 < 1");
    if (lambda < 0.0) throw Error("MemristorParams: need lambda >= 0");
    if (mu <= 0.0) throw Error("MemristorParams: need mu > 0");
  }
};

// Volatile Wiener model: z' = mu I - lambda_l (z - z_s), output through the
// sigmoid of the base device. z_s <= 0 keeps the resting output saturated
// at R instead of overflowing the state.
struct WienerParams {
  MemristorParams base;
  double lambda_l = 0.0;
  double z_s = 0.0;
  double z0 = 0.0;

  void validate() const {
    base.validate();
    if (lambda_l < 0.0) throw Error("WienerParams: need lambda_l >= 0");
    if (z_s > 0.0) throw Error("WienerParams: need z_s <= 0");
  }
};

struct Trajectory {
  std::vector<double> times;
  std::vector<double> states;
  std::vector<double> voltages;

  std::size_t size() const { return times.size(); }

  void validate() const {
    if (states.size() != times.size() || voltages.size() != times.size())
      throw LengthMismatchError("Trajectory: arrays differ in length");
    for (std::size_t i = 1; i < times.size(); ++i)
      if (!(times[i] > times[i - 1])) throw Error("Trajectory: times not strictly increasing");
  }
};

// States are clamped here after every step; x=0 is unstable under the
// nonlinear dynamics and must stay strictly positive.
inline constexpr double kStateFloor = 1e-12;

inline double memristance_piecewise(double x, const MemristorParams& p) {
  if (x < 0.0) return p.R;
  if (x > 1.0) return p.r;
  return p.R - p.delta_r() * x;
}

namespace detail {

// log(x0/(1-x0)); the constant aligning the sigmoid with the initial state.
inline double logit(double x0) { return std::log(x0 / (1.0 - x0)); }

// 1/(1+e^-u) without overflow at either tail.
inline double logistic(double u) {
  if (u >= 0.0) return 1.0 / (1.0 + std::exp(-u));
  const double e = std::exp(u);
  return e / (1.0 + e);
}

}  // namespace detail

// Wiener output function H(q; x0) = R - dr (1 + (1-x0)/x0 e^-q)^-1. Equals
// the tanh form R - dr/2 [tanh(q/2 + C(x0)) + 1] with C(x0) = logit(x0)/2.
inline double memristance_wiener(double q, double x0, const MemristorParams& p) {
  return p.R - p.delta_r() * detail::logistic(q + detail::logit(x0));
}

// Explicit nonvolatile input-output relation: q is the raw current integral
// int_0^t I, and V = H(mu q) I.
inline double closed_form_nonvolatile_voltage(double q, double current, const MemristorParams& p) {
  return memristance_wiener(p.mu * q, p.x0, p) * current;
}

// Nonvolatile closed form evaluated on a grid. The drive integral comes from
// the signal's analytic primitive when present, otherwise from cumulative
// trapezoid on a refined grid.
inline Trajectory closed_form_nonvolatile(const Signal& sig, const MemristorParams& p,
                                          const std::vector<double>& t_grid, int refine = 10) {
  p.validate();
  Trajectory traj;
  traj.times = t_grid;
  traj.states.reserve(t_grid.size());
  traj.voltages.reserve(t_grid.size());
  const double c0 = detail::logit(p.x0);
  if (sig.has_primitive()) {
    for (double t : t_grid) {
      const double drive_integral = sig.mean() * t + sig.primitive(t);  // mu*q(t)
      const double x = detail::logistic(drive_integral + c0);
      traj.states.push_back(x);
      traj.voltages.push_back((p.R - p.delta_r() * x) * (sig(t) / p.mu));
    }
    return traj;
  }
  double q = 0.0;
  double t_prev = 0.0;
  double v_prev = sig(0.0);
  for (double t : t_grid) {
    const int sub = std::max(1, refine);
    const double h = (t - t_prev) / sub;
    for (int j = 0; j < sub && h > 0.0; ++j) {
      const double tn = t_prev + h * (j + 1);
      const double vn = sig(tn);
      q += 0.5 * h * (v_prev + vn);
      v_prev = vn;
    }
    t_prev = t;
    const double x = detail::logistic(q + c0);
    traj.states.push_back(x);
    traj.voltages.push_back((p.R - p.delta_r() * x) * (sig(t) / p.mu));
  }
  return traj;
}

struct IntegrateOptions {
  long record_every = 1;     // keep every k-th step
  double record_from = 0.0;  // discard samples before this time
};

namespace detail {

// Drive sampled at t0 + k*dt/2 for k = 0..2n; RK4 needs the half-points.
inline std::vector<double> sample_half_grid(const Signal& sig, double bias, double t0, double dt,
                                            long n_steps) {
  std::vector<double> buf(static_cast<std::size_t>(2 * n_steps + 1));
  for (long k = 0; k <= 2 * n_steps; ++k)
    buf[static_cast<std::size_t>(k)] = bias + sig.zero_mean(t0 + 0.5 * dt * k);
  return buf;
}

// Classical RK4 on x' = (d(t) - lambda) x - d(t) x^2 over a pre-sampled
// drive buffer. States are clamped to [kStateFloor, 1] after each step.
inline Trajectory integrate_nonlinear_buffer(std::span<const double> drive2,
                                             const MemristorParams& p, double t0, double dt,
                                             long n_steps, long record_from_step,
                                             long record_every) {
  auto f = [&p](double x, double d) { return (d - p.lambda) * x - d * x * x; };
  auto record_v = [&p](double x, double d) { return (p.R - p.delta_r() * x) * (d / p.mu); };

  Trajectory traj;
  const long n_rec = n_steps / std::max<long>(1, record_every) + 2;
  traj.times.reserve(n_rec);
  traj.states.reserve(n_rec);
  traj.voltages.reserve(n_rec);

  double x = p.x0;
  auto maybe_record = [&](long k) {
    if (k >= record_from_step && (k - record_from_step) % record_every == 0) {
      traj.times.push_back(t0 + dt * k);
      traj.states.push_back(x);
      traj.voltages.push_back(record_v(x, drive2[static_cast<std::size_t>(2 * k)]));
    }
  };
  maybe_record(0);
  for (long k = 0; k < n_steps; ++k) {
    const double d0 = drive2[static_cast<std::size_t>(2 * k)];
    const double dh = drive2[static_cast<std::size_t>(2 * k + 1)];
    const double d1 = drive2[static_cast<std::size_t>(2 * k + 2)];
    const double k1 = f(x, d0);
    const double k2 = f(x + 0.5 * dt * k1, dh);
    const double k3 = f(x + 0.5 * dt * k2, dh);
    const double k4 = f(x + dt * k3, d1);
    x += dt / 6.0 * (k1 + 2.0 * (k2 + k3) + k4);
    if (!std::isfinite(x))
      throw NonFiniteStateError("integrate_volatile_nonlinear: non-finite state (dt too large?)");
    x = std::clamp(x, kStateFloor, 1.0);
    maybe_record(k + 1);
  }
  return traj;
}

// Exact exponential step for z' = d(t) - lambda_l (z - z_s) with the drive
// interpolated linearly across each step.
inline Trajectory integrate_wiener_buffer(std::span<const double> drive2, const WienerParams& wp,
                                          double t0, double dt, long n_steps,
                                          long record_from_step, long record_every,
                                          bool* overflow_warning) {
  const MemristorParams& p = wp.base;
  const double lam = wp.lambda_l;
  const double decay = std::exp(-lam * dt);
  // e1 = int_0^dt e^{lam (s-dt)} ds, slope_w = int_0^dt (s/dt) e^{lam (s-dt)} ds.
  double e1, slope_w;
  if (lam * dt > 1e-8) {
    e1 = -std::expm1(-lam * dt) / lam;
    slope_w = (dt - e1) / (lam * dt);
  } else {
    e1 = dt * (1.0 - 0.5 * lam * dt);
    slope_w = 0.5 * dt * (1.0 - lam * dt / 3.0);
  }

  Trajectory traj;
  const long n_rec = n_steps / std::max<long>(1, record_every) + 2;
  traj.times.reserve(n_rec);
  traj.states.reserve(n_rec);
  traj.voltages.reserve(n_rec);

  bool warned = false;
  double z = wp.z0;
  auto maybe_record = [&](long k) {
    if (k >= record_from_step && (k - record_from_step) % record_every == 0) {
      traj.times.push_back(t0 + dt * k);
      traj.states.push_back(z);
      const double d = drive2[static_cast<std::size_t>(2 * k)];
      traj.voltages.push_back(memristance_wiener(z, p.x0, p) * (d / p.mu));
    }
  };
  maybe_record(0);
  for (long k = 0; k < n_steps; ++k) {
    const double d0 = drive2[static_cast<std::size_t>(2 * k)];
    const double d1 = drive2[static_cast<std::size_t>(2 * k + 2)];
    z = wp.z_s + (z - wp.z_s) * decay + d0 * e1 + (d1 - d0) * slope_w;
    if (!std::isfinite(z)) throw NonFiniteStateError("integrate_wiener_volatile: non-finite state");
    if (!warned && std::abs(z - wp.z_s) > 1e6) warned = true;
    maybe_record(k + 1);
  }
  if (overflow_warning) *overflow_warning = warned;
  return traj;
}

}  // namespace detail

// Fixed-step RK4 integration of the volatile nonlinear (Bernoulli) model
// x' = (mu I - lambda) x - mu I x^2, V = (R - dr x) I.
inline Trajectory integrate_volatile_nonlinear(const Signal& sig, const MemristorParams& p,
                                               double duration, double dt,
                                               const IntegrateOptions& opt = {}) {
  p.validate();
  if (dt <= 0.0) throw Error("integrate_volatile_nonlinear: dt must be > 0");
  const long n = std::lround(duration / dt);
  const auto drive2 = detail::sample_half_grid(sig, sig.mean(), 0.0, dt, n);
  const long from = std::lround(opt.record_from / dt);
  return detail::integrate_nonlinear_buffer(drive2, p, 0.0, dt, n, std::max(0L, from),
                                            std::max(1L, opt.record_every));
}

// Closed-form general solution of the volatile nonlinear model:
//   1/x(t) = 1 + (1-x0)/x0 F(t)^-1 + lambda F(t)^-1 int_0^t F,  F = e^{G},
//   G(t) = int_0^t mu I - lambda t.
// Everything is evaluated relative to G(t) so F never overflows while G is
// nondecreasing; the scaled integral uses composite trapezoid on a grid
// `refine` times finer than t_grid.
inline Trajectory closed_form_volatile_nonlinear(const Signal& sig, const MemristorParams& p,
                                                 const std::vector<double>& t_grid,
                                                 int refine = 10) {
  p.validate();
  if (t_grid.empty()) return {};
  if (t_grid.front() < 0.0) throw Error("closed_form_volatile_nonlinear: grid must start at t >= 0");
  const double ratio = (1.0 - p.x0) / p.x0;
  const double eps_rate = sig.mean() - p.lambda;

  const bool analytic = sig.has_primitive();
  // G(t) for analytic signals; for sampled ones accumulate trapezoid of the
  // drive on the same refined grid.
  double g_quad = 0.0;
  double t_quad = 0.0;
  auto g_of = [&](double t) {
    return eps_rate * t + sig.primitive(t);
  };
  auto g_advance_to = [&](double t) {
    // forward-only trapezoid of (drive - lambda); callers step on the
    // already-refined grid
    const double span = t - t_quad;
    if (span <= 0.0) return g_quad;
    g_quad += 0.5 * span * ((sig(t_quad) - p.lambda) + (sig(t) - p.lambda));
    t_quad = t;
    return g_quad;
  };

  Trajectory traj;
  traj.times = t_grid;
  traj.states.reserve(t_grid.size());
  traj.voltages.reserve(t_grid.size());

  // scaled_int = int_0^t e^{G(z) - G(t)} dz, advanced incrementally.
  double scaled_int = 0.0;
  double t_prev = 0.0;
  double g_prev = 0.0;
  auto check = [](double expo) {
    if (expo > 700.0)
      throw QuadratureUnderflowError(
          "closed_form_volatile_nonlinear: scaled quadrature overflow; shorten the horizon or "
          "use the integrator");
  };
  for (double t : t_grid) {
    const int sub = std::max(1, refine);
    const double h = (t - t_prev) / sub;
    for (int j = 0; j < sub && h > 0.0; ++j) {
      const double tn = t_prev + h * (j + 1);
      const double gn = analytic ? g_of(tn) : g_advance_to(tn);
      check(g_prev - gn);
      const double w = std::exp(g_prev - gn);
      scaled_int = scaled_int * w + 0.5 * h * (w + 1.0);
      g_prev = gn;
    }
    t_prev = t;
    const double g_t = analytic ? g_of(t) : g_quad;
    check(-g_t);
    const double inv_x = 1.0 + ratio * std::exp(-g_t) + p.lambda * scaled_int;
    const double x = 1.0 / inv_x;
    traj.states.push_back(x);
    traj.voltages.push_back((p.R - p.delta_r() * x) * (sig(t) / p.mu));
  }
  return traj;
}

// Volatile Wiener model via the exact exponential-integrator step. Sets
// *overflow_warning when |z - z_s| exceeds 1e6: the linear state is
// unbounded and inputs with mean value can drive it to overflow.
inline Trajectory integrate_wiener_volatile(const Signal& sig, const WienerParams& wp,
                                            double duration, double dt,
                                            const IntegrateOptions& opt = {},
                                            bool* overflow_warning = nullptr) {
  wp.validate();
  if (dt <= 0.0) throw Error("integrate_wiener_volatile: dt must be > 0");
  const long n = std::lround(duration / dt);
  const auto drive2 = detail::sample_half_grid(sig, sig.mean(), 0.0, dt, n);
  const long from = std::lround(opt.record_from / dt);
  return detail::integrate_wiener_buffer(drive2, wp, 0.0, dt, n, std::max(0L, from),
                                         std::max(1L, opt.record_every), overflow_warning);
}

// Recompute V = H(x) I pointwise from the stored states; idempotent on
// trajectories the integrators produced.
inline Trajectory voltage_trace(const Trajectory& traj, const Signal& sig,
                                const MemristorParams& p) {
  if (traj.states.size() != traj.times.size())
    throw LengthMismatchError("voltage_trace: states/times length mismatch");
  Trajectory out = traj;
  out.voltages.resize(out.times.size());
  for (std::size_t i = 0; i < out.times.size(); ++i) {
    const double current = sig(out.times[i]) / p.mu;
    out.voltages[i] = memristance_piecewise(out.states[i], p) * current;
  }
  return out;
}

inline Trajectory voltage_trace_wiener(const Trajectory& traj, const Signal& sig,
                                       const WienerParams& wp) {
  if (traj.states.size() != traj.times.size())
    throw LengthMismatchError("voltage_trace: states/times length mismatch");
  Trajectory out = traj;
  out.voltages.resize(out.times.size());
  for (std::size_t i = 0; i < out.times.size(); ++i) {
    const double current = sig(out.times[i]) / wp.base.mu;
    out.voltages[i] = memristance_wiener(out.states[i], wp.base.x0, wp.base) * current;
  }
  return out;
}

// CSV export: header `t,x,v`, one row per sample, full double precision.
inline void write_trajectory_csv(const Trajectory& traj, const std::string& path) {
  traj.validate();
  CsvWriter csv(path);
  csv.raw_line("t,x,v");
  for (std::size_t i = 0; i < traj.size(); ++i)
    csv.row(traj.times[i], traj.states[i], traj.voltages[i]);
  csv.close();
}

}  // namespace memrc

#endif  // MEMRC_DEVICE_HPP
