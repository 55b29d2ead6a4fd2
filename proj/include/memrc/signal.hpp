#ifndef MEMRC_SIGNAL_HPP
#define MEMRC_SIGNAL_HPP

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "memrc/csv.hpp"
#include "memrc/errors.hpp"
#include "memrc/rng.hpp"

namespace memrc {

// Signals are driving currents expressed in drive units: where the device
// equations read mu*I(t), a Signal evaluates directly to that product.

enum class WaveKind { kSine, kCosine };

struct SignalComponent {
  double amplitude = 0.0;
  double omega = 0.0;
  double phase = 0.0;
  WaveKind kind = WaveKind::kSine;

  double value(double t) const {
    const double arg = omega * t + phase;
    return amplitude * (kind == WaveKind::kSine ? std::sin(arg) : std::cos(arg));
  }

  // Integral of value() from 0 to t.
  double primitive(double t) const {
    const double arg = omega * t + phase;
    if (kind == WaveKind::kSine)
      return amplitude / omega * (std::cos(phase) - std::cos(arg));
    return amplitude / omega * (std::sin(arg) - std::sin(phase));
  }
};

// Immutable value type: a mean drive plus zero-mean components, or a sampled
// waveform. Component-built signals carry the analytic primitive of their
// zero-mean part, which the closed-form device solutions prefer.
class Signal {
 public:
  Signal() = default;

  static Signal constant(double mean, double duration = kUnbounded) {
    Signal s;
    s.mean_ = mean;
    s.duration_ = duration;
    return s;
  }

  static Signal from_components(double mean, std::vector<SignalComponent> comps,
                                double duration = kUnbounded, double offset = 0.0) {
    Signal s;
    s.mean_ = mean;
    s.components_ = std::move(comps);
    s.duration_ = duration;
    s.offset_ = offset;
    return s;
  }

  // Sampled waveform on a uniform grid starting at t=0; linear interpolation
  // between samples, no analytic primitive.
  static Signal from_samples(std::vector<double> values, double dt, double mean = 0.0) {
    if (values.size() < 2 || dt <= 0.0) throw Error("sampled signal needs >=2 values and dt>0");
    Signal s;
    s.mean_ = mean;
    s.samples_ = std::move(values);
    s.sample_dt_ = dt;
    s.duration_ = dt * static_cast<double>(s.samples_.size() - 1);
    return s;
  }

  double mean() const { return mean_; }
  double offset() const { return offset_; }
  double duration() const { return duration_; }
  bool is_analytic() const { return samples_.empty(); }
  bool has_primitive() const { return is_analytic(); }
  const std::vector<SignalComponent>& components() const { return components_; }

  // Same zero-mean waveform on top of a different bias drive.
  Signal with_mean(double new_mean) const {
    Signal s = *this;
    s.mean_ = new_mean;
    return s;
  }

  // Full drive value mu*I(t).
  double operator()(double t) const { return mean_ + zero_mean(t); }

  // gamma(t): the zero-mean waveform. Computed directly from the components
  // so that bank drives m_i + gamma(t) and the signal's own samples agree
  // bit-for-bit when m_i equals the signal mean.
  double zero_mean(double t) const {
    if (!samples_.empty()) return interpolate(t) - mean_;
    double v = offset_;
    for (const auto& c : components_) v += c.value(t);
    return v;
  }

  // Integral of the zero-mean part from 0 to t (phi in the decomposition
  // mu*q(t) = m t + phi(t)). Only available for analytic signals.
  double primitive(double t) const {
    if (!has_primitive()) throw Error("sampled signal has no analytic primitive");
    double v = offset_ * t;
    for (const auto& c : components_) v += c.primitive(t);
    return v;
  }

  static constexpr double kUnbounded = std::numeric_limits<double>::infinity();

 private:
  double interpolate(double t) const {
    const double pos = t / sample_dt_;
    if (pos <= 0.0) return samples_.front();
    const auto last = static_cast<double>(samples_.size() - 1);
    if (pos >= last) return samples_.back();
    const auto i = static_cast<std::size_t>(pos);
    const double frac = pos - static_cast<double>(i);
    return samples_[i] + frac * (samples_[i + 1] - samples_[i]);
  }

  double mean_ = 0.0;
  double offset_ = 0.0;  // constant part of the zero-mean waveform (e.g. -C)
  double duration_ = kUnbounded;
  std::vector<SignalComponent> components_;
  std::vector<double> samples_;
  double sample_dt_ = 0.0;
};

// mu*I(t) = m + alpha*sin(omega t); primitive (alpha/omega)(1 - cos(omega t)).
inline Signal sinusoid_with_mean(double m, double alpha, double omega,
                                 double duration = Signal::kUnbounded) {
  if (omega <= 0.0) throw Error("sinusoid_with_mean: omega must be > 0");
  return Signal::from_components(m, {{alpha, omega, 0.0, WaveKind::kSine}}, duration);
}

// Period-2 random Fourier series of the delay task:
//   gamma(t) = alpha * sum_n xi_n/(pi n) sin(pi n t) - C
// with xi_n iid standard normal. C removes the mean over the discrete sample
// grid of [0,2) with grid_samples points, which is what the design matrix
// later sees.
inline Signal random_fourier_signal_from_xi(double alpha, const std::vector<double>& xi,
                                            int grid_samples = 150) {
  std::vector<SignalComponent> comps;
  comps.reserve(xi.size());
  for (std::size_t n = 1; n <= xi.size(); ++n) {
    const double w = M_PI * static_cast<double>(n);
    comps.push_back({alpha * xi[n - 1] / w, w, 0.0, WaveKind::kSine});
  }
  double sum = 0.0;
  const double dt = 2.0 / grid_samples;
  for (int k = 0; k < grid_samples; ++k) {
    const double t = dt * k;
    for (const auto& c : comps) sum += c.value(t);
  }
  const double c_offset = sum / grid_samples;
  return Signal::from_components(0.0, std::move(comps), 2.0, -c_offset);
}

inline Signal random_fourier_signal(double alpha, std::uint64_t seed, std::uint64_t stream = 0,
                                    int n_terms = 12, int grid_samples = 150) {
  if (n_terms < 1) throw Error("random_fourier_signal: n_terms must be >= 1");
  CounterRng rng(seed, stream);
  std::vector<double> xi(static_cast<std::size_t>(n_terms));
  for (auto& x : xi) x = rng.gaussian();
  return random_fourier_signal_from_xi(alpha, xi, grid_samples);
}

// Frequency encoding of a Z/3 symbol pair:
//   u(t) = (s1+1)/3 sin(w1 t) + (s2+1)/3 cos(w2 t)
// with incommensurate w1 = pi^2/sqrt(2) and w2 = 3 pi sqrt(3).
inline constexpr double kZ3Omega1 = 6.9788641996388785;  // pi^2 / sqrt(2)
inline constexpr double kZ3Omega2 = 16.32419427810796;   // 3 pi sqrt(3)

inline Signal z3_encoding(int s1, int s2, double duration = Signal::kUnbounded) {
  if (s1 < 0 || s1 > 2 || s2 < 0 || s2 > 2)
    throw SymbolOutOfRangeError("z3_encoding: symbols must be in {0,1,2}");
  std::vector<SignalComponent> comps = {
      {(s1 + 1) / 3.0, kZ3Omega1, 0.0, WaveKind::kSine},
      {(s2 + 1) / 3.0, kZ3Omega2, 0.0, WaveKind::kCosine},
  };
  return Signal::from_components(0.0, std::move(comps), duration);
}

// CSV with header `t,u`, uniform grid from 0 to duration.
inline void write_signal_csv(const Signal& sig, double dt, double duration,
                             const std::string& path) {
  if (dt <= 0.0 || duration < 0.0) throw Error("write_signal_csv: need dt > 0, duration >= 0");
  CsvWriter csv(path);
  csv.raw_line("t,u");
  const long n = std::lround(duration / dt);
  for (long k = 0; k <= n; ++k) {
    const double t = dt * static_cast<double>(k);
    csv.row(t, sig(t));
  }
  csv.close();
}

}  // namespace memrc

#endif  // MEMRC_SIGNAL_HPP
