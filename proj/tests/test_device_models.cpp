#include <catch2/catch.hpp>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "memrc/device.hpp"
#include "memrc/rng.hpp"
#include "memrc/signal.hpp"

using namespace memrc;

namespace {

double rms(const std::vector<double>& a, const std::vector<double>& b) {
  REQUIRE(a.size() == b.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(acc / static_cast<double>(a.size()));
}

const MemristorParams kUnit{.mu = 1.0, .lambda = 0.0, .R = 2.0, .r = 1.0, .x0 = 0.5};

}  // namespace

TEST_CASE("piecewise memristance clamps outside [0,1]") {
  REQUIRE(memristance_piecewise(0.0, kUnit) == 2.0);
  REQUIRE(memristance_piecewise(1.5, kUnit) == 1.0);
  REQUIRE(memristance_piecewise(0.5, kUnit) == 1.5);
  REQUIRE(memristance_piecewise(-3.0, kUnit) == 2.0);
  // bounded for any state
  for (double x = -5.0; x <= 5.0; x += 0.01) {
    const double h = memristance_piecewise(x, kUnit);
    REQUIRE(h >= kUnit.r);
    REQUIRE(h <= kUnit.R);
  }
}

TEST_CASE("wiener memristance: sigmoid midpoint, saturation and tanh identity") {
  REQUIRE(memristance_wiener(0.0, 0.5, kUnit) == Approx(1.5));
  REQUIRE(memristance_wiener(60.0, 0.5, kUnit) == Approx(kUnit.r).margin(1e-10));
  REQUIRE(memristance_wiener(-60.0, 0.5, kUnit) == Approx(kUnit.R).margin(1e-10));
  // logistic form equals the tanh form with C(x0) = log(x0/(1-x0))/2
  for (double x0 : {0.2, 0.5, 0.8}) {
    const double c = 0.5 * std::log(x0 / (1.0 - x0));
    for (double q = -20.0; q <= 20.0; q += 0.25) {
      const double tanh_form = kUnit.R - 0.5 * kUnit.delta_r() * (std::tanh(q / 2.0 + c) + 1.0);
      REQUIRE(std::abs(memristance_wiener(q, x0, kUnit) - tanh_form) < 1e-12);
    }
  }
  // never leaves [r, R], even for extreme drive integrals
  for (double q : {-1e9, -77.0, 0.0, 77.0, 1e9}) {
    const double h = memristance_wiener(q, 0.3, kUnit);
    REQUIRE(h >= kUnit.r);
    REQUIRE(h <= kUnit.R);
  }
}

TEST_CASE("nonvolatile closed form") {
  SECTION("state equals x0 at q = 0") {
    const double v = closed_form_nonvolatile_voltage(0.0, 3.0, kUnit);
    REQUIRE(v == Approx((kUnit.R - kUnit.delta_r() * kUnit.x0) * 3.0));
  }
  SECTION("constant positive drive saturates to r*I") {
    const Signal s = Signal::constant(1.0);
    const Trajectory traj = closed_form_nonvolatile(s, kUnit, {0.0, 50.0});
    REQUIRE(traj.voltages.back() == Approx(kUnit.r * 1.0).margin(1e-10));
  }
  SECTION("sinusoid drive matches the integrated windowed model") {
    // I(t) = sin t, mu = 1: the integrator with lambda = 0 is the oracle
    const Signal s = sinusoid_with_mean(0.0, 1.0, 1.0);
    const Trajectory rk = integrate_volatile_nonlinear(s, kUnit, 20.0, 1e-4, {.record_every = 10});
    const Trajectory cf = closed_form_nonvolatile(s, kUnit, rk.times);
    REQUIRE(rms(rk.voltages, cf.voltages) < 1e-6);
    REQUIRE(rms(rk.states, cf.states) < 1e-6);
  }
}

TEST_CASE("volatile nonlinear integrator") {
  SECTION("pure decay at zero input, and V stays exactly zero") {
    MemristorParams p = kUnit;
    p.lambda = 0.5;
    p.x0 = 0.6;
    const Trajectory traj =
        integrate_volatile_nonlinear(Signal::constant(0.0), p, 10.0, 1e-3, {.record_every = 100});
    for (std::size_t i = 0; i < traj.size(); ++i) {
      REQUIRE(traj.states[i] == Approx(0.6 * std::exp(-0.5 * traj.times[i])).epsilon(1e-8));
      REQUIRE(traj.voltages[i] == 0.0);
    }
  }
  SECTION("constant drive converges to (m - lambda)/m") {
    MemristorParams p = kUnit;
    p.lambda = 1.0;
    const Trajectory traj = integrate_volatile_nonlinear(Signal::constant(2.0), p, 30.0, 1e-3);
    REQUIRE(traj.states.back() == Approx(0.5).margin(1e-4));
  }
  SECTION("closed form is an oracle for the sinusoid-driven trajectory") {
    MemristorParams p = kUnit;
    p.lambda = 1.0;
    const Signal s = sinusoid_with_mean(2.0, 0.2, 5.0);
    const Trajectory rk = integrate_volatile_nonlinear(s, p, 12.0, 2e-4, {.record_every = 5});
    const Trajectory cf = closed_form_volatile_nonlinear(s, p, rk.times);
    REQUIRE(rms(rk.states, cf.states) < 1e-6);
  }
  SECTION("non-finite drive is reported") {
    std::vector<double> samples(32, 1.0);
    samples[20] = std::numeric_limits<double>::quiet_NaN();
    const Signal bad = Signal::from_samples(samples, 0.125);
    REQUIRE_THROWS_AS(integrate_volatile_nonlinear(bad, kUnit, 3.0, 0.125), NonFiniteStateError);
  }
  SECTION("all initial conditions converge to the same mean, slower from below") {
    MemristorParams p = kUnit;
    p.lambda = 1.0;
    const double m = 4.0;
    const double target = (m - p.lambda) / m;
    double previous_time = -1.0;
    for (double x0 : {0.9, 0.5, 0.1}) {
      p.x0 = x0;
      const Trajectory traj = integrate_volatile_nonlinear(Signal::constant(m), p, 10.0, 1e-4,
                                                           {.record_every = 10});
      REQUIRE(traj.states.back() == Approx(target).margin(1e-4));
      std::size_t hit = traj.size() - 1;
      for (std::size_t i = 0; i < traj.size(); ++i)
        if (std::abs(traj.states[i] - target) < 1e-4) {
          hit = i;
          break;
        }
      REQUIRE(traj.times[hit] > previous_time);  // smaller x0 takes longer
      previous_time = traj.times[hit];
    }
  }
  SECTION("strongly negative drive keeps the state at the positive floor") {
    MemristorParams p = kUnit;
    p.lambda = 0.5;
    const Trajectory traj = integrate_volatile_nonlinear(Signal::constant(-3.0), p, 30.0, 1e-3);
    for (double x : traj.states) {
      REQUIRE(x >= kStateFloor);
      REQUIRE(x <= 1.0);
    }
    REQUIRE(traj.states.back() == kStateFloor);
  }
}

TEST_CASE("volatile nonlinear closed form") {
  SECTION("lambda = 0 reduces to the nonvolatile solution") {
    const Signal s = sinusoid_with_mean(1.0, 0.3, 2.0);
    std::vector<double> grid;
    for (int k = 0; k <= 200; ++k) grid.push_back(0.05 * k);
    const Trajectory vol = closed_form_volatile_nonlinear(s, kUnit, grid);
    const Trajectory nonvol = closed_form_nonvolatile(s, kUnit, grid);
    REQUIRE(rms(vol.states, nonvol.states) < 1e-10);
  }
  SECTION("zero input has an explicit decay solution") {
    MemristorParams p = kUnit;
    p.lambda = 0.7;
    p.x0 = 0.4;
    std::vector<double> grid;
    for (int k = 0; k <= 50; ++k) grid.push_back(0.1 * k);
    const Trajectory traj = closed_form_volatile_nonlinear(Signal::constant(0.0), p, grid, 200);
    const double ratio = (1.0 - p.x0) / p.x0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double e = std::exp(p.lambda * grid[i]);
      const double expected = 1.0 / (1.0 + ratio * e + (e - 1.0));
      // agreement is limited by the O(h^2) trapezoid quadrature
      REQUIRE(traj.states[i] == Approx(expected).epsilon(1e-7));
    }
  }
  SECTION("sampled waveforms fall back to quadrature of the sampler") {
    MemristorParams p = kUnit;
    p.lambda = 1.0;
    const Signal analytic = sinusoid_with_mean(2.0, 0.2, 5.0);
    std::vector<double> samples;
    const double sample_dt = 1e-4;
    for (int k = 0; k <= 60000; ++k) samples.push_back(analytic(sample_dt * k));
    const Signal sampled = Signal::from_samples(samples, sample_dt, 2.0);
    std::vector<double> grid;
    for (int k = 0; k <= 300; ++k) grid.push_back(0.02 * k);
    const Trajectory a = closed_form_volatile_nonlinear(analytic, p, grid, 40);
    const Trajectory b = closed_form_volatile_nonlinear(sampled, p, grid, 40);
    REQUIRE(rms(a.states, b.states) < 1e-6);
  }
  SECTION("decay-dominated long horizons overflow the scaled quadrature") {
    MemristorParams p = kUnit;
    p.lambda = 2.0;
    REQUIRE_THROWS_AS(closed_form_volatile_nonlinear(Signal::constant(0.0), p, {0.0, 400.0}),
                      QuadratureUnderflowError);
  }
}

TEST_CASE("volatile wiener integrator") {
  WienerParams wp;
  wp.base = kUnit;
  SECTION("homogeneous solution at zero input") {
    wp.lambda_l = 1.0;
    wp.z_s = -2.0;
    wp.z0 = 1.0;
    const Trajectory traj =
        integrate_wiener_volatile(Signal::constant(0.0), wp, 8.0, 1e-3, {.record_every = 50});
    for (std::size_t i = 0; i < traj.size(); ++i)
      REQUIRE(traj.states[i] == Approx(-2.0 + 3.0 * std::exp(-traj.times[i])).margin(1e-9));
  }
  SECTION("constant drive settles at m/lambda_l + z_s") {
    wp.lambda_l = 1.0;
    wp.z_s = -2.0;
    wp.z0 = 0.0;
    const Trajectory traj = integrate_wiener_volatile(Signal::constant(1.5), wp, 40.0, 1e-3);
    REQUIRE(traj.states.back() == Approx(1.5 / 1.0 - 2.0).margin(1e-6));
  }
  SECTION("sinusoid oscillation amplitude is alpha/sqrt(omega^2+lambda_l^2)") {
    wp.lambda_l = 1.0;
    wp.z_s = -2.0;
    wp.z0 = 0.0;
    const double alpha = 0.5, omega = 5.0;
    const Trajectory traj = integrate_wiener_volatile(sinusoid_with_mean(1.0, alpha, omega), wp,
                                                      30.0, 1e-4, {.record_from = 20.0});
    double lo = 1e300, hi = -1e300;
    for (double z : traj.states) {
      lo = std::min(lo, z);
      hi = std::max(hi, z);
    }
    const double expected = alpha / std::hypot(omega, wp.lambda_l);
    REQUIRE((hi - lo) / 2.0 == Approx(expected).epsilon(1e-3));
  }
  SECTION("unbounded state raises the overflow warning") {
    wp.lambda_l = 0.0;
    wp.z_s = 0.0;
    wp.z0 = 0.0;
    bool warned = false;
    integrate_wiener_volatile(Signal::constant(1.0), wp, 2e6, 1e3, {}, &warned);
    REQUIRE(warned);
  }
  SECTION("voltage respects the zero-crossing bound |V| <= R |I|") {
    wp.lambda_l = 1.0;
    wp.z_s = -2.0;
    const Signal s = sinusoid_with_mean(0.5, 2.0, 3.0);  // drive crosses zero
    const Trajectory traj = integrate_wiener_volatile(s, wp, 20.0, 1e-3);
    for (std::size_t i = 0; i < traj.size(); ++i) {
      const double current = s(traj.times[i]) / wp.base.mu;
      REQUIRE(std::abs(traj.voltages[i]) <= wp.base.R * std::abs(current) + 1e-15);
      REQUIRE(std::abs(traj.voltages[i]) >= wp.base.r * std::abs(current) - 1e-15);
    }
  }
}

TEST_CASE("voltage trace recomputation") {
  MemristorParams p = kUnit;
  p.lambda = 1.0;
  SECTION("zero input gives zero voltage") {
    Trajectory traj;
    traj.times = {0.0, 1.0, 2.0};
    traj.states = {0.5, 0.4, 0.3};
    const Trajectory out = voltage_trace(traj, Signal::constant(0.0), p);
    for (double v : out.voltages) REQUIRE(v == 0.0);
  }
  SECTION("single sample midpoint") {
    Trajectory traj;
    traj.times = {1.0};
    traj.states = {0.5};
    const Trajectory out = voltage_trace(traj, Signal::constant(2.0), p);
    REQUIRE(out.voltages[0] == Approx((p.R - p.delta_r() / 2.0) * 2.0));
  }
  SECTION("matches integrator-produced voltages exactly") {
    const Signal s = sinusoid_with_mean(2.0, 0.2, 5.0);
    const Trajectory traj = integrate_volatile_nonlinear(s, p, 4.0, 1e-3, {.record_every = 7});
    const Trajectory redo = voltage_trace(traj, s, p);
    for (std::size_t i = 0; i < traj.size(); ++i) REQUIRE(redo.voltages[i] == traj.voltages[i]);
  }
  SECTION("length mismatch is an error") {
    Trajectory traj;
    traj.times = {0.0, 1.0};
    traj.states = {0.5};
    REQUIRE_THROWS_AS(voltage_trace(traj, Signal::constant(0.0), p), LengthMismatchError);
  }
}

TEST_CASE("zero crossing and boundedness along nonlinear trajectories") {
  MemristorParams p = kUnit;
  p.lambda = 1.0;
  const Signal s = sinusoid_with_mean(0.3, 1.0, 2.0);  // drive changes sign
  const Trajectory traj = integrate_volatile_nonlinear(s, p, 25.0, 1e-3);
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const double current = s(traj.times[i]) / p.mu;
    REQUIRE(std::abs(traj.voltages[i]) <= p.R * std::abs(current) + 1e-15);
    REQUIRE(std::abs(traj.voltages[i]) >= p.r * std::abs(current) - 1e-15);
    REQUIRE(traj.states[i] >= 0.0);
    REQUIRE(traj.states[i] <= 1.0);
  }
}

TEST_CASE("integration is deterministic") {
  MemristorParams p = kUnit;
  p.lambda = 1.0;
  const Signal s = random_fourier_signal(1.0, 11, 2).with_mean(2.0);
  const Trajectory a = integrate_volatile_nonlinear(s, p, 6.0, 1e-3);
  const Trajectory b = integrate_volatile_nonlinear(s, p, 6.0, 1e-3);
  REQUIRE(a.states == b.states);
  REQUIRE(a.voltages == b.voltages);
}

TEST_CASE("trajectory csv export format") {
  Trajectory traj;
  traj.times = {0.0, 0.1};
  traj.states = {0.5, 0.25};
  traj.voltages = {1.0, 0.75};
  const std::string path = (std::filesystem::temp_directory_path() / "memrc_traj_test.csv").string();
  write_trajectory_csv(traj, path);
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  REQUIRE(line == "t,x,v");
  std::getline(in, line);
  REQUIRE(line == "0,0.5,1");
  std::getline(in, line);
  // full 17-significant-digit doubles, '.' separator
  REQUIRE(line == "0.10000000000000001,0.25,0.75");
  std::filesystem::remove(path);
}
