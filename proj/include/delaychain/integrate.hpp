#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "delaychain/systems.hpp"

namespace delaychain {

/// Uniformly sampled time series of selected state components, with the
/// transient already discarded. For chain runs the components are state
/// indices; DDE runs record the scalar variable as component 0.
struct Trajectory {
  double t0 = 0.0;
  double dt = 0.0;  // sample spacing (integration step times stride)
  std::vector<int> components;
  std::vector<double> data;  // sample-major
  double transient = 0.0;
  std::vector<double> final_state;
  double final_time = 0.0;

  // optional state snapshots (used to seed ensembles on an attractor)
  std::vector<double> snapshot_times;
  std::vector<std::vector<double>> state_snapshots;          // chain runs
  std::vector<InitialFunction::Segment> segment_snapshots;   // DDE runs

  std::size_t samples() const {
    return components.empty() ? 0 : data.size() / components.size();
  }
  double time(std::size_t i) const { return t0 + static_cast<double>(i) * dt; }
  double value(std::size_t i, std::size_t c) const {
    return data[i * components.size() + c];
  }
  std::vector<double> column(std::size_t c) const;
  /// Index of a recorded state component, or -1.
  int component_slot(int state_index) const;
};

struct IntegrationOptions {
  double transient = 0.0;
  int stride = 1;
  /// State indices to record; empty selects the integrator default
  /// (chain: primary variable and the tail of the first chain; DDE: x).
  std::vector<int> components;
  bool record_all = false;
  std::vector<double> snapshot_times;
};

/// Classical fixed-step fourth-order Runge-Kutta sweep over [t0, t_end].
/// Visit is called as visit(step_index, t, y) after every step (and once
/// for the initial state).
template <class Rhs, class Visit>
void rk4_sweep(Rhs&& rhs, std::vector<double>& y, double t0, double t_end,
               double dt, Visit&& visit) {
  const std::size_t n = y.size();
  std::vector<double> k1(n), k2(n), k3(n), k4(n), tmp(n);
  const long steps = static_cast<long>(std::llround((t_end - t0) / dt));
  double t = t0;
  visit(0L, t, y);
  for (long i = 0; i < steps; ++i) {
    rhs(t, std::span<const double>(y), std::span<double>(k1));
    for (std::size_t j = 0; j < n; ++j) tmp[j] = y[j] + 0.5 * dt * k1[j];
    rhs(t + 0.5 * dt, std::span<const double>(tmp), std::span<double>(k2));
    for (std::size_t j = 0; j < n; ++j) tmp[j] = y[j] + 0.5 * dt * k2[j];
    rhs(t + 0.5 * dt, std::span<const double>(tmp), std::span<double>(k3));
    for (std::size_t j = 0; j < n; ++j) tmp[j] = y[j] + dt * k3[j];
    rhs(t + dt, std::span<const double>(tmp), std::span<double>(k4));
    for (std::size_t j = 0; j < n; ++j)
      y[j] += dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
    t = t0 + static_cast<double>(i + 1) * dt;
    visit(i + 1, t, y);
  }
}

/// Integrates the chain ODE system from the given state. Throws
/// DivergenceError on the first non-finite retained sample.
Trajectory integrate_chain(const ChainSystem& chain,
                           std::vector<double> initial, double t_end,
                           double dt, const IntegrationOptions& opts = {});

/// Method-of-steps solver for a single-delay system: RK4 with delayed
/// values read from cubic-Hermite interpolated stored history. Serves as
/// the sharp-delay reference the chains converge to.
Trajectory integrate_dde(const DelaySystem& sys, const InitialFunction& phi,
                         double t_end, double dt,
                         const IntegrationOptions& opts = {});

struct LyapunovOptions {
  double transient = 0.0;       // flow settling time before tangents attach
  double warmup = 100.0;        // tangent alignment time, not averaged
  double span = 20000.0;        // averaging time
  double renorm_interval = 1.0;
  int exponents = 1;
  double noise_tol = 2e-3;      // stderr above this raises the warning flag
};

struct LyapunovResult {
  std::vector<double> exponents;  // leading exponents, descending
  double std_error = 0.0;         // block standard error of the leading one
  bool warning = false;
  double lambda_max() const { return exponents.front(); }
};

/// Benettin tangent-vector method on the chain flow, using the analytic
/// chain Jacobian. exponents > 1 adds repeated Gram-Schmidt
/// orthonormalization and returns the leading spectrum.
LyapunovResult lyapunov_max(const ChainSystem& chain,
                            std::vector<double> initial, double dt,
                            const LyapunovOptions& opts = {});

/// Leading Lyapunov exponent of the delay system itself: the variational
/// delay equation is integrated along the trajectory with the same method
/// of steps, renormalizing the tangent history segment.
LyapunovResult lyapunov_max_dde(const DelaySystem& sys,
                                const InitialFunction& phi, double dt,
                                const LyapunovOptions& opts = {});

}  // namespace delaychain
