#pragma once

#include <functional>

namespace delaychain {

/// One member of the gamma kernel family used to represent distributed
/// delays: a gamma density with integer shape `index`, rate `order/delay`.
/// The family member with index == order peaks at the full delay and
/// narrows as the order grows (relative width 1/sqrt(index)).
class GammaKernel {
public:
  /// index in [1, order], delay > 0.
  GammaKernel(int index, int order, double delay);

  int index() const noexcept { return index_; }
  int order() const noexcept { return order_; }
  double delay() const noexcept { return delay_; }

  /// Density at lag tau >= 0. Evaluated in log space so that orders in the
  /// thousands neither overflow nor underflow prematurely.
  double density(double tau) const;

  double mean() const noexcept;      // index * delay / order
  double variance() const noexcept;  // index * delay^2 / order^2
  double stddev() const noexcept;
  double mode() const noexcept;      // (index - 1) * delay / order

  /// Kernel mass beyond lag tau (regularized upper incomplete gamma).
  double tail_mass(double tau) const;

  /// Quadrature truncation horizon: mean + 12 sigma, extended for small
  /// shapes until the truncated mass is below 1e-12.
  double horizon() const;

private:
  int index_;
  int order_;
  double delay_;
  double log_norm_;  // index*log(order/delay) - lgamma(index)
};

/// Sampled (or analytic) past of a trajectory: history(lag) = x(t - lag)
/// for lag >= 0.
using HistoryFn = std::function<double(double lag)>;

/// Weighted integral of the past under the kernel, by composite Simpson on
/// a uniform lag grid of the given step. `coverage` is how far into the
/// past the history is valid; kernel mass beyond it must be below 1e-10 or
/// a CoverageError reporting the truncated mass is thrown. This is the
/// ground-truth oracle the chain variables are validated against.
double convolve_history(const GammaKernel& kernel, const HistoryFn& history,
                        double coverage, double quadrature_step);

/// Composite Simpson over [a, b] with at least `min_intervals` uniform
/// intervals (rounded up to an even count).
double composite_simpson(const std::function<double(double)>& f, double a,
                         double b, int min_intervals);

}  // namespace delaychain
