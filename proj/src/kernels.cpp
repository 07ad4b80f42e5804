#include "delaychain/kernels.hpp"

#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <stdexcept>

#include "delaychain/errors.hpp"

namespace delaychain {

GammaKernel::GammaKernel(int index, int order, double delay)
    : index_(index), order_(order), delay_(delay) {
  if (order < 1) throw ConfigError("kernel order must be >= 1");
  if (index < 1 || index > order)
    throw ConfigError("kernel index must lie in [1, order]");
  if (!(delay > 0.0)) throw ConfigError("kernel delay must be positive");
  log_norm_ = index_ * std::log(static_cast<double>(order_) / delay_) -
              std::lgamma(static_cast<double>(index_));
}

double GammaKernel::density(double tau) const {
  if (tau < 0.0) throw std::domain_error("kernel density: negative lag");
  const double rate = static_cast<double>(order_) / delay_;
  if (tau == 0.0) return index_ == 1 ? rate : 0.0;
  const double log_density = log_norm_ + (index_ - 1) * std::log(tau) - rate * tau;
  return std::exp(log_density);
}

double GammaKernel::mean() const noexcept {
  return static_cast<double>(index_) * delay_ / order_;
}

double GammaKernel::variance() const noexcept {
  return static_cast<double>(index_) * delay_ * delay_ /
         (static_cast<double>(order_) * order_);
}

double GammaKernel::stddev() const noexcept { return std::sqrt(variance()); }

double GammaKernel::mode() const noexcept {
  return static_cast<double>(index_ - 1) * delay_ / order_;
}

double GammaKernel::tail_mass(double tau) const {
  if (tau <= 0.0) return 1.0;
  const double rate = static_cast<double>(order_) / delay_;
  return boost::math::gamma_q(static_cast<double>(index_), rate * tau);
}

double GammaKernel::horizon() const {
  // mean + 12 sigma suffices for large shapes; small shapes have fat
  // exponential tails that need a longer reach to push the truncated mass
  // below the coverage tolerance
  double h = mean() + 12.0 * stddev();
  while (tail_mass(h) > 1e-12) h *= 1.25;
  return h;
}

double composite_simpson(const std::function<double(double)>& f, double a,
                         double b, int min_intervals) {
  if (!(b > a)) throw std::invalid_argument("simpson: empty interval");
  int n = std::max(2, min_intervals);
  if (n % 2 != 0) ++n;
  const double h = (b - a) / n;
  double odd = 0.0, even = 0.0;
  for (int i = 1; i < n; i += 2) odd += f(a + i * h);
  for (int i = 2; i < n; i += 2) even += f(a + i * h);
  return h / 3.0 * (f(a) + f(b) + 4.0 * odd + 2.0 * even);
}

double convolve_history(const GammaKernel& kernel, const HistoryFn& history,
                        double coverage, double quadrature_step) {
  constexpr double kCoverageTol = 1e-10;
  const double truncated = kernel.tail_mass(coverage);
  if (truncated >= kCoverageTol) throw CoverageError(truncated, coverage);
  if (!(quadrature_step > 0.0))
    throw std::invalid_argument("convolve_history: step must be positive");
  // keep the caller's grid spacing exactly, so sampled histories are
  // evaluated on their own nodes; the horizon is rounded up to the grid
  const double upper = std::min(kernel.horizon(), coverage);
  int n = static_cast<int>(std::ceil(upper / quadrature_step - 1e-12));
  if (n % 2 != 0) ++n;
  n = std::max(n, 2);
  const double aligned_upper = n * quadrature_step;
  const double effective_upper = std::min(aligned_upper, coverage);
  return composite_simpson(
      [&](double tau) { return history(tau) * kernel.density(tau); }, 0.0,
      effective_upper, n);
}

}  // namespace delaychain
