#include "delaychain/kernels.hpp"

#include <cmath>
#include <vector>

#include "delaychain/errors.hpp"
#include "doctest.h"

using namespace delaychain;

namespace {

/// Independent density oracle: every factor accumulated as extended
/// precision logs, with the factorial as an explicit summed log.
long double density_oracle(int m, int n, long double T, long double tau) {
  if (tau == 0.0L) return m == 1 ? static_cast<long double>(n) / T : 0.0L;
  long double log_fact = 0.0L;
  for (int i = 2; i <= m - 1; ++i) log_fact += std::log(static_cast<long double>(i));
  const long double lg = m * std::log(n / T) + (m - 1) * std::log(tau) -
                         n * tau / T - log_fact;
  return std::exp(lg);
}

double quad_mass(const GammaKernel& k, double lo, double hi) {
  return composite_simpson([&](double tau) { return k.density(tau); }, lo, hi,
                           20000);
}

}  // namespace

TEST_CASE("density closed-form spot values") {
  CHECK(GammaKernel(1, 1, 2.0).density(0.0) == doctest::Approx(0.5));
  CHECK(GammaKernel(2, 2, 1.0).density(0.0) == 0.0);
  // large-order value against the extended-precision oracle
  const GammaKernel k(500, 500, 10.0);
  const double expected =
      static_cast<double>(density_oracle(500, 500, 10.0L, 10.0L));
  CHECK(k.density(10.0) == doctest::Approx(expected).epsilon(1e-10));
}

TEST_CASE("density stays finite at extreme orders") {
  const GammaKernel k(5000, 5000, 10.0);
  const double peak = k.density(k.mode());
  CHECK(std::isfinite(peak));
  CHECK(peak > 0.0);
  CHECK(k.density(10.0) ==
        doctest::Approx(static_cast<double>(density_oracle(5000, 5000, 10.0L, 10.0L)))
            .epsilon(1e-9));
}

TEST_CASE("density rejects negative lag") {
  CHECK_THROWS_AS(GammaKernel(1, 1, 1.0).density(-0.1), std::domain_error);
}

TEST_CASE("kernel invariants are enforced") {
  CHECK_THROWS_AS(GammaKernel(0, 5, 1.0), ConfigError);
  CHECK_THROWS_AS(GammaKernel(6, 5, 1.0), ConfigError);
  CHECK_THROWS_AS(GammaKernel(1, 1, 0.0), ConfigError);
}

TEST_CASE("moments") {
  SUBCASE("full-delay member") {
    for (int n : {1, 10, 100}) {
      const GammaKernel k(n, n, 10.0);
      CHECK(k.mean() == doctest::Approx(10.0));
      CHECK(k.variance() == doctest::Approx(100.0 / n));
    }
  }
  SUBCASE("exponential member") {
    const GammaKernel k(1, 1, 2.0);
    CHECK(k.mean() == doctest::Approx(2.0));
    CHECK(k.variance() == doctest::Approx(4.0));
  }
  SUBCASE("interior member") {
    const GammaKernel k(3, 4, 8.0);
    CHECK(k.mean() == doctest::Approx(6.0));
    CHECK(k.variance() == doctest::Approx(12.0));
    // quadrature cross-check of both moments
    const double m1 = composite_simpson(
        [&](double tau) { return tau * k.density(tau); }, 0.0, k.horizon(),
        20000);
    const double m2 = composite_simpson(
        [&](double tau) { return tau * tau * k.density(tau); }, 0.0,
        k.horizon(), 20000);
    CHECK(m1 == doctest::Approx(6.0).epsilon(1e-6));
    CHECK(m2 - m1 * m1 == doctest::Approx(12.0).epsilon(1e-6));
  }
  SUBCASE("relative width is 1/sqrt(index)") {
    const GammaKernel k(49, 100, 3.0);
    CHECK(k.stddev() / k.mean() == doctest::Approx(1.0 / 7.0));
  }
}

TEST_CASE("normalization by quadrature") {
  for (auto [m, n, T] : std::vector<std::tuple<int, int, double>>{
           {1, 1, 2.0}, {2, 5, 1.0}, {50, 50, 10.0}, {250, 500, 17.5},
           {1000, 1000, 10.0}}) {
    const GammaKernel k(m, n, T);
    CHECK(quad_mass(k, 0.0, k.horizon()) == doctest::Approx(1.0).epsilon(1e-8));
  }
}

TEST_CASE("quadrature moments match the closed form") {
  for (auto [m, n, T] : std::vector<std::tuple<int, int, double>>{
           {3, 4, 8.0}, {100, 100, 10.0}, {7, 20, 5.0}}) {
    const GammaKernel k(m, n, T);
    const double mean = composite_simpson(
        [&](double tau) { return tau * k.density(tau); }, 0.0, k.horizon(),
        40000);
    CHECK(mean == doctest::Approx(k.mean()).epsilon(1e-6));
  }
}

TEST_CASE("delta-limit: mass concentrates near the full delay") {
  const double T = 10.0;
  double prev = 1.0;
  for (int n : {100, 400, 1600}) {
    const GammaKernel k(n, n, T);
    const double w = 5.0 * T / std::sqrt(static_cast<double>(n));
    const double inside = k.tail_mass(T - w) - k.tail_mass(T + w);
    const double outside = 1.0 - inside;
    CHECK(outside < prev);
    prev = outside;
  }
  CHECK(prev < 1e-5);
}

TEST_CASE("density peaks at the gamma mode") {
  const GammaKernel k(40, 100, 10.0);
  const double mode = k.mode();
  CHECK(mode == doctest::Approx(39.0 * 10.0 / 100.0));
  const double at_mode = k.density(mode);
  for (double off : {-0.1, -0.01, 0.01, 0.1}) {
    CHECK(k.density(mode + off) < at_mode);
  }
}

TEST_CASE("convolution of a constant history is the constant") {
  const GammaKernel k(10, 10, 4.0);
  const double c = 0.75;
  const double r = convolve_history(
      k, [c](double) { return c; },
      std::numeric_limits<double>::infinity(), k.stddev() / 8.0);
  CHECK(r == doctest::Approx(c).epsilon(1e-8));
}

TEST_CASE("convolution of a ramp recovers the kernel mean") {
  // history x(t - tau) = t - tau sampled at t = 0: phi(lag) = -lag
  for (auto [m, n, T] : std::vector<std::tuple<int, int, double>>{
           {1, 4, 8.0}, {3, 4, 8.0}, {100, 100, 10.0}}) {
    const GammaKernel k(m, n, T);
    const double r = convolve_history(
        k, [](double lag) { return -lag; },
        std::numeric_limits<double>::infinity(), k.stddev() / 100.0);
    CHECK(r == doctest::Approx(-k.mean()).epsilon(1e-8));
  }
}

TEST_CASE("insufficient coverage raises a coverage error") {
  const GammaKernel k(100, 100, 10.0);
  CHECK_THROWS_AS(convolve_history(k, [](double) { return 1.0; }, 11.0, 0.01),
                  CoverageError);
  try {
    convolve_history(k, [](double) { return 1.0; }, 11.0, 0.01);
  } catch (const CoverageError& e) {
    CHECK(e.truncated_mass() == doctest::Approx(k.tail_mass(11.0)));
    CHECK(e.truncated_mass() > 1e-10);
    CHECK(e.coverage() == 11.0);
  }
}

TEST_CASE("tail mass beyond the quadrature horizon is negligible") {
  for (auto [m, n, T] : std::vector<std::tuple<int, int, double>>{
           {1, 1, 2.0}, {500, 500, 17.5}, {30, 60, 5.0}}) {
    const GammaKernel k(m, n, T);
    CHECK(k.tail_mass(k.horizon()) < 1e-10);
  }
}
