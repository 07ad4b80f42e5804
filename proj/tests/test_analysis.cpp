#include "delaychain/analysis.hpp"

#include <cmath>

#include "delaychain/errors.hpp"
#include "delaychain/rng.hpp"
#include "doctest.h"

using namespace delaychain;

namespace {

Trajectory synthetic(const std::vector<double>& x, double dt = 0.05) {
  Trajectory t;
  t.t0 = 0.0;
  t.dt = dt;
  t.components = {0};
  t.data = x;
  return t;
}

FamilyOptions fast_options() {
  FamilyOptions o;
  o.transient_periods = 40.0;
  o.measure_periods = 45.0;
  o.lyapunov.span = 2000.0;
  o.lyapunov.warmup = 100.0;
  return o;
}

}  // namespace

TEST_CASE("multiplicity of synthetic signals") {
  SUBCASE("plain sine counts one") {
    std::vector<double> x;
    for (int i = 0; i < 4000; ++i) x.push_back(std::sin(0.05 * i));
    const auto m = period_multiplicity(synthetic(x));
    CHECK(m.periodic());
    CHECK(m.clusters == 1);
  }
  SUBCASE("alternating envelope counts two") {
    std::vector<double> x;
    for (int i = 0; i < 8000; ++i) {
      const double t = 0.05 * i;
      x.push_back(std::sin(t) * (1.0 + 0.25 * std::cos(t / 2.0)));
    }
    const auto m = period_multiplicity(synthetic(x));
    CHECK(m.periodic());
    CHECK(m.clusters == 2);
  }
  SUBCASE("noisy heights are aperiodic") {
    Rng rng(5);
    std::vector<double> x;
    double level = 1.0;
    for (int i = 0; i < 20000; ++i) {
      if (i % 100 == 0) level = rng.uniform(0.5, 1.5);
      x.push_back(level * std::sin(0.05 * i));
    }
    const auto m = period_multiplicity(synthetic(x));
    CHECK(m.aperiodic);
  }
  SUBCASE("too few maxima is an error") {
    std::vector<double> x;
    for (int i = 0; i < 200; ++i) x.push_back(std::sin(0.05 * i));
    CHECK_THROWS_AS(period_multiplicity(synthetic(x)), InsufficientDataError);
  }
  SUBCASE("near-tolerance splitting is resolved by the refinement") {
    // two families of maxima 5e-3 apart: clearly above the 1e-3 gap
    std::vector<double> x;
    for (int i = 0; i < 8000; ++i) {
      const double t = 0.05 * i;
      x.push_back(std::sin(t) * (1.0 + 0.005 * std::cos(t / 2.0)));
    }
    CHECK(period_multiplicity(synthetic(x)).clusters == 2);
  }
}

TEST_CASE("stroboscopic pairing") {
  SUBCASE("chain mode pairs the primary with the lagged tail") {
    Trajectory t;
    t.dt = 0.5;
    t.components = {0, 9};
    for (int i = 0; i < 10; ++i) {
      t.data.push_back(static_cast<double>(i));        // x0
      t.data.push_back(100.0 + static_cast<double>(i));  // tail
    }
    const auto pts = stroboscopic(t, 2.0);  // shift of 4 samples
    REQUIRE(pts.size() == 6);
    CHECK(pts[0].first == 4.0);
    CHECK(pts[0].second == 100.0);
    CHECK(pts[5].first == 9.0);
    CHECK(pts[5].second == 105.0);
  }
  SUBCASE("sharp-delay mode uses twice the delay") {
    Trajectory t;
    t.dt = 1.0;
    t.components = {0};
    for (int i = 0; i < 10; ++i) t.data.push_back(static_cast<double>(i));
    const auto pts = stroboscopic(t, 2.0);  // shift of 4 samples
    REQUIRE(pts.size() == 6);
    CHECK(pts[0].first == 4.0);
    CHECK(pts[0].second == 0.0);
  }
  SUBCASE("insufficient retained history") {
    Trajectory t;
    t.dt = 1.0;
    t.components = {0};
    t.data = {1.0, 2.0, 3.0};
    CHECK_THROWS_AS(stroboscopic(t, 10.0), InsufficientDataError);
  }
}

TEST_CASE("fixpoint short-circuit of the cross-correlation") {
  auto fam = SystemFamily::mackey_glass({}, 12, fast_options());
  const auto cc = cross_correlation(fam, 3.0, 1e-6, 4, 50.0, 99);
  CHECK(cc.fixpoint);
  for (double c : cc.c12) CHECK(c == 1.0);
  for (double d : cc.d12) CHECK(d == 0.0);
}

TEST_CASE("cross-correlation on a limit cycle") {
  auto fam = SystemFamily::mackey_glass({}, 30, fast_options());
  const double T = 14.0;
  const auto cc = cross_correlation(fam, T, 1e-6, 6, 300.0, 2024);
  REQUIRE(!cc.fixpoint);
  CHECK(cc.s2 > 1e-3);
  // starts fully correlated
  CHECK(cc.c12.front() == doctest::Approx(1.0).epsilon(1e-6));
  // stays within the admissible band
  for (double c : cc.c12) {
    CHECK(c <= 1.0 + 1e-12);
    CHECK(c >= -1.0 - 1e-12);
  }
  // on a limit cycle close pairs stay close
  CHECK(cc.c12.back() > 0.99);
}

TEST_CASE("asymptotic distance scales linearly on a limit cycle") {
  auto fam = SystemFamily::mackey_glass({}, 30, fast_options());
  const double T = 14.0;
  std::vector<double> deltas{1e-6, 1e-5, 1e-4};
  std::vector<double> dist;
  for (double d : deltas)
    dist.push_back(asymptotic_distance(fam, T, d, 6, 1200.0, 7));
  const double s1 = std::log(dist[1] / dist[0]) / std::log(10.0);
  const double s2 = std::log(dist[2] / dist[1]) / std::log(10.0);
  CHECK(s1 == doctest::Approx(1.0).epsilon(0.15));
  CHECK(s2 == doctest::Approx(1.0).epsilon(0.15));
}

TEST_CASE("classification of the easy regimes") {
  SUBCASE("below the Hopf point: fixpoint") {
    auto fam = SystemFamily::mackey_glass({}, 20, fast_options());
    const auto v = classify(fam, 3.0, 1e-6, 4, 11);
    CHECK(v.cls == AttractorClass::Fixpoint);
    CHECK(v.evidence.lambda_max < 0.0);
  }
  SUBCASE("between Hopf and the doubling cascade: limit cycle") {
    auto fam = SystemFamily::mackey_glass({}, 30, fast_options());
    const auto v = classify(fam, 14.0, 1e-6, 4, 11);
    CHECK(v.cls == AttractorClass::LimitCycle);
    CHECK(std::abs(v.evidence.lambda_max) <= 2e-3);
    CHECK(std::abs(v.evidence.distance_delta_slope - 1.0) <= 0.15);
  }
}

TEST_CASE("bifurcation refinement demands a splitting bracket") {
  auto fam = SystemFamily::mackey_glass({}, 30, fast_options());
  CHECK_THROWS_AS(
      find_bifurcation(fam, BifurcationKind::PD1, 6.0, 7.0, {}), BracketError);
}

TEST_CASE("cross-correlation ensembles are reproducible and worker-invariant") {
  auto opts = fast_options();
  auto fam = SystemFamily::mackey_glass({}, 25, opts);
  const auto a = cross_correlation(fam, 14.0, 1e-6, 6, 200.0, 31);
  opts.workers = 4;
  auto fam_par = SystemFamily::mackey_glass({}, 25, opts);
  const auto b = cross_correlation(fam_par, 14.0, 1e-6, 6, 200.0, 31);
  REQUIRE(a.d12.size() == b.d12.size());
  for (std::size_t i = 0; i < a.d12.size(); ++i) CHECK(a.d12[i] == b.d12[i]);
}
