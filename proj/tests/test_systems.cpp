#include "delaychain/systems.hpp"

#include <cmath>

#include "delaychain/errors.hpp"
#include "delaychain/integrate.hpp"
#include "delaychain/rng.hpp"
#include "doctest.h"

using namespace delaychain;

TEST_CASE("mackey-glass fixpoints") {
  SUBCASE("defaults give 0 and 1") {
    const auto fp = mackey_glass_fixpoints({});
    CHECK(fp.trivial == 0.0);
    REQUIRE(fp.nontrivial.has_value());
    CHECK(*fp.nontrivial == doctest::Approx(1.0));
  }
  SUBCASE("alpha = 2 beta, gamma = 1") {
    const auto fp = mackey_glass_fixpoints({0.2, 0.1, 1.0});
    CHECK(*fp.nontrivial == doctest::Approx(1.0));
  }
  SUBCASE("general values satisfy the stationarity residual") {
    const MackeyGlassParams p{0.3, 0.1, 10.0};
    const auto fp = mackey_glass_fixpoints(p);
    REQUIRE(fp.nontrivial.has_value());
    CHECK(*fp.nontrivial == doctest::Approx(std::pow(2.0, 0.1)));
    const auto sys = make_mackey_glass(p, {{10.0, 1.0}});
    const double x = *fp.nontrivial;
    const double h[1] = {x};
    CHECK(std::abs(sys.rhs(0.0, x, std::span<const double>(h, 1))) < 1e-12);
  }
  SUBCASE("absent when alpha <= beta") {
    CHECK_FALSE(mackey_glass_fixpoints({0.1, 0.2, 10.0}).nontrivial.has_value());
  }
}

TEST_CASE("linearization of mackey-glass reproduces (0.4, 0.1)") {
  const auto sys = make_mackey_glass({}, {{10.0, 1.0}});
  const auto lp = linearize_at_fixpoint(sys, 1.0);
  CHECK(lp.a == doctest::Approx(0.4).epsilon(1e-7));
  CHECK(lp.b == doctest::Approx(0.1).epsilon(1e-7));
}

TEST_CASE("linearization is the identity on linear systems") {
  const auto sys = make_linear({0.37, 0.21, 0.0}, {{5.0, 1.0}});
  const auto lp = linearize_at_fixpoint(sys, 0.0);
  CHECK(lp.a == doctest::Approx(0.37).epsilon(1e-9));
  CHECK(lp.b == doctest::Approx(0.21).epsilon(1e-9));
}

TEST_CASE("linearization against the symbolic derivative") {
  // dF/dh at the fixpoint: alpha (1 + (1-gamma) h^gamma) / (1 + h^gamma)^2
  // with h^gamma = alpha/beta - 1
  const MackeyGlassParams p{0.2, 0.1, 5.0};
  const double r = p.alpha / p.beta;
  // a = -dF/dh
  const double analytic_a = -p.alpha * (1.0 + (1.0 - p.gamma) * (r - 1.0)) / (r * r);
  const auto sys = make_mackey_glass(p, {{10.0, 1.0}});
  const auto fp = mackey_glass_fixpoints(p);
  const auto lp = linearize_at_fixpoint(sys, *fp.nontrivial);
  CHECK(lp.a == doctest::Approx(analytic_a).epsilon(1e-6));
  CHECK(lp.b == doctest::Approx(p.beta).epsilon(1e-6));
}

TEST_CASE("chain layout and right-hand side") {
  const auto sys = make_linear({0.4, 0.1, 0.0}, {{2.0, 1.0}});
  const auto chain = build_chain(sys, 1);
  CHECK(chain.dimension() == 2);
  CHECK(chain.tail_index(0) == 1);
  // dx0 = -0.1 x0 - 0.4 x1 ; dx1 = (x0 - x1)/T
  std::vector<double> y{1.0, 0.5}, dy(2);
  chain.eval(0.0, y, dy);
  CHECK(dy[0] == doctest::Approx(-0.1 * 1.0 - 0.4 * 0.5));
  CHECK(dy[1] == doctest::Approx((1.0 - 0.5) / 2.0));
}

TEST_CASE("chain step hint caps at half the relaxation time") {
  const auto sys = make_mackey_glass({}, {{17.5, 1.0}});
  CHECK(build_chain(sys, 100).step_hint() == doctest::Approx(0.01));
  CHECK(build_chain(sys, 5000).step_hint() == doctest::Approx(17.5 / 5000 / 2));
}

TEST_CASE("invalid chain orders are rejected") {
  const auto sys = make_mackey_glass({}, {{10.0, 1.0}});
  CHECK_THROWS_AS(build_chain(sys, 0), ConfigError);
  CHECK_THROWS_AS(build_multi_chain(sys, {}), ConfigError);
}

TEST_CASE("weight validation") {
  CHECK_THROWS_AS(make_linear({0.4, 0.1, 0.0}, {{1.0, 0.6}, {2.0, 0.6}}),
                  ConfigError);
  CHECK_NOTHROW(make_linear({0.4, 0.1, 0.0}, {{1.0, 0.5}, {2.0, 0.5}}));
}

TEST_CASE("constant history fills every component") {
  const auto sys = make_mackey_glass({}, {{10.0, 1.0}});
  const auto chain = build_chain(sys, 64);
  const auto y = init_chain_state(chain, InitialFunction::constant(0.9));
  for (double v : y) CHECK(v == 0.9);
}

TEST_CASE("ramp history initializes to minus the kernel means") {
  const auto sys = make_mackey_glass({}, {{8.0, 1.0}});
  const int n = 4;
  const auto chain = build_chain(sys, n);
  const auto phi = InitialFunction::of([](double s) { return s; });
  const auto y = init_chain_state(chain, phi);
  CHECK(y[0] == 0.0);
  for (int m = 1; m <= n; ++m)
    CHECK(y[m] == doctest::Approx(-m * 8.0 / n).epsilon(1e-8));
}

TEST_CASE("short history coverage raises a coverage error") {
  const auto sys = make_mackey_glass({}, {{10.0, 1.0}});
  const auto chain = build_chain(sys, 16);
  const auto phi = InitialFunction::of([](double) { return 0.9; }, 11.0);
  CHECK_THROWS_AS(init_chain_state(chain, phi), CoverageError);
}

TEST_CASE("divergence is the F-partial minus the chain relaxation rates") {
  const auto sys = make_mackey_glass({}, {{10.0, 1.0}});
  for (int n : {1, 10, 200}) {
    const auto chain = build_chain(sys, n);
    std::vector<double> y(chain.dimension(), 0.9);
    const double expected = -0.1 - static_cast<double>(n) * n / 10.0;
    CHECK(chain.divergence(0.0, y) == doctest::Approx(expected).epsilon(1e-9));
  }
}

TEST_CASE("mackey-glass chain flow is dissipative at random states") {
  const auto sys = make_mackey_glass({}, {{17.5, 1.0}});
  Rng rng(42);
  for (int n : {1, 10, 100}) {
    const auto chain = build_chain(sys, n);
    for (int trial = 0; trial < 200; ++trial) {
      std::vector<double> y(chain.dimension());
      for (auto& v : y) v = rng.uniform(0.0, 2.0);
      CHECK(chain.divergence(0.0, y) < 0.0);
    }
  }
}

TEST_CASE("chain evaluation is bit-deterministic") {
  const auto sys = make_mackey_glass({}, {{17.5, 1.0}});
  const auto chain_a = build_chain(sys, 50);
  const auto chain_b = build_chain(make_mackey_glass({}, {{17.5, 1.0}}), 50);
  std::vector<double> y(chain_a.dimension());
  for (std::size_t i = 0; i < y.size(); ++i)
    y[i] = 0.5 + 0.01 * static_cast<double>(i % 7);
  std::vector<double> da(y.size()), db(y.size());
  chain_a.eval(1.25, y, da);
  chain_b.eval(1.25, y, db);
  for (std::size_t i = 0; i < y.size(); ++i) CHECK(da[i] == db[i]);
}

TEST_CASE("multi-chain reduces to the single chain when M = 1") {
  const auto sys = make_linear({0.4, 0.1, 0.0}, {{3.0, 1.0}});
  const auto single = build_chain(sys, 5);
  const auto multi = build_multi_chain(sys, {5});
  std::vector<double> y{0.3, 0.2, 0.1, 0.4, 0.6, 0.5};
  std::vector<double> da(6), db(6);
  single.eval(0.0, y, da);
  multi.eval(0.0, y, db);
  for (int i = 0; i < 6; ++i) CHECK(da[i] == db[i]);
}

TEST_CASE("zero-weight chain is inert in F") {
  const auto two = make_linear({0.4, 0.1, 0.0}, {{3.0, 1.0}, {6.0, 0.0}});
  const auto one = make_linear({0.4, 0.1, 0.0}, {{3.0, 1.0}});
  const auto chain2 = build_multi_chain(two, {4, 3});
  const auto chain1 = build_chain(one, 4);
  // same primary/first-block state; whatever sits in the zero-weight block
  // must not affect dx0
  std::vector<double> y2{0.7, 0.1, 0.2, 0.3, 0.4, 9.0, 8.0, 7.0};
  std::vector<double> y1{0.7, 0.1, 0.2, 0.3, 0.4};
  std::vector<double> d2(8), d1(5);
  chain2.eval(0.0, y2, d2);
  chain1.eval(0.0, y1, d1);
  CHECK(d2[0] == doctest::Approx(d1[0]));
}

TEST_CASE("tangent dynamics matches a finite-difference directional derivative") {
  const auto sys = make_mackey_glass({}, {{10.0, 1.0}});
  const auto chain = build_chain(sys, 8);
  const int dim = chain.dimension();
  std::vector<double> y(dim), v(dim), dy(dim), dv(dim);
  Rng rng(7);
  for (int i = 0; i < dim; ++i) {
    y[i] = rng.uniform(0.5, 1.5);
    v[i] = rng.uniform(-1.0, 1.0);
  }
  chain.eval_with_tangent(0.0, y, v, dy, dv);
  const double eps = 1e-7;
  std::vector<double> yp(dim), ym(dim), fp(dim), fm(dim);
  for (int i = 0; i < dim; ++i) {
    yp[i] = y[i] + eps * v[i];
    ym[i] = y[i] - eps * v[i];
  }
  chain.eval(0.0, yp, fp);
  chain.eval(0.0, ym, fm);
  for (int i = 0; i < dim; ++i) {
    const double fd = (fp[i] - fm[i]) / (2.0 * eps);
    CHECK(dv[i] == doctest::Approx(fd).epsilon(1e-5));
  }
}

TEST_CASE("mixed-delay logistic system with per-delay histories") {
  // dx/dt = x(t - T1) [1 - x(t - T2)]: F reads the two histories directly
  DelaySystem sys;
  sys.name = "logistic-mixed";
  sys.delays = {{1.0, 1.0}, {2.0, 0.0}};
  sys.rhs = [](double, double, std::span<const double> h) {
    return h[0] * (1.0 - h[1]);
  };
  sys.validate();
  const auto chain = build_multi_chain(sys, {3, 3});
  CHECK(chain.dimension() == 7);
  std::vector<double> y{0.5, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6}, dy(7);
  chain.eval(0.0, y, dy);
  CHECK(dy[0] == doctest::Approx(0.3 * (1.0 - 0.6)));
}
