#include "delaychain/systems.hpp"

#include <cmath>
#include <utility>

#include "delaychain/errors.hpp"

namespace delaychain {

namespace {

constexpr double kWeightTol = 1e-12;
constexpr double kDefaultStep = 0.01;
constexpr int kMaxStackDelays = 16;

double fd_partial(const std::function<double(double)>& g, double step) {
  // central difference with one Richardson refinement
  auto central = [&](double h) { return (g(h) - g(-h)) / (2.0 * h); };
  const double d1 = central(step);
  const double d2 = central(step / 2.0);
  return (4.0 * d2 - d1) / 3.0;
}

}  // namespace

void DelaySystem::validate() const {
  if (delays.empty()) throw ConfigError(name + ": at least one delay required");
  double wsum = 0.0;
  for (const auto& d : delays) {
    if (!(d.delay > 0.0)) throw ConfigError(name + ": delays must be positive");
    if (d.weight < 0.0) throw ConfigError(name + ": weights must be >= 0");
    wsum += d.weight;
  }
  if (std::abs(wsum - 1.0) > kWeightTol)
    throw ConfigError(name + ": delay weights must sum to 1");
  if (!rhs) throw ConfigError(name + ": missing right-hand side");
}

double DelaySystem::max_delay() const {
  double m = 0.0;
  for (const auto& d : delays) m = std::max(m, d.delay);
  return m;
}

double DelaySystem::partial_x(double t, double x,
                              std::span<const double> h) const {
  if (rhs_dx) return rhs_dx(t, x, h);
  return fd_partial([&](double e) { return rhs(t, x + e, h); }, 1e-6);
}

double DelaySystem::partial_h(double t, double x, std::span<const double> h,
                              int j) const {
  if (rhs_dh) return rhs_dh(t, x, h, j);
  std::vector<double> hp(h.begin(), h.end());
  return fd_partial(
      [&](double e) {
        hp[j] = h[j] + e;
        return rhs(t, x, hp);
      },
      1e-6);
}

DelaySystem make_mackey_glass(const MackeyGlassParams& p,
                              std::vector<DelaySpec> delays) {
  if (!(p.alpha > 0.0 && p.beta > 0.0 && p.gamma > 0.0))
    throw ConfigError("mackey-glass: alpha, beta, gamma must be positive");
  DelaySystem sys;
  sys.name = "mackey-glass";
  sys.delays = std::move(delays);
  const double alpha = p.alpha, beta = p.beta, gamma = p.gamma;
  const auto dl = sys.delays;
  sys.rhs = [alpha, beta, gamma, dl](double, double x,
                                     std::span<const double> h) {
    double hw = 0.0;
    for (std::size_t j = 0; j < dl.size(); ++j) hw += dl[j].weight * h[j];
    const double pw = std::pow(hw, gamma);
    return alpha * hw / (1.0 + pw) - beta * x;
  };
  sys.rhs_dx = [beta](double, double, std::span<const double>) { return -beta; };
  sys.rhs_dh = [alpha, gamma, dl](double, double, std::span<const double> h,
                                  int j) {
    double hw = 0.0;
    for (std::size_t k = 0; k < dl.size(); ++k) hw += dl[k].weight * h[k];
    const double pw = std::pow(hw, gamma);
    const double denom = (1.0 + pw) * (1.0 + pw);
    return dl[j].weight * alpha * (1.0 + (1.0 - gamma) * pw) / denom;
  };
  sys.params = {{"alpha", alpha}, {"beta", beta}, {"gamma", gamma}};
  sys.validate();
  return sys;
}

DelaySystem make_linear(const LinearDelayParams& p,
                        std::vector<DelaySpec> delays) {
  DelaySystem sys;
  sys.name = "linear";
  sys.delays = std::move(delays);
  const double a = p.a, b = p.b, c = p.c;
  const auto dl = sys.delays;
  sys.rhs = [a, b, c, dl](double, double x, std::span<const double> h) {
    double hw = 0.0;
    for (std::size_t j = 0; j < dl.size(); ++j) hw += dl[j].weight * h[j];
    return -c - b * x - a * hw;
  };
  sys.rhs_dx = [b](double, double, std::span<const double>) { return -b; };
  sys.rhs_dh = [a, dl](double, double, std::span<const double>, int j) {
    return -a * dl[j].weight;
  };
  sys.params = {{"a", a}, {"b", b}, {"c", c}};
  sys.validate();
  return sys;
}

MackeyGlassFixpoints mackey_glass_fixpoints(const MackeyGlassParams& p) {
  MackeyGlassFixpoints fp;
  if (p.alpha > p.beta)
    fp.nontrivial = std::pow(p.alpha / p.beta - 1.0, 1.0 / p.gamma);
  return fp;
}

LinearDelayParams linearize_at_fixpoint(const DelaySystem& sys,
                                        double x_star) {
  sys.validate();
  const std::size_t m = sys.delays.size();
  std::vector<double> h(m, x_star);
  LinearDelayParams out;
  out.b = -fd_partial(
      [&](double e) { return sys.rhs(0.0, x_star + e, h); }, 1e-6);
  out.a = -fd_partial(
      [&](double e) {
        std::vector<double> hs(m, x_star + e);  // uniform history shift
        return sys.rhs(0.0, x_star, hs);
      },
      1e-6);
  out.c = -(sys.rhs(0.0, x_star, h) + out.b * x_star + out.a * x_star);
  return out;
}

// ---------------------------------------------------------------------------
// InitialFunction

InitialFunction InitialFunction::constant(double c) {
  InitialFunction phi;
  phi.constant_ = c;
  phi.coverage_ = std::numeric_limits<double>::infinity();
  phi.fn_ = [c](double) { return c; };
  return phi;
}

InitialFunction InitialFunction::of(std::function<double(double)> f,
                                    double coverage) {
  InitialFunction phi;
  phi.fn_ = std::move(f);
  phi.coverage_ = coverage;
  return phi;
}

InitialFunction InitialFunction::segment(Segment seg) {
  if (seg.values.size() < 2 || seg.values.size() != seg.derivs.size() ||
      !(seg.dt > 0.0))
    throw ConfigError("initial segment: need >= 2 nodes with derivatives");
  InitialFunction phi;
  phi.coverage_ = seg.dt * static_cast<double>(seg.values.size() - 1);
  phi.fn_ = [seg = std::move(seg)](double s) {
    // s <= 0; node i sits at time -(n-1-i)*dt
    const auto n = static_cast<long>(seg.values.size());
    const double pos = s / seg.dt + static_cast<double>(n - 1);
    long i = static_cast<long>(std::floor(pos));
    if (i < 0) i = 0;
    if (i > n - 2) i = n - 2;
    const double u = pos - static_cast<double>(i);
    const double x0 = seg.values[i], x1 = seg.values[i + 1];
    const double f0 = seg.derivs[i], f1 = seg.derivs[i + 1];
    const double u2 = u * u, u3 = u2 * u;
    return (2 * u3 - 3 * u2 + 1) * x0 + (u3 - 2 * u2 + u) * seg.dt * f0 +
           (-2 * u3 + 3 * u2) * x1 + (u3 - u2) * seg.dt * f1;
  };
  return phi;
}

double InitialFunction::operator()(double s) const { return fn_(s); }

InitialFunction InitialFunction::shifted(double offset) const {
  if (constant_) return constant(*constant_ + offset);
  InitialFunction phi;
  phi.coverage_ = coverage_;
  phi.fn_ = [base = fn_, offset](double s) { return base(s) + offset; };
  return phi;
}

// ---------------------------------------------------------------------------
// ChainSystem

ChainSystem::ChainSystem(DelaySystem base, std::vector<int> orders)
    : base_(std::move(base)), orders_(std::move(orders)) {
  base_.validate();
  if (orders_.size() != base_.delays.size())
    throw ConfigError("chain: one order per delay required");
  dimension_ = 1;
  stability_cap_ = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < orders_.size(); ++j) {
    if (orders_[j] < 1) throw ConfigError("chain: orders must be >= 1");
    offsets_.push_back(dimension_);
    dimension_ += orders_[j];
    const double relax = base_.delays[j].delay / orders_[j];
    inv_relax_.push_back(1.0 / relax);
    stability_cap_ = std::min(stability_cap_, relax / 2.0);
  }
  step_hint_ = std::min(kDefaultStep, stability_cap_);
}

void ChainSystem::gather_tails(std::span<const double> y,
                               std::span<double> h) const {
  for (std::size_t j = 0; j < orders_.size(); ++j) h[j] = y[tail_index(j)];
}

void ChainSystem::eval(double t, std::span<const double> y,
                       std::span<double> dy) const {
  const std::size_t m = orders_.size();
  double hbuf[kMaxStackDelays];
  thread_local std::vector<double> hheap;
  std::span<double> h;
  if (m <= kMaxStackDelays) {
    h = std::span<double>(hbuf, m);
  } else {
    hheap.resize(m);
    h = hheap;
  }
  gather_tails(y, h);
  const double x0 = y[0];
  dy[0] = base_.rhs(t, x0, h);
  for (std::size_t j = 0; j < m; ++j) {
    const int begin = offsets_[j];
    const int n = orders_[j];
    const double inv = inv_relax_[j];
    dy[begin] = (x0 - y[begin]) * inv;
    for (int i = 1; i < n; ++i)
      dy[begin + i] = (y[begin + i - 1] - y[begin + i]) * inv;
  }
}

void ChainSystem::eval_with_tangent(double t, std::span<const double> y,
                                    std::span<const double> v,
                                    std::span<double> dy,
                                    std::span<double> dv) const {
  eval(t, y, dy);
  eval_tangent(t, y, v, dv);
}

void ChainSystem::eval_tangent(double t, std::span<const double> y,
                               std::span<const double> v,
                               std::span<double> dv) const {
  const std::size_t m = orders_.size();
  double hbuf[kMaxStackDelays];
  thread_local std::vector<double> hheap;
  std::span<double> h;
  if (m <= kMaxStackDelays) {
    h = std::span<double>(hbuf, m);
  } else {
    hheap.resize(m);
    h = hheap;
  }
  gather_tails(y, h);
  const double x0 = y[0];
  double acc = base_.partial_x(t, x0, h) * v[0];
  for (std::size_t j = 0; j < m; ++j)
    acc += base_.partial_h(t, x0, h, static_cast<int>(j)) * v[tail_index(j)];
  dv[0] = acc;
  for (std::size_t j = 0; j < m; ++j) {
    const int begin = offsets_[j];
    const int n = orders_[j];
    const double inv = inv_relax_[j];
    dv[begin] = (v[0] - v[begin]) * inv;
    for (int i = 1; i < n; ++i)
      dv[begin + i] = (v[begin + i - 1] - v[begin + i]) * inv;
  }
}

double ChainSystem::divergence(double t, std::span<const double> y) const {
  const std::size_t m = orders_.size();
  std::vector<double> h(m);
  gather_tails(y, std::span<double>(h));
  double div = base_.partial_x(t, y[0], h);
  for (std::size_t j = 0; j < m; ++j)
    div -= static_cast<double>(orders_[j]) * inv_relax_[j];
  return div;
}

ChainSystem build_chain(const DelaySystem& sys, int order) {
  if (!sys.single_delay())
    throw ConfigError("build_chain expects a single-delay system");
  if (order < 1) throw ConfigError("build_chain: order must be >= 1");
  return ChainSystem(sys, {order});
}

ChainSystem build_multi_chain(const DelaySystem& sys,
                              std::vector<int> orders) {
  return ChainSystem(sys, std::move(orders));
}

std::vector<double> init_chain_state(const ChainSystem& chain,
                                     const InitialFunction& phi) {
  std::vector<double> y(static_cast<std::size_t>(chain.dimension()));
  if (phi.is_constant()) {
    std::fill(y.begin(), y.end(), phi.constant_value());
    return y;
  }
  y[0] = phi(0.0);
  const auto& delays = chain.base().delays;
  for (std::size_t j = 0; j < delays.size(); ++j) {
    const int n = chain.orders()[j];
    for (int i = 1; i <= n; ++i) {
      GammaKernel kernel(i, n, delays[j].delay);
      y[chain.block_start(j) + i - 1] = convolve_history(
          kernel, [&phi](double lag) { return phi(-lag); }, phi.coverage(),
          kernel.stddev() / 100.0);
    }
  }
  return y;
}

}  // namespace delaychain
