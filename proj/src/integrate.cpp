#include "delaychain/integrate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "delaychain/errors.hpp"

namespace delaychain {

namespace {

bool all_finite(std::span<const double> y) {
  for (double v : y)
    if (!std::isfinite(v)) return false;
  return true;
}

/// Shared sample/snapshot bookkeeping for both integrators.
class Recorder {
public:
  Recorder(Trajectory& out, const IntegrationOptions& opts, double dt,
           std::vector<int> default_components, int dimension)
      : out_(out), opts_(opts), dt_(dt) {
    if (opts.record_all) {
      out_.components.resize(dimension);
      std::iota(out_.components.begin(), out_.components.end(), 0);
    } else if (!opts.components.empty()) {
      out_.components = opts.components;
    } else {
      out_.components = std::move(default_components);
    }
    out_.transient = opts.transient;
    out_.dt = dt * opts.stride;
    first_step_ = static_cast<long>(std::ceil(opts.transient / dt - 1e-9));
    out_.t0 = static_cast<double>(first_step_) * dt;
    for (double ts : opts.snapshot_times)
      snapshot_steps_.push_back(static_cast<long>(std::llround(ts / dt)));
    std::sort(snapshot_steps_.begin(), snapshot_steps_.end());
  }

  bool wants_sample(long step) const {
    return step >= first_step_ && (step - first_step_) % opts_.stride == 0;
  }

  void sample(long step, double t, std::span<const double> y) {
    if (!wants_sample(step)) return;
    if (!all_finite(y)) throw DivergenceError(t);
    for (int c : out_.components) out_.data.push_back(y[c]);
  }

  bool wants_snapshot(long step) {
    if (next_snapshot_ >= snapshot_steps_.size() ||
        snapshot_steps_[next_snapshot_] != step)
      return false;
    ++next_snapshot_;
    return true;
  }

private:
  Trajectory& out_;
  const IntegrationOptions& opts_;
  double dt_;
  long first_step_ = 0;
  std::vector<long> snapshot_steps_;
  std::size_t next_snapshot_ = 0;
};

}  // namespace

std::vector<double> Trajectory::column(std::size_t c) const {
  std::vector<double> out(samples());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = value(i, c);
  return out;
}

int Trajectory::component_slot(int state_index) const {
  for (std::size_t c = 0; c < components.size(); ++c)
    if (components[c] == state_index) return static_cast<int>(c);
  return -1;
}

Trajectory integrate_chain(const ChainSystem& chain,
                           std::vector<double> initial, double t_end,
                           double dt, const IntegrationOptions& opts) {
  if (!(dt > 0.0)) throw ConfigError("integrate_chain: dt must be positive");
  if (dt > chain.max_stable_step() * (1.0 + 1e-9))
    throw ConfigError("integrate_chain: dt exceeds the chain stability bound");
  if (!(t_end > 0.0)) throw ConfigError("integrate_chain: t_end must be > 0");
  if (initial.size() != static_cast<std::size_t>(chain.dimension()))
    throw ConfigError("integrate_chain: initial state has wrong dimension");

  Trajectory out;
  Recorder rec(out, opts, dt, {0, chain.tail_index(0)}, chain.dimension());

  rk4_sweep(
      [&chain](double t, std::span<const double> y, std::span<double> dy) {
        chain.eval(t, y, dy);
      },
      initial, 0.0, t_end, dt,
      [&](long step, double t, const std::vector<double>& y) {
        if (!std::isfinite(y[0])) throw DivergenceError(t);
        rec.sample(step, t, y);
        if (rec.wants_snapshot(step)) {
          out.snapshot_times.push_back(t);
          out.state_snapshots.push_back(y);
        }
      });

  if (out.samples() < 2)
    throw ConfigError("integrate_chain: fewer than 2 retained samples");
  out.final_state = std::move(initial);
  out.final_time = static_cast<double>(std::llround(t_end / dt)) * dt;
  return out;
}

// ---------------------------------------------------------------------------
// Method of steps

namespace {

/// Cubic Hermite basis on [0, 1] scaled by node spacing dt.
inline double hermite(double x0, double f0, double x1, double f1, double u,
                      double dt) {
  const double u2 = u * u, u3 = u2 * u;
  return (2 * u3 - 3 * u2 + 1) * x0 + (u3 - 2 * u2 + u) * dt * f0 +
         (-2 * u3 + 3 * u2) * x1 + (u3 - u2) * dt * f1;
}

class DdeStepper {
public:
  DdeStepper(const DelaySystem& sys, const InitialFunction& phi, double dt,
             bool with_tangent)
      : sys_(sys), phi_(phi), dt_(dt), tangent_(with_tangent) {
    sys_.validate();
    if (!sys_.single_delay())
      throw ConfigError("method of steps requires a single delay");
    delay_ = sys_.delays[0].delay;
    if (dt_ > delay_ + 1e-12)
      throw ConfigError("method of steps: dt must not exceed the delay");
    if (phi_.coverage() + 1e-9 < delay_)
      throw CoverageError(1.0, phi_.coverage());
    ratio_ = delay_ / dt_;
    lag_steps_ = static_cast<long>(std::ceil(ratio_ - 1e-9));
    capacity_ = lag_steps_ + 4;
    x_ring_.resize(capacity_);
    f_ring_.resize(capacity_);
    if (tangent_) {
      v_ring_.resize(capacity_);
      fv_ring_.resize(capacity_);
    }
    x_ = phi_(0.0);
    v_ = 1.0;
    store_node(0, x_, v_);
  }

  double t() const { return static_cast<double>(step_) * dt_; }
  double x() const { return x_; }
  double tangent() const { return v_; }
  double deriv() const { return f_ring_[slot(step_)]; }
  long step_index() const { return step_; }
  double dt() const { return dt_; }

  void advance() {
    const double t0 = t();
    const double h = dt_;
    const double xd1 = delayed_x(0.0), xd2 = delayed_x(0.5),
                 xd4 = delayed_x(1.0);
    const double k1 = f_ring_[slot(step_)];
    const double k2 = rhs(t0 + h / 2, x_ + h / 2 * k1, xd2);
    const double k3 = rhs(t0 + h / 2, x_ + h / 2 * k2, xd2);
    const double k4 = rhs(t0 + h, x_ + h * k3, xd4);
    double vnew = 0.0;
    if (tangent_) {
      const double vd1 = delayed_v(0.0), vd2 = delayed_v(0.5),
                   vd4 = delayed_v(1.0);
      const double kv1 = var_rhs(t0, x_, xd1, v_, vd1);
      const double kv2 =
          var_rhs(t0 + h / 2, x_ + h / 2 * k1, xd2, v_ + h / 2 * kv1, vd2);
      const double kv3 =
          var_rhs(t0 + h / 2, x_ + h / 2 * k2, xd2, v_ + h / 2 * kv2, vd2);
      const double kv4 = var_rhs(t0 + h, x_ + h * k3, xd4, v_ + h * kv3, vd4);
      vnew = v_ + h / 6 * (kv1 + 2 * kv2 + 2 * kv3 + kv4);
    }
    x_ += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
    v_ = vnew;
    ++step_;
    if (!std::isfinite(x_)) throw DivergenceError(t());
    store_node(step_, x_, v_);
  }

  /// Sup norm of the tangent over the trailing delay window, then rescale
  /// the whole tangent history to unit size. Only valid once t >= delay.
  double renormalize_tangent() {
    double norm = std::abs(v_);
    for (long j = std::max<long>(0, step_ - lag_steps_); j <= step_; ++j)
      norm = std::max(norm, std::abs(v_ring_[slot(j)]));
    if (norm == 0.0 || !std::isfinite(norm)) throw DivergenceError(t());
    const double inv = 1.0 / norm;
    for (auto& v : v_ring_) v *= inv;
    for (auto& fv : fv_ring_) fv *= inv;
    v_ *= inv;
    return norm;
  }

  InitialFunction::Segment history_segment() const {
    InitialFunction::Segment seg;
    seg.dt = dt_;
    const long first = std::max<long>(0, step_ - lag_steps_ - 1);
    for (long j = first; j <= step_; ++j) {
      seg.values.push_back(x_ring_[slot(j)]);
      seg.derivs.push_back(f_ring_[slot(j)]);
    }
    return seg;
  }

private:
  long slot(long j) const { return ((j % capacity_) + capacity_) % capacity_; }

  double rhs(double t, double x, double xd) const {
    const double h[1] = {xd};
    return sys_.rhs(t, x, std::span<const double>(h, 1));
  }

  double var_rhs(double t, double x, double xd, double v, double vd) const {
    const double h[1] = {xd};
    const std::span<const double> hs(h, 1);
    return sys_.partial_x(t, x, hs) * v + sys_.partial_h(t, x, hs, 0) * vd;
  }

  void store_node(long j, double xval, double vval) {
    const long s = slot(j);
    x_ring_[s] = xval;
    const double xd = delayed_x_at(j, 0.0);
    f_ring_[s] = rhs(static_cast<double>(j) * dt_, xval, xd);
    if (tangent_) {
      v_ring_[s] = vval;
      fv_ring_[s] =
          var_rhs(static_cast<double>(j) * dt_, xval, xd, vval,
                  delayed_v_at(j, 0.0));
    }
  }

  double delayed_x(double frac) const { return delayed_x_at(step_, frac); }
  double delayed_v(double frac) const { return delayed_v_at(step_, frac); }

  double delayed_x_at(long i, double frac) const {
    const double q = static_cast<double>(i) + frac - ratio_;
    if (q <= 1e-12) return phi_(q * dt_);
    const long j = static_cast<long>(std::floor(q + 1e-12));
    const double u = q - static_cast<double>(j);
    if (u <= 1e-12) return x_ring_[slot(j)];
    return hermite(x_ring_[slot(j)], f_ring_[slot(j)], x_ring_[slot(j + 1)],
                   f_ring_[slot(j + 1)], u, dt_);
  }

  double delayed_v_at(long i, double frac) const {
    const double q = static_cast<double>(i) + frac - ratio_;
    if (q <= 1e-12) return 1.0;  // unit tangent history
    const long j = static_cast<long>(std::floor(q + 1e-12));
    const double u = q - static_cast<double>(j);
    if (u <= 1e-12) return v_ring_[slot(j)];
    return hermite(v_ring_[slot(j)], fv_ring_[slot(j)], v_ring_[slot(j + 1)],
                   fv_ring_[slot(j + 1)], u, dt_);
  }

  const DelaySystem& sys_;
  const InitialFunction& phi_;
  double dt_;
  bool tangent_;
  double delay_ = 0.0;
  double ratio_ = 0.0;
  long lag_steps_ = 0;
  long capacity_ = 0;
  long step_ = 0;
  double x_ = 0.0;
  double v_ = 0.0;
  std::vector<double> x_ring_, f_ring_, v_ring_, fv_ring_;
};

}  // namespace

Trajectory integrate_dde(const DelaySystem& sys, const InitialFunction& phi,
                         double t_end, double dt,
                         const IntegrationOptions& opts) {
  if (!(dt > 0.0)) throw ConfigError("integrate_dde: dt must be positive");
  if (!(t_end > 0.0)) throw ConfigError("integrate_dde: t_end must be > 0");
  DdeStepper stepper(sys, phi, dt, /*with_tangent=*/false);

  Trajectory out;
  Recorder rec(out, opts, dt, {0}, 1);
  const long steps = static_cast<long>(std::llround(t_end / dt));
  auto visit = [&](long step, double t) {
    const double y[1] = {stepper.x()};
    rec.sample(step, t, std::span<const double>(y, 1));
    if (rec.wants_snapshot(step)) {
      out.snapshot_times.push_back(t);
      out.segment_snapshots.push_back(stepper.history_segment());
    }
  };
  visit(0, 0.0);
  for (long i = 1; i <= steps; ++i) {
    stepper.advance();
    visit(i, stepper.t());
  }
  if (out.samples() < 2)
    throw ConfigError("integrate_dde: fewer than 2 retained samples");
  out.final_state = {stepper.x()};
  out.final_time = stepper.t();
  return out;
}

// ---------------------------------------------------------------------------
// Lyapunov exponents

namespace {

double block_std_error(const std::vector<double>& rates) {
  if (rates.size() < 4) return 0.0;
  const std::size_t nblocks = std::min<std::size_t>(20, rates.size() / 2);
  const std::size_t per = rates.size() / nblocks;
  std::vector<double> means;
  for (std::size_t b = 0; b < nblocks; ++b) {
    double s = 0.0;
    for (std::size_t i = b * per; i < (b + 1) * per; ++i) s += rates[i];
    means.push_back(s / static_cast<double>(per));
  }
  double mean = std::accumulate(means.begin(), means.end(), 0.0) /
                static_cast<double>(means.size());
  double var = 0.0;
  for (double m : means) var += (m - mean) * (m - mean);
  var /= static_cast<double>(means.size() - 1);
  return std::sqrt(var / static_cast<double>(means.size()));
}

}  // namespace

LyapunovResult lyapunov_max(const ChainSystem& chain,
                            std::vector<double> initial, double dt,
                            const LyapunovOptions& opts) {
  const int dim = chain.dimension();
  const int k = std::max(1, opts.exponents);
  if (initial.size() != static_cast<std::size_t>(dim))
    throw ConfigError("lyapunov_max: initial state has wrong dimension");
  if (!(opts.renorm_interval > dt))
    throw ConfigError("lyapunov_max: renorm interval must exceed dt");

  // settle onto the attractor first
  if (opts.transient > 0.0) {
    rk4_sweep(
        [&chain](double t, std::span<const double> y, std::span<double> dy) {
          chain.eval(t, y, dy);
        },
        initial, 0.0, opts.transient, dt,
        [](long, double t, const std::vector<double>& y) {
          if (!std::isfinite(y[0])) throw DivergenceError(t);
        });
  }

  // flow plus k tangent columns in one flat vector
  std::vector<double> state(static_cast<std::size_t>(dim) * (1 + k), 0.0);
  std::copy(initial.begin(), initial.end(), state.begin());
  for (int c = 0; c < k; ++c)
    for (int i = 0; i < dim; ++i)
      state[dim * (1 + c) + i] = (c == 0) ? 1.0 : ((i + c) % 2 ? 1.0 : -1.0);

  auto rhs = [&chain, dim, k](double t, std::span<const double> s,
                              std::span<double> ds) {
    chain.eval(t, s.first(dim), ds.first(dim));
    for (int c = 0; c < k; ++c)
      chain.eval_tangent(t, s.first(dim), s.subspan(dim * (1 + c), dim),
                         ds.subspan(dim * (1 + c), dim));
  };

  const long renorm_steps =
      std::max<long>(1, std::llround(opts.renorm_interval / dt));
  std::vector<std::vector<double>> rates(k);
  std::vector<double> logsum(k, 0.0);
  const double total = opts.warmup + opts.span;
  long next_renorm = renorm_steps;
  bool warming = true;
  double accumulated_time = 0.0;

  auto orthonormalize = [&](bool accumulate, double elapsed) {
    for (int c = 0; c < k; ++c) {
      auto col = std::span<double>(state).subspan(dim * (1 + c), dim);
      for (int p = 0; p < c; ++p) {
        auto prev = std::span<double>(state).subspan(dim * (1 + p), dim);
        double dot = 0.0;
        for (int i = 0; i < dim; ++i) dot += col[i] * prev[i];
        for (int i = 0; i < dim; ++i) col[i] -= dot * prev[i];
      }
      double norm = 0.0;
      for (int i = 0; i < dim; ++i) norm += col[i] * col[i];
      norm = std::sqrt(norm);
      if (norm == 0.0 || !std::isfinite(norm))
        throw DivergenceError(accumulated_time);
      for (int i = 0; i < dim; ++i) col[i] /= norm;
      if (accumulate) {
        logsum[c] += std::log(norm);
        rates[c].push_back(std::log(norm) / elapsed);
      }
    }
  };

  orthonormalize(false, 0.0);
  rk4_sweep(rhs, state, 0.0, total, dt,
            [&](long step, double t, const std::vector<double>& s) {
              if (!std::isfinite(s[0])) throw DivergenceError(t);
              if (step == next_renorm) {
                next_renorm += renorm_steps;
                if (warming && t >= opts.warmup - 1e-9) {
                  warming = false;
                  orthonormalize(false, 0.0);
                  accumulated_time = 0.0;
                  return;
                }
                if (warming) {
                  orthonormalize(false, 0.0);
                } else {
                  orthonormalize(true, opts.renorm_interval);
                  accumulated_time += opts.renorm_interval;
                }
              }
            });

  LyapunovResult res;
  for (int c = 0; c < k; ++c)
    res.exponents.push_back(logsum[c] / accumulated_time);
  res.std_error = block_std_error(rates[0]);
  res.warning = res.std_error > opts.noise_tol;
  return res;
}

LyapunovResult lyapunov_max_dde(const DelaySystem& sys,
                                const InitialFunction& phi, double dt,
                                const LyapunovOptions& opts) {
  if (!(opts.renorm_interval > dt))
    throw ConfigError("lyapunov_max_dde: renorm interval must exceed dt");
  const double delay = sys.delays.at(0).delay;
  const double warmup = std::max(opts.warmup, 2.0 * delay);

  DdeStepper stepper(sys, phi, dt, /*with_tangent=*/true);
  const long renorm_steps =
      std::max<long>(1, std::llround(opts.renorm_interval / dt));
  const long total_steps = static_cast<long>(
      std::llround((opts.transient + warmup + opts.span) / dt));
  const long warm_until = static_cast<long>(
      std::llround((opts.transient + warmup) / dt));

  double logsum = 0.0;
  double accumulated_time = 0.0;
  std::vector<double> rates;
  for (long i = 1; i <= total_steps; ++i) {
    stepper.advance();
    if (i % renorm_steps == 0) {
      const double norm = stepper.renormalize_tangent();
      if (i > warm_until) {
        logsum += std::log(norm);
        rates.push_back(std::log(norm) / opts.renorm_interval);
        accumulated_time += opts.renorm_interval;
      }
    }
  }

  LyapunovResult res;
  res.exponents.push_back(logsum / accumulated_time);
  res.std_error = block_std_error(rates);
  res.warning = res.std_error > opts.noise_tol;
  return res;
}

}  // namespace delaychain
