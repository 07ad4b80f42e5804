#include "delaychain/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "delaychain/errors.hpp"
#include "delaychain/parallel.hpp"
#include "delaychain/rng.hpp"

namespace delaychain {

namespace {

constexpr double kFixpointVariance = 1e-12;
constexpr int kMaxClusters = 64;

int cluster_count(std::vector<double> heights, double tol) {
  std::sort(heights.begin(), heights.end());
  int count = 1;
  for (std::size_t i = 1; i < heights.size(); ++i)
    if (heights[i] - heights[i - 1] > tol) ++count;
  return count;
}

}  // namespace

// ---------------------------------------------------------------------------
// SystemFamily

SystemFamily SystemFamily::mackey_glass(const MackeyGlassParams& p,
                                        std::optional<int> order,
                                        FamilyOptions opts) {
  SystemFamily fam;
  fam.make = [p](double T) {
    return delaychain::make_mackey_glass(p, {{T, 1.0}});
  };
  fam.order = order;
  fam.phi = InitialFunction::constant(0.9);
  fam.opts = opts;
  return fam;
}

SystemFamily SystemFamily::linear(const LinearDelayParams& p,
                                  std::optional<int> order,
                                  FamilyOptions opts) {
  SystemFamily fam;
  fam.make = [p](double T) { return delaychain::make_linear(p, {{T, 1.0}}); };
  fam.order = order;
  fam.phi = InitialFunction::constant(0.5);
  fam.opts = opts;
  return fam;
}

double SystemFamily::period_hint(double T) const {
  return opts.period_factor * std::max(T, 5.0);
}

double SystemFamily::dt_at(double T) const {
  if (is_dde()) return opts.dt;
  return std::min(opts.dt, chain_at(T).step_hint());
}

double SystemFamily::transient_at(double T) const {
  return std::max({10.0 * T, opts.transient_periods * period_hint(T),
                   opts.min_transient});
}

ChainSystem SystemFamily::chain_at(double T) const {
  if (is_dde()) throw ConfigError("chain_at: family is a sharp-delay system");
  return build_chain(make(T), *order);
}

namespace {

Trajectory family_series(const SystemFamily& fam, double T, int snapshots) {
  const double dt = fam.dt_at(T);
  const double transient = fam.transient_at(T);
  const double window = fam.opts.measure_periods * fam.period_hint(T);
  const double t_end = transient + window;
  IntegrationOptions opts;
  opts.transient = transient;
  opts.stride = std::max(1, static_cast<int>(std::round(fam.opts.sample_dt / dt)));
  for (int s = 0; s < snapshots; ++s)
    opts.snapshot_times.push_back(transient + window * (s + 0.5) / snapshots);
  if (fam.is_dde())
    return integrate_dde(fam.make(T), fam.phi, t_end, dt, opts);
  const ChainSystem chain = fam.chain_at(T);
  return integrate_chain(chain, init_chain_state(chain, fam.phi), t_end, dt,
                         opts);
}

}  // namespace

Trajectory SystemFamily::primary_series(double T) const {
  return family_series(*this, T, 0);
}

Trajectory SystemFamily::primary_series_with_snapshots(double T,
                                                       int count) const {
  return family_series(*this, T, count);
}

LyapunovResult SystemFamily::lyapunov(double T) const {
  const double dt = dt_at(T);
  LyapunovOptions lopts = opts.lyapunov;
  lopts.transient = std::max(20.0 * T, opts.min_transient);
  if (is_dde()) return lyapunov_max_dde(make(T), phi, dt, lopts);
  const ChainSystem chain = chain_at(T);
  return lyapunov_max(chain, init_chain_state(chain, phi), dt, lopts);
}

// ---------------------------------------------------------------------------
// Period multiplicity

std::vector<double> local_maxima(const Trajectory& traj, int slot) {
  std::vector<double> out;
  const std::size_t n = traj.samples();
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double y0 = traj.value(i - 1, slot);
    const double y1 = traj.value(i, slot);
    const double y2 = traj.value(i + 1, slot);
    if (y0 < y1 && y1 >= y2) {
      const double curv = y0 - 2.0 * y1 + y2;
      double height = y1;
      if (curv < 0.0) height = y1 - (y0 - y2) * (y0 - y2) / (8.0 * curv);
      out.push_back(height);
    }
  }
  return out;
}

MultiplicityResult period_multiplicity(const Trajectory& traj, double tol) {
  const std::vector<double> heights = local_maxima(traj, 0);
  MultiplicityResult res;
  res.maxima_count = static_cast<int>(heights.size());
  if (heights.size() < 8)
    throw InsufficientDataError("period_multiplicity: fewer than 8 maxima");
  const std::size_t half = heights.size() / 2;
  const int c_first = cluster_count(
      std::vector<double>(heights.begin(), heights.begin() + half), tol);
  const int c_second = cluster_count(
      std::vector<double>(heights.begin() + half, heights.end()), tol);
  const int c_all = cluster_count(heights, tol);
  if (c_first == c_second && c_second == c_all && c_all <= kMaxClusters) {
    res.clusters = c_all;
    res.aperiodic = false;
  } else {
    res.clusters = c_all;
    res.aperiodic = true;
  }
  return res;
}

MultiplicityResult multiplicity_at(const SystemFamily& family, double T) {
  return period_multiplicity(family.primary_series(T));
}

// ---------------------------------------------------------------------------
// Bifurcation refinement

const char* to_string(BifurcationKind kind) {
  switch (kind) {
    case BifurcationKind::Hopf: return "Hopf";
    case BifurcationKind::PD1: return "PD1";
    case BifurcationKind::PD2: return "PD2";
    case BifurcationKind::ChaosOnset: return "ChaosOnset";
  }
  return "?";
}

namespace {

/// Scalar diagnostic per probe: cluster count for multiplicity splits
/// (0 when the trajectory has settled to a fixpoint, a large sentinel when
/// aperiodic), or the chaos flag for onset splits.
int probe_diagnostic(const SystemFamily& family, BifurcationKind kind,
                     double T, const RefineOptions& opts) {
  if (kind == BifurcationKind::ChaosOnset) {
    const LyapunovResult lr = family.lyapunov(T);
    return lr.lambda_max() > opts.lyapunov_tol ? 1 : 0;
  }
  const Trajectory traj = family.primary_series(T);
  if (kind == BifurcationKind::Hopf) {
    return attractor_stats(traj).variance > 1e-9 ? 1 : 0;
  }
  try {
    const MultiplicityResult m = period_multiplicity(traj);
    return m.aperiodic ? kMaxClusters + 1 : m.clusters;
  } catch (const InsufficientDataError&) {
    return 0;  // fixpoint side
  }
}

}  // namespace

BifurcationPoint find_bifurcation(const SystemFamily& family,
                                  BifurcationKind kind, double T_lo,
                                  double T_hi, const RefineOptions& opts) {
  if (!(T_lo < T_hi)) throw ConfigError("find_bifurcation: empty bracket");
  const int d_lo = probe_diagnostic(family, kind, T_lo, opts);
  const int d_hi = probe_diagnostic(family, kind, T_hi, opts);

  // the bracket must split the diagnostic
  bool ok = false;
  std::function<bool(int)> upper_side;  // true when a probe behaves like T_hi
  switch (kind) {
    case BifurcationKind::Hopf:
    case BifurcationKind::ChaosOnset:
      ok = d_lo == 0 && d_hi == 1;
      upper_side = [](int d) { return d >= 1; };
      break;
    case BifurcationKind::PD1:
    case BifurcationKind::PD2:
      ok = d_lo >= 1 && d_hi >= 2 * d_lo && d_hi <= kMaxClusters;
      upper_side = [d_lo](int d) { return d >= 2 * d_lo; };
      break;
  }
  if (!ok)
    throw BracketError(std::string("find_bifurcation(") + to_string(kind) +
                       "): diagnostics " + std::to_string(d_lo) + " / " +
                       std::to_string(d_hi) +
                       " do not bracket the transition");

  double lo = T_lo, hi = T_hi;
  while (hi - lo > opts.bracket_tol) {
    const double mid = 0.5 * (lo + hi);
    if (upper_side(probe_diagnostic(family, kind, mid, opts)))
      hi = mid;
    else
      lo = mid;
  }

  BifurcationPoint pt;
  pt.kind = kind;
  pt.T_c = 0.5 * (lo + hi);
  pt.order = family.is_dde() ? std::numeric_limits<double>::infinity()
                             : static_cast<double>(*family.order);
  pt.bracket_lo = lo;
  pt.bracket_hi = hi;
  pt.diag_lo = d_lo;
  pt.diag_hi = d_hi;
  return pt;
}

// ---------------------------------------------------------------------------
// Stroboscopic projection

std::vector<std::pair<double, double>> stroboscopic(const Trajectory& traj,
                                                    double T) {
  const bool dde_mode = traj.components.size() == 1;
  const double shift_time = dde_mode ? 2.0 * T : T;
  const auto shift = static_cast<std::size_t>(std::llround(shift_time / traj.dt));
  if (shift < 1 || shift >= traj.samples())
    throw InsufficientDataError(
        "stroboscopic: trajectory does not retain one delay of history");
  const int tail_slot = dde_mode ? 0 : 1;
  std::vector<std::pair<double, double>> out;
  out.reserve(traj.samples() - shift);
  for (std::size_t i = shift; i < traj.samples(); ++i)
    out.emplace_back(traj.value(i, 0), traj.value(i - shift, tail_slot));
  return out;
}

// ---------------------------------------------------------------------------
// Cross-correlation test

AttractorStats attractor_stats(const Trajectory& traj, int slot) {
  AttractorStats st;
  const std::size_t n = traj.samples();
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += traj.value(i, slot);
  st.mean = sum / static_cast<double>(n);
  double var = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = traj.value(i, slot) - st.mean;
    var += d * d;
  }
  st.variance = var / static_cast<double>(n);
  return st;
}

namespace {

struct PairSeries {
  std::vector<double> sq_dist;  // (x1 - x2)^2 over the horizon grid
};

/// Integrates one perturbed pair from an attractor snapshot. Chains restart
/// from the stored state vector; sharp-delay systems restart from the
/// stored history segment.
PairSeries run_pair(const SystemFamily& fam, double T, const Trajectory& ref,
                    std::size_t snapshot_index, double offset, double horizon) {
  const double dt = fam.dt_at(T);
  IntegrationOptions opts;
  opts.stride = std::max(1, static_cast<int>(std::round(fam.opts.sample_dt / dt)));
  opts.components = {0};
  Trajectory t1, t2;
  if (fam.is_dde()) {
    const DelaySystem sys = fam.make(T);
    InitialFunction base =
        InitialFunction::segment(ref.segment_snapshots.at(snapshot_index));
    t1 = integrate_dde(sys, base, horizon, dt, opts);
    t2 = integrate_dde(sys, base.shifted(offset), horizon, dt, opts);
  } else {
    const ChainSystem chain = fam.chain_at(T);
    std::vector<double> base = ref.state_snapshots.at(snapshot_index);
    std::vector<double> pert = base;
    for (double& v : pert) v += offset;
    t1 = integrate_chain(chain, std::move(base), horizon, dt, opts);
    t2 = integrate_chain(chain, std::move(pert), horizon, dt, opts);
  }
  PairSeries out;
  const std::size_t n = std::min(t1.samples(), t2.samples());
  out.sq_dist.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double d = t1.value(i, 0) - t2.value(i, 0);
    out.sq_dist[i] = d * d;
  }
  return out;
}

}  // namespace

CrossCorrelation cross_correlation(const SystemFamily& family, double T,
                                   double delta, int n_pairs, double horizon,
                                   std::uint64_t seed) {
  if (!(delta > 0.0)) throw ConfigError("cross_correlation: delta must be > 0");
  if (n_pairs < 1) throw ConfigError("cross_correlation: need >= 1 pairs");

  CrossCorrelation out;
  out.delta = delta;
  out.pairs = n_pairs;
  out.seed = seed;

  const Trajectory ref = family.primary_series_with_snapshots(T, n_pairs);
  const AttractorStats st = attractor_stats(ref);
  out.mean = st.mean;
  out.s2 = st.variance;

  const double dt = family.dt_at(T);
  const int stride =
      std::max(1, static_cast<int>(std::round(family.opts.sample_dt / dt)));
  const auto n_samples =
      static_cast<std::size_t>(std::llround(horizon / dt)) / stride + 1;
  out.time.resize(n_samples);
  for (std::size_t i = 0; i < n_samples; ++i)
    out.time[i] = static_cast<double>(i) * dt * stride;

  if (st.variance < kFixpointVariance) {
    out.fixpoint = true;
    out.d12.assign(n_samples, 0.0);
    out.c12.assign(n_samples, 1.0);
    return out;
  }

  std::vector<PairSeries> results(n_pairs);
  parallel_for(n_pairs, family.opts.workers, [&](std::size_t p) {
    Rng rng(Rng::substream(seed, p));
    const double offset = delta * rng.sign();
    results[p] = run_pair(family, T, ref, p, offset, horizon);
  });

  out.d12.assign(n_samples, 0.0);
  for (const auto& r : results)
    for (std::size_t i = 0; i < n_samples && i < r.sq_dist.size(); ++i)
      out.d12[i] += r.sq_dist[i];
  for (double& v : out.d12) v /= static_cast<double>(n_pairs);
  out.c12.resize(n_samples);
  for (std::size_t i = 0; i < n_samples; ++i)
    out.c12[i] = 1.0 - out.d12[i] / (2.0 * out.s2);
  return out;
}

double asymptotic_distance(const SystemFamily& family, double T, double delta,
                           int n_pairs, double horizon, std::uint64_t seed) {
  const CrossCorrelation cc =
      cross_correlation(family, T, delta, n_pairs, horizon, seed);
  const std::size_t n = cc.d12.size();
  const std::size_t from = n - n / 4;
  double acc = 0.0;
  for (std::size_t i = from; i < n; ++i) acc += cc.d12[i];
  return std::sqrt(acc / static_cast<double>(n - from));
}

// ---------------------------------------------------------------------------
// Classification

const char* to_string(AttractorClass cls) {
  switch (cls) {
    case AttractorClass::Fixpoint: return "Fixpoint";
    case AttractorClass::LimitCycle: return "LimitCycle";
    case AttractorClass::Chaos: return "Chaos";
    case AttractorClass::PartiallyPredictableChaos:
      return "PartiallyPredictableChaos";
    case AttractorClass::Unclassified: return "Unclassified";
  }
  return "?";
}

namespace {

ChaosVerdict classify_impl(const SystemFamily& family, double T, double delta,
                           int n_pairs, std::uint64_t seed,
                           const ClassifyOptions& copts,
                           const CrossCorrelation* cc_given,
                           const LyapunovResult* lyap_given) {
  ChaosVerdict verdict;
  ChaosEvidence& ev = verdict.evidence;
  ev.delta = delta;
  ev.pairs = n_pairs;
  ev.seed = seed;
  ev.distance_delta_slope = std::numeric_limits<double>::quiet_NaN();
  ev.c12_tail = std::numeric_limits<double>::quiet_NaN();

  if (cc_given) {
    ev.s2 = cc_given->s2;
    ev.mean = cc_given->mean;
  } else {
    const AttractorStats st = attractor_stats(family.primary_series(T));
    ev.s2 = st.variance;
    ev.mean = st.mean;
  }

  const LyapunovResult lr = lyap_given ? *lyap_given : family.lyapunov(T);
  ev.lambda_max = lr.lambda_max();
  ev.lambda_std_error = lr.std_error;

  if (ev.s2 < kFixpointVariance || ev.lambda_max < -copts.lambda_tol) {
    verdict.cls = AttractorClass::Fixpoint;
    ev.c12_tail = 1.0;
    return verdict;
  }

  if (std::abs(ev.lambda_max) <= copts.lambda_tol) {
    // neutral leading exponent: limit cycle iff distance scales with delta
    const double horizon =
        copts.horizon > 0.0 ? copts.horizon
                            : 40.0 * family.period_hint(T);
    const int probe_pairs = std::max(4, n_pairs / 10);
    std::vector<double> log_d, log_delta;
    for (int k = 0; k < 3; ++k) {
      const double dk = delta * std::pow(10.0, k);
      log_delta.push_back(std::log(dk));
      log_d.push_back(std::log(asymptotic_distance(family, T, dk, probe_pairs,
                                                   horizon, seed + k)));
    }
    const double n3 = 3.0;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int k = 0; k < 3; ++k) {
      sx += log_delta[k];
      sy += log_d[k];
      sxx += log_delta[k] * log_delta[k];
      sxy += log_delta[k] * log_d[k];
    }
    const double slope = (n3 * sxy - sx * sy) / (n3 * sxx - sx * sx);
    ev.distance_delta_slope = slope;
    verdict.cls = std::abs(slope - 1.0) <= copts.slope_tol
                      ? AttractorClass::LimitCycle
                      : AttractorClass::Unclassified;
    return verdict;
  }

  // positive exponent: decide chaos vs partially predictable chaos from the
  // cross-correlation within the exponential decorrelation window
  const double d0 = delta * delta;
  const double t_dec = std::log(2.0 * ev.s2 / d0) / (2.0 * ev.lambda_max);
  const double lyap_time = 1.0 / ev.lambda_max;
  const double window_end = t_dec + 10.0 * lyap_time;
  const double horizon =
      copts.horizon > 0.0 ? copts.horizon : 1.1 * window_end;
  const CrossCorrelation cc_local =
      cc_given ? CrossCorrelation{}
               : cross_correlation(family, T, delta, n_pairs, horizon, seed);
  const CrossCorrelation& cc = cc_given ? *cc_given : cc_local;

  double tail_sum = 0.0, tail_min = std::numeric_limits<double>::infinity();
  std::size_t count = 0;
  for (std::size_t i = 0; i < cc.time.size(); ++i) {
    if (cc.time[i] < t_dec || cc.time[i] > window_end) continue;
    tail_sum += cc.c12[i];
    tail_min = std::min(tail_min, cc.c12[i]);
    ++count;
  }
  if (count == 0) {
    verdict.cls = AttractorClass::Unclassified;
    return verdict;
  }
  ev.c12_tail = tail_sum / static_cast<double>(count);
  if (ev.c12_tail < copts.chaos_c12_tail) {
    verdict.cls = AttractorClass::Chaos;
  } else if (tail_min > copts.ppc_c12_plateau) {
    verdict.cls = AttractorClass::PartiallyPredictableChaos;
  } else {
    verdict.cls = AttractorClass::Unclassified;
  }
  return verdict;
}

}  // namespace

ChaosVerdict classify(const SystemFamily& family, double T, double delta,
                      int n_pairs, std::uint64_t seed,
                      const ClassifyOptions& copts) {
  return classify_impl(family, T, delta, n_pairs, seed, copts, nullptr,
                       nullptr);
}

ChaosVerdict classify_given(const SystemFamily& family, double T,
                            const CrossCorrelation& cc,
                            const LyapunovResult& lyap,
                            const ClassifyOptions& copts) {
  return classify_impl(family, T, cc.delta, cc.pairs, cc.seed, copts, &cc,
                       &lyap);
}

}  // namespace delaychain
