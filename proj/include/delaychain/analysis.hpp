#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "delaychain/integrate.hpp"
#include "delaychain/systems.hpp"

namespace delaychain {

/// Settings shared by the diagnostics that integrate a system repeatedly.
/// Transients are counted in oscillation periods because convergence near
/// period-doubling points slows down with a rate proportional to the
/// distance from the critical delay.
struct FamilyOptions {
  double dt = 0.01;                  // capped by the chain step hint
  double sample_dt = 0.05;           // recording step for scalar series
  double transient_periods = 150.0;  // discarded before any diagnostic
  double measure_periods = 60.0;     // analysed window
  double period_factor = 2.9;        // period estimate: factor * delay
  double min_transient = 100.0;      // floor in time units
  LyapunovOptions lyapunov{};        // transient field is filled per T
  int workers = 1;                   // ensemble parallelism
};

/// A delay system parameterized by its average delay, realized either as a
/// chain of the given order or (order absent) by the method of steps.
struct SystemFamily {
  std::function<DelaySystem(double T)> make;
  std::optional<int> order;  // nullopt: sharp delay via method of steps
  InitialFunction phi = InitialFunction::constant(0.9);
  FamilyOptions opts{};

  static SystemFamily mackey_glass(const MackeyGlassParams& p,
                                   std::optional<int> order,
                                   FamilyOptions opts = {});
  static SystemFamily linear(const LinearDelayParams& p,
                             std::optional<int> order,
                             FamilyOptions opts = {});

  bool is_dde() const { return !order.has_value(); }
  double period_hint(double T) const;
  double dt_at(double T) const;
  double transient_at(double T) const;
  ChainSystem chain_at(double T) const;

  /// Post-transient series of the primary variable (chains also record the
  /// feeding tail variable), sampled at ~sample_dt.
  Trajectory primary_series(double T) const;
  /// Same but with state snapshots taken at `count` times spread over the
  /// measurement window.
  Trajectory primary_series_with_snapshots(double T, int count) const;

  LyapunovResult lyapunov(double T) const;
};

// ---------------------------------------------------------------------------
// Period multiplicity

struct MultiplicityResult {
  int clusters = 0;
  bool aperiodic = false;
  int maxima_count = 0;
  bool periodic() const { return !aperiodic; }
};

/// Local maxima of a recorded component: 3-point stencil plus parabolic
/// height refinement.
std::vector<double> local_maxima(const Trajectory& traj, int slot = 0);

/// Clusters maxima heights with the given absolute gap tolerance and
/// returns the cluster count, or aperiodic when the count exceeds 64 or is
/// unstable between the two halves of the window. Throws
/// InsufficientDataError for fewer than 8 maxima.
MultiplicityResult period_multiplicity(const Trajectory& traj,
                                       double tol = 1e-3);

MultiplicityResult multiplicity_at(const SystemFamily& family, double T);

// ---------------------------------------------------------------------------
// Bifurcation refinement

enum class BifurcationKind { Hopf, PD1, PD2, ChaosOnset };

struct BifurcationPoint {
  BifurcationKind kind{};
  double T_c = 0.0;
  double order = 0.0;  // infinity for the sharp-delay system
  double bracket_lo = 0.0;
  double bracket_hi = 0.0;
  int diag_lo = 0;  // multiplicity (PD/Hopf) or chaos flag at the ends
  int diag_hi = 0;
  double bracket_width() const { return bracket_hi - bracket_lo; }
};

struct RefineOptions {
  double bracket_tol = 0.01;
  double lyapunov_tol = 2e-3;  // lambda above this counts as chaotic
};

const char* to_string(BifurcationKind kind);

/// Bisection on T with a fresh transient-discarded integration per probe.
/// PD kinds split on the multiplicity doubling relative to the lower end;
/// ChaosOnset splits on the sign of the maximal Lyapunov exponent. Throws
/// BracketError when both ends show the same diagnostic.
BifurcationPoint find_bifurcation(const SystemFamily& family,
                                  BifurcationKind kind, double T_lo,
                                  double T_hi, const RefineOptions& = {});

// ---------------------------------------------------------------------------
// Stroboscopic projection

/// Pairs (x0(t), x_tail(t - T)). Chain trajectories must carry the primary
/// variable and the feeding tail; sharp-delay trajectories emit
/// (x(t), x(t - 2T)) from the recorded series, which realizes the same
/// projection because the tail variable trails the primary by one delay.
std::vector<std::pair<double, double>> stroboscopic(const Trajectory& traj,
                                                    double T);

// ---------------------------------------------------------------------------
// Cross-correlation chaos test

struct AttractorStats {
  double mean = 0.0;
  double variance = 0.0;
};

AttractorStats attractor_stats(const Trajectory& traj, int slot = 0);

struct CrossCorrelation {
  std::vector<double> time;
  std::vector<double> c12;  // 1 - d12 / (2 s^2)
  std::vector<double> d12;  // ensemble mean squared distance
  double s2 = 0.0;
  double mean = 0.0;
  double delta = 0.0;
  int pairs = 0;
  std::uint64_t seed = 0;
  bool fixpoint = false;  // degenerate attractor short-circuit
};

/// Ensemble average over pairs of trajectories started on the attractor at
/// initial distance delta (constant-offset perturbations, sup norm over
/// components / the history segment). Seeded and reproducible; pair tasks
/// run on opts.workers threads with a deterministic reduction.
CrossCorrelation cross_correlation(const SystemFamily& family, double T,
                                   double delta, int n_pairs, double horizon,
                                   std::uint64_t seed);

/// Mean asymptotic RMS distance (last quarter of the horizon) for a given
/// initial distance; the limit-cycle diagnostic checks this scales
/// linearly in delta.
double asymptotic_distance(const SystemFamily& family, double T, double delta,
                           int n_pairs, double horizon, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Four-way attractor classification

enum class AttractorClass {
  Fixpoint,
  LimitCycle,
  Chaos,
  PartiallyPredictableChaos,
  Unclassified
};

const char* to_string(AttractorClass cls);

struct ChaosEvidence {
  double lambda_max = 0.0;
  double lambda_std_error = 0.0;
  double s2 = 0.0;
  double mean = 0.0;
  double c12_tail = 0.0;
  double distance_delta_slope = 0.0;  // NaN when not evaluated
  double delta = 0.0;
  int pairs = 0;
  std::uint64_t seed = 0;
};

struct ChaosVerdict {
  AttractorClass cls = AttractorClass::Unclassified;
  ChaosEvidence evidence{};
};

struct ClassifyOptions {
  double lambda_tol = 2e-3;
  double chaos_c12_tail = 0.05;
  double ppc_c12_plateau = 0.2;
  double slope_tol = 0.15;
  double horizon = 0.0;  // 0: derived from the decorrelation estimate
};

ChaosVerdict classify(const SystemFamily& family, double T, double delta,
                      int n_pairs, std::uint64_t seed,
                      const ClassifyOptions& = {});

/// Same decision table, reusing an already-computed ensemble and Lyapunov
/// estimate (the limit-cycle branch still runs its own delta-scaling
/// probes).
ChaosVerdict classify_given(const SystemFamily& family, double T,
                            const CrossCorrelation& cc,
                            const LyapunovResult& lyap,
                            const ClassifyOptions& = {});

}  // namespace delaychain
