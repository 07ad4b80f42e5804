#pragma once

#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "delaychain/kernels.hpp"

namespace delaychain {

/// One delayed feedback term: lag and its relative weight.
struct DelaySpec {
  double delay = 0.0;
  double weight = 1.0;
};

struct MackeyGlassParams {
  double alpha = 0.2;
  double beta = 0.1;
  double gamma = 10.0;
};

/// Coefficients of dx/dt = -c - b x(t) - a h(t).
struct LinearDelayParams {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
};

/// Right-hand side F(t, x, h) of a scalar delay system; h carries one
/// delayed value per entry of `delays` (weights are applied inside F for
/// weighted-history systems).
using DelayRhs =
    std::function<double(double t, double x, std::span<const double> h)>;
using DelayPartialX =
    std::function<double(double t, double x, std::span<const double> h)>;
using DelayPartialH = std::function<double(double t, double x,
                                           std::span<const double> h, int j)>;

/// A scalar system with delayed feedback. Weights must sum to 1.
struct DelaySystem {
  std::string name;
  std::vector<DelaySpec> delays;
  DelayRhs rhs;
  DelayPartialX rhs_dx;  // optional analytic dF/dx
  DelayPartialH rhs_dh;  // optional analytic dF/dh_j
  std::map<std::string, double> params;

  void validate() const;
  bool single_delay() const { return delays.size() == 1; }
  double max_delay() const;

  /// dF/dx, analytic when available, else central differences.
  double partial_x(double t, double x, std::span<const double> h) const;
  /// dF/dh_j, analytic when available, else central differences.
  double partial_h(double t, double x, std::span<const double> h, int j) const;
};

DelaySystem make_mackey_glass(const MackeyGlassParams& p,
                              std::vector<DelaySpec> delays);
DelaySystem make_linear(const LinearDelayParams& p,
                        std::vector<DelaySpec> delays);

/// Fixpoints of the Mackey-Glass production term: x1* = 0 always; the
/// nontrivial x2* = (alpha/beta - 1)^(1/gamma) exists iff alpha > beta.
struct MackeyGlassFixpoints {
  double trivial = 0.0;
  std::optional<double> nontrivial;
};
MackeyGlassFixpoints mackey_glass_fixpoints(const MackeyGlassParams& p);

/// Linearizes a delay system around the fixpoint x_star, returning the
/// coefficients of the expanded system (a = -dF/dh under a uniform history
/// shift, b = -dF/dx). Derivatives by central differences with step 1e-6,
/// Richardson-refined.
LinearDelayParams linearize_at_fixpoint(const DelaySystem& sys, double x_star);

/// Initial function phi(s) for s <= 0. Constant functions short-circuit
/// the kernel convolutions in init_chain_state; sampled segments resume a
/// previous run with cubic Hermite interpolation between stored nodes.
class InitialFunction {
public:
  struct Segment {
    double dt = 0.0;
    std::vector<double> values;  // oldest first; last entry is phi(0-)
    std::vector<double> derivs;
  };

  static InitialFunction constant(double c);
  static InitialFunction of(std::function<double(double)> f,
                            double coverage = std::numeric_limits<double>::infinity());
  static InitialFunction segment(Segment seg);

  double operator()(double s) const;
  double coverage() const noexcept { return coverage_; }
  bool is_constant() const noexcept { return constant_.has_value(); }
  double constant_value() const { return *constant_; }

  /// Same history shifted by a constant offset.
  InitialFunction shifted(double offset) const;

private:
  InitialFunction() = default;
  std::function<double(double)> fn_;
  std::optional<double> constant_;
  double coverage_ = 0.0;
};

/// The chain realization of a delay system: the primary variable plus one
/// block of auxiliary variables per delay, each block a linear relay chain
/// feeding F its delayed history through the block's last variable.
class ChainSystem {
public:
  ChainSystem(DelaySystem base, std::vector<int> orders);

  int dimension() const noexcept { return dimension_; }
  const DelaySystem& base() const noexcept { return base_; }
  const std::vector<int>& orders() const noexcept { return orders_; }

  /// First state index of chain j (chain entries run to tail_index(j)).
  int block_start(int j) const { return offsets_[j]; }
  /// Index of the last variable in chain j: the delayed value fed to F.
  int tail_index(int j) const { return offsets_[j] + orders_[j] - 1; }

  /// Suggested integrator step: min(0.01, min_j T_j/(2 N_j)).
  double step_hint() const noexcept { return step_hint_; }

  /// Hard stability bound for the explicit integrator: half the fastest
  /// chain relaxation time.
  double max_stable_step() const noexcept { return stability_cap_; }

  void eval(double t, std::span<const double> y, std::span<double> dy) const;

  /// Flow plus tangent dynamics (variational system along the trajectory).
  void eval_with_tangent(double t, std::span<const double> y,
                         std::span<const double> v, std::span<double> dy,
                         std::span<double> dv) const;

  /// Tangent dynamics only, for callers that already evaluated the flow.
  void eval_tangent(double t, std::span<const double> y,
                    std::span<const double> v, std::span<double> dv) const;

  /// Analytic divergence of the flow: dF/dx - sum_j N_j^2 / T_j.
  double divergence(double t, std::span<const double> y) const;

private:
  void gather_tails(std::span<const double> y, std::span<double> h) const;

  DelaySystem base_;
  std::vector<int> orders_;
  std::vector<int> offsets_;
  std::vector<double> inv_relax_;  // N_j / T_j per chain
  int dimension_ = 0;
  double step_hint_ = 0.0;
  double stability_cap_ = 0.0;
};

/// Single-delay chain of the given order.
ChainSystem build_chain(const DelaySystem& sys, int order);

/// One chain per delay; orders.size() must match the delay count.
ChainSystem build_multi_chain(const DelaySystem& sys, std::vector<int> orders);

/// State vector realizing phi: x0 = phi(0-), each auxiliary variable the
/// kernel-weighted integral of phi. Constant phi fills all components
/// exactly. Throws CoverageError when phi does not reach far enough back.
std::vector<double> init_chain_state(const ChainSystem& chain,
                                     const InitialFunction& phi);

}  // namespace delaychain
