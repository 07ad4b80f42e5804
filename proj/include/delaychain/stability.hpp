#pragma once

#include <complex>
#include <vector>

namespace delaychain {

/// A root of a characteristic equation, with the residual at the solution.
struct EigenResult {
  std::complex<double> lambda{0.0, 0.0};
  double T = 0.0;
  double order = 0.0;  // chain order; infinity marks the sharp-delay limit
  bool converged = false;
  double residual = 0.0;
};

enum class HopfMethod { analytic, continuation, perturbation };

struct HopfResult {
  double T_hopf = 0.0;
  double q_hopf = 0.0;
  double order = 0.0;  // infinity for the sharp-delay result
  HopfMethod method = HopfMethod::analytic;
};

/// Critical delay of dx/dt = -b x - a x(t-T): arccos(-b/a)/sqrt(a^2-b^2),
/// with crossing frequency q = sqrt(a^2-b^2). Requires a > |b|.
HopfResult hopf_analytic(double a, double b);

/// Newton iteration on lambda + b + a exp(-lambda T) from the given seed.
EigenResult dde_root(double a, double b, double T, std::complex<double> seed);

/// Rightmost characteristic root of the delay equation, found by
/// continuation in T from the analytic Hopf point (complex branch) and a
/// bracketed search for real roots; the larger real part wins.
EigenResult dde_rightmost(double a, double b, double T);

/// Characteristic polynomial of the order-N chain at lambda, evaluated in
/// log form so N in the thousands stays in range. Throws on the log pole
/// at 1 + T lambda / N = 0.
std::complex<double> chain_poly(double a, double b, double T, int N,
                                std::complex<double> lambda);

/// Rightmost root of the chain characteristic polynomial: Newton seeded
/// from the delay-equation root (or a caller-provided seed under
/// continuation), with a full eigensolve fallback for N <= 2000.
EigenResult chain_rightmost(double a, double b, double T, int N);
EigenResult chain_rightmost_seeded(double a, double b, double T, int N,
                                   std::complex<double> seed);

/// All eigenvalues of the chain Jacobian at the origin fixpoint
/// (dense eigensolve; meant for N <= 2000).
std::vector<std::complex<double>> chain_spectrum(double a, double b, double T,
                                                 int N);

/// Finite-order Hopf point: bisection in T on the real part of the
/// rightmost chain root, refined to |Re lambda| < 1e-10. Throws
/// NoHopfError when no crossing exists in (0, 50] (N = 1, and other small
/// orders for some coefficient ratios).
HopfResult hopf_chain(double a, double b, int N);

/// First-order perturbative estimate T_hopf + k1/N.
HopfResult hopf_perturbation(double a, double b, double N);
/// The closed-form first-order coefficient k1(a, b).
double hopf_perturbation_k1(double a, double b);

/// |ref - approx| / |ref|; ref must be nonzero.
double relative_deviation(double ref, double approx);

/// (T, lambda) samples of the rightmost-root branch, for trace exports.
struct BranchPoint {
  double T;
  std::complex<double> lambda;
};
std::vector<BranchPoint> trace_dde_branch(double a, double b, double T_lo,
                                          double T_hi, double dT);
std::vector<BranchPoint> trace_chain_branch(double a, double b, int N,
                                            double T_lo, double T_hi,
                                            double dT);

}  // namespace delaychain
