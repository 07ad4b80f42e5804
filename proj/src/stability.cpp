#include "delaychain/stability.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "delaychain/errors.hpp"

namespace delaychain {

namespace {

constexpr double kRootTol = 1e-10;
constexpr double kInf = std::numeric_limits<double>::infinity();

using Complex = std::complex<double>;

Complex dde_char(double a, double b, double T, Complex lam) {
  return lam + b + a * std::exp(-lam * T);
}

/// Largest real root of lambda + b + a exp(-lambda T), if any. For a > 0
/// the function is convex with a single minimum; roots exist only when the
/// minimum dips below zero.
bool dde_real_rightmost(double a, double b, double T, double& root) {
  if (a <= 0.0 || T <= 0.0) return false;
  const double lam_min = std::log(a * T) / T;
  const double g_min = lam_min + b + 1.0 / T;
  if (g_min > 0.0) return false;
  double lo = lam_min;
  double hi = lam_min + 1.0;
  while (dde_char(a, b, T, hi).real() < 0.0) hi += 1.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (dde_char(a, b, T, mid).real() < 0.0)
      lo = mid;
    else
      hi = mid;
  }
  root = 0.5 * (lo + hi);
  return true;
}

}  // namespace

HopfResult hopf_analytic(double a, double b) {
  if (!(a > 0.0) || !(a > std::abs(b)))
    throw NoHopfError("hopf_analytic: requires a > |b| and a > 0");
  const double q = std::sqrt(a * a - b * b);
  HopfResult res;
  res.T_hopf = std::acos(-b / a) / q;
  res.q_hopf = q;
  res.order = kInf;
  res.method = HopfMethod::analytic;
  return res;
}

EigenResult dde_root(double a, double b, double T, Complex seed) {
  EigenResult res;
  res.T = T;
  res.order = kInf;
  Complex lam = seed;
  for (int i = 0; i < 100; ++i) {
    const Complex f = dde_char(a, b, T, lam);
    const Complex d = 1.0 - a * T * std::exp(-lam * T);
    if (d == Complex(0.0, 0.0)) break;
    const Complex step = f / d;
    lam -= step;
    if (!std::isfinite(lam.real()) || !std::isfinite(lam.imag())) break;
    if (std::abs(step) < 1e-14 * (1.0 + std::abs(lam))) {
      res.lambda = lam;
      res.residual = std::abs(dde_char(a, b, T, lam));
      res.converged = res.residual < kRootTol;
      return res;
    }
  }
  res.lambda = lam;
  res.residual = std::abs(dde_char(a, b, T, lam));
  res.converged = false;
  return res;
}

EigenResult dde_rightmost(double a, double b, double T) {
  if (!(T > 0.0)) throw ConfigError("dde_rightmost: T must be positive");
  EigenResult best;
  best.T = T;
  best.order = kInf;
  best.converged = false;
  best.lambda = Complex(-kInf, 0.0);

  double real_root = 0.0;
  if (dde_real_rightmost(a, b, T, real_root)) {
    EigenResult r = dde_root(a, b, T, Complex(real_root, 0.0));
    if (r.converged) best = r;
  }

  // oscillatory branch, continued from the analytic crossing
  if (a > std::abs(b) && a > 0.0) {
    const HopfResult h = hopf_analytic(a, b);
    Complex lam(0.0, h.q_hopf);
    const double span = T - h.T_hopf;
    const int steps = std::max(1, static_cast<int>(std::ceil(std::abs(span) / 0.1)));
    bool ok = true;
    for (int i = 1; i <= steps && ok; ++i) {
      const double Tk = h.T_hopf + span * static_cast<double>(i) / steps;
      EigenResult r = dde_root(a, b, Tk, lam);
      ok = r.converged;
      lam = r.lambda;
    }
    if (ok) {
      EigenResult r = dde_root(a, b, T, lam);
      if (r.converged && r.lambda.real() > best.lambda.real()) best = r;
    }
  }

  if (!std::isfinite(best.lambda.real()))
    return dde_root(a, b, T, Complex(-(a + b), 0.0));
  if (best.lambda.imag() < 0.0) best.lambda = std::conj(best.lambda);
  return best;
}

std::complex<double> chain_poly(double a, double b, double T, int N,
                                Complex lambda) {
  const double tn = T / static_cast<double>(N);
  const Complex w = 1.0 + tn * lambda;
  if (std::abs(w) < 1e-280)
    throw std::domain_error("chain_poly: log pole at 1 + T lambda / N = 0");
  return (b + lambda) * std::exp(static_cast<double>(N) * std::log(w)) + a;
}

namespace {

EigenResult chain_newton(double a, double b, double T, int N, Complex seed) {
  EigenResult res;
  res.T = T;
  res.order = static_cast<double>(N);
  const double tn = T / static_cast<double>(N);
  Complex lam = seed;
  for (int i = 0; i < 100; ++i) {
    const Complex w = 1.0 + tn * lam;
    if (std::abs(w) < 1e-12) break;  // too close to the log pole
    const Complex e = std::exp(static_cast<double>(N - 1) * std::log(w));
    const Complex p = (b + lam) * e * w + a;
    const Complex dp = e * (w + static_cast<double>(N) * tn * (b + lam));
    if (dp == Complex(0.0, 0.0)) break;
    const Complex step = p / dp;
    lam -= step;
    if (!std::isfinite(lam.real()) || !std::isfinite(lam.imag())) break;
    if (std::abs(step) < 1e-14 * (1.0 + std::abs(lam))) {
      res.lambda = lam;
      res.residual = std::abs(chain_poly(a, b, T, N, lam));
      res.converged = res.residual < kRootTol;
      return res;
    }
  }
  res.lambda = lam;
  res.residual = std::abs(chain_poly(a, b, T, N, lam));
  res.converged = false;
  return res;
}

EigenResult spectrum_rightmost(double a, double b, double T, int N) {
  EigenResult res;
  res.T = T;
  res.order = static_cast<double>(N);
  const auto ev = chain_spectrum(a, b, T, N);
  Complex top(-kInf, 0.0);
  for (const auto& l : ev)
    if (l.real() > top.real()) top = l;
  if (top.imag() < 0.0) top = std::conj(top);
  res.lambda = top;
  res.residual = std::abs(chain_poly(a, b, T, N, top));
  res.converged = true;
  return res;
}

// Below this order a dense eigensolve is cheap enough to verify that
// Newton landed on the rightmost root and not a neighbor.
constexpr int kVerifyOrder = 128;

}  // namespace

std::vector<std::complex<double>> chain_spectrum(double a, double b, double T,
                                                 int N) {
  if (N < 1 || N > 2000)
    throw ConfigError("chain_spectrum: order must lie in [1, 2000]");
  const double inv = static_cast<double>(N) / T;
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(N + 1, N + 1);
  J(0, 0) = -b;
  J(0, N) = -a;
  for (int m = 1; m <= N; ++m) {
    J(m, m - 1) = inv;
    J(m, m) = -inv;
  }
  Eigen::EigenSolver<Eigen::MatrixXd> solver(J, /*computeEigenvectors=*/false);
  std::vector<Complex> out(N + 1);
  for (int i = 0; i <= N; ++i) out[i] = solver.eigenvalues()[i];
  return out;
}

EigenResult chain_rightmost_seeded(double a, double b, double T, int N,
                                   Complex seed) {
  EigenResult r = chain_newton(a, b, T, N, seed);
  if (r.converged && N <= kVerifyOrder) {
    EigenResult exact = spectrum_rightmost(a, b, T, N);
    if (exact.lambda.real() > r.lambda.real() + 1e-9) {
      EigenResult polished = chain_newton(a, b, T, N, exact.lambda);
      return polished.converged ? polished : exact;
    }
  }
  if (!r.converged && N <= 2000) {
    EigenResult exact = spectrum_rightmost(a, b, T, N);
    EigenResult polished = chain_newton(a, b, T, N, exact.lambda);
    return polished.converged ? polished : exact;
  }
  if (r.lambda.imag() < 0.0) r.lambda = std::conj(r.lambda);
  return r;
}

EigenResult chain_rightmost(double a, double b, double T, int N) {
  if (N < 1) throw ConfigError("chain_rightmost: order must be >= 1");
  const EigenResult seed = dde_rightmost(a, b, T);
  return chain_rightmost_seeded(a, b, T, N, seed.lambda);
}

HopfResult hopf_chain(double a, double b, int N) {
  if (N < 1) throw ConfigError("hopf_chain: order must be >= 1");
  if (!(a > 0.0) || !(a > std::abs(b)))
    throw NoHopfError("hopf_chain: no crossing exists for a <= |b|");
  const HopfResult sharp = hopf_analytic(a, b);
  constexpr double kScanLimit = 50.0;

  // continuation cache: reuse the nearest computed root as the next seed
  std::vector<std::pair<double, Complex>> cache;
  auto root_at = [&](double T) {
    Complex seed;
    if (cache.empty()) {
      seed = dde_rightmost(a, b, T).lambda;
    } else {
      const auto it = std::min_element(
          cache.begin(), cache.end(), [T](const auto& u, const auto& v) {
            return std::abs(u.first - T) < std::abs(v.first - T);
          });
      seed = it->second;
    }
    EigenResult r = chain_rightmost_seeded(a, b, T, N, seed);
    if (!r.converged)
      throw DiagnosticError("hopf_chain: root tracking lost at T = " +
                            std::to_string(T));
    cache.emplace_back(T, r.lambda);
    return r;
  };

  double lo = sharp.T_hopf;
  EigenResult r_lo = root_at(lo);
  if (r_lo.lambda.real() >= 0.0)
    throw DiagnosticError("hopf_chain: expected stability at the sharp-limit "
                          "crossing");
  double hi = lo;
  EigenResult r_hi = r_lo;
  bool found = false;
  while (hi < kScanLimit) {
    hi = std::min(hi + 0.5, kScanLimit);
    r_hi = root_at(hi);
    if (r_hi.lambda.real() > 0.0) {
      found = true;
      break;
    }
    lo = hi;
  }
  if (!found)
    throw NoHopfError("hopf_chain: no Hopf crossing for N = " +
                      std::to_string(N) + " with T in (0, 50]");

  EigenResult mid_root = r_hi;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    mid_root = root_at(mid);
    if (std::abs(mid_root.lambda.real()) < kRootTol) {
      lo = hi = mid;
      break;
    }
    if (mid_root.lambda.real() > 0.0)
      hi = mid;
    else
      lo = mid;
    if (hi - lo < 1e-14 * hi) break;
  }

  HopfResult res;
  res.T_hopf = 0.5 * (lo + hi);
  res.q_hopf = std::abs(mid_root.lambda.imag());
  res.order = static_cast<double>(N);
  res.method = HopfMethod::continuation;
  return res;
}

double hopf_perturbation_k1(double a, double b) {
  if (!(a > 0.0) || !(a > std::abs(b)))
    throw NoHopfError("hopf_perturbation: requires a > |b| and a > 0");
  const double ac = std::acos(-b / a);
  const double disc = a * a - b * b;
  return ac * ac * (b * std::sqrt(disc) + a * a * ac) /
         (2.0 * std::pow(disc, 1.5));
}

HopfResult hopf_perturbation(double a, double b, double N) {
  const HopfResult sharp = hopf_analytic(a, b);
  HopfResult res = sharp;
  res.T_hopf = sharp.T_hopf + hopf_perturbation_k1(a, b) / N;
  res.order = N;
  res.method = HopfMethod::perturbation;
  return res;
}

double relative_deviation(double ref, double approx) {
  if (ref == 0.0)
    throw DiagnosticError("relative_deviation: zero reference value");
  return std::abs(ref - approx) / std::abs(ref);
}

std::vector<BranchPoint> trace_dde_branch(double a, double b, double T_lo,
                                          double T_hi, double dT) {
  std::vector<BranchPoint> out;
  for (double T = T_lo; T <= T_hi + 1e-12; T += dT)
    out.push_back({T, dde_rightmost(a, b, T).lambda});
  return out;
}

std::vector<BranchPoint> trace_chain_branch(double a, double b, int N,
                                            double T_lo, double T_hi,
                                            double dT) {
  std::vector<BranchPoint> out;
  Complex seed = dde_rightmost(a, b, T_lo).lambda;
  for (double T = T_lo; T <= T_hi + 1e-12; T += dT) {
    EigenResult r = chain_rightmost_seeded(a, b, T, N, seed);
    if (r.converged) seed = r.lambda;
    out.push_back({T, r.lambda});
  }
  return out;
}

}  // namespace delaychain
