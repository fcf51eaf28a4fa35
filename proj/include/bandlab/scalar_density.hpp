#pragma once

#include <vector>

#include "bandlab/rng.hpp"
#include "bandlab/types.hpp"

namespace bandlab {

// Coefficients of the polynomial expansion of the conditional log-density
// phi of the chain scalar S_k, in the relative variable s = sigma / S_k:
//
//   phi(s) = a1 s^2 + a2 (s-1)^2 - 2 a3 s (s-1) + a4
//          + a5 (1/s - 1)^2 + 2 a6 (1/s - 1) - a7 log(s S_k)
//
// a1, a2, a4, a5 are scaled squared Frobenius norms (nonnegative); a3, a6 are
// scaled trace couplings; a7 = (M^2 + M - 2) / 2 is the radial Jacobian
// exponent of the symmetric-matrix norm-direction decomposition.
struct AlphaCoefficients {
  double a1 = 0, a2 = 0, a3 = 0, a4 = 0, a5 = 0, a6 = 0, a7 = 0;
  int M = 0;
  double S_k = 1.0;
};

// Builds the coefficients from the chain context at step k:
// A_{k,k}, A_{k+1,k+1}, B_{k-1}, B_k, D_{k-1}, D_k, and lambda.
AlphaCoefficients alpha_coefficients(const SymMatrix& a_kk,
                                     const SymMatrix& a_k1k1,
                                     const Matrix& b_prev, const Matrix& b_k,
                                     const SymMatrix& d_prev,
                                     const SymMatrix& d_k, double lambda);

// phi(s) and its closed-form derivatives in s (the derivatives of
// s -> phi(s S_k) in the absolute variable, i.e. already carrying the S_k
// scalings).  Throw DomainError for s <= 0.
double phi(double s, const AlphaCoefficients& alpha);
double phi_prime(double s, const AlphaCoefficients& alpha);
double phi_double_prime(double s, const AlphaCoefficients& alpha);

// Mean and variance of log s under the density proportional to e^{-phi(s)}
// on (0, infinity).
struct LogMoments {
  double mean_log = 0.0;
  double var_log = 0.0;
  double quad_error = 0.0;
  double t_lo = 0.0;  // quadrature window in t = log s
  double t_hi = 0.0;
};

// Adaptive quadrature in t = log s over the window where the integrand
// exceeds e^{-60} of its maximum.  Relative target 1e-8 on the moments.
// Throws IntegrabilityError when a1 == 0 or a5 == 0.
LogMoments log_moments(const AlphaCoefficients& alpha);

// i.i.d. draws from the normalized density via envelope rejection in
// t = log s with a piecewise-constant majorant on the quadrature window.
std::vector<double> sample_density(const AlphaCoefficients& alpha,
                                   RngStream& rng, int n);

// Checks the three growth inequalities of the conditional log-density on
// log-spaced grids, with the unbounded ranges truncated at s = M^{+-2}:
//   right:     phi'(s) >= M^{2-eps} s         for M^eps   <= s <= M^2
//   left:      phi'(s) <= -M^{2-eps} s^{-3}   for M^{-2}  <= s <= M^{-eps}
//   curvature: |phi''(s)| <= M^{3+eps}(1+s^{-4}) for M^{-2} <= s <= M^2
struct LogConcavityReport {
  bool right_ok = false;
  bool left_ok = false;
  bool curvature_ok = false;
  double s_trunc_lo = 0.0;  // truncation bounds actually used
  double s_trunc_hi = 0.0;
};

LogConcavityReport logconcavity_check(const AlphaCoefficients& alpha,
                                      double epsilon);

// Runs the norm-given-direction machinery on a standard Gaussian vector in
// R^n, where the radial density y^{n-1} e^{-y^2/2} is the chi distribution:
// the quadrature variance of log y must match trigamma(n/2)/4.
struct NormDirectionReport {
  int n = 0;
  double var_log_quad = 0.0;
  double var_log_analytic = 0.0;
  double normalization = 0.0;  // integral of the normalized density
  bool ok = false;
};

NormDirectionReport norm_direction_selftest(int n);

}  // namespace bandlab
