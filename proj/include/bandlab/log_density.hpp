#pragma once

#include <functional>

namespace bandlab {

// Machinery for 1-D weights w(t) = exp(-psi(t)) on the real line, where psi
// is smooth and grows at both ends.  Used for the conditional scalar density
// in t = log s and for the radial (chi) self-test in t = log y.

struct DensityWindow {
  double t_lo = 0.0;
  double t_hi = 0.0;
  double t_mode = 0.0;   // argmin of psi
  double psi_min = 0.0;  // psi(t_mode)
};

// Locates the mode by a downhill bracket plus golden-section search, then
// expands outward until psi - psi_min >= drop on both sides.  A fine-grid
// validation pass re-centers if a deeper minimum is found inside the window.
DensityWindow locate_window(const std::function<double(double)>& psi,
                            double t_guess, double drop = 60.0);

struct DensityMoments {
  double mass = 0.0;  // integral of exp(-(psi - psi_min)) over the window
  double mean = 0.0;  // mean of t under the normalized weight
  double var = 0.0;   // variance of t
  double err = 0.0;   // quadrature + truncation error estimate on var
  long long nodes = 0;
};

// Composite Simpson with grid doubling until mean and variance stabilize to
// rel_tol (relative to max(1, |value|)).
DensityMoments integrate_moments(const std::function<double(double)>& psi,
                                 const DensityWindow& window,
                                 double rel_tol = 1e-9);

// Integral of exp(-(psi - psi_min)) over the window on a grid of n uniform
// Simpson panels (n even).  Exposed for normalization cross-checks.
double integrate_mass(const std::function<double(double)>& psi,
                      const DensityWindow& window, int panels);

}  // namespace bandlab
