#pragma once

namespace bandlab {

// Trigamma psi'(x) for x > 0, via direct series summation with an
// Euler-Maclaurin tail.  Absolute accuracy better than 1e-14 for x >= 0.5.
double trigamma(double x);

}  // namespace bandlab
