#include "bandlab/special.hpp"

#include "bandlab/errors.hpp"

namespace bandlab {

double trigamma(double x) {
  if (!(x > 0.0)) throw DomainError("trigamma: requires x > 0");
  // psi'(x) = sum_{k>=0} 1/(x+k)^2.  Sum the first K terms directly, then
  // close with the Euler-Maclaurin tail at z = x + K.
  constexpr int kDirectTerms = 64;
  double sum = 0.0;
  for (int k = 0; k < kDirectTerms; ++k) {
    const double d = x + k;
    sum += 1.0 / (d * d);
  }
  const double z = x + kDirectTerms;
  const double z2 = z * z;
  const double tail =
      1.0 / z + 1.0 / (2.0 * z2) + 1.0 / (6.0 * z2 * z) -
      1.0 / (30.0 * z2 * z2 * z) + 1.0 / (42.0 * z2 * z2 * z2 * z);
  return sum + tail;
}

}  // namespace bandlab
