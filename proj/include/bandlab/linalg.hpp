#pragma once

#include "bandlab/rng.hpp"
#include "bandlab/types.hpp"

namespace bandlab {

// M x M block of i.i.d. N(0, 1/M) entries, filled row-major.
Matrix sample_gaussian_block(int M, RngStream& rng);

// Symmetric Gaussian block G = (E + E^T)/sqrt(2) with E as above; diagonal
// variance 2/M, off-diagonal variance 1/M.  This is the marginal law of a
// diagonal block of the band ensemble (see docs/ensemble.md).
SymMatrix sample_goe_block(int M, RngStream& rng);

inline double frobenius_norm(const Matrix& a) { return a.norm(); }
inline double frobenius_norm(const SymMatrix& a) { return a.mat().norm(); }

// tr(G * H).
double trace_product(const Matrix& g, const Matrix& h);
inline double trace_product(const SymMatrix& g, const SymMatrix& h) {
  return trace_product(g.mat(), h.mat());
}
inline double trace_product(const SymMatrix& g, const Matrix& h) {
  return trace_product(g.mat(), h);
}

// Largest singular value, relative accuracy 1e-10.  Power iteration on A^T A
// from a deterministic all-ones start so repeated runs agree bitwise; a second
// fixed start vector guards against the (measure-zero) case where the first
// start has no component along the top singular direction.
double operator_norm(const Matrix& a);
inline double operator_norm(const SymMatrix& a) { return operator_norm(a.mat()); }

// Inverse of a symmetric matrix with the result exactly symmetrized.
// Throws NearSingular when a pivot magnitude falls below 1e-12 * ||H||_F.
SymMatrix sym_inverse(const SymMatrix& h);

// Number of eigenvalues of H in the closed interval [lo, hi], counted by
// Sylvester inertia of the shifted tridiagonal reduction (Sturm counts).
// Throws NearSingular when a shifted factorization hits an exact zero pivot;
// the caller perturbs the endpoint by 1e-12 and retries once.
int eigen_count_in_interval(const SymMatrix& h, const Interval& I);

// Retry wrapper implementing the documented perturb-once policy.
int eigen_count_in_interval_retry(const SymMatrix& h, const Interval& I);

}  // namespace bandlab
