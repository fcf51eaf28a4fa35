#pragma once

#include <vector>

#include "bandlab/linalg.hpp"
#include "bandlab/rng.hpp"
#include "bandlab/types.hpp"

namespace bandlab {

// Symmetric block tridiagonal operator: N diagonal blocks A_{k,k} and N-1
// superdiagonal blocks A_{k,k+1}, each M x M.  The subdiagonal blocks are the
// transposes of the superdiagonal ones and are never stored.
struct BlockTridiagonal {
  int N = 0;
  int M = 0;
  std::vector<SymMatrix> diag;  // A_{1,1} .. A_{N,N}
  std::vector<Matrix> offdiag;  // A_{1,2} .. A_{N-1,N}
};

// Draws the band ensemble: diagonal blocks are symmetric Gaussian blocks,
// superdiagonal blocks have i.i.d. N(0, 1/M) entries, all independent.
// Draw order is A_{1,1}, A_{1,2}, A_{2,2}, A_{2,3}, ... so a streaming
// consumer sees the same stream as a materialized one.
BlockTridiagonal sample_band_matrix(int N, int M, RngStream& rng);

// The NM x NM dense form.
Matrix flatten(const BlockTridiagonal& a);

// Per-step state of the Schur recursion D_{k+1} = A_{k+1,k+1} - lambda
// - B_k^T D_k^{-1} B_k with B_k = -A_{k,k+1}, carrying the renormalized
// running product D_1^{-1} B_1 ... D_k^{-1} and its accumulated log norm.
struct ChainState {
  int k = 0;             // 1-based index of D_k
  SymMatrix D;           // D_k
  double S = 0.0;        // S_k = ||D_k|| (operator norm)
  SymMatrix bar_D;       // D_k / S_k, operator norm 1
  Matrix scaled_product; // running product scaled to operator norm 1
  double log_norm = 0.0; // log || D_1^{-1} B_1 ... D_k^{-1} ||
};

ChainState chain_init(const SymMatrix& a11, double lambda);

ChainState chain_step(const ChainState& state, const SymMatrix& a_next,
                      const Matrix& a_off, double lambda);

struct ChainStepSummary {
  int k;
  double S;
  double log_norm;
};

struct CornerLogNorm {
  double log_norm;
  std::vector<ChainStepSummary> trace;
};

// log || D_1^{-1} B_1 D_2^{-1} ... B_{N-1} D_N^{-1} || via the renormalized
// running product.  Throws NearSingular if any D_k is degenerate.
CornerLogNorm corner_log_norm(const BlockTridiagonal& a, double lambda);

// Streaming variant: samples the blocks on the fly (same draw order as
// sample_band_matrix) without materializing the operator.  Identical result
// to corner_log_norm(sample_band_matrix(N, M, rng), lambda) for an equal
// stream.
CornerLogNorm corner_log_norm_streaming(int N, int M, double lambda,
                                        RngStream& rng);

// Dense oracle: the (1,N) M x M block of (A - lambda)^{-1} via full
// factorization of the flattened matrix.  Requires N*M <= 2048.
Matrix corner_direct(const BlockTridiagonal& a, double lambda);

}  // namespace bandlab
