#include "bandlab/chain.hpp"

#include <Eigen/Dense>

#include <cmath>

namespace bandlab {

BlockTridiagonal sample_band_matrix(int N, int M, RngStream& rng) {
  BlockTridiagonal a;
  a.N = N;
  a.M = M;
  a.diag.reserve(N);
  a.offdiag.reserve(N > 0 ? N - 1 : 0);
  for (int k = 0; k < N; ++k) {
    a.diag.push_back(sample_goe_block(M, rng));
    if (k + 1 < N) a.offdiag.push_back(sample_gaussian_block(M, rng));
  }
  return a;
}

Matrix flatten(const BlockTridiagonal& a) {
  const int n = a.N * a.M;
  Matrix full = Matrix::Zero(n, n);
  for (int k = 0; k < a.N; ++k) {
    full.block(k * a.M, k * a.M, a.M, a.M) = a.diag[k].mat();
    if (k + 1 < a.N) {
      full.block(k * a.M, (k + 1) * a.M, a.M, a.M) = a.offdiag[k];
      full.block((k + 1) * a.M, k * a.M, a.M, a.M) = a.offdiag[k].transpose();
    }
  }
  return full;
}

namespace {

ChainState make_state(int k, SymMatrix d, Matrix product, double log_norm) {
  ChainState st;
  st.k = k;
  st.S = operator_norm(d);
  st.bar_D = d.scaled(1.0 / st.S);
  st.D = std::move(d);
  const double p_norm = operator_norm(product);
  st.log_norm = log_norm + std::log(p_norm);
  st.scaled_product = product / p_norm;
  return st;
}

}  // namespace

ChainState chain_init(const SymMatrix& a11, double lambda) {
  SymMatrix d1 = a11;
  d1.shift_diagonal(lambda);
  const SymMatrix d1_inv = sym_inverse(d1);
  return make_state(1, std::move(d1), d1_inv.mat(), 0.0);
}

ChainState chain_step(const ChainState& state, const SymMatrix& a_next,
                      const Matrix& a_off, double lambda) {
  const Matrix b = -a_off;  // B_k = -A_{k,k+1}
  const SymMatrix d_inv = sym_inverse(state.D);
  // D_{k+1} = A_{k+1,k+1} - lambda - B^T D_k^{-1} B, symmetrized exactly.
  SymMatrix d_next = SymMatrix::symmetrize(
      a_next.mat() - b.transpose() * (d_inv.mat() * b));
  d_next.shift_diagonal(lambda);
  const SymMatrix d_next_inv = sym_inverse(d_next);
  // Product gains the factor B_k D_{k+1}^{-1}; renormalized in make_state.
  Matrix product = state.scaled_product * (b * d_next_inv.mat());
  return make_state(state.k + 1, std::move(d_next), std::move(product),
                    state.log_norm);
}

CornerLogNorm corner_log_norm(const BlockTridiagonal& a, double lambda) {
  CornerLogNorm out;
  out.trace.reserve(a.N);
  ChainState st = chain_init(a.diag[0], lambda);
  out.trace.push_back({st.k, st.S, st.log_norm});
  for (int k = 1; k < a.N; ++k) {
    st = chain_step(st, a.diag[k], a.offdiag[k - 1], lambda);
    out.trace.push_back({st.k, st.S, st.log_norm});
  }
  out.log_norm = st.log_norm;
  return out;
}

CornerLogNorm corner_log_norm_streaming(int N, int M, double lambda,
                                        RngStream& rng) {
  CornerLogNorm out;
  out.trace.reserve(N);
  ChainState st = chain_init(sample_goe_block(M, rng), lambda);
  out.trace.push_back({st.k, st.S, st.log_norm});
  for (int k = 1; k < N; ++k) {
    const Matrix a_off = sample_gaussian_block(M, rng);
    const SymMatrix a_next = sample_goe_block(M, rng);
    st = chain_step(st, a_next, a_off, lambda);
    out.trace.push_back({st.k, st.S, st.log_norm});
  }
  out.log_norm = st.log_norm;
  return out;
}

Matrix corner_direct(const BlockTridiagonal& a, double lambda) {
  const int n = a.N * a.M;
  if (n > 2048) throw DomainError("corner_direct: N*M exceeds 2048");
  Matrix full = flatten(a);
  full.diagonal().array() -= lambda;
  Eigen::PartialPivLU<Matrix> lu(full);
  const Matrix& u = lu.matrixLU();
  const double floor = 1e-12 * full.norm();
  for (int i = 0; i < n; ++i) {
    if (std::abs(u(i, i)) < floor || u(i, i) == 0.0) {
      throw NearSingular("corner_direct: pivot below 1e-12 * ||A - lambda||_F");
    }
  }
  // Solve for the last M columns of the inverse and keep the top M rows.
  Matrix rhs = Matrix::Zero(n, a.M);
  rhs.block(n - a.M, 0, a.M, a.M) = Matrix::Identity(a.M, a.M);
  const Matrix cols = lu.solve(rhs);
  return cols.topRows(a.M);
}

}  // namespace bandlab
