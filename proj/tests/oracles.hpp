// Test-only oracles, kept independent of the library paths they check:
// eigendecompositions and SVDs come straight from Eigen solvers, the direct
// conditional-density evaluation works on the raw matrices, and the dense
// Schur complement uses a full LU solve.
#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "bandlab/chain.hpp"
#include "bandlab/types.hpp"

namespace oracles {

using bandlab::Matrix;
using bandlab::SymMatrix;

// Largest singular value via full eigendecomposition of A^T A.
inline double operator_norm_eig(const Matrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(a.transpose() * a);
  return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

// Largest singular value via Jacobi SVD.
inline double operator_norm_svd(const Matrix& a) {
  return Eigen::JacobiSVD<Matrix>(a).singularValues()(0);
}

// Eigenvalue count in [lo, hi] via full symmetric eigendecomposition.
inline int eigen_count_eig(const SymMatrix& h, double lo, double hi) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(h.mat());
  int count = 0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    const double v = es.eigenvalues()(i);
    if (v >= lo && v <= hi) ++count;
  }
  return count;
}

// Dense Schur complement of the leading block of the flattened 2x2-block
// matrix: A22 - lambda - A12^T (A11 - lambda)^{-1} A12.
inline Matrix schur_complement_2block(const SymMatrix& a11, const SymMatrix& a22,
                                      const Matrix& a12, double lambda) {
  const Eigen::Index m = a11.dim();
  Matrix d1 = a11.mat();
  d1.diagonal().array() -= lambda;
  Matrix d2 = a22.mat();
  d2.diagonal().array() -= lambda;
  return d2 - a12.transpose() * d1.fullPivLu().solve(a12);
}

// Direct evaluation of the conditional log-density of the chain scalar at
// relative position s, from the raw matrices (no alpha expansion):
//   M/4 ||s D_k + lambda + B'^T D'^{-1} B'||_F^2
// + M/4 ||D_{k+1} + lambda + s^{-1} B^T D_k^{-1} B||_F^2
// - (M^2+M-2)/2 log(s ||D_k||)
// with D_{k+1} produced by the recursion from A_{k+1,k+1}.
inline double phi_direct(double s, const SymMatrix& a_k1k1,
                         const Matrix& b_prev, const Matrix& b_k,
                         const SymMatrix& d_prev, const SymMatrix& d_k,
                         double lambda) {
  const auto m = static_cast<double>(d_k.dim());
  const Eigen::Index dim = d_k.dim();
  const Matrix eye = Matrix::Identity(dim, dim);

  const Matrix w_prev =
      b_prev.transpose() * d_prev.mat().fullPivLu().solve(b_prev);
  const Matrix w_k = b_k.transpose() * d_k.mat().fullPivLu().solve(b_k);
  const Matrix d_next = a_k1k1.mat() - lambda * eye - w_k;

  const double term1 =
      0.25 * m * (s * d_k.mat() + lambda * eye + w_prev).squaredNorm();
  const double term2 =
      0.25 * m * (d_next + lambda * eye + (1.0 / s) * w_k).squaredNorm();
  const double s_k = operator_norm_svd(d_k.mat());
  const double exponent = 0.5 * (m * m + m - 2.0);
  return term1 + term2 - exponent * std::log(s * s_k);
}

// Trapezoid CDF of the normalized density proportional to exp(-psi(t)) on a
// uniform grid; for KS comparisons against samplers.
struct GridCdf {
  std::vector<double> t;
  std::vector<double> cdf;

  double operator()(double x) const {
    if (x <= t.front()) return 0.0;
    if (x >= t.back()) return 1.0;
    const auto it = std::upper_bound(t.begin(), t.end(), x);
    const std::size_t i = it - t.begin() - 1;
    const double frac = (x - t[i]) / (t[i + 1] - t[i]);
    return cdf[i] + frac * (cdf[i + 1] - cdf[i]);
  }
};

template <class Psi>
GridCdf grid_cdf(Psi&& psi, double t_lo, double t_hi, int n) {
  GridCdf g;
  g.t.resize(n + 1);
  g.cdf.resize(n + 1);
  std::vector<double> w(n + 1);
  double psi_min = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= n; ++i) {
    g.t[i] = t_lo + (t_hi - t_lo) * i / n;
    w[i] = psi(g.t[i]);
    psi_min = std::min(psi_min, w[i]);
  }
  double acc = 0.0;
  g.cdf[0] = 0.0;
  for (int i = 1; i <= n; ++i) {
    acc += 0.5 * (std::exp(-(w[i - 1] - psi_min)) + std::exp(-(w[i] - psi_min))) *
           (g.t[i] - g.t[i - 1]);
    g.cdf[i] = acc;
  }
  for (auto& c : g.cdf) c /= acc;
  return g;
}

// Series trigamma, independent of the library implementation: plain partial
// sum with a three-term integral tail.
inline double trigamma_series(double x) {
  double sum = 0.0;
  const int K = 4000;
  for (int k = 0; k < K; ++k) sum += 1.0 / ((x + k) * (x + k));
  const double z = x + K;
  return sum + 1.0 / z + 1.0 / (2.0 * z * z) + 1.0 / (6.0 * z * z * z);
}

}  // namespace oracles
