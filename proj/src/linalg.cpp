#include "bandlab/linalg.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <limits>

namespace bandlab {

Matrix sample_gaussian_block(int M, RngStream& rng) {
  const double sigma = 1.0 / std::sqrt(static_cast<double>(M));
  Matrix e(M, M);
  for (int i = 0; i < M; ++i) {
    for (int j = 0; j < M; ++j) {
      e(i, j) = sigma * rng.normal();
    }
  }
  return e;
}

SymMatrix sample_goe_block(int M, RngStream& rng) {
  const Matrix e = sample_gaussian_block(M, rng);
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  // (e + e^T)/sqrt(2), mirrored from the lower triangle so symmetry is exact.
  Matrix g(M, M);
  for (int j = 0; j < M; ++j) {
    for (int i = j; i < M; ++i) {
      g(i, j) = (e(i, j) + e(j, i)) * inv_sqrt2;
    }
  }
  return SymMatrix::from_lower(g);
}

double trace_product(const Matrix& g, const Matrix& h) {
  if (g.cols() != h.rows() || g.rows() != h.cols()) {
    throw DomainError("trace_product: dimension mismatch");
  }
  // tr(GH) = sum_ij G(i,j) H(j,i) without forming the product.
  return (g.array() * h.transpose().array()).sum();
}

namespace {

double power_iteration(const Matrix& a, const Eigen::VectorXd& start,
                       double rel_tol, int max_iters) {
  Eigen::VectorXd v = start.normalized();
  double sigma = 0.0;
  double prev_delta = std::numeric_limits<double>::infinity();
  for (int it = 0; it < max_iters; ++it) {
    Eigen::VectorXd w = a * v;
    const double s = w.norm();
    if (s == 0.0) return 0.0;  // v in the kernel and A^T A v = 0
    Eigen::VectorXd u = a.transpose() * w;
    const double un = u.norm();
    if (un == 0.0) return s;
    v = u / un;
    const double delta = std::abs(s - sigma);
    sigma = s;
    if (it > 0) {
      // Aitken-style bound on the remaining error from the delta ratio.
      const double ratio = prev_delta > 0 ? delta / prev_delta : 0.0;
      const double remaining =
          ratio < 1.0 ? delta * ratio / (1.0 - ratio) : delta;
      if (delta <= rel_tol * sigma && remaining <= rel_tol * sigma) break;
    }
    prev_delta = delta;
  }
  return sigma;
}

}  // namespace

double operator_norm(const Matrix& a) {
  if (a.size() == 0) return 0.0;
  if (a.rows() == 1 && a.cols() == 1) return std::abs(a(0, 0));
  if (a.isZero(0.0)) return 0.0;

  const int n = static_cast<int>(a.cols());
  constexpr double kRelTol = 1e-11;
  constexpr int kMaxIters = 200000;

  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
  double best = power_iteration(a, ones, kRelTol, kMaxIters);

  // Fallback start: alternating signs with an index ramp.
  Eigen::VectorXd alt(n);
  for (int i = 0; i < n; ++i) {
    alt(i) = ((i % 2 == 0) ? 1.0 : -1.0) * (1.0 + static_cast<double>(i) / n);
  }
  best = std::max(best, power_iteration(a, alt, kRelTol, kMaxIters));
  return best;
}

SymMatrix sym_inverse(const SymMatrix& h) {
  const Eigen::Index n = h.dim();
  const double floor = 1e-12 * frobenius_norm(h);
  Eigen::PartialPivLU<Matrix> lu(h.mat());
  const Matrix& u = lu.matrixLU();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::abs(u(i, i)) < floor || u(i, i) == 0.0) {
      throw NearSingular("sym_inverse: pivot below 1e-12 * ||H||_F");
    }
  }
  return SymMatrix::symmetrize(lu.inverse());
}

namespace {

// Eigenvalues of the tridiagonal reduction strictly below x, via the pivot
// signs of the LDL^T recursion for T - x I.  An exact zero pivot means x is
// (numerically) an eigenvalue of a leading principal minor.
int sturm_count_below(const Eigen::VectorXd& diag, const Eigen::VectorXd& sub,
                      double x) {
  int count = 0;
  double q = diag(0) - x;
  if (q == 0.0) throw NearSingular("eigen_count_in_interval: zero pivot");
  if (q < 0.0) ++count;
  for (Eigen::Index i = 1; i < diag.size(); ++i) {
    q = diag(i) - x - sub(i - 1) * sub(i - 1) / q;
    if (q == 0.0) throw NearSingular("eigen_count_in_interval: zero pivot");
    if (q < 0.0) ++count;
  }
  return count;
}

}  // namespace

int eigen_count_in_interval(const SymMatrix& h, const Interval& I) {
  const Eigen::Index n = h.dim();
  if (n == 1) {
    const double v = h(0, 0);
    return (v >= I.lo && v <= I.hi) ? 1 : 0;
  }
  Eigen::Tridiagonalization<Matrix> tri(h.mat());
  const Eigen::VectorXd diag = tri.diagonal();
  const Eigen::VectorXd sub = tri.subDiagonal();
  // Closed interval: count(lambda < hi+) - count(lambda < lo).  Shifting the
  // upper endpoint by one ulp folds eigenvalues equal to hi into the count.
  const double hi_plus = std::nextafter(I.hi, std::numeric_limits<double>::infinity());
  const int below_hi = sturm_count_below(diag, sub, hi_plus);
  const int below_lo = sturm_count_below(diag, sub, I.lo);
  return below_hi - below_lo;
}

int eigen_count_in_interval_retry(const SymMatrix& h, const Interval& I) {
  try {
    return eigen_count_in_interval(h, I);
  } catch (const NearSingular&) {
    const double d = 1e-12 * std::max(1.0, std::max(std::abs(I.lo), std::abs(I.hi)));
    return eigen_count_in_interval(h, Interval(I.lo - d, I.hi + d));
  }
}

}  // namespace bandlab
