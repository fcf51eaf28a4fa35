#pragma once

#include <Eigen/Core>

#include <cassert>
#include <utility>

#include "bandlab/errors.hpp"

namespace bandlab {

// Dense real matrix, row/column indexed.  All blocks in this project are
// square M x M, but the alias itself carries no such restriction.
using Matrix = Eigen::MatrixXd;

// Symmetric real matrix with entry(i,j) == entry(j,i) holding exactly (same
// bits), enforced by construction: every factory either mirrors one triangle
// or averages A and A^T.  Mutation goes through set(), which writes both
// entries.
class SymMatrix {
 public:
  SymMatrix() = default;

  explicit SymMatrix(Eigen::Index dim) : m_(Matrix::Zero(dim, dim)) {}

  // Mirrors the lower triangle (including the diagonal) of `a`.
  static SymMatrix from_lower(const Matrix& a) {
    assert(a.rows() == a.cols());
    SymMatrix s(a.rows());
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      for (Eigen::Index i = j; i < a.rows(); ++i) {
        s.m_(i, j) = a(i, j);
        s.m_(j, i) = a(i, j);
      }
    }
    return s;
  }

  // (a + a^T) / 2 with both mirror entries computed once.
  static SymMatrix symmetrize(const Matrix& a) {
    assert(a.rows() == a.cols());
    SymMatrix s(a.rows());
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      s.m_(j, j) = a(j, j);
      for (Eigen::Index i = j + 1; i < a.rows(); ++i) {
        const double v = 0.5 * (a(i, j) + a(j, i));
        s.m_(i, j) = v;
        s.m_(j, i) = v;
      }
    }
    return s;
  }

  static SymMatrix identity(Eigen::Index dim) {
    SymMatrix s(dim);
    s.m_ = Matrix::Identity(dim, dim);
    return s;
  }

  static SymMatrix diagonal(const Eigen::VectorXd& d) {
    SymMatrix s(d.size());
    s.m_ = d.asDiagonal();
    return s;
  }

  Eigen::Index dim() const { return m_.rows(); }
  double operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }

  void set(Eigen::Index i, Eigen::Index j, double v) {
    m_(i, j) = v;
    m_(j, i) = v;
  }

  const Matrix& mat() const { return m_; }

  // In-place A - t*I (stays symmetric).
  SymMatrix& shift_diagonal(double t) {
    m_.diagonal().array() -= t;
    return *this;
  }

  SymMatrix scaled(double c) const {
    SymMatrix s = *this;
    s.m_ *= c;
    return s;
  }

 private:
  Matrix m_;
};

// Closed real interval [lo, hi], lo <= hi.
struct Interval {
  double lo;
  double hi;

  Interval(double lo_, double hi_) : lo(lo_), hi(hi_) {
    if (!(lo <= hi)) throw DomainError("Interval: lo must be <= hi");
  }

  double width() const { return hi - lo; }
};

}  // namespace bandlab
