#include <doctest.h>

#include <cmath>

#include "bandlab/chain.hpp"
#include "bandlab/stats.hpp"
#include "oracles.hpp"

using namespace bandlab;

TEST_SUITE_BEGIN("chain");

TEST_CASE("sample_band_matrix") {
  RngStream rng(101);

  SUBCASE("N=1 is a single symmetric block") {
    const BlockTridiagonal a = sample_band_matrix(1, 5, rng);
    CHECK(a.diag.size() == 1);
    CHECK(a.offdiag.empty());
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 5; ++j) CHECK(a.diag[0](i, j) == a.diag[0](j, i));
  }

  SUBCASE("flattened matrix is exactly symmetric") {
    const BlockTridiagonal a = sample_band_matrix(4, 3, rng);
    const Matrix f = flatten(a);
    for (int i = 0; i < 12; ++i)
      for (int j = 0; j < 12; ++j) CHECK(f(i, j) == f(j, i));
  }

  SUBCASE("E||A11||_F^2 = M+1 within 3 standard errors") {
    const int M = 6, n = 10000;
    std::vector<double> fro2;
    fro2.reserve(n);
    for (int i = 0; i < n; ++i) {
      const BlockTridiagonal a = sample_band_matrix(2, M, rng);
      const double f = frobenius_norm(a.diag[0]);
      fro2.push_back(f * f);
    }
    CHECK(std::abs(mean(fro2) - (M + 1.0)) <= 3.0 * standard_error(fro2));
  }
}

TEST_CASE("chain_init") {
  SUBCASE("lambda = 0 keeps the block") {
    RngStream rng(3);
    const SymMatrix a11 = sample_goe_block(4, rng);
    const ChainState st = chain_init(a11, 0.0);
    CHECK(frobenius_norm(Matrix(st.D.mat() - a11.mat())) == 0.0);
    CHECK(st.k == 1);
  }

  SUBCASE("M=1 scalar shift") {
    SymMatrix a(1);
    a.set(0, 0, 2.0);
    const ChainState st = chain_init(a, 0.5);
    CHECK(st.D(0, 0) == doctest::Approx(1.5));
    CHECK(st.S == doctest::Approx(1.5));
    CHECK(st.log_norm == doctest::Approx(std::log(1.0 / 1.5)));
  }

  SUBCASE("bar_D and scaled_product have unit operator norm") {
    RngStream rng(5);
    const ChainState st = chain_init(sample_goe_block(6, rng), 0.3);
    CHECK(std::abs(operator_norm(st.bar_D) - 1.0) <= 1e-10);
    CHECK(std::abs(operator_norm(st.scaled_product) - 1.0) <= 1e-10);
    CHECK(frobenius_norm(Matrix(st.D.mat() - st.S * st.bar_D.mat())) <=
          1e-10 * st.S);
  }
}

TEST_CASE("chain_step") {
  SUBCASE("zero off-diagonal decouples") {
    RngStream rng(7);
    const ChainState st = chain_init(sample_goe_block(3, rng), 0.1);
    const SymMatrix a_next = sample_goe_block(3, rng);
    const ChainState next = chain_step(st, a_next, Matrix::Zero(3, 3), 0.1);
    Matrix want = a_next.mat();
    want.diagonal().array() -= 0.1;
    CHECK(frobenius_norm(Matrix(next.D.mat() - want)) <= 1e-14);
  }

  SUBCASE("M=1 scalar recursion d' = a - lambda - b^2/d") {
    SymMatrix d0(1);
    d0.set(0, 0, 2.0);
    const ChainState st = chain_init(d0, 0.0);
    SymMatrix a(1);
    a.set(0, 0, 1.0);
    Matrix off(1, 1);
    off << 1.0;
    const ChainState next = chain_step(st, a, off, 0.0);
    CHECK(next.D(0, 0) == doctest::Approx(0.5));
  }

  SUBCASE("N=2 matches the dense Schur complement") {
    RngStream rng(11);
    for (int trial = 0; trial < 20; ++trial) {
      const BlockTridiagonal a = sample_band_matrix(2, 4, rng);
      const double lambda = 0.2;
      const ChainState st = chain_init(a.diag[0], lambda);
      const ChainState next = chain_step(st, a.diag[1], a.offdiag[0], lambda);
      const Matrix want = oracles::schur_complement_2block(a.diag[0], a.diag[1],
                                                           a.offdiag[0], lambda);
      CHECK(frobenius_norm(Matrix(next.D.mat() - want)) <=
            1e-8 * std::max(1.0, frobenius_norm(want)));
    }
  }
}

TEST_CASE("corner_log_norm") {
  SUBCASE("N=1, M=1 equals -log S1") {
    SymMatrix a(1);
    a.set(0, 0, -2.5);
    BlockTridiagonal bt{1, 1, {a}, {}};
    const CornerLogNorm res = corner_log_norm(bt, 0.0);
    CHECK(res.log_norm == doctest::Approx(-std::log(2.5)));
  }

  SUBCASE("N=1, M>1 equals log of the inverse operator norm") {
    RngStream rng(13);
    const SymMatrix a = sample_goe_block(5, rng);
    BlockTridiagonal bt{1, 5, {a}, {}};
    const CornerLogNorm res = corner_log_norm(bt, 0.0);
    Eigen::FullPivLU<Matrix> lu(a.mat());
    const double want = std::log(oracles::operator_norm_svd(lu.inverse()));
    CHECK(res.log_norm == doctest::Approx(want).epsilon(1e-9));
  }

  SUBCASE("N=3, M=2 fixed seed matches the dense corner oracle") {
    RngStream rng(17);
    const BlockTridiagonal a = sample_band_matrix(3, 2, rng);
    const CornerLogNorm res = corner_log_norm(a, 0.1);
    const Matrix corner = corner_direct(a, 0.1);
    const double want = std::log(oracles::operator_norm_svd(corner));
    CHECK(std::abs(res.log_norm - want) <= 1e-8);
  }

  SUBCASE("oracle equivalence across N, M (reduced sweep)") {
    for (const int M : {1, 2, 4}) {
      for (const int N : {2, 4, 6}) {
        for (int seed = 0; seed < 25; ++seed) {
          RngStream rng(mix_seed(1000 + seed, M * 100 + N));
          const BlockTridiagonal a = sample_band_matrix(N, M, rng);
          const CornerLogNorm res = corner_log_norm(a, 0.0);
          const double want =
              std::log(oracles::operator_norm_svd(corner_direct(a, 0.0)));
          CHECK(std::abs(res.log_norm - want) <=
                1e-8 * std::max(1.0, std::abs(want)));
        }
      }
    }
  }

  SUBCASE("every bar_D has unit norm and every S positive") {
    RngStream rng(19);
    const BlockTridiagonal a = sample_band_matrix(6, 3, rng);
    ChainState st = chain_init(a.diag[0], 0.0);
    for (int k = 1; k < 6; ++k) {
      st = chain_step(st, a.diag[k], a.offdiag[k - 1], 0.0);
      CHECK(st.S > 0.0);
      CHECK(std::abs(operator_norm(st.bar_D) - 1.0) <= 1e-10);
      CHECK(std::abs(operator_norm(st.scaled_product) - 1.0) <= 1e-10);
    }
    CHECK(std::isfinite(st.log_norm));
  }

  SUBCASE("bit-identical across repeated runs") {
    RngStream rng1(23), rng2(23);
    const BlockTridiagonal a1 = sample_band_matrix(5, 3, rng1);
    const BlockTridiagonal a2 = sample_band_matrix(5, 3, rng2);
    const CornerLogNorm r1 = corner_log_norm(a1, 0.05);
    const CornerLogNorm r2 = corner_log_norm(a2, 0.05);
    CHECK(r1.log_norm == r2.log_norm);
  }

  SUBCASE("streaming equals materialized for the same stream") {
    RngStream rng1(29), rng2(29);
    const BlockTridiagonal a = sample_band_matrix(7, 2, rng1);
    const CornerLogNorm mat = corner_log_norm(a, 0.0);
    const CornerLogNorm stream = corner_log_norm_streaming(7, 2, 0.0, rng2);
    CHECK(mat.log_norm == stream.log_norm);
  }
}

TEST_CASE("corner_direct contract") {
  RngStream rng(31);
  const BlockTridiagonal a = sample_band_matrix(3, 3, rng);
  const double lambda = 0.2;

  SUBCASE("product with the computed inverse is the identity") {
    Matrix full = flatten(a);
    full.diagonal().array() -= lambda;
    const Matrix inv = full.fullPivLu().inverse();
    CHECK(operator_norm(Matrix(full * inv - Matrix::Identity(9, 9))) <= 1e-9);
    // corner_direct returns the top-right block of that inverse.
    const Matrix corner = corner_direct(a, lambda);
    CHECK(frobenius_norm(Matrix(corner - inv.topRightCorner(3, 3))) <=
          1e-9 * std::max(1.0, frobenius_norm(corner)));
  }

  SUBCASE("N=1 reduces to the shifted block inverse") {
    const BlockTridiagonal single{1, 3, {a.diag[0]}, {}};
    Matrix d = a.diag[0].mat();
    d.diagonal().array() -= lambda;
    const Matrix want = d.fullPivLu().inverse();
    CHECK(frobenius_norm(Matrix(corner_direct(single, lambda) - want)) <=
          1e-10 * frobenius_norm(want));
  }

  SUBCASE("matches the factorized product across seeds at N=4, M=3") {
    for (int seed = 0; seed < 100; ++seed) {
      RngStream r(mix_seed(777, seed));
      const BlockTridiagonal bt = sample_band_matrix(4, 3, r);
      // Product D1^{-1} B1 ... B3 D4^{-1} assembled densely.
      ChainState st = chain_init(bt.diag[0], 0.0);
      Matrix product = sym_inverse(st.D).mat();
      for (int k = 1; k < 4; ++k) {
        const Matrix b = -bt.offdiag[k - 1];
        st = chain_step(st, bt.diag[k], bt.offdiag[k - 1], 0.0);
        product = product * b * sym_inverse(st.D).mat();
      }
      const Matrix corner = corner_direct(bt, 0.0);
      CHECK(frobenius_norm(Matrix(corner - product)) <=
            1e-8 * std::max(1.0, frobenius_norm(corner)));
    }
  }
}

TEST_CASE("marginal law of S1 at M=1 is half-normal with variance 2") {
  RngStream rng(37);
  const int n = 10000;
  std::vector<double> s1;
  s1.reserve(n);
  for (int i = 0; i < n; ++i) {
    const SymMatrix a = sample_goe_block(1, rng);
    s1.push_back(std::abs(a(0, 0)));
  }
  // |N(0, 2)| CDF is erf(x / 2).
  const double d = ks_distance(s1, [](double x) { return std::erf(0.5 * x); });
  CHECK(d < ks_critical_value(n, 0.01));
}

TEST_SUITE_END();
