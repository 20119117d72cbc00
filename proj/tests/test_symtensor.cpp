#include <cmath>

#include "doctest.h"
#include "oracles.hpp"

using namespace fockmf;

namespace {

double max_abs(const CMatrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("sym_dim") {
  CHECK(sym_dim(1, 7) == 1);
  CHECK(sym_dim(3, 0) == 1);
  CHECK(sym_dim(2, 3) == 4);  // (3,0) (2,1) (1,2) (0,3)
  for (int d = 1; d <= 4; ++d)
    for (int n = 0; n <= 6; ++n) {
      // brute force: count words of length n up to reordering
      std::size_t count = 0;
      for (std::size_t w = 0; w < oracle::ipow(d, n); ++w) {
        auto word = oracle::word_of(w, d, n);
        if (std::is_sorted(word.begin(), word.end())) ++count;
      }
      CHECK(sym_dim(d, n) == count);
    }
  CHECK_THROWS(sym_dim(0, 2));
}

TEST_CASE("enumerate_basis order") {
  CHECK(enumerate_basis(2, 2) == std::vector<MultiIndex>{{2, 0}, {1, 1}, {0, 2}});
  CHECK(enumerate_basis(1, 5) == std::vector<MultiIndex>{{5}});
  CHECK(enumerate_basis(3, 1) == std::vector<MultiIndex>{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}});
  for (int d = 1; d <= 4; ++d)
    for (int n = 0; n <= 6; ++n) {
      const auto b = enumerate_basis(d, n);
      REQUIRE(b.size() == sym_dim(d, n));
      CHECK(std::is_sorted(b.begin(), b.end(), std::greater<>()));
      CHECK(b == enumerate_basis(d, n));
      for (std::size_t i = 0; i < b.size(); ++i) {
        CHECK(degree(b[i]) == n);
        CHECK(basis_rank(b[i]) == i);
      }
    }
}

TEST_CASE("power_vector") {
  SUBCASE("unit vector") {
    CVector z(2);
    z << 1.0, 0.0;
    const auto v = power_vector(z, 2);
    CHECK(std::abs(v.coeffs[0] - 1.0) < 1e-15);
    CHECK(std::abs(v.coeffs[1]) < 1e-15);
    CHECK(std::abs(v.coeffs[2]) < 1e-15);
  }
  SUBCASE("matches dense tensorization") {
    PortableRng rng(11);
    for (int trial = 0; trial < 20; ++trial) {
      const int d = rng.integer(1, 3);
      const int n = rng.integer(0, 5);
      const CVector z = rng.complex_vector(d);
      const auto v = power_vector(z, n);
      if (n <= 4) {
        const CVector dense = oracle::embedding(d, n).adjoint() * oracle::tensor_power(z, n);
        CHECK(max_abs(dense - v.coeffs) < 1e-12);
      }
      CHECK(std::abs(v.norm() - std::pow(z.norm(), n)) < 1e-12 * std::max(1.0, std::pow(z.norm(), n)));
    }
  }
  SUBCASE("(a, b) squared") {
    CVector z(2);
    const cplx a(0.3, -1.2), b(2.0, 0.5);
    z << a, b;
    const auto v = power_vector(z, 2);
    CHECK(std::abs(v.coeffs[0] - a * a) < 1e-14);
    CHECK(std::abs(v.coeffs[1] - std::sqrt(2.0) * a * b) < 1e-14);
    CHECK(std::abs(v.coeffs[2] - b * b) < 1e-14);
  }
  SUBCASE("homogeneity and inner products") {
    PortableRng rng(12);
    for (int trial = 0; trial < 20; ++trial) {
      const int d = rng.integer(1, 3);
      const int n = rng.integer(0, 5);
      const CVector z = rng.complex_vector(d);
      const CVector w = rng.complex_vector(d);
      const cplx lam = rng.complex_normal();
      const CVector scaled = power_vector(lam * z, n).coeffs;
      CHECK(max_abs(scaled - std::pow(lam, n) * power_vector(z, n).coeffs) < 1e-10 * (1 + scaled.norm()));
      const cplx ip = power_vector(w, n).coeffs.dot(power_vector(z, n).coeffs);
      CHECK(std::abs(ip - std::pow(w.dot(z), n)) < 1e-10 * (1 + std::abs(ip)));
    }
  }
}

TEST_CASE("symmetrize_extend against the dense oracle") {
  PortableRng rng(13);
  for (int d = 1; d <= 3; ++d)
    for (int p = 0; p <= 2; ++p)
      for (int q = 0; q <= 2; ++q)
        for (int n = p; n <= 4; ++n) {
          if (n - p + q > 4) continue;
          const SymOperator k(d, p, q, rng.complex_matrix(sym_dim(d, q), sym_dim(d, p)));
          const auto fast = symmetrize_extend(k, n);
          const CMatrix dense = oracle::dense_symmetrize_extend(k, n);
          CAPTURE(d);
          CAPTURE(p);
          CAPTURE(q);
          CAPTURE(n);
          CHECK(fast.p == n);
          CHECK(fast.q == n - p + q);
          CHECK(max_abs(fast.matrix - dense) < 1e-12);
        }
}

TEST_CASE("symmetrize_extend special cases") {
  SUBCASE("identity on one-particle space") {
    CVector z(2);
    z << cplx(0.4, 0.1), cplx(-0.7, 0.9);
    const auto ext = symmetrize_extend(SymOperator::identity(2, 1), 3);
    const auto zz = power_vector(z, 3).coeffs;
    CHECK(std::abs(zz.dot(ext.matrix * zz) - std::pow(z.squaredNorm(), 3)) < 1e-12);
  }
  SUBCASE("one-body operator averages over slots") {
    PortableRng rng(14);
    const CMatrix a = rng.complex_matrix(2, 2);
    const CVector z = rng.complex_vector(2);
    for (int n = 1; n <= 4; ++n) {
      const auto ext = symmetrize_extend(SymOperator(2, 1, 1, a), n);
      const auto zz = power_vector(z, n).coeffs;
      const cplx expect = z.dot(a * z) * std::pow(z.squaredNorm(), n - 1);
      CHECK(std::abs(zz.dot(ext.matrix * zz) - expect) < 1e-12);
    }
  }
  SUBCASE("degree mismatch") { CHECK_THROWS(symmetrize_extend(SymOperator(2, 2, 1), 1)); }
}

TEST_CASE("op_norm") {
  CHECK(std::abs(op_norm(SymOperator::identity(3, 2)) - 1.0) < 1e-14);
  CMatrix diag = CMatrix::Zero(2, 2);
  diag(0, 0) = 2.0;
  diag(1, 1) = 3.0;
  CHECK(std::abs(op_norm(SymOperator(2, 1, 1, diag)) - 3.0) < 1e-14);
  PortableRng rng(15);
  for (int trial = 0; trial < 10; ++trial) {
    const SymOperator k(2, 1, 2, rng.complex_matrix(3, 2));
    CHECK(std::abs(op_norm(k) - op_norm(adjoint(k))) < 1e-12);
  }
}

TEST_CASE("second_quantize") {
  PortableRng rng(16);
  for (int d = 1; d <= 3; ++d)
    for (int n = 0; n <= 4; ++n) {
      const CMatrix u = rng.complex_matrix(d, d);
      CMatrix dense = CMatrix::Ones(1, 1);
      for (int k = 0; k < n; ++k) dense = oracle::kron(dense, u);
      const CMatrix j = oracle::embedding(d, n);
      CHECK(max_abs(second_quantize(u, n) - j.adjoint() * dense * j) < 1e-12);
    }
}
