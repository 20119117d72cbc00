#pragma once

// Seeded generator with a fully specified output sequence.
//
// Raw bits come from std::mt19937_64, whose sequence is fixed by the C++
// standard. The conversions below are spelled out instead of using the
// <random> distributions, whose algorithms are implementation defined:
//   uniform()      = (x >> 11) * 2^-53                       in [0, 1)
//   uniform(a, b)  = a + (b - a) * uniform()
//   index(n)       = x % n
//   normal()       = sqrt(-2 ln(1 - u1)) * cos(2 pi u2)       (one value per pair)
// A complex entry draws its real part before its imaginary part; matrices are
// filled row by row.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include "fockmf/symtensor.hpp"

namespace fockmf {

class PortableRng {
 public:
  explicit PortableRng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t bits() { return engine_(); }
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double a, double b) { return a + (b - a) * uniform(); }
  std::uint64_t index(std::uint64_t n) { return engine_() % n; }
  int integer(int lo, int hi) { return lo + static_cast<int>(index(static_cast<std::uint64_t>(hi - lo + 1))); }

  double normal() {
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(1.0 - u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  cplx complex_normal() {
    const double re = normal();
    const double im = normal();
    return {re, im};
  }

  CVector complex_vector(std::size_t n) {
    CVector v(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = complex_normal();
    return v;
  }

  CMatrix complex_matrix(std::size_t rows, std::size_t cols) {
    CMatrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = complex_normal();
    return m;
  }

  // (M + M^*) / 2 for a complex normal M.
  CMatrix hermitian_matrix(std::size_t n) {
    const CMatrix m = complex_matrix(n, n);
    return 0.5 * (m + m.adjoint());
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace fockmf
