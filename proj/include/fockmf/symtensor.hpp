#pragma once

// Symmetric tensor algebra over C^d in the occupation-number basis.
//
// The degree-n symmetric power of C^d is spanned by the orthonormal vectors
//   |alpha> = sqrt(n!/alpha!) * S_n(e_1^{(x)alpha_1} (x) ... (x) e_d^{(x)alpha_d}),
// one per multi-index alpha with |alpha| = n. Bases are ordered
// lexicographically descending on alpha, e.g. (2,0), (1,1), (0,2).

#include <complex>
#include <cstddef>
#include <memory>
#include <vector>

#include <Eigen/Dense>

namespace fockmf {

using cplx = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;

using MultiIndex = std::vector<int>;

inline int degree(const MultiIndex& alpha) {
  int n = 0;
  for (int a : alpha) n += a;
  return n;
}

// Number of multi-indices of degree n in d variables, C(n+d-1, d-1).
std::size_t sym_dim(int d, int n);

// All multi-indices of degree n, lexicographically descending.
std::vector<MultiIndex> enumerate_basis(int d, int n);

// Position of alpha inside enumerate_basis(d, |alpha|).
std::size_t basis_rank(const MultiIndex& alpha);

// Shared, immutable basis of one sector. Instances are cached and may be
// read concurrently.
struct SymBasis {
  int d = 0;
  int n = 0;
  std::vector<MultiIndex> indices;

  std::size_t size() const { return indices.size(); }
};

std::shared_ptr<const SymBasis> basis(int d, int n);

struct SymVector {
  int d = 0;
  int n = 0;
  CVector coeffs;

  double norm() const { return coeffs.norm(); }
};

// Linear map from the degree-p sector to the degree-q sector.
struct SymOperator {
  int d = 0;
  int p = 0;
  int q = 0;
  CMatrix matrix;

  SymOperator() = default;
  SymOperator(int d_, int p_, int q_);
  SymOperator(int d_, int p_, int q_, CMatrix m);

  static SymOperator identity(int d, int n);
};

// z^{(x)n} expressed in the occupation basis: coefficient
// sqrt(n!/alpha!) * prod z_i^{alpha_i}.
SymVector power_vector(const CVector& z, int n);

// S_{n-p+q}(k (x) I_{n-p}) restricted to the degree-n sector.
SymOperator symmetrize_extend(const SymOperator& k, int n);

// Largest singular value.
double op_norm(const SymOperator& k);

SymOperator adjoint(const SymOperator& k);

// Gamma(U) = U (x) ... (x) U restricted to the degree-n sector.
CMatrix second_quantize(const CMatrix& u, int n);

// Weight of |gamma> (x) |alpha - gamma> inside |alpha>:
// sqrt(prod C(alpha_i, gamma_i) / C(|alpha|, |gamma|)).
double split_coefficient(const MultiIndex& alpha, const MultiIndex& gamma);

// Multi-indices gamma <= alpha (entrywise) with |gamma| = k.
std::vector<MultiIndex> sub_indices(const MultiIndex& alpha, int k);

double binomial(int n, int k);

}  // namespace fockmf
