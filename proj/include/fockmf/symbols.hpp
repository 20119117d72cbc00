#pragma once

// Polynomial symbols b(z) = <z^{(x)q}, b~ z^{(x)p}> on C^d and their algebra:
// evaluation, the antiholomorphic gradient, multiple Poisson brackets,
// free evolution b_t = b o e^{-itA} and the iterated brackets C^(m)_r.

#include <span>
#include <vector>

#include "fockmf/symtensor.hpp"

namespace fockmf {

// (p, q)-homogeneous symbol: b(lambda z) = lambda^p conj(lambda)^q b(z).
class PolySymbol {
 public:
  PolySymbol() = default;
  explicit PolySymbol(SymOperator kernel) : kernel_(std::move(kernel)) {}

  static PolySymbol zero(int d, int p, int q) { return PolySymbol(SymOperator(d, p, q)); }
  // <z, M z>
  static PolySymbol quadratic(const CMatrix& m);

  int d() const { return kernel_.d; }
  int p() const { return kernel_.p; }
  int q() const { return kernel_.q; }
  const SymOperator& kernel() const { return kernel_; }

  PolySymbol& operator+=(const PolySymbol& other);
  PolySymbol& operator*=(cplx s);
  friend PolySymbol operator+(PolySymbol a, const PolySymbol& b) { return a += b; }
  friend PolySymbol operator-(PolySymbol a, const PolySymbol& b) { return a += b * cplx(-1.0); }
  friend PolySymbol operator*(PolySymbol a, cplx s) { return a *= s; }

 private:
  SymOperator kernel_;
};

// Finite sum of symbols, at most one term per bidegree.
class PolySum {
 public:
  void add(const PolySymbol& b);
  const std::vector<PolySymbol>& terms() const { return terms_; }

 private:
  std::vector<PolySymbol> terms_;
};

cplx eval(const PolySymbol& b, const CVector& z);
cplx eval(const PolySum& b, const CVector& z);

// d_{zbar} b(z) as a vector of C^d; zero when q = 0.
CVector grad_zbar(const PolySymbol& b, const CVector& z);

// Kernel of the pairing d_z^k b1 . d_{zbar}^k b2, bidegree
// (p1 + p2 - k, q1 + q2 - k). Zero when k exceeds p1 or q2.
PolySymbol contract(const PolySymbol& b1, const PolySymbol& b2, int k);

// {b1, b2}^(k) = d_z^k b1 . d_zbar^k b2 - d_z^k b2 . d_zbar^k b1.
PolySymbol poisson(const PolySymbol& b1, const PolySymbol& b2, int k);

// e^{-itA} for hermitian A, from one eigendecomposition.
class HermitianExp {
 public:
  explicit HermitianExp(const CMatrix& a);

  CMatrix operator()(double t) const;
  const CMatrix& generator() const { return a_; }
  bool is_zero() const { return zero_; }

 private:
  CMatrix a_;
  CMatrix vecs_;
  Eigen::VectorXd vals_;
  bool zero_ = false;
};

bool is_hermitian(const CMatrix& a, double tol = 1e-12);

// b_t = b o e^{-itA}: kernel (e^{itA})^{vq} b~ (e^{-itA})^{vp}.
PolySymbol free_evolve(const PolySymbol& b, const HermitianExp& prop, double t);
PolySymbol free_evolve(const PolySymbol& b, const CMatrix& a, double t);

// C^(m)_r(t_m, ..., t_1, t) for m = inner_times.size(), with
// inner_times[i] = t_{i+1} (the time of the (i+1)-th bracket from the inside).
// Equal to b_t when m = 0.
PolySymbol c_mr(const PolySymbol& q_sym, const PolySymbol& b, const HermitianExp& prop,
                std::span<const double> inner_times, double t, int r);
PolySymbol c_mr(const PolySymbol& q_sym, const PolySymbol& b, const CMatrix& a,
                std::span<const double> inner_times, double t, int r);

// Norm bound for the double bracket: 2 [p(p-1) + q(q-1)] |Q~| |b~|.
double bound_bracket2(int p, int q, double norm_q, double norm_b);

// Norm bound for C^(m)_r:
// 2^{2m-r} C(m,r) (P+m-r)^{2r} (P+m-r-1)!/(P-1)! |Q~|^m |b~|, P = max(p, q).
double bound_lemma(int p, int q, int m, int r, double norm_q, double norm_b);

}  // namespace fockmf
