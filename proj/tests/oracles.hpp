#pragma once

// Brute-force reference implementations used only by the tests. They share
// nothing with the library beyond the basis ordering of enumerate_basis().

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <utility>
#include <vector>

#include "fockmf/random.hpp"
#include "fockmf/symbols.hpp"
#include "fockmf/symtensor.hpp"

namespace oracle {

using fockmf::CMatrix;
using fockmf::CVector;
using fockmf::cplx;
using fockmf::MultiIndex;

inline std::size_t ipow(std::size_t b, int e) {
  std::size_t r = 1;
  for (int i = 0; i < e; ++i) r *= b;
  return r;
}

inline std::vector<int> word_of(std::size_t idx, int d, int n) {
  std::vector<int> w(n);
  for (int k = n - 1; k >= 0; --k) {
    w[k] = static_cast<int>(idx % d);
    idx /= d;
  }
  return w;
}

inline std::size_t index_of(const std::vector<int>& w, int d) {
  std::size_t idx = 0;
  for (int c : w) idx = idx * d + c;
  return idx;
}

// Orthogonal projector onto symmetric tensors: average over all n! slot permutations.
inline CMatrix symmetrizer(int d, int n) {
  const auto dim = static_cast<Eigen::Index>(ipow(d, n));
  CMatrix s = CMatrix::Zero(dim, dim);
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  double count = 0;
  do {
    for (Eigen::Index i = 0; i < dim; ++i) {
      auto w = word_of(static_cast<std::size_t>(i), d, n);
      std::vector<int> pw(n);
      for (int k = 0; k < n; ++k) pw[k] = w[perm[k]];
      s(static_cast<Eigen::Index>(index_of(pw, d)), i) += 1.0;
    }
    count += 1;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return s / count;
}

// Columns: normalized S_n e_{w(alpha)} for alpha in enumerate_basis order.
inline CMatrix embedding(int d, int n) {
  const auto basis = fockmf::enumerate_basis(d, n);
  const CMatrix s = symmetrizer(d, n);
  CMatrix j(s.rows(), static_cast<Eigen::Index>(basis.size()));
  for (std::size_t c = 0; c < basis.size(); ++c) {
    std::vector<int> w;
    for (int i = 0; i < d; ++i) w.insert(w.end(), basis[c][i], i);
    CVector e = CVector::Zero(s.rows());
    e[static_cast<Eigen::Index>(index_of(w, d))] = 1.0;
    CVector col = s * e;
    j.col(static_cast<Eigen::Index>(c)) = col / col.norm();
  }
  return j;
}

inline CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix r(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) r.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return r;
}

inline CVector tensor_power(const CVector& z, int n) {
  CVector v = CVector::Ones(1);
  for (int k = 0; k < n; ++k) {
    CVector next(v.size() * z.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) next.segment(i * z.size(), z.size()) = v[i] * z;
    v = next;
  }
  return v;
}

// Dense S_{n-p+q}(k (x) I) compressed to the occupation bases.
inline CMatrix dense_symmetrize_extend(const fockmf::SymOperator& k, int n) {
  const int d = k.d;
  const int m = n - k.p + k.q;
  const CMatrix jp = embedding(d, k.p), jq = embedding(d, k.q);
  const CMatrix full_k = jq * k.matrix * jp.adjoint();
  const auto rest = static_cast<Eigen::Index>(ipow(d, n - k.p));
  const CMatrix op = kron(full_k, CMatrix::Identity(rest, rest));
  const CMatrix jn = embedding(d, n), jm = embedding(d, m);
  return jm.adjoint() * symmetrizer(d, m) * op * jn;
}

inline double lfact(int n) { return std::lgamma(n + 1.0); }

// Polynomials in (z, zbar) stored monomial by monomial.
struct Poly {
  std::map<std::pair<MultiIndex, MultiIndex>, cplx> terms;  // (z exps, zbar exps)
  int d = 0;

  static Poly from_symbol(const fockmf::PolySymbol& b) {
    Poly r;
    r.d = b.d();
    const auto in = fockmf::enumerate_basis(b.d(), b.p());
    const auto out = fockmf::enumerate_basis(b.d(), b.q());
    for (std::size_t a = 0; a < in.size(); ++a) {
      for (std::size_t c = 0; c < out.size(); ++c) {
        double lw = 0.5 * (lfact(b.p()) + lfact(b.q()));
        for (int i = 0; i < b.d(); ++i) lw -= 0.5 * (lfact(in[a][i]) + lfact(out[c][i]));
        const cplx v = b.kernel().matrix(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(a));
        if (v != cplx(0.0)) r.terms[{in[a], out[c]}] += v * std::exp(lw);
      }
    }
    return r;
  }

  Poly dz(int i) const {
    Poly r;
    r.d = d;
    for (const auto& [k, v] : terms) {
      if (k.first[i] == 0) continue;
      auto e = k;
      --e.first[i];
      r.terms[e] += v * static_cast<double>(k.first[i]);
    }
    return r;
  }

  Poly dzbar(int i) const {
    Poly r;
    r.d = d;
    for (const auto& [k, v] : terms) {
      if (k.second[i] == 0) continue;
      auto e = k;
      --e.second[i];
      r.terms[e] += v * static_cast<double>(k.second[i]);
    }
    return r;
  }

  Poly operator*(const Poly& o) const {
    Poly r;
    r.d = d;
    for (const auto& [k1, v1] : terms)
      for (const auto& [k2, v2] : o.terms) {
        auto e = k1;
        for (int i = 0; i < d; ++i) {
          e.first[i] += k2.first[i];
          e.second[i] += k2.second[i];
        }
        r.terms[e] += v1 * v2;
      }
    return r;
  }

  Poly& operator+=(const Poly& o) {
    d = o.d;
    for (const auto& [k, v] : o.terms) terms[k] += v;
    return *this;
  }

  Poly operator*(cplx s) const {
    Poly r = *this;
    for (auto& [k, v] : r.terms) v *= s;
    return r;
  }

  cplx operator()(const CVector& z) const {
    cplx s = 0.0;
    for (const auto& [k, v] : terms) {
      cplx m = v;
      for (int i = 0; i < d; ++i) {
        for (int e = 0; e < k.first[i]; ++e) m *= z[i];
        for (int e = 0; e < k.second[i]; ++e) m *= std::conj(z[i]);
      }
      s += m;
    }
    return s;
  }
};

// d_z^k f . d_zbar^k g = sum over ordered k-tuples of Wirtinger partials.
inline Poly pairing(const Poly& f, const Poly& g, int k) {
  Poly r;
  r.d = f.d;
  if (k == 0) return f * g;
  for (int i = 0; i < f.d; ++i) r += pairing(f.dz(i), g.dzbar(i), k - 1);
  return r;
}

inline Poly bracket(const Poly& f, const Poly& g, int k) {
  Poly r = pairing(f, g, k);
  r += pairing(g, f, k) * cplx(-1.0);
  return r;
}

inline fockmf::PolySymbol random_symbol(fockmf::PortableRng& rng, int d, int p, int q) {
  return fockmf::PolySymbol(fockmf::SymOperator(d, p, q, rng.complex_matrix(fockmf::sym_dim(d, q), fockmf::sym_dim(d, p))));
}

// Matrix exponential by scaling and squaring of a Taylor series.
inline CMatrix expm(const CMatrix& x) {
  const double nrm = x.cwiseAbs().rowwise().sum().maxCoeff();
  int s = 0;
  while (nrm / std::ldexp(1.0, s) > 0.25) ++s;
  const CMatrix y = x / std::ldexp(1.0, s);
  CMatrix term = CMatrix::Identity(x.rows(), x.cols());
  CMatrix sum = term;
  for (int k = 1; k < 30; ++k) {
    term = term * y / static_cast<double>(k);
    sum += term;
  }
  for (int i = 0; i < s; ++i) sum = sum * sum;
  return sum;
}

// Self-adjoint (2,2) interaction with |Q~| = norm.
inline fockmf::PolySymbol random_interaction(fockmf::PortableRng& rng, int d, double norm) {
  fockmf::PolySymbol q(fockmf::SymOperator(d, 2, 2, rng.hermitian_matrix(fockmf::sym_dim(d, 2))));
  q *= cplx(norm / fockmf::op_norm(q.kernel()));
  return q;
}

// Classical RK4 with a fixed step on i dz/dt = Az + d_zbar Q(z), the gradient
// taken monomial by monomial.
inline CVector rk4_flow(const CVector& z0, const CMatrix& a, const fockmf::PolySymbol& q, double t, int steps) {
  const Poly qp = Poly::from_symbol(q);
  std::vector<Poly> grad;
  for (int i = 0; i < q.d(); ++i) grad.push_back(qp.dzbar(i));
  auto f = [&](const CVector& z) {
    CVector g(z.size());
    for (int i = 0; i < z.size(); ++i) g[i] = grad[static_cast<std::size_t>(i)](z);
    return CVector(cplx(0.0, -1.0) * (a * z + g));
  };
  const double h = t / steps;
  CVector z = z0;
  for (int s = 0; s < steps; ++s) {
    const CVector k1 = f(z);
    const CVector k2 = f(z + 0.5 * h * k1);
    const CVector k3 = f(z + 0.5 * h * k2);
    const CVector k4 = f(z + h * k3);
    z += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return z;
}

}  // namespace oracle
