#include "fockmf/symtensor.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>
#include <string>
#include <utility>

namespace fockmf {

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  k = std::min(k, n - k);
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return std::round(r);
}

std::size_t sym_dim(int d, int n) {
  if (d < 1 || n < 0) throw std::invalid_argument("sym_dim: need d >= 1 and n >= 0");
  return static_cast<std::size_t>(binomial(n + d - 1, d - 1));
}

namespace {

void enumerate_rec(int d, int remaining, MultiIndex& cur, std::size_t pos,
                   std::vector<MultiIndex>& out) {
  if (pos + 1 == static_cast<std::size_t>(d)) {
    cur[pos] = remaining;
    out.push_back(cur);
    return;
  }
  for (int a = remaining; a >= 0; --a) {
    cur[pos] = a;
    enumerate_rec(d, remaining - a, cur, pos + 1, out);
  }
}

}  // namespace

std::vector<MultiIndex> enumerate_basis(int d, int n) {
  if (d < 1 || n < 0) throw std::invalid_argument("enumerate_basis: need d >= 1 and n >= 0");
  std::vector<MultiIndex> out;
  out.reserve(sym_dim(d, n));
  MultiIndex cur(d, 0);
  enumerate_rec(d, n, cur, 0, out);
  return out;
}

std::size_t basis_rank(const MultiIndex& alpha) {
  const int d = static_cast<int>(alpha.size());
  int remaining = degree(alpha);
  std::size_t rank = 0;
  // Count the multi-indices preceding alpha: at position i, every larger
  // leading entry j > alpha_i opens a block of sym_dim(d-i-1, remaining-j).
  for (int i = 0; i + 1 < d; ++i) {
    for (int j = alpha[i] + 1; j <= remaining; ++j) rank += sym_dim(d - i - 1, remaining - j);
    remaining -= alpha[i];
  }
  return rank;
}

std::shared_ptr<const SymBasis> basis(int d, int n) {
  static std::mutex mu;
  static std::map<std::pair<int, int>, std::shared_ptr<const SymBasis>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[{d, n}];
  if (!slot) {
    auto b = std::make_shared<SymBasis>();
    b->d = d;
    b->n = n;
    b->indices = enumerate_basis(d, n);
    slot = std::move(b);
  }
  return slot;
}

SymOperator::SymOperator(int d_, int p_, int q_)
    : d(d_), p(p_), q(q_), matrix(CMatrix::Zero(sym_dim(d_, q_), sym_dim(d_, p_))) {}

SymOperator::SymOperator(int d_, int p_, int q_, CMatrix m) : d(d_), p(p_), q(q_), matrix(std::move(m)) {
  if (static_cast<std::size_t>(matrix.rows()) != sym_dim(d, q) ||
      static_cast<std::size_t>(matrix.cols()) != sym_dim(d, p)) {
    throw std::invalid_argument("SymOperator: matrix shape does not match (d, p, q) = (" +
                                std::to_string(d) + ", " + std::to_string(p) + ", " +
                                std::to_string(q) + ")");
  }
}

SymOperator SymOperator::identity(int d, int n) {
  const auto dim = static_cast<Eigen::Index>(sym_dim(d, n));
  return SymOperator(d, n, n, CMatrix::Identity(dim, dim));
}

SymVector power_vector(const CVector& z, int n) {
  if (n < 0) throw std::invalid_argument("power_vector: negative degree");
  const int d = static_cast<int>(z.size());
  auto b = basis(d, n);
  SymVector v{d, n, CVector(b->size())};
  const double log_nfact = std::lgamma(n + 1.0);
  for (std::size_t k = 0; k < b->size(); ++k) {
    const auto& alpha = b->indices[k];
    double log_w = log_nfact;
    cplx mono = 1.0;
    for (int i = 0; i < d; ++i) {
      log_w -= std::lgamma(alpha[i] + 1.0);
      for (int e = 0; e < alpha[i]; ++e) mono *= z[i];
    }
    v.coeffs[static_cast<Eigen::Index>(k)] = std::exp(0.5 * log_w) * mono;
  }
  return v;
}

double split_coefficient(const MultiIndex& alpha, const MultiIndex& gamma) {
  double num = 1.0;
  for (std::size_t i = 0; i < alpha.size(); ++i) num *= binomial(alpha[i], gamma[i]);
  return std::sqrt(num / binomial(degree(alpha), degree(gamma)));
}

namespace {

void sub_rec(const MultiIndex& alpha, int remaining, std::size_t pos, MultiIndex& cur,
             std::vector<MultiIndex>& out) {
  if (pos == alpha.size()) {
    if (remaining == 0) out.push_back(cur);
    return;
  }
  const int hi = std::min(alpha[pos], remaining);
  for (int g = hi; g >= 0; --g) {
    cur[pos] = g;
    sub_rec(alpha, remaining - g, pos + 1, cur, out);
  }
  cur[pos] = 0;
}

}  // namespace

std::vector<MultiIndex> sub_indices(const MultiIndex& alpha, int k) {
  std::vector<MultiIndex> out;
  if (k < 0 || k > degree(alpha)) return out;
  MultiIndex cur(alpha.size(), 0);
  sub_rec(alpha, k, 0, cur, out);
  return out;
}

SymOperator symmetrize_extend(const SymOperator& k, int n) {
  if (n < k.p) {
    throw std::invalid_argument("symmetrize_extend: sector degree " + std::to_string(n) +
                                " below input degree " + std::to_string(k.p));
  }
  const int d = k.d;
  const int m = n - k.p + k.q;
  auto in = basis(d, n);
  auto kout = basis(d, k.q);
  SymOperator out(d, n, m);

  // <beta| (k (x) I) |alpha> with |alpha> split as sum_gamma c |gamma>|alpha-gamma>
  // and <beta| split likewise; the spectator parts must coincide.
  MultiIndex beta(d);
  for (std::size_t a = 0; a < in->size(); ++a) {
    const auto& alpha = in->indices[a];
    for (const auto& gamma : sub_indices(alpha, k.p)) {
      const auto g = static_cast<Eigen::Index>(basis_rank(gamma));
      const double c_in = split_coefficient(alpha, gamma);
      for (std::size_t dl = 0; dl < kout->size(); ++dl) {
        const cplx kv = k.matrix(static_cast<Eigen::Index>(dl), g);
        if (kv == cplx(0.0)) continue;
        const auto& delta = kout->indices[dl];
        for (int i = 0; i < d; ++i) beta[i] = delta[i] + alpha[i] - gamma[i];
        const double c_out = split_coefficient(beta, delta);
        out.matrix(static_cast<Eigen::Index>(basis_rank(beta)), static_cast<Eigen::Index>(a)) +=
            c_out * kv * c_in;
      }
    }
  }
  return out;
}

double op_norm(const SymOperator& k) {
  if (k.matrix.size() == 0) return 0.0;
  Eigen::JacobiSVD<CMatrix> svd(k.matrix);
  return svd.singularValues()(0);
}

SymOperator adjoint(const SymOperator& k) {
  return SymOperator(k.d, k.q, k.p, k.matrix.adjoint());
}

CMatrix second_quantize(const CMatrix& u, int n) {
  const int d = static_cast<int>(u.rows());
  if (u.cols() != u.rows()) throw std::invalid_argument("second_quantize: matrix must be square");
  auto b = basis(d, n);
  const auto dim = static_cast<Eigen::Index>(b->size());
  CMatrix out = CMatrix::Zero(dim, dim);

  // Gamma(U)|alpha> = prod_i (sum_j U_ji a_j^*)^{alpha_i} |0> / sqrt(alpha!);
  // expand the product as a polynomial in the creators.
  std::vector<std::shared_ptr<const SymBasis>> levels;
  for (int k = 0; k <= n; ++k) levels.push_back(basis(d, k));
  MultiIndex shifted(d);
  for (Eigen::Index a = 0; a < dim; ++a) {
    const auto& alpha = b->indices[static_cast<std::size_t>(a)];
    CVector poly = CVector::Ones(1);
    int deg = 0;
    for (int i = 0; i < d; ++i) {
      for (int e = 0; e < alpha[i]; ++e) {
        CVector next = CVector::Zero(static_cast<Eigen::Index>(levels[deg + 1]->size()));
        const auto& cur = levels[deg]->indices;
        for (std::size_t s = 0; s < cur.size(); ++s) {
          const cplx c = poly[static_cast<Eigen::Index>(s)];
          if (c == cplx(0.0)) continue;
          for (int j = 0; j < d; ++j) {
            shifted = cur[s];
            ++shifted[j];
            next[static_cast<Eigen::Index>(basis_rank(shifted))] += c * u(j, i);
          }
        }
        poly = std::move(next);
        ++deg;
      }
    }
    double log_afact = 0.0;
    for (int i = 0; i < d; ++i) log_afact += std::lgamma(alpha[i] + 1.0);
    for (Eigen::Index s = 0; s < dim; ++s) {
      const auto& beta = b->indices[static_cast<std::size_t>(s)];
      double log_bfact = 0.0;
      for (int i = 0; i < d; ++i) log_bfact += std::lgamma(beta[i] + 1.0);
      out(s, a) = poly[s] * std::exp(0.5 * (log_bfact - log_afact));
    }
  }
  return out;
}

}  // namespace fockmf
