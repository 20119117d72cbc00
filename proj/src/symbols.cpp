#include "fockmf/symbols.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>
#include <string>

namespace fockmf {

namespace {

void require_same_dim(const PolySymbol& a, const PolySymbol& b, const char* where) {
  if (a.d() != b.d()) {
    throw std::invalid_argument(std::string(where) + ": dimension mismatch " +
                                std::to_string(a.d()) + " vs " + std::to_string(b.d()));
  }
}

}  // namespace

PolySymbol PolySymbol::quadratic(const CMatrix& m) {
  return PolySymbol(SymOperator(static_cast<int>(m.rows()), 1, 1, m));
}

PolySymbol& PolySymbol::operator+=(const PolySymbol& other) {
  require_same_dim(*this, other, "PolySymbol::operator+=");
  if (other.p() != p() || other.q() != q()) {
    throw std::invalid_argument("PolySymbol::operator+=: bidegree mismatch");
  }
  kernel_.matrix += other.kernel_.matrix;
  return *this;
}

PolySymbol& PolySymbol::operator*=(cplx s) {
  kernel_.matrix *= s;
  return *this;
}

void PolySum::add(const PolySymbol& b) {
  for (auto& t : terms_) {
    if (t.p() == b.p() && t.q() == b.q()) {
      t += b;
      return;
    }
  }
  terms_.push_back(b);
}

cplx eval(const PolySymbol& b, const CVector& z) {
  if (z.size() != b.d()) {
    throw std::invalid_argument("eval: point has dimension " + std::to_string(z.size()) +
                                ", symbol has " + std::to_string(b.d()));
  }
  const SymVector in = power_vector(z, b.p());
  const SymVector out = power_vector(z, b.q());
  return out.coeffs.dot(b.kernel().matrix * in.coeffs);
}

cplx eval(const PolySum& b, const CVector& z) {
  cplx s = 0.0;
  for (const auto& t : b.terms()) s += eval(t, z);
  return s;
}

CVector grad_zbar(const PolySymbol& b, const CVector& z) {
  const int d = b.d();
  if (z.size() != d) throw std::invalid_argument("grad_zbar: dimension mismatch");
  CVector g = CVector::Zero(d);
  if (b.q() == 0) return g;
  const CVector v = b.kernel().matrix * power_vector(z, b.p()).coeffs;
  const CVector rest = power_vector(z, b.q() - 1).coeffs;
  auto out = basis(d, b.q());
  MultiIndex unit(d, 0);
  MultiIndex eta_minus(d);
  for (std::size_t e = 0; e < out->size(); ++e) {
    const auto& eta = out->indices[e];
    for (int i = 0; i < d; ++i) {
      if (eta[i] == 0) continue;
      unit.assign(d, 0);
      unit[i] = 1;
      eta_minus = eta;
      --eta_minus[i];
      g[i] += split_coefficient(eta, unit) *
              std::conj(rest[static_cast<Eigen::Index>(basis_rank(eta_minus))]) *
              v[static_cast<Eigen::Index>(e)];
    }
  }
  return g * static_cast<double>(b.q());
}

PolySymbol contract(const PolySymbol& b1, const PolySymbol& b2, int k) {
  require_same_dim(b1, b2, "contract");
  const int d = b1.d();
  const int p_out = b1.p() + b2.p() - k;
  const int q_out = b1.q() + b2.q() - k;
  if (k < 0) throw std::invalid_argument("contract: negative order");
  if (p_out < 0 || q_out < 0) return PolySymbol::zero(d, std::max(p_out, 0), std::max(q_out, 0));
  if (k > b1.p() || k > b2.q()) return PolySymbol::zero(d, p_out, q_out);

  const double coef = std::exp(std::lgamma(b1.p() + 1.0) - std::lgamma(b1.p() - k + 1.0) +
                               std::lgamma(b2.q() + 1.0) - std::lgamma(b2.q() - k + 1.0));
  const CMatrix& k1 = b1.kernel().matrix;
  const CMatrix& k2 = b2.kernel().matrix;
  auto in = basis(d, p_out);
  auto mid = basis(d, b2.q());
  auto top = basis(d, b1.q());
  CMatrix out = CMatrix::Zero(static_cast<Eigen::Index>(sym_dim(d, q_out)),
                              static_cast<Eigen::Index>(sym_dim(d, p_out)));

  // <beta| (b1 (x) I) Pi (b2 (x) I) |alpha>: alpha splits into gamma (fed to
  // b2) and rho; b2's output eta splits into kappa (fed to b1 with rho) and
  // the spectator eta - kappa, which joins b1's output nu to form beta.
  MultiIndex rho(d), in1(d), beta(d);
  for (std::size_t a = 0; a < in->size(); ++a) {
    const auto& alpha = in->indices[a];
    for (const auto& gamma : sub_indices(alpha, b2.p())) {
      const auto g = static_cast<Eigen::Index>(basis_rank(gamma));
      const double c_alpha = split_coefficient(alpha, gamma);
      for (int i = 0; i < d; ++i) rho[i] = alpha[i] - gamma[i];
      for (std::size_t e = 0; e < mid->size(); ++e) {
        const cplx v2 = k2(static_cast<Eigen::Index>(e), g);
        if (v2 == cplx(0.0)) continue;
        const auto& eta = mid->indices[e];
        for (const auto& kappa : sub_indices(eta, k)) {
          for (int i = 0; i < d; ++i) in1[i] = kappa[i] + rho[i];
          const double c_mid = split_coefficient(eta, kappa) * split_coefficient(in1, kappa);
          const auto col1 = static_cast<Eigen::Index>(basis_rank(in1));
          for (std::size_t nu_i = 0; nu_i < top->size(); ++nu_i) {
            const cplx v1 = k1(static_cast<Eigen::Index>(nu_i), col1);
            if (v1 == cplx(0.0)) continue;
            const auto& nu = top->indices[nu_i];
            for (int i = 0; i < d; ++i) beta[i] = nu[i] + eta[i] - kappa[i];
            out(static_cast<Eigen::Index>(basis_rank(beta)), static_cast<Eigen::Index>(a)) +=
                coef * split_coefficient(beta, nu) * v1 * c_mid * v2 * c_alpha;
          }
        }
      }
    }
  }
  return PolySymbol(SymOperator(d, p_out, q_out, std::move(out)));
}

PolySymbol poisson(const PolySymbol& b1, const PolySymbol& b2, int k) {
  PolySymbol res = contract(b1, b2, k) - contract(b2, b1, k);
  const int p_out = b1.p() + b2.p() - k;
  const int q_out = b1.q() + b2.q() - k;
  if (p_out >= 0 && q_out >= 0 && (res.p() != p_out || res.q() != q_out)) {
    throw std::logic_error("poisson: bidegree bookkeeping violated");
  }
  return res;
}

bool is_hermitian(const CMatrix& a, double tol) {
  return a.rows() == a.cols() && (a - a.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

HermitianExp::HermitianExp(const CMatrix& a) : a_(a) {
  if (!is_hermitian(a)) throw std::invalid_argument("HermitianExp: generator is not hermitian");
  zero_ = a.size() == 0 || a.cwiseAbs().maxCoeff() == 0.0;
  Eigen::SelfAdjointEigenSolver<CMatrix> es(a);
  vecs_ = es.eigenvectors();
  vals_ = es.eigenvalues();
}

CMatrix HermitianExp::operator()(double t) const {
  const auto n = a_.rows();
  if (zero_ || t == 0.0) return CMatrix::Identity(n, n);
  CVector phases(n);
  for (Eigen::Index i = 0; i < n; ++i) phases[i] = std::polar(1.0, -t * vals_[i]);
  return vecs_ * phases.asDiagonal() * vecs_.adjoint();
}

PolySymbol free_evolve(const PolySymbol& b, const HermitianExp& prop, double t) {
  if (prop.generator().rows() != b.d()) throw std::invalid_argument("free_evolve: dimension mismatch");
  if (prop.is_zero() || t == 0.0) return b;
  const CMatrix u = prop(t);
  const CMatrix right = second_quantize(u, b.p());
  const CMatrix left = second_quantize(u.adjoint(), b.q());
  return PolySymbol(SymOperator(b.d(), b.p(), b.q(), left * b.kernel().matrix * right));
}

PolySymbol free_evolve(const PolySymbol& b, const CMatrix& a, double t) {
  return free_evolve(b, HermitianExp(a), t);
}

PolySymbol c_mr(const PolySymbol& q_sym, const PolySymbol& b, const HermitianExp& prop,
                std::span<const double> inner_times, double t, int r) {
  const int m = static_cast<int>(inner_times.size());
  if (r < 0 || r > m) {
    throw std::invalid_argument("c_mr: r = " + std::to_string(r) + " outside [0, " +
                                std::to_string(m) + "]");
  }
  if (q_sym.p() != 2 || q_sym.q() != 2) throw std::invalid_argument("c_mr: interaction must be (2,2)");
  require_same_dim(q_sym, b, "c_mr");

  const PolySymbol bt = free_evolve(b, prop, t);
  if (m == 0) return bt;

  std::vector<PolySymbol> q_at;
  q_at.reserve(static_cast<std::size_t>(m));
  for (double ti : inner_times) q_at.push_back(free_evolve(q_sym, prop, ti));

  PolySymbol total = PolySymbol::zero(b.d(), b.p() - r + m, b.q() - r + m);
  // bit i of mask set <=> gamma_{i+1} = 2
  for (unsigned mask = 0; mask < (1u << m); ++mask) {
    if (std::popcount(mask) != r) continue;
    PolySymbol x = bt;
    for (int i = 0; i < m; ++i) x = poisson(q_at[static_cast<std::size_t>(i)], x, (mask >> i) & 1u ? 2 : 1);
    total += x;
  }
  total *= cplx(std::ldexp(1.0, -r));
  return total;
}

PolySymbol c_mr(const PolySymbol& q_sym, const PolySymbol& b, const CMatrix& a,
                std::span<const double> inner_times, double t, int r) {
  return c_mr(q_sym, b, HermitianExp(a), inner_times, t, r);
}

double bound_bracket2(int p, int q, double norm_q, double norm_b) {
  return 2.0 * (p * (p - 1) + q * (q - 1)) * norm_q * norm_b;
}

double bound_lemma(int p, int q, int m, int r, double norm_q, double norm_b) {
  if (p < 1 && q < 1) throw std::invalid_argument("bound_lemma: need p >= 1 or q >= 1");
  if (r < 0 || r > m) throw std::invalid_argument("bound_lemma: need 0 <= r <= m");
  const int big = std::max(p, q);
  const int top = big + m - r;
  double v = std::ldexp(1.0, 2 * m - r) * binomial(m, r) * std::pow(top, 2 * r);
  for (int j = big; j <= top - 1; ++j) v *= j;  // (top-1)!/(big-1)!
  return v * std::pow(norm_q, m) * norm_b;
}

}  // namespace fockmf
