#include "fockmf/dynamics.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace fockmf {

QuantumEvolution::QuantumEvolution(CMatrix a, PolySymbol q) : a_(std::move(a)), q_(std::move(q)) {
  if (!is_hermitian(a_)) throw std::invalid_argument("QuantumEvolution: A is not hermitian");
  if (q_.p() != 2 || q_.q() != 2 || q_.d() != a_.rows()) {
    throw std::invalid_argument("QuantumEvolution: Q must be a (2,2) symbol on C^d");
  }
}

std::shared_ptr<const QuantumEvolution::Eig> QuantumEvolution::sector(int n, double eps) const {
  const auto key = std::make_pair(eps, n);
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
  }
  const SymOperator h = hamiltonian_sector(a_, q_, n, eps);
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h.matrix);
  auto e = std::make_shared<const Eig>(Eig{es.eigenvectors(), es.eigenvalues()});
  std::lock_guard<std::mutex> lock(mu_);
  return cache_.emplace(key, std::move(e)).first->second;
}

CMatrix QuantumEvolution::propagator(int n, double eps, double t) const {
  const auto e = sector(n, eps);
  CVector phase(e->vals.size());
  for (Eigen::Index k = 0; k < phase.size(); ++k) phase[k] = std::exp(cplx(0.0, -t / eps * e->vals[k]));
  return e->vecs * phase.asDiagonal() * e->vecs.adjoint();
}

FockState QuantumEvolution::propagate(const FockState& psi, double t) const {
  if (psi.d != a_.rows()) throw std::invalid_argument("QuantumEvolution::propagate: dimension mismatch");
  FockState out = psi;
  if (t == 0.0) return out;
  for (auto& [n, v] : out.sectors) {
    const auto e = sector(n, psi.eps);
    CVector c = e->vecs.adjoint() * v;
    for (Eigen::Index k = 0; k < c.size(); ++k) c[k] *= std::exp(cplx(0.0, -t / psi.eps * e->vals[k]));
    v = e->vecs * c;
  }
  return out;
}

DensityState QuantumEvolution::propagate(const DensityState& rho, double t) const {
  std::vector<std::pair<double, FockState>> comps;
  comps.reserve(rho.components().size());
  for (const auto& [w, psi] : rho.components()) comps.emplace_back(w, propagate(psi, t));
  return DensityState(std::move(comps));
}

DensityState propagate_quantum(const DensityState& rho, const CMatrix& a, const PolySymbol& q, double t) {
  return QuantumEvolution(a, q).propagate(rho, t);
}

cplx heisenberg_expectation(const DensityState& rho, const QuantizedSymbol& b, const QuantumEvolution& evo,
                            double t) {
  cplx s = 0.0;
  for (const auto& [w, psi] : rho.components()) s += w * wick_expectation(evo.propagate(psi, t), b);
  return s;
}

cplx heisenberg_expectation(const DensityState& rho, const PolySymbol& b, const CMatrix& a, const PolySymbol& q,
                            double t) {
  return heisenberg_expectation(rho, QuantizedSymbol(b, rho.eps()), QuantumEvolution(a, q), t);
}

double hartree_energy(const CMatrix& a, const PolySymbol& q, const CVector& z) {
  return (z.dot(a * z) + eval(q, z)).real();
}

namespace {

// Dormand-Prince 5(4) tableau.
constexpr std::array<double, 6> kC{1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
constexpr double kA[6][6] = {
    {1.0 / 5},
    {3.0 / 40, 9.0 / 40},
    {44.0 / 45, -56.0 / 15, 32.0 / 9},
    {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
    {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
    {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84}};
constexpr std::array<double, 7> kErr{71.0 / 57600,      0.0, -71.0 / 16695, 71.0 / 1920,
                                     -17253.0 / 339200, 22.0 / 525, -1.0 / 40};

void require_flow_inputs(const CVector& z0, const CMatrix& a, const PolySymbol& q) {
  if (a.rows() != z0.size() || q.d() != z0.size()) throw std::invalid_argument("hartree_flow: dimension mismatch");
  if (q.p() != 2 || q.q() != 2) throw std::invalid_argument("hartree_flow: Q must be (2,2)");
}

}  // namespace

FlowResult hartree_flow(const CVector& z0, const CMatrix& a, const PolySymbol& q, double t, double ode_tol) {
  require_flow_inputs(z0, a, q);
  if (!(ode_tol > 0.0)) throw std::invalid_argument("hartree_flow: ode_tol must be positive");
  const HermitianExp prop(a);
  FlowResult res;
  if (t == 0.0 || q.kernel().matrix.cwiseAbs().maxCoeff() == 0.0) {
    res.z_t = prop(t) * z0;
  } else {
    auto rhs = [&](double s, const CVector& w) -> CVector {
      if (prop.is_zero()) return cplx(0.0, -1.0) * grad_zbar(q, w);
      return cplx(0.0, -1.0) * (prop(-s) * grad_zbar(q, prop(s) * w));
    };
    const double dir = t > 0 ? 1.0 : -1.0;
    const double span = std::abs(t);
    double s = 0.0;
    double h = std::min(span, 0.01);
    CVector w = z0;
    std::array<CVector, 7> k;
    k[0] = rhs(0.0, w);
    while (s < span) {
      if (s + h > span) h = span - s;
      if (h < 1e-14 * std::max(1.0, span)) throw std::runtime_error("hartree_flow: step size underflow");
      for (int i = 1; i < 7; ++i) {
        CVector y = w;
        for (int j = 0; j < i; ++j) {
          if (kA[i - 1][j] != 0.0) y += (dir * h * kA[i - 1][j]) * k[j];
        }
        k[i] = rhs(dir * (s + kC[i - 1] * h), y);
      }
      // stage 6 input is the fifth-order solution (FSAL)
      CVector w_new = w;
      for (int j = 0; j < 6; ++j) w_new += (dir * h * kA[5][j]) * k[j];
      CVector err = CVector::Zero(w.size());
      for (int j = 0; j < 7; ++j) err += (dir * h * kErr[j]) * k[j];
      double e = 0.0;
      for (Eigen::Index i = 0; i < w.size(); ++i) {
        const double sc = ode_tol + ode_tol * std::max(std::abs(w[i]), std::abs(w_new[i]));
        e = std::max(e, std::abs(err[i]) / sc);
      }
      if (e <= 1.0) {
        s += h;
        w = std::move(w_new);
        k[0] = k[6];
        ++res.steps;
      }
      const double factor = e == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(e, -0.2), 0.2, 5.0);
      h *= factor;
    }
    res.z_t = prop(t) * w;
  }
  res.energy_drift = std::abs(hartree_energy(a, q, res.z_t) - hartree_energy(a, q, z0));
  res.norm_drift = std::abs(res.z_t.norm() - z0.norm());
  return res;
}

FlowResult flow_sliced(const CVector& z0, const CMatrix& a, const PolySymbol& q, double t, double slice,
                       double ode_tol) {
  if (!(slice > 0.0)) throw std::invalid_argument("flow_sliced: slice must be positive");
  require_flow_inputs(z0, a, q);
  const double span = std::abs(t);
  const double dir = t >= 0 ? 1.0 : -1.0;
  const int pieces = std::max(1, static_cast<int>(std::ceil(span / slice - 1e-12)));
  FlowResult res;
  res.z_t = z0;
  for (int i = 0; i < pieces; ++i) {
    const double len = std::min(slice, span - i * slice);
    const FlowResult part = hartree_flow(res.z_t, a, q, dir * len, ode_tol);
    res.z_t = part.z_t;
    res.steps += part.steps;
  }
  res.energy_drift = std::abs(hartree_energy(a, q, res.z_t) - hartree_energy(a, q, z0));
  res.norm_drift = std::abs(res.z_t.norm() - z0.norm());
  return res;
}

std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: need n >= 1");
  std::vector<double> x(static_cast<std::size_t>(n)), w(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    double r = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = r;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * r * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (r * p1 - p0) / (r * r - 1.0);
      const double step = p1 / dp;
      r -= step;
      if (std::abs(step) < 1e-16) break;
    }
    // recompute the derivative at the converged root
    double p0 = 1.0, p1 = r;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * r * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (r * p1 - p0) / (r * r - 1.0);
    x[static_cast<std::size_t>(i)] = 0.5 * (1.0 - r);
    w[static_cast<std::size_t>(i)] = 1.0 / ((1.0 - r * r) * dp * dp);
  }
  return {x, w};
}

namespace {

// Accumulates the nested integrals int_0^upper dt_k ... of successive brackets.
void nest(const PolySymbol& x, double upper, double weight, int level, int m_max, const PolySymbol& q,
          const HermitianExp& prop, const std::vector<double>& u, const std::vector<double>& wt,
          std::vector<PolySymbol>& acc) {
  acc[static_cast<std::size_t>(level)] += x * cplx(weight);
  if (level == m_max) return;
  for (std::size_t j = 0; j < u.size(); ++j) {
    const double tj = upper * u[j];
    const PolySymbol next = poisson(free_evolve(q, prop, tj), x, 1);
    nest(next, tj, weight * upper * wt[j], level + 1, m_max, q, prop, u, wt, acc);
  }
}

std::vector<PolySymbol> nested_rule(const PolySymbol& bt, const PolySymbol& q, const HermitianExp& prop, double t,
                                    int m_max, int nodes) {
  std::vector<PolySymbol> acc;
  for (int m = 0; m <= m_max; ++m) acc.push_back(PolySymbol::zero(bt.d(), bt.p() + m, bt.q() + m));
  const auto [u, wt] = gauss_legendre(nodes);
  nest(bt, t, 1.0, 0, m_max, q, prop, u, wt, acc);
  return acc;
}

}  // namespace

DysonTerms dyson_terms(const PolySymbol& b, const PolySymbol& q, const CMatrix& a, double t, int m_max, int nodes) {
  if (m_max < 0) throw std::invalid_argument("dyson_terms: negative order");
  if (q.p() != 2 || q.q() != 2) throw std::invalid_argument("dyson_terms: Q must be (2,2)");
  const HermitianExp prop(a);
  const PolySymbol bt = free_evolve(b, prop, t);
  DysonTerms out;
  if (prop.is_zero()) {
    if (m_max > kMaxCollapsedOrder) {
      throw std::invalid_argument("dyson_terms: order " + std::to_string(m_max) + " above " +
                                  std::to_string(kMaxCollapsedOrder));
    }
    PolySymbol x = bt;
    double vol = 1.0;
    for (int m = 0; m <= m_max; ++m) {
      if (m > 0) {
        x = poisson(q, x, 1);
        vol *= t / m;
      }
      out.integrals.push_back(x * cplx(vol));
      out.quad_error.push_back(0.0);
    }
    return out;
  }
  if (m_max > kMaxQuadratureOrder) {
    throw std::invalid_argument("dyson_terms: order " + std::to_string(m_max) + " above " +
                                std::to_string(kMaxQuadratureOrder) + " with A != 0");
  }
  out.integrals = nested_rule(bt, q, prop, t, m_max, nodes);
  const auto check = nested_rule(bt, q, prop, t, m_max, nodes + 4);
  for (int m = 0; m <= m_max; ++m) {
    const auto i = static_cast<std::size_t>(m);
    out.quad_error.push_back(m == 0 ? 0.0 : op_norm((out.integrals[i] - check[i]).kernel()));
  }
  return out;
}

double radius_t0(double lambda, double norm_q) {
  if (!(lambda > 0.0)) throw std::invalid_argument("radius_t0: lambda must be positive");
  if (norm_q == 0.0) return std::numeric_limits<double>::infinity();
  return 1.0 / (8.0 * lambda * norm_q);
}

double radius_t0(double lambda, const PolySymbol& q) { return radius_t0(lambda, op_norm(q.kernel())); }

Envelopes envelopes(const PolySymbol& b, const PolySymbol& q, double lambda, double eps, double t, int m_max) {
  const int p = b.p(), qq = b.q();
  const double nb = op_norm(b.kernel()), nq = op_norm(q.kernel());
  const double at = std::abs(t);
  auto lemma = [&](int m) {
    if (p == 0 && qq == 0) return m == 0 ? nb : 0.0;
    return bound_lemma(p, qq, m, 0, nq, nb);
  };
  auto vol = [&](int m) { return std::exp(m * std::log(at) - std::lgamma(m + 1.0)); };
  Envelopes env;
  for (int m = 0; m <= m_max; ++m) {
    const double v = m == 0 ? 1.0 : (at == 0.0 ? 0.0 : vol(m));
    env.a.push_back(std::pow(lambda, m + 0.5 * (p + qq)) * v * lemma(m));
    env.b.push_back(m == 0 ? 0.0
                           : eps * nq * std::pow(p + qq + m - 1, 2) * std::pow(lambda, m - 1 + 0.5 * (p + qq)) * v *
                                 lemma(m - 1));
  }
  env.c = (m_max == 0 ? 1.0 : (at == 0.0 ? 0.0 : vol(m_max))) * lemma(m_max);
  return env;
}

double geometric_majorant(const PolySymbol& b, const PolySymbol& q, double lambda, double t, int m) {
  const int big = std::max({b.p(), b.q(), 1});
  return std::ldexp(1.0, big - 1) * op_norm(b.kernel()) *
         std::pow(8.0 * lambda * std::abs(t) * op_norm(q.kernel()), m);
}

SeriesReport dyson_classical(const PolySymbol& b, const PolySymbol& q, const CMatrix& a, const CVector& z, double t,
                             int m_max, double lambda, double quad_tol) {
  const HermitianExp prop(a);
  const int m_eff = prop.is_zero() ? m_max : std::min(m_max, kMaxQuadratureOrder);
  const DysonTerms terms = dyson_terms(b, q, a, t, m_eff);
  SeriesReport rep;
  cplx im_pow = 1.0, sum = 0.0;
  for (int m = 0; m <= m_eff; ++m) {
    const cplx term = im_pow * eval(terms.integrals[static_cast<std::size_t>(m)], z);
    rep.terms.push_back(term);
    sum += term;
    rep.partial_sums.push_back(sum);
    im_pow *= cplx(0.0, 1.0);
  }
  rep.quad_error = terms.quad_error;
  rep.envelopes = envelopes(b, q, lambda, 0.0, t, m_eff);
  rep.t0 = radius_t0(lambda, q);
  bool quad_ok = true;
  for (double e : rep.quad_error) quad_ok = quad_ok && e <= quad_tol;
  rep.converged = std::abs(t) < rep.t0 && quad_ok;
  return rep;
}

cplx dyson_quantum(const DensityState& rho, const PolySymbol& b, const PolySymbol& q, const CMatrix& a, double t,
                   int m_max) {
  const DysonTerms terms = dyson_terms(b, q, a, t, m_max);
  cplx im_pow = 1.0, sum = 0.0;
  for (const auto& x : terms.integrals) {
    sum += im_pow * wick_expectation(rho, x);
    im_pow *= cplx(0.0, 1.0);
  }
  return sum;
}

CVector dyson_sliced(const CVector& z0, const CMatrix& a, const PolySymbol& q, double t, double slice, int m_max) {
  if (!(slice > 0.0)) throw std::invalid_argument("dyson_sliced: slice must be positive");
  const int d = static_cast<int>(z0.size());
  auto coordinate_terms = [&](double len) {
    std::vector<DysonTerms> out;
    for (int j = 0; j < d; ++j) {
      CMatrix row = CMatrix::Zero(1, d);
      row(0, j) = 1.0;
      out.push_back(dyson_terms(PolySymbol(SymOperator(d, 1, 0, row)), q, a, len, m_max));
    }
    return out;
  };
  auto step = [&](const std::vector<DysonTerms>& terms, const CVector& z) {
    CVector next(d);
    for (int j = 0; j < d; ++j) {
      cplx im_pow = 1.0, sum = 0.0;
      for (const auto& x : terms[static_cast<std::size_t>(j)].integrals) {
        sum += im_pow * eval(x, z);
        im_pow *= cplx(0.0, 1.0);
      }
      next[j] = sum;
    }
    return next;
  };
  const double span = std::abs(t);
  const double dir = t >= 0 ? 1.0 : -1.0;
  const int full = static_cast<int>(std::floor(span / slice + 1e-12));
  const double rest = span - full * slice;
  CVector z = z0;
  if (full > 0) {
    const auto terms = coordinate_terms(dir * slice);
    for (int i = 0; i < full; ++i) z = step(terms, z);
  }
  if (rest > 1e-14 * std::max(1.0, span)) z = step(coordinate_terms(dir * rest), z);
  return z;
}

}  // namespace fockmf
