#include "fockmf/wigner.hpp"

#include <array>
#include <cmath>
#include <queue>
#include <stdexcept>

namespace fockmf {

WignerMeasure::WignerMeasure(std::vector<Atom> atoms) : atoms_(std::move(atoms)) {
  if (atoms_.empty()) throw std::invalid_argument("WignerMeasure: no atoms");
  double total = 0.0;
  for (const auto& at : atoms_) {
    if (!(at.weight > 0.0)) throw std::invalid_argument("WignerMeasure: weights must be positive");
    if (at.z.size() != atoms_.front().z.size() || at.z.size() == 0) {
      throw std::invalid_argument("WignerMeasure: atoms disagree on dimension");
    }
    total += at.weight;
  }
  if (std::abs(total - 1.0) > 1e-12) throw std::invalid_argument("WignerMeasure: weights must sum to 1");
}

cplx measure_expectation(const WignerMeasure& mu, const PolySymbol& b) {
  cplx s = 0.0;
  for (const auto& at : mu.atoms()) {
    if (at.kind == AtomKind::circle && b.p() != b.q()) continue;
    s += at.weight * eval(b, at.z);
  }
  return s;
}

WignerMeasure push_forward(const WignerMeasure& mu, const CMatrix& a, const PolySymbol& q, double t, double ode_tol,
                           double slice) {
  if (t == 0.0) return mu;
  std::vector<Atom> out = mu.atoms();
  for (auto& at : out) {
    at.z = std::abs(t) <= slice ? hartree_flow(at.z, a, q, t, ode_tol).z_t
                                : flow_sliced(at.z, a, q, t, slice, ode_tol).z_t;
  }
  return WignerMeasure(std::move(out));
}

namespace {

constexpr std::array<double, 8> kKronrodX{0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                                          0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                                          0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                                          0.207784955007898467600689403773245, 0.0};
constexpr std::array<double, 8> kKronrodW{0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                                          0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                                          0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                                          0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
// Gauss weights for the odd-indexed Kronrod nodes (1, 3, 5, 7).
constexpr std::array<double, 4> kGaussW{0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                                        0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Piece {
  double lo, hi;
  cplx value;
  double error;
  bool operator<(const Piece& o) const { return error < o.error; }
};

Piece gk15(const std::function<cplx(double)>& f, double lo, double hi) {
  const double c = 0.5 * (lo + hi), h = 0.5 * (hi - lo);
  cplx kron = kKronrodW[7] * f(c);
  cplx gauss = kGaussW[3] * f(c);
  for (int i = 0; i < 7; ++i) {
    const cplx pair = f(c - h * kKronrodX[static_cast<std::size_t>(i)]) + f(c + h * kKronrodX[static_cast<std::size_t>(i)]);
    kron += kKronrodW[static_cast<std::size_t>(i)] * pair;
    if (i % 2 == 1) gauss += kGaussW[static_cast<std::size_t>(i / 2)] * pair;
  }
  return {lo, hi, kron * h, std::abs((kron - gauss) * h)};
}

}  // namespace

cplx integrate_adaptive(const std::function<cplx(double)>& f, double lo, double hi, double tol, int max_intervals) {
  if (!(tol > 0.0)) throw std::invalid_argument("integrate_adaptive: tol must be positive");
  if (lo == hi) return 0.0;
  std::priority_queue<Piece> pieces;
  pieces.push(gk15(f, lo, hi));
  cplx total = pieces.top().value;
  double err = pieces.top().error;
  while (!(err <= tol)) {
    if (!std::isfinite(err)) throw std::runtime_error("integrate_adaptive: non-finite integrand");
    if (static_cast<int>(pieces.size()) >= max_intervals) {
      throw std::runtime_error("integrate_adaptive: no convergence within " + std::to_string(max_intervals) +
                               " intervals");
    }
    const Piece worst = pieces.top();
    pieces.pop();
    const double mid = 0.5 * (worst.lo + worst.hi);
    const Piece left = gk15(f, worst.lo, mid), right = gk15(f, mid, worst.hi);
    total += left.value + right.value - worst.value;
    err += left.error + right.error - worst.error;
    pieces.push(left);
    pieces.push(right);
  }
  return total;
}

TransportSides transport_sides(const WignerMeasure& mu, const CMatrix& a, const PolySymbol& q, const PolySymbol& b,
                               double t, double quad_tol, double ode_tol, double slice) {
  if (!(quad_tol > 0.0)) throw std::invalid_argument("transport_sides: quad_tol must be positive");
  const HermitianExp prop(a);
  const cplx lhs = measure_expectation(push_forward(mu, a, q, t, ode_tol, slice), b);
  const cplx free_part = measure_expectation(mu, free_evolve(b, prop, t));
  const auto integrand = [&](double s) {
    const PolySymbol bracket = poisson(q, free_evolve(b, prop, t - s), 1);
    return measure_expectation(push_forward(mu, a, q, s, ode_tol, slice), bracket);
  };
  const cplx duhamel = integrate_adaptive(integrand, 0.0, t, quad_tol);
  return {lhs, free_part + cplx(0.0, 1.0) * duhamel};
}

double transport_residual(const WignerMeasure& mu, const CMatrix& a, const PolySymbol& q, const PolySymbol& b,
                          double t, double quad_tol, double ode_tol) {
  const auto sides = transport_sides(mu, a, q, b, t, quad_tol, ode_tol);
  return std::abs(sides.lhs - sides.rhs);
}

OrderFit fit_order(const std::vector<double>& eps, const std::vector<double>& err, double floor) {
  if (eps.size() != err.size() || eps.size() < 2) throw std::invalid_argument("fit_order: need two or more points");
  OrderFit fit;
  bool all_small = true;
  for (double e : err) all_small = all_small && e < floor;
  if (all_small) {
    fit.exact = true;
    fit.order = std::numeric_limits<double>::infinity();
    return fit;
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(eps.size());
  for (std::size_t i = 0; i < eps.size(); ++i) {
    const double x = std::log(eps[i]), y = std::log(std::max(err[i], 1e-300));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  fit.order = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return fit;
}

std::vector<LabeledSymbol> default_dictionary(int d) {
  std::vector<LabeledSymbol> out;
  for (int p = 0; p <= 2; ++p)
    for (int q = 0; q <= 2; ++q) {
      const auto rows = static_cast<Eigen::Index>(sym_dim(d, q)), cols = static_cast<Eigen::Index>(sym_dim(d, p));
      for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) {
          CMatrix k = CMatrix::Zero(rows, cols);
          k(i, j) = 1.0;
          out.push_back({"E" + std::to_string(p) + std::to_string(q) + "_" + std::to_string(i) + "_" +
                             std::to_string(j),
                         PolySymbol(SymOperator(d, p, q, k))});
        }
    }
  return out;
}

std::vector<LimitRow> identify_limit(const std::function<DensityState(double)>& family,
                                     const std::vector<double>& epsilons, const WignerMeasure& candidate,
                                     const std::vector<LabeledSymbol>& dictionary, double floor) {
  std::vector<LimitRow> rows(dictionary.size());
  for (std::size_t k = 0; k < dictionary.size(); ++k) rows[k].label = dictionary[k].label;
  for (double eps : epsilons) {
    const DensityState rho = family(eps);
    for (std::size_t k = 0; k < dictionary.size(); ++k) {
      const auto& b = dictionary[k].symbol;
      rows[k].errors.push_back(std::abs(wick_expectation(rho, b) - measure_expectation(candidate, b)));
    }
  }
  if (epsilons.size() >= 2) {
    for (auto& r : rows) r.fit = fit_order(epsilons, r.errors, floor);
  }
  return rows;
}

}  // namespace fockmf
