#include "xcoupler/prototype.hpp"

#include "xcoupler/error.hpp"
#include "xcoupler/fitter.hpp"
#include "xcoupler/least_squares.hpp"
#include "xcoupler/response.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

namespace xcoupler {

namespace {

constexpr cplx kJ{0.0, 1.0};

// Substitutes omega = -j s into a polynomial in omega.
Polynomial omega_to_s(const Polynomial& p) {
  std::vector<cplx> c(p.coeffs());
  cplx factor = 1.0;
  for (auto& ck : c) {
    ck *= factor;
    factor *= -kJ;
  }
  return Polynomial(std::move(c));
}

// Even-power real parts and odd-power imaginary parts of q (m1), and the
// complement (n1).
std::pair<Polynomial, Polynomial> split_parts(const Polynomial& q) {
  std::vector<cplx> m1(q.coeffs().size()), n1(q.coeffs().size());
  for (std::size_t k = 0; k < q.coeffs().size(); ++k) {
    const cplx c = q.coeffs()[k];
    if (k % 2 == 0) {
      m1[k] = c.real();
      n1[k] = kJ * c.imag();
    } else {
      m1[k] = kJ * c.imag();
      n1[k] = c.real();
    }
  }
  return {Polynomial(std::move(m1)), Polynomial(std::move(n1))};
}

std::vector<std::pair<int, int>> resonator_pairs(int order) {
  std::vector<std::pair<int, int>> out;
  for (int i = 1; i <= order; ++i) {
    for (int j = i + 1; j <= order; ++j) out.emplace_back(i, j);
  }
  return out;
}

CouplingMatrix rotate_all(const CouplingMatrix& m,
                          const std::vector<std::pair<int, int>>& pairs,
                          const Eigen::VectorXd& angles) {
  CouplingMatrix out = m;
  for (std::size_t k = 0; k < pairs.size(); ++k) out = apply_rotation(out, pairs[k], angles[k]);
  return out;
}

// Upper-triangle positions (i <= j) the mask forbids, excluding the
// structurally zero S/S and L/L diagonals.
std::vector<std::pair<int, int>> forbidden_entries(const TopologyMask& mask) {
  std::vector<std::pair<int, int>> out;
  const int n = mask.size();
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      if ((i == j && (i == 0 || i == n - 1)) || mask.allowed(i, j)) continue;
      out.emplace_back(i, j);
    }
  }
  return out;
}

CouplingMatrix zero_forbidden(const CouplingMatrix& m, const TopologyMask& mask) {
  CouplingMatrix out = m;
  for (auto [i, j] : forbidden_entries(mask)) out.set(i, j, 0.0);
  return out;
}

// True when a should be preferred over b: first upper-triangle entry (row
// major) whose magnitudes differ by more than tol is larger in a.
bool stronger_leading_couplings(const CouplingMatrix& a, const CouplingMatrix& b,
                                double tol = 1e-6) {
  for (int i = 0; i < a.size(); ++i) {
    for (int j = i; j < a.size(); ++j) {
      const double da = std::abs(a(i, j));
      const double db = std::abs(b(i, j));
      if (std::abs(da - db) > tol) return da > db;
    }
  }
  return false;
}

}  // namespace

cplx CharPoly::s11(double omega) const {
  const cplx s = kJ * omega;
  return f(s) / (eps_r * e(s));
}

cplx CharPoly::s21(double omega) const {
  const cplx s = kJ * omega;
  return p(s) / (eps * e(s));
}

CharPoly synthesize_polynomials(int order, double rl_db, std::span<const double> tz) {
  if (order < 1) throw DomainError("filter order must be >= 1");
  if (!(rl_db > 0.0) || !std::isfinite(rl_db)) {
    throw DomainError("return loss must be a positive number of dB");
  }
  if (static_cast<int>(tz.size()) >= order) {
    throw DomainError("number of finite transmission zeros must be below the order");
  }
  for (const double z : tz) {
    if (!std::isfinite(z) || std::abs(z) <= 1.0) {
      std::ostringstream msg;
      msg << "transmission zero at Omega = " << z << " is not in the stopband (|Omega| > 1)";
      throw DomainError(msg.str());
    }
  }

  // Filtering function numerator by the U/V recursion: the product of
  // (omega - 1/w_n) + omega' sqrt(1 - 1/w_n^2), omega' = sqrt(omega^2 - 1),
  // split into a polynomial part U and an omega'-multiplied part V.
  Polynomial u = Polynomial::constant(1.0);
  Polynomial v = Polynomial::constant(0.0);
  const Polynomial w2m1({-1.0, 0.0, 1.0});
  for (int n = 0; n < order; ++n) {
    const double inv = n < static_cast<int>(tz.size()) ? 1.0 / tz[n] : 0.0;
    const double root = std::sqrt(1.0 - inv * inv);
    const Polynomial lin({-inv, 1.0});
    Polynomial u_next = lin * u + root * (w2m1 * v);
    Polynomial v_next = lin * v + root * u;
    u = std::move(u_next);
    v = std::move(v_next);
  }

  CharPoly cp;
  cp.order = order;
  cp.zeros.assign(tz.begin(), tz.end());
  cp.f = omega_to_s(u);
  cp.f *= 1.0 / cp.f.leading();

  std::vector<cplx> zero_roots;
  for (const double z : tz) zero_roots.push_back(kJ * z);
  cp.p = Polynomial::from_roots(zero_roots);
  if ((order - static_cast<int>(tz.size())) % 2 == 0) cp.p *= kJ;
  // Sign aligning P/(eps E) with the coupling-matrix S21.
  cp.p *= -1.0;

  const double ripple = std::sqrt(std::pow(10.0, rl_db / 10.0) - 1.0);
  cp.eps = std::abs(cp.p(kJ)) / std::abs(cp.f(kJ)) / ripple;
  cp.eps_r = 1.0;

  // On the imaginary axis F and P are in phase quadrature, so
  // Q = F/eps_r + P/eps satisfies Q Q* = E E*. Each root of Q is a root of E
  // or the mirror image of one; reflecting into the left half-plane yields E
  // from a degree-N solve instead of the worse conditioned degree-2N one.
  const Polynomial q = (1.0 / cp.eps_r) * cp.f + (1.0 / cp.eps) * cp.p;
  std::vector<cplx> left;
  for (const cplx r : q.roots()) {
    const cplx l = r.real() > 0.0 ? -std::conj(r) : r;
    if (!(l.real() < 0.0)) {
      throw ConvergenceError("E has a root on the imaginary axis", std::abs(l.real()));
    }
    left.push_back(l);
  }
  std::sort(left.begin(), left.end(),
            [](cplx a, cplx b) { return a.imag() < b.imag(); });
  cp.e = Polynomial::from_roots(left);
  return cp;
}

CouplingMatrix transversal_matrix(const CharPoly& cp) {
  const int order = cp.order;
  const int nfz = static_cast<int>(cp.zeros.size());
  if (nfz >= order) {
    throw DomainError("fully canonical responses (zeros == order) are not supported");
  }
  // Short-circuit admittances y21 = y21n / yd and y22 = y22n / yd from the
  // split of E + F/eps_r into m1 and n1.
  const auto [m1, n1] = split_parts(cp.e + (1.0 / cp.eps_r) * cp.f);
  const bool even = order % 2 == 0;
  Polynomial den = even ? m1 : n1;
  Polynomial y22n = even ? n1 : m1;
  // P carries an extra sign relative to the admittance convention.
  Polynomial y21n = (-1.0 / cp.eps) * cp.p;
  const cplx scale = 1.0 / den.leading();
  den *= scale;
  y22n *= scale;
  y21n *= scale;

  std::vector<cplx> poles = den.roots();
  std::sort(poles.begin(), poles.end(), [](cplx a, cplx b) { return a.imag() < b.imag(); });
  const Polynomial dden = den.derivative();

  CouplingMatrix m(order);
  for (int k = 0; k < order; ++k) {
    const cplx pole = poles[k];
    const cplx d = dden(pole);
    const double r22 = (y22n(pole) / d).real();
    const double r21 = (y21n(pole) / d).real();
    if (!(r22 > 0.0)) {
      throw ConvergenceError("non-positive y22 residue in transversal extraction", r22);
    }
    const double ml = std::sqrt(r22);
    m.set(k + 1, k + 1, -pole.imag());
    m.set(m.load(), k + 1, ml);
    m.set(m.source(), k + 1, r21 / ml);
  }
  return m;
}

CouplingMatrix apply_rotation(const CouplingMatrix& m, std::pair<int, int> pivot,
                              double angle) {
  const auto [i, j] = pivot;
  if (!(1 <= i && i < j && j <= m.order())) {
    throw DomainError("rotation pivot must satisfy 1 <= i < j <= N (resonators only)");
  }
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  Eigen::MatrixXd out = m.values();
  const auto& in = m.values();
  for (int k = 0; k < m.size(); ++k) {
    if (k == i || k == j) continue;
    const double ik = c * in(i, k) + s * in(j, k);
    const double jk = -s * in(i, k) + c * in(j, k);
    out(i, k) = out(k, i) = ik;
    out(j, k) = out(k, j) = jk;
  }
  out(i, i) = c * c * in(i, i) + 2.0 * c * s * in(i, j) + s * s * in(j, j);
  out(j, j) = s * s * in(i, i) - 2.0 * c * s * in(i, j) + c * c * in(j, j);
  out(i, j) = out(j, i) = c * s * (in(j, j) - in(i, i)) + (c * c - s * s) * in(i, j);
  CouplingMatrix result(out);
  result.set_labels(m.labels());
  return result;
}

double response_mismatch(const CouplingMatrix& a, const CouplingMatrix& b, double lo,
                         double hi, int n) {
  double worst = 0.0;
  for (int k = 0; k < n; ++k) {
    const double omega = n == 1 ? lo : lo + (hi - lo) * k / (n - 1);
    SParam2 ra, rb;
    try {
      ra = response_at(a, omega);
      rb = response_at(b, omega);
    } catch (const SingularNetworkError&) {
      continue;
    }
    worst = std::max({worst, std::abs(std::abs(ra.s11) - std::abs(rb.s11)),
                      std::abs(std::abs(ra.s21) - std::abs(rb.s21))});
  }
  return worst;
}

CouplingMatrix reconfigure(const CouplingMatrix& m, const TopologyMask& mask,
                           const ReconfigureOptions& options) {
  if (mask.order() != m.order()) throw DomainError("mask order does not match matrix order");
  if (!mask.connects_source_to_load()) {
    throw DomainError("infeasible mask: no chain of couplings from S to L");
  }
  if (mask.satisfied_by(m)) return m;

  const auto forbidden = forbidden_entries(mask);
  const auto pairs = resonator_pairs(m.order());

  auto finish = [&](const CouplingMatrix& candidate) {
    CouplingMatrix out = normalize_signs(zero_forbidden(candidate, mask));
    out.set_labels(m.labels());
    return out;
  };

  std::optional<CouplingMatrix> chosen;
  double best_violation = INFINITY;
  CouplingMatrix best_attempt = m;

  if (!pairs.empty()) {
    const ResidualFn residuals = [&](const Eigen::VectorXd& angles) {
      const CouplingMatrix r = rotate_all(m, pairs, angles);
      Eigen::VectorXd out(static_cast<Eigen::Index>(forbidden.size()));
      for (std::size_t k = 0; k < forbidden.size(); ++k) {
        out[static_cast<Eigen::Index>(k)] = r(forbidden[k].first, forbidden[k].second);
      }
      return out;
    };
    LeastSquaresOptions ls;
    ls.max_iters = 500;
    ls.cost_tol = 1e-30;
    ls.fd_step = 1e-6;

    std::mt19937_64 rng(options.seed);
    std::uniform_real_distribution<double> angle_dist(-std::numbers::pi, std::numbers::pi);
    int found = 0;
    for (int start = 0; start < options.max_starts && found < options.wanted_solutions; ++start) {
      Eigen::VectorXd x0 = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(pairs.size()));
      if (start > 0) {
        for (auto& a : x0) a = angle_dist(rng);
      }
      const MinimizeResult fit = levenberg_marquardt(residuals, x0, ls);
      const CouplingMatrix rotated = rotate_all(m, pairs, fit.x);
      const double violation = mask.violation(rotated);
      if (violation < best_violation) {
        best_violation = violation;
        best_attempt = rotated;
      }
      if (violation > options.mask_tol) continue;
      ++found;
      const CouplingMatrix candidate = finish(rotated);
      if (!chosen || stronger_leading_couplings(candidate, *chosen)) chosen = candidate;
    }
  }

  if (chosen && response_mismatch(*chosen, m) <= options.response_tol) return *chosen;

  // Entry-space fallback seeded from the closest rotation found.
  const FrequencyPlan unit_plan(1.0, 1.0);
  std::vector<double> grid;
  for (int k = 0; k <= 300; ++k) grid.push_back(denormalize_tz(unit_plan, -3.0 + 0.02 * k));
  SParamSweep target;
  try {
    target = sparams(m, unit_plan, grid);
  } catch (const SingularNetworkError& e) {
    throw ConvergenceError(std::string("cannot build reconfiguration target: ") + e.what(),
                           best_violation);
  }
  CouplingMatrix seed = zero_forbidden(best_attempt, mask);
  FitProblem problem{mask, seed, unit_plan, target, FitWeights{}, EntryBounds::uniform(m.order(), 1e3)};
  FitOptions fit_options;
  fit_options.tol = 1e-16;
  fit_options.seed = options.seed;
  const FitResult fit = fit_matrix(problem, fit_options);
  const CouplingMatrix candidate = finish(fit.matrix);
  const double mismatch = response_mismatch(candidate, m);
  if (mismatch <= options.response_tol) return candidate;

  std::ostringstream msg;
  msg << "reconfiguration did not converge: rotation residual " << best_violation
      << ", fitted response mismatch " << mismatch;
  throw ConvergenceError(msg.str(), mismatch);
}

}  // namespace xcoupler
