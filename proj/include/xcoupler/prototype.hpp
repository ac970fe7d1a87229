#pragma once

#include "xcoupler/coupling_matrix.hpp"
#include "xcoupler/polynomial.hpp"

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace xcoupler {

// Characteristic polynomials of a generalized Chebyshev response in the
// complex lowpass variable s = j*Omega:
//   S11 = F / (eps_r E),  S21 = P / (eps E),  |F|^2/eps_r^2 + |P|^2/eps^2 = |E|^2.
// F and E are monic. P is monic up to a unit factor: j when
// order - zeros is even, and an overall sign chosen so that P/(eps E) equals
// the coupling-matrix S21 = -2j [A^-1]_{L,S}. The matrix S11 is -F/(eps_r E).
struct CharPoly {
  int order = 0;
  Polynomial f;
  Polynomial p;
  Polynomial e;
  double eps = 1.0;
  double eps_r = 1.0;
  std::vector<double> zeros;  // finite transmission zeros, normalized Omega

  cplx s11(double omega) const;
  cplx s21(double omega) const;
};

// Generalized Chebyshev polynomials with equiripple return loss rl_db and
// finite transmission zeros at normalized frequencies tz (|tz| > 1,
// tz.size() < order).
CharPoly synthesize_polynomials(int order, double rl_db, std::span<const double> tz);

// Canonical transversal realization: each resonator couples only to S and L,
// diagonal entries are the negated eigenfrequencies of the admittance
// partial-fraction expansion, ordered by increasing eigenfrequency.
CouplingMatrix transversal_matrix(const CharPoly& cp);

// R^T m R with R a plane rotation by angle on resonator rows/cols (i, j),
// 1 <= i < j <= N.
CouplingMatrix apply_rotation(const CouplingMatrix& m, std::pair<int, int> pivot,
                              double angle);

struct ReconfigureOptions {
  int max_starts = 64;          // seeded multistart budget for the rotation search
  int wanted_solutions = 8;     // stop after this many converged starts
  std::uint64_t seed = 1;
  double mask_tol = 1e-8;       // forbidden entries must end below this
  double response_tol = 1e-6;   // |S11|, |S21| agreement on Omega in [-3, 3]
};

// Transforms m onto mask while preserving its response. The search runs in
// the space of resonator rotations (an orthogonal similarity, so the
// response and resonator eigenvalues are preserved by construction), seeded
// from the identity; entry-space fitting is the fallback. Among several
// valid realizations the one with stronger couplings on lower-indexed
// entries wins, and signs follow normalize_signs.
// Throws DomainError for an infeasible mask (no S-L path) and
// ConvergenceError carrying the achieved residual when no realization is
// found.
CouplingMatrix reconfigure(const CouplingMatrix& m, const TopologyMask& mask,
                           const ReconfigureOptions& options = {});

// Largest | |S11_a| - |S11_b| | or | |S21_a| - |S21_b| | over n points on
// Omega in [lo, hi].
double response_mismatch(const CouplingMatrix& a, const CouplingMatrix& b,
                         double lo = -3.0, double hi = 3.0, int n = 1001);

}  // namespace xcoupler
