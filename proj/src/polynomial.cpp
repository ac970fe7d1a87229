#include "xcoupler/polynomial.hpp"

#include "xcoupler/error.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

namespace xcoupler {

Polynomial::Polynomial(std::vector<cplx> coeffs) : c_(std::move(coeffs)) {
  trim();
}

Polynomial Polynomial::from_roots(std::span<const cplx> roots) {
  std::vector<cplx> c{1.0};
  for (const cplx r : roots) {
    std::vector<cplx> next(c.size() + 1, 0.0);
    for (std::size_t k = 0; k < c.size(); ++k) {
      next[k + 1] += c[k];
      next[k] -= r * c[k];
    }
    c = std::move(next);
  }
  return Polynomial(std::move(c));
}

void Polynomial::trim() {
  while (c_.size() > 1 && c_.back() == cplx{}) c_.pop_back();
}

int Polynomial::degree() const noexcept {
  return c_.empty() ? 0 : static_cast<int>(c_.size()) - 1;
}

cplx Polynomial::operator()(cplx s) const {
  cplx acc{};
  for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * s + *it;
  return acc;
}

Polynomial Polynomial::derivative() const {
  if (c_.size() <= 1) return Polynomial({0.0});
  std::vector<cplx> d(c_.size() - 1);
  for (std::size_t k = 1; k < c_.size(); ++k) d[k - 1] = static_cast<double>(k) * c_[k];
  return Polynomial(std::move(d));
}

Polynomial Polynomial::paraconjugate() const {
  std::vector<cplx> d(c_.size());
  for (std::size_t k = 0; k < c_.size(); ++k) {
    d[k] = (k % 2 ? -1.0 : 1.0) * std::conj(c_[k]);
  }
  return Polynomial(std::move(d));
}

Polynomial& Polynomial::operator*=(cplx k) {
  for (auto& c : c_) c *= k;
  trim();
  return *this;
}

Polynomial operator+(const Polynomial& a, const Polynomial& b) {
  std::vector<cplx> c(std::max(a.c_.size(), b.c_.size()), 0.0);
  for (std::size_t k = 0; k < a.c_.size(); ++k) c[k] += a.c_[k];
  for (std::size_t k = 0; k < b.c_.size(); ++k) c[k] += b.c_[k];
  return Polynomial(std::move(c));
}

Polynomial operator-(const Polynomial& a, const Polynomial& b) {
  return a + (-1.0) * b;
}

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
  if (a.c_.empty() || b.c_.empty()) return Polynomial({0.0});
  std::vector<cplx> c(a.c_.size() + b.c_.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.c_.size(); ++i) {
    for (std::size_t j = 0; j < b.c_.size(); ++j) c[i + j] += a.c_[i] * b.c_[j];
  }
  return Polynomial(std::move(c));
}

std::vector<cplx> Polynomial::roots() const {
  const int n = degree();
  if (n < 1) return {};
  if (leading() == cplx{}) throw DomainError("polynomial has zero leading coefficient");

  Eigen::MatrixXcd companion = Eigen::MatrixXcd::Zero(n, n);
  for (int k = 0; k < n; ++k) companion(0, k) = -c_[n - 1 - k] / c_[n];
  for (int k = 1; k < n; ++k) companion(k, k - 1) = 1.0;
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(companion, false);
  if (solver.info() != Eigen::Success) {
    throw ConvergenceError("companion eigenvalue solve failed", 0.0);
  }

  const Polynomial dp = derivative();
  std::vector<cplx> out(solver.eigenvalues().data(), solver.eigenvalues().data() + n);
  for (auto& r : out) {
    // Newton polish; stop once the step no longer shrinks.
    double last_step = INFINITY;
    for (int it = 0; it < 50; ++it) {
      const cplx d = dp(r);
      if (d == cplx{}) break;
      const cplx step = (*this)(r) / d;
      if (!(std::abs(step) < last_step)) break;
      r -= step;
      last_step = std::abs(step);
      if (last_step <= 1e-15 * std::max(1.0, std::abs(r))) break;
    }
  }
  return out;
}

}  // namespace xcoupler
