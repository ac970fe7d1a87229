#pragma once

#include <complex>
#include <span>
#include <vector>

namespace xcoupler {

using cplx = std::complex<double>;

// Dense complex polynomial, coefficients in ascending powers.
class Polynomial {
 public:
  Polynomial() = default;
  explicit Polynomial(std::vector<cplx> coeffs);
  static Polynomial constant(cplx c) { return Polynomial({c}); }
  // Monic polynomial with the given roots.
  static Polynomial from_roots(std::span<const cplx> roots);

  // Degree after trimming exact zeros; the zero polynomial reports 0.
  int degree() const noexcept;
  const std::vector<cplx>& coeffs() const noexcept { return c_; }
  cplx operator[](int k) const { return k < static_cast<int>(c_.size()) ? c_[k] : cplx{}; }
  cplx leading() const { return c_.empty() ? cplx{} : c_.back(); }

  cplx operator()(cplx s) const;
  Polynomial derivative() const;
  // p*(s) = conj(p(-conj(s))); equals conj(p) on the imaginary axis.
  Polynomial paraconjugate() const;

  Polynomial& operator*=(cplx k);
  friend Polynomial operator+(const Polynomial& a, const Polynomial& b);
  friend Polynomial operator-(const Polynomial& a, const Polynomial& b);
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b);
  friend Polynomial operator*(cplx k, Polynomial p) { return p *= k; }

  // All roots: companion-matrix eigenvalues, Newton-polished.
  std::vector<cplx> roots() const;

 private:
  void trim();
  std::vector<cplx> c_;
};

}  // namespace xcoupler
