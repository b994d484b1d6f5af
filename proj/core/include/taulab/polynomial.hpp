#pragma once

#include <complex>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace taulab {

using cplx = std::complex<double>;

inline constexpr cplx kI{0.0, 1.0};

/// Univariate polynomial with complex coefficients, stored in ascending order
/// (coeffs()[k] multiplies u^k). Trailing exact zeros are trimmed, so the zero
/// polynomial has an empty coefficient vector and degree -1.
class Polynomial {
 public:
  Polynomial() = default;
  explicit Polynomial(std::vector<cplx> coeffs);

  static Polynomial constant(cplx c);
  /// c * prod_k (u - roots[k])
  static Polynomial from_roots(std::span<const cplx> roots, cplx leading = 1.0);

  int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
  /// Degree after ignoring leading coefficients below rel_tol * scale().
  int degree(double rel_tol) const;
  bool is_zero() const { return coeffs_.empty(); }

  const std::vector<cplx>& coeffs() const { return coeffs_; }
  cplx operator[](std::size_t k) const { return k < coeffs_.size() ? coeffs_[k] : cplx{}; }
  cplx leading() const { return coeffs_.empty() ? cplx{} : coeffs_.back(); }

  /// Largest coefficient magnitude (0 for the zero polynomial).
  double scale() const;

  cplx operator()(cplx u) const;

  /// p(u + c)
  Polynomial shifted(cplx c) const;
  Polynomial derivative() const;
  /// Drops leading coefficients below rel_tol * scale().
  Polynomial trimmed(double rel_tol) const;

  Polynomial& operator+=(const Polynomial& other);
  Polynomial& operator-=(const Polynomial& other);
  Polynomial& operator*=(cplx s);

  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
  friend Polynomial operator*(Polynomial a, cplx s) { return a *= s; }
  friend Polynomial operator*(cplx s, Polynomial a) { return a *= s; }
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b);

  std::string to_string() const;

 private:
  void trim();
  std::vector<cplx> coeffs_;
};

struct DivMod {
  Polynomial quotient;
  Polynomial remainder;
};

/// Euclidean division. The divisor must be nonzero.
DivMod divmod(const Polynomial& num, const Polynomial& den);

/// Division that must leave no remainder: throws std::domain_error when the
/// remainder exceeds rel_tol * num.scale().
Polynomial divide_exact(const Polynomial& num, const Polynomial& den, double rel_tol);

/// Relative size of the remainder of num / den.
double division_defect(const Polynomial& num, const Polynomial& den);

/// Polynomial through (nodes[k], values[k]); degree nodes.size() - 1.
Polynomial interpolate(std::span<const cplx> nodes, std::span<const cplx> values);

/// Result of sampling a function on a circle and reading off its Taylor
/// coefficients by a discrete Fourier transform.
struct CircleFit {
  Polynomial poly;
  /// max |aliased coefficient of degree > requested| / max |kept coefficient|;
  /// zero (to rounding) when the sampled function is a polynomial of the
  /// requested degree.
  double defect = 0.0;
};

/// Samples f at n_nodes points center + radius * exp(i(2 pi k / n + phase)) and
/// returns the degree-`degree` Taylor polynomial (expanded about 0). Requires
/// n_nodes > degree.
CircleFit fit_on_circle(const std::function<cplx(cplx)>& f, int degree, cplx center,
                        double radius, int n_nodes, double phase = 0.0);

struct AberthOptions {
  int max_iter = 500;
  double tol = 1e-14;  ///< relative correction size at convergence
};

struct RootResult {
  std::vector<cplx> roots;
  int iterations = 0;
  bool converged = false;
  /// max_k |p(root_k)| / sum_j |c_j||root_k|^j (backward error)
  double backward_error = 0.0;
};

/// Simultaneous (Aberth-Ehrlich) iteration for all roots of p. When `initial`
/// has deg(p) entries it is used as the warm start; otherwise points on a
/// circle of the Cauchy-bound radius are used. The order of the returned roots
/// follows the order of the starting points.
RootResult aberth_roots(const Polynomial& p, std::span<const cplx> initial = {},
                        const AberthOptions& opts = {});

}  // namespace taulab
