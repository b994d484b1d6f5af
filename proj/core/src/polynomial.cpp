#include "taulab/polynomial.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace taulab {

Polynomial::Polynomial(std::vector<cplx> coeffs) : coeffs_(std::move(coeffs)) { trim(); }

Polynomial Polynomial::constant(cplx c) { return Polynomial({c}); }

Polynomial Polynomial::from_roots(std::span<const cplx> roots, cplx leading) {
  std::vector<cplx> c{leading};
  c.reserve(roots.size() + 1);
  for (const cplx r : roots) {
    c.push_back(0.0);
    for (std::size_t k = c.size() - 1; k > 0; --k) c[k] = c[k - 1] - r * c[k];
    c[0] = -r * c[0];
  }
  return Polynomial(std::move(c));
}

void Polynomial::trim() {
  while (!coeffs_.empty() && coeffs_.back() == cplx{}) coeffs_.pop_back();
}

int Polynomial::degree(double rel_tol) const {
  const double s = scale();
  int d = degree();
  while (d >= 0 && std::abs(coeffs_[d]) <= rel_tol * s) --d;
  return d;
}

double Polynomial::scale() const {
  double s = 0.0;
  for (const cplx c : coeffs_) s = std::max(s, std::abs(c));
  return s;
}

cplx Polynomial::operator()(cplx u) const {
  cplx acc{};
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * u + *it;
  return acc;
}

Polynomial Polynomial::shifted(cplx c) const {
  std::vector<cplx> a = coeffs_;
  const int n = degree();
  for (int i = 0; i < n; ++i)
    for (int j = n - 1; j >= i; --j) a[j] += c * a[j + 1];
  return Polynomial(std::move(a));
}

Polynomial Polynomial::derivative() const {
  if (coeffs_.size() <= 1) return {};
  std::vector<cplx> d(coeffs_.size() - 1);
  for (std::size_t k = 1; k < coeffs_.size(); ++k) d[k - 1] = static_cast<double>(k) * coeffs_[k];
  return Polynomial(std::move(d));
}

Polynomial Polynomial::trimmed(double rel_tol) const {
  const int d = degree(rel_tol);
  return Polynomial(std::vector<cplx>(coeffs_.begin(), coeffs_.begin() + (d + 1)));
}

Polynomial& Polynomial::operator+=(const Polynomial& other) {
  if (other.coeffs_.size() > coeffs_.size()) coeffs_.resize(other.coeffs_.size());
  for (std::size_t k = 0; k < other.coeffs_.size(); ++k) coeffs_[k] += other.coeffs_[k];
  trim();
  return *this;
}

Polynomial& Polynomial::operator-=(const Polynomial& other) {
  if (other.coeffs_.size() > coeffs_.size()) coeffs_.resize(other.coeffs_.size());
  for (std::size_t k = 0; k < other.coeffs_.size(); ++k) coeffs_[k] -= other.coeffs_[k];
  trim();
  return *this;
}

Polynomial& Polynomial::operator*=(cplx s) {
  for (cplx& c : coeffs_) c *= s;
  trim();
  return *this;
}

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
  if (a.is_zero() || b.is_zero()) return {};
  std::vector<cplx> c(a.coeffs_.size() + b.coeffs_.size() - 1);
  for (std::size_t i = 0; i < a.coeffs_.size(); ++i)
    for (std::size_t j = 0; j < b.coeffs_.size(); ++j) c[i + j] += a.coeffs_[i] * b.coeffs_[j];
  return Polynomial(std::move(c));
}

std::string Polynomial::to_string() const {
  std::ostringstream os;
  os.precision(17);
  os << "[";
  for (std::size_t k = 0; k < coeffs_.size(); ++k) {
    if (k) os << ", ";
    os << "(" << coeffs_[k].real() << "," << coeffs_[k].imag() << ")";
  }
  os << "]";
  return os.str();
}

DivMod divmod(const Polynomial& num, const Polynomial& den) {
  if (den.is_zero()) throw std::domain_error("polynomial division by zero");
  const int dn = num.degree();
  const int dd = den.degree();
  if (dn < dd) return {Polynomial{}, num};
  std::vector<cplx> rem = num.coeffs();
  std::vector<cplx> quo(dn - dd + 1);
  const cplx lead = den.leading();
  for (int k = dn - dd; k >= 0; --k) {
    const cplx q = rem[k + dd] / lead;
    quo[k] = q;
    for (int j = 0; j <= dd; ++j) rem[k + j] -= q * den[j];
    rem[k + dd] = 0.0;
  }
  rem.resize(dd);
  return {Polynomial(std::move(quo)), Polynomial(std::move(rem))};
}

double division_defect(const Polynomial& num, const Polynomial& den) {
  const double s = num.scale();
  if (s == 0.0) return 0.0;
  return divmod(num, den).remainder.scale() / s;
}

Polynomial divide_exact(const Polynomial& num, const Polynomial& den, double rel_tol) {
  auto [q, r] = divmod(num, den);
  const double s = num.scale();
  if (s > 0.0 && r.scale() > rel_tol * s) {
    std::ostringstream os;
    os << "inexact polynomial division: remainder " << r.scale() / s << " relative";
    throw std::domain_error(os.str());
  }
  return q;
}

Polynomial interpolate(std::span<const cplx> nodes, std::span<const cplx> values) {
  if (nodes.size() != values.size() || nodes.empty())
    throw std::invalid_argument("interpolate: node/value size mismatch");
  const auto n = static_cast<Eigen::Index>(nodes.size());
  Eigen::MatrixXcd v(n, n);
  Eigen::VectorXcd rhs(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    cplx p = 1.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      v(i, j) = p;
      p *= nodes[i];
    }
    rhs(i) = values[i];
  }
  const Eigen::VectorXcd c = v.partialPivLu().solve(rhs);
  return Polynomial(std::vector<cplx>(c.data(), c.data() + n));
}

CircleFit fit_on_circle(const std::function<cplx(cplx)>& f, int degree, cplx center,
                        double radius, int n_nodes, double phase) {
  if (n_nodes <= degree) throw std::invalid_argument("fit_on_circle: need n_nodes > degree");
  std::vector<cplx> samples(n_nodes);
  std::vector<cplx> omega(n_nodes);
  for (int k = 0; k < n_nodes; ++k) {
    omega[k] = std::polar(1.0, 2.0 * std::numbers::pi * k / n_nodes + phase);
    samples[k] = f(center + radius * omega[k]);
  }
  std::vector<cplx> dft(n_nodes);
  for (int m = 0; m < n_nodes; ++m) {
    cplx acc{};
    for (int k = 0; k < n_nodes; ++k) acc += samples[k] * std::pow(std::conj(omega[k]), m);
    dft[m] = acc / static_cast<double>(n_nodes);
  }
  double kept = 0.0;
  double aliased = 0.0;
  for (int m = 0; m < n_nodes; ++m) {
    if (m <= degree)
      kept = std::max(kept, std::abs(dft[m]));
    else
      aliased = std::max(aliased, std::abs(dft[m]));
  }

  std::vector<cplx> local(degree + 1);
  double rpow = 1.0;
  for (int m = 0; m <= degree; ++m) {
    local[m] = dft[m] / rpow;
    rpow *= radius;
  }
  CircleFit out;
  out.poly = Polynomial(std::move(local)).shifted(-center);
  out.defect = kept > 0.0 ? aliased / kept : (aliased > 0.0 ? 1.0 : 0.0);
  return out;
}

namespace {

double backward_error_at(const Polynomial& p, cplx z) {
  double denom = 0.0;
  double zp = 1.0;
  const double az = std::abs(z);
  for (const cplx c : p.coeffs()) {
    denom += std::abs(c) * zp;
    zp *= az;
  }
  return denom > 0.0 ? std::abs(p(z)) / denom : 0.0;
}

}  // namespace

RootResult aberth_roots(const Polynomial& p, std::span<const cplx> initial,
                        const AberthOptions& opts) {
  RootResult out;
  const int n = p.degree();
  if (n < 1) {
    out.converged = true;
    return out;
  }
  const Polynomial dp = p.derivative();

  std::vector<cplx> z;
  if (static_cast<int>(initial.size()) == n) {
    z.assign(initial.begin(), initial.end());
  } else {
    // Cauchy bound radius, points rotated off the axes.
    double r = 0.0;
    for (int k = 0; k < n; ++k) r = std::max(r, std::abs(p[k] / p.leading()));
    r = 1.0 + r;
    const cplx centroid = -p[n - 1] / (static_cast<double>(n) * p.leading());
    const double spread = std::max(1e-3, std::min(r, std::pow(std::abs(p[0] / p.leading()), 1.0 / n)));
    for (int k = 0; k < n; ++k)
      z.push_back(centroid + spread * std::polar(1.0, 2.0 * std::numbers::pi * k / n + 0.4));
  }
  // Warm starts may contain coincident points (e.g. a homogeneous chain);
  // separate them slightly so the Aberth correction is defined.
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < k; ++j)
      if (std::abs(z[k] - z[j]) < 1e-10 * (1.0 + std::abs(z[k])))
        z[k] += 1e-6 * (1.0 + std::abs(z[k])) * std::polar(1.0, 0.7 + 1.3 * k);

  for (int it = 0; it < opts.max_iter; ++it) {
    double max_corr = 0.0;
    for (int k = 0; k < n; ++k) {
      const cplx pv = p(z[k]);
      if (pv == cplx{}) continue;
      const cplx ratio = pv / dp(z[k]);
      cplx sum{};
      for (int j = 0; j < n; ++j)
        if (j != k) sum += 1.0 / (z[k] - z[j]);
      cplx w = ratio / (1.0 - ratio * sum);
      if (!std::isfinite(w.real()) || !std::isfinite(w.imag())) w = ratio;
      z[k] -= w;
      max_corr = std::max(max_corr, std::abs(w) / std::max(1.0, std::abs(z[k])));
    }
    out.iterations = it + 1;
    if (max_corr < opts.tol) {
      out.converged = true;
      break;
    }
  }
  for (const cplx r : z) out.backward_error = std::max(out.backward_error, backward_error_at(p, r));
  if (!out.converged && out.backward_error < 1e-13) out.converged = true;
  out.roots = std::move(z);
  return out;
}

}  // namespace taulab
