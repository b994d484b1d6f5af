#include "taulab/fusion.hpp"

#include "taulab/io.hpp"

#include <algorithm>
#include <cmath>

namespace taulab {

nlohmann::json to_json(const ConventionRecord& c) {
  return {{"jt_shift", to_json(c.jt_shift)},
          {"row_shift", to_json(c.row_shift)},
          {"t0_step", to_json(c.t0_step)},
          {"eta", to_json(c.eta)},
          {"norm_factors", c.norm_factors}};
}

ConventionRecord convention_from_json(const nlohmann::json& j) {
  ConventionRecord c;
  c.jt_shift = cplx_from_json(j.at("jt_shift"));
  c.row_shift = cplx_from_json(j.at("row_shift"));
  c.t0_step = cplx_from_json(j.at("t0_step"));
  c.eta = cplx_from_json(j.at("eta"));
  c.norm_factors = j.value("norm_factors", c.norm_factors);
  return c;
}

Polynomial ts_norm_factor(int s, const ChainSpec& spec) {
  const Polynomial phi = spec.phi();
  Polynomial g = Polynomial::constant(1.0);
  for (int j = 1; j <= s - 1; ++j) g = g * phi.shifted(cplx(0.0, s - 2.0 * j));
  return g;
}

Polynomial ts_raw(int s, std::span<const cplx> roots, const ChainSpec& spec) {
  if (s < 0) throw std::invalid_argument("ts_raw: s must be >= 0");
  if (s == 0) return spec.phi();
  if (s > 6) throw std::invalid_argument("ts_raw: exact expansion limited to s <= 6");
  const Polynomial Q = Polynomial::from_roots(roots);
  const Polynomial a = spec.a(), d = spec.d();
  // Q_j = Q(u + (s + 1 - 2j) i), j = 0..s+1
  std::vector<Polynomial> q;
  for (int j = 0; j <= s + 1; ++j) q.push_back(Q.shifted(cplx(0.0, s + 1.0 - 2.0 * j)));

  Polynomial den = Polynomial::constant(1.0);
  for (int j = 1; j <= s; ++j) den = den * q[j];

  Polynomial num;
  for (int k = 0; k <= s; ++k) {
    Polynomial term = Polynomial::constant(1.0);
    for (int m = 1; m <= k; ++m) term = term * d.shifted(cplx(0.0, s + 1.0 - 2.0 * m));
    for (int m = k + 1; m <= s; ++m) term = term * a.shifted(cplx(0.0, s + 1.0 - 2.0 * m));
    // Q_0 Q_{s+1} / (Q_k Q_{k+1}) over the common denominator Q_1 ... Q_s
    std::vector<int> count(s + 2, 0);
    count[0] += 1;
    count[s + 1] += 1;
    for (int j = 1; j <= s; ++j) count[j] += 1;
    count[k] -= 1;
    count[k + 1] -= 1;
    for (int j = 0; j <= s + 1; ++j)
      for (int c = 0; c < count[j]; ++c) term = term * q[j];
    num += term;
  }
  try {
    return divide_exact(num, den, 1e-9);
  } catch (const std::domain_error& e) {
    throw ConventionError(std::string("ts_raw: poles do not cancel: ") + e.what());
  }
}

cplx ts_value(int s, std::span<const cplx> roots, const ChainSpec& spec, cplx u) {
  auto phi = [&](cplx x) {
    cplx p = 1.0;
    for (const cplx t : spec.theta) p *= x - t;
    return p;
  };
  auto Q = [&](cplx x) {
    cplx p = 1.0;
    for (const cplx v : roots) p *= x - v;
    return p;
  };
  const cplx outer = Q(u + cplx(0.0, s + 1.0)) * Q(u - cplx(0.0, s + 1.0));
  cplx sum = 0.0;
  for (int k = 0; k <= s; ++k) {
    const cplx den = Q(u + cplx(0.0, s + 1.0 - 2.0 * k)) * Q(u + cplx(0.0, s - 1.0 - 2.0 * k));
    sum += phi(u + cplx(0.0, s - 2.0 * k)) * outer / den;
  }
  return sum;
}

Polynomial ts_normalized(int s, std::span<const cplx> roots, const ChainSpec& spec, double defect_tol) {
  if (s < 0) throw std::invalid_argument("ts_normalized: s must be >= 0");
  if (s == 0) return spec.phi();
  double rmax = 0.0;
  for (const cplx v : roots) rmax = std::max(rmax, std::abs(v));
  for (const cplx t : spec.theta) rmax = std::max(rmax, std::abs(t));
  // Every pole of the individual terms lies within |v| + s + 1 of the origin.
  const double radius = rmax + s + 2.0;
  const int n_nodes = spec.L + 9;
  const auto fit = fit_on_circle([&](cplx u) { return ts_value(s, roots, spec, u); }, spec.L, 0.0, radius,
                                 n_nodes, 0.1234);
  if (fit.defect > defect_tol)
    throw ConventionError("ts_normalized: s = " + std::to_string(s) + " is not a degree-L polynomial (defect " +
                          std::to_string(fit.defect) + ")");
  return fit.poly;
}

namespace {

struct PolyDet {
  Polynomial value;
  double term_scale = 0.0;
};

// Laplace expansion along the first remaining row.
PolyDet det_rec(const std::vector<std::vector<Polynomial>>& m, int row, std::vector<char>& used) {
  const int n = static_cast<int>(m.size());
  if (row == n) return {Polynomial::constant(1.0), 1.0};
  PolyDet out;
  int sign = 1;
  for (int c = 0; c < n; ++c) {
    if (used[c]) continue;
    const bool zero = m[row][c].is_zero();
    if (!zero) {
      used[c] = 1;
      const PolyDet minor = det_rec(m, row + 1, used);
      used[c] = 0;
      const Polynomial t = m[row][c] * minor.value;
      out.value = sign > 0 ? out.value + t : out.value - t;
      out.term_scale = std::max(out.term_scale, m[row][c].scale() * minor.term_scale);
    }
    sign = -sign;
  }
  return out;
}

}  // namespace

JTResult jacobi_trudi(const Partition& lambda, std::span<const Polynomial> one_row, const ChainSpec& spec,
                      const ConventionRecord& conv) {
  JTResult out;
  const int l = lambda.rows();
  if (l == 0) {
    out.poly = spec.phi();
    out.numerator_scale = out.poly.scale();
    return out;
  }
  std::vector<std::vector<Polynomial>> m(l, std::vector<Polynomial>(l));
  for (int i = 0; i < l; ++i) {
    for (int j = 0; j < l; ++j) {
      const int s = lambda[i] - i + j;
      if (s < 0) continue;
      if (s >= static_cast<int>(one_row.size()))
        throw std::out_of_range("jacobi_trudi: one-row table too short for " + lambda.to_string());
      m[i][j] = j == 0 ? one_row[s] : one_row[s].shifted(conv.jt_shift * static_cast<double>(j));
    }
  }
  std::vector<char> used(l, 0);
  const PolyDet det = det_rec(m, 0, used);
  out.numerator_scale = det.term_scale;
  if (l == 1) {
    out.poly = det.value;
    return out;
  }
  const Polynomial phi = spec.phi();
  Polynomial den = Polynomial::constant(1.0);
  for (int k = 1; k < l; ++k) den = den * phi.shifted(conv.jt_shift * static_cast<double>(k));
  const DivMod dm = divmod(det.value, den);
  out.poly = dm.quotient;
  out.defect = det.term_scale > 0.0 ? dm.remainder.scale() / det.term_scale : 0.0;
  return out;
}

std::vector<Polynomial> one_row_polynomials(int smax, std::span<const cplx> roots, const ChainSpec& spec,
                                            const ConventionRecord& conv) {
  std::vector<Polynomial> out;
  for (int s = 0; s <= smax; ++s) {
    const Polynomial tc = ts_normalized(s, roots, spec);
    out.push_back(s == 0 ? tc : tc.shifted(conv.row_shift * static_cast<double>(s)));
  }
  return out;
}

Polynomial t_lambda(const Partition& lambda, std::span<const cplx> roots, const ChainSpec& spec,
                    const ConventionRecord& conv) {
  const auto rows = one_row_polynomials(lambda[0] + lambda.rows(), roots, spec, conv);
  return jacobi_trudi(lambda, rows, spec, conv).poly;
}

TTable::TTable(ChainSpec spec, ConventionRecord conv, int cutoff, std::vector<Partition> parts,
               std::vector<Polynomial> polys, int state_id)
    : spec_(std::move(spec)),
      conv_(std::move(conv)),
      cutoff_(cutoff),
      parts_(std::move(parts)),
      polys_(std::move(polys)),
      state_id_(state_id) {
  if (parts_.size() != polys_.size()) throw std::invalid_argument("TTable: size mismatch");
}

const Polynomial& TTable::at(const Partition& lambda) const {
  if (lambda.rows() > 2) return zero_;
  if (lambda.weight() > cutoff_)
    throw std::out_of_range("TTable: " + lambda.to_string() + " beyond cutoff " + std::to_string(cutoff_));
  const auto it = std::lower_bound(parts_.begin(), parts_.end(), lambda);
  if (it == parts_.end() || !(*it == lambda)) throw std::out_of_range("TTable: missing " + lambda.to_string());
  return polys_[static_cast<std::size_t>(it - parts_.begin())];
}

TTable build_ttable(const ChainSpec& spec, std::span<const cplx> roots, int state_id,
                    const ConventionRecord& conv, const TTableOptions& opts) {
  spec.validate();
  if (opts.cutoff < 0) throw std::invalid_argument("build_ttable: negative cutoff");
  const auto rows = one_row_polynomials(opts.cutoff + 1, roots, spec, conv);
  auto parts = partitions_up_to(opts.cutoff, 2);
  std::sort(parts.begin(), parts.end());
  std::vector<Polynomial> polys;
  double worst = 0.0;
  for (const auto& p : parts) {
    auto jt = jacobi_trudi(p, rows, spec, conv);
    if (opts.strict && jt.defect > 1e-9)
      throw ConventionError("build_ttable: Jacobi-Trudi division inexact for " + p.to_string() + " (defect " +
                            std::to_string(jt.defect) + ")");
    worst = std::max(worst, jt.defect);
    polys.push_back(std::move(jt.poly));
  }
  TTable t(spec, conv, opts.cutoff, std::move(parts), std::move(polys), state_id);
  t.set_build_defect(worst);
  return t;
}

nlohmann::json to_json(const TTable& t) {
  nlohmann::json table = nlohmann::json::object();
  for (std::size_t k = 0; k < t.partitions().size(); ++k)
    table[t.partitions()[k].to_string()] = to_json(t.polys()[k]);
  return {{"spec", to_json(t.spec())},
          {"conventions", to_json(t.conventions())},
          {"cutoff", t.cutoff()},
          {"state_id", t.state_id()},
          {"build_defect", t.build_defect()},
          {"table", table}};
}

TTable ttable_from_json(const nlohmann::json& j) {
  std::vector<Partition> parts;
  std::vector<Polynomial> polys;
  for (const auto& [key, val] : j.at("table").items()) {
    parts.push_back(Partition::parse(key));
    polys.push_back(polynomial_from_json(val));
  }
  std::vector<std::size_t> order(parts.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return parts[a] < parts[b]; });
  std::vector<Partition> sp;
  std::vector<Polynomial> spoly;
  for (const auto k : order) {
    sp.push_back(parts[k]);
    spoly.push_back(polys[k]);
  }
  TTable t(chainspec_from_json(j.at("spec")), convention_from_json(j.at("conventions")), j.at("cutoff").get<int>(),
           std::move(sp), std::move(spoly), j.at("state_id").get<int>());
  t.set_build_defect(j.value("build_defect", 0.0));
  return t;
}

}  // namespace taulab
