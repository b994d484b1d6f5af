#include "taulab/bethe.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

namespace taulab {

namespace {

constexpr double kPi = std::numbers::pi;

void check_distinct(std::span<const cplx> v, double tol) {
  for (std::size_t k = 0; k < v.size(); ++k)
    for (std::size_t l = 0; l < k; ++l)
      if (std::abs(v[k] - v[l]) < tol) throw SingularConfiguration("coincident rapidities");
}

// Residual with the pairwise coupling replaced by c (c = 1 is the physical
// chain, c = 0 decouples the roots).
std::vector<cplx> residual_coupled(std::span<const cplx> v, const ChainSpec& spec, cplx c, double pole_tol) {
  check_distinct(v, pole_tol);
  const std::size_t M = v.size();
  std::vector<cplx> r(M);
  for (std::size_t k = 0; k < M; ++k) {
    cplx A = 1.0;
    for (const cplx th : spec.theta) {
      const cplx den = v[k] - th + kI;
      if (std::abs(den) < pole_tol) throw SingularConfiguration("rapidity at theta - i");
      A *= (v[k] - th - kI) / den;
    }
    cplx B = 1.0;
    for (std::size_t l = 0; l < M; ++l) {
      if (l == k) continue;
      const cplx x = v[k] - v[l];
      const cplx den = x + 2.0 * kI * c;
      if (std::abs(den) < pole_tol) throw SingularConfiguration("rapidity pair at distance 2i");
      B *= (x - 2.0 * kI * c) / den;
    }
    r[k] = A - B;
  }
  return r;
}

Matrix jacobian_coupled(std::span<const cplx> v, const ChainSpec& spec, cplx c) {
  const auto M = static_cast<Eigen::Index>(v.size());
  Matrix jac = Matrix::Zero(M, M);
  for (Eigen::Index k = 0; k < M; ++k) {
    cplx A = 1.0;
    cplx dlogA = 0.0;
    for (const cplx th : spec.theta) {
      A *= (v[k] - th - kI) / (v[k] - th + kI);
      dlogA += 1.0 / (v[k] - th - kI) - 1.0 / (v[k] - th + kI);
    }
    cplx B = 1.0;
    std::vector<cplx> g(M, 0.0);
    for (Eigen::Index l = 0; l < M; ++l) {
      if (l == k) continue;
      const cplx x = v[k] - v[l];
      B *= (x - 2.0 * kI * c) / (x + 2.0 * kI * c);
      g[l] = 1.0 / (x - 2.0 * kI * c) - 1.0 / (x + 2.0 * kI * c);
    }
    cplx gsum = 0.0;
    for (Eigen::Index l = 0; l < M; ++l) {
      if (l == k) continue;
      gsum += g[l];
      jac(k, l) = B * g[l];
    }
    jac(k, k) = A * dlogA - B * gsum;
  }
  return jac;
}

double min_separation(std::span<const cplx> v) {
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < v.size(); ++k)
    for (std::size_t l = 0; l < k; ++l) m = std::min(m, std::abs(v[k] - v[l]));
  return m;
}

struct NewtonOut {
  std::vector<cplx> v;
  double res = std::numeric_limits<double>::infinity();
  bool ok = false;
};

// Damped Newton on the coupled residual.
NewtonOut newton(std::vector<cplx> v, const ChainSpec& spec, cplx c, double tol, int max_iter) {
  NewtonOut out;
  try {
    auto r = residual_coupled(v, spec, c, 1e-12);
    double res = max_abs(r);
    for (int it = 0; it < max_iter && res > tol; ++it) {
      const Matrix jac = jacobian_coupled(v, spec, c);
      Vector rhs(static_cast<Eigen::Index>(r.size()));
      for (std::size_t k = 0; k < r.size(); ++k) rhs(static_cast<Eigen::Index>(k)) = r[k];
      const Vector step = jac.fullPivLu().solve(rhs);
      if (!step.allFinite()) break;
      double lambda = 1.0;
      bool improved = false;
      for (int ls = 0; ls < 12; ++ls, lambda *= 0.5) {
        std::vector<cplx> trial = v;
        for (std::size_t k = 0; k < v.size(); ++k) trial[k] -= lambda * step(static_cast<Eigen::Index>(k));
        try {
          auto rt = residual_coupled(trial, spec, c, 1e-12);
          const double nt = max_abs(rt);
          if (nt < res || nt <= tol) {
            v = std::move(trial);
            r = std::move(rt);
            res = nt;
            improved = true;
            break;
          }
        } catch (const SingularConfiguration&) {
        }
      }
      if (!improved) break;
    }
    out.v = std::move(v);
    out.res = res;
    out.ok = res <= tol;
  } catch (const SingularConfiguration&) {
    out.ok = false;
  }
  return out;
}

// Pole-free form d(v_k) prod(x + 2ic) - a(v_k) prod(x - 2ic), relative to
// its term size. Used along the homotopy, where pairs can pass close to the
// rational form's poles.
struct Cleared {
  std::vector<cplx> r;
  std::vector<double> scale;
};

Cleared cleared_coupled(std::span<const cplx> v, const ChainSpec& spec, cplx c) {
  const std::size_t M = v.size();
  Cleared out{std::vector<cplx>(M), std::vector<double>(M)};
  for (std::size_t k = 0; k < M; ++k) {
    cplx a = 1.0, d = 1.0, pp = 1.0, pm = 1.0;
    for (const cplx th : spec.theta) {
      a *= v[k] - th + kI;
      d *= v[k] - th - kI;
    }
    for (std::size_t l = 0; l < M; ++l) {
      if (l == k) continue;
      const cplx x = v[k] - v[l];
      pp *= x + 2.0 * kI * c;
      pm *= x - 2.0 * kI * c;
    }
    out.r[k] = d * pp - a * pm;
    out.scale[k] = std::abs(d * pp) + std::abs(a * pm);
  }
  return out;
}

double cleared_norm(const Cleared& cl) {
  double m = 0.0;
  for (std::size_t k = 0; k < cl.r.size(); ++k) m = std::max(m, std::abs(cl.r[k]) / cl.scale[k]);
  return m;
}

Matrix cleared_jacobian(std::span<const cplx> v, const ChainSpec& spec, cplx c) {
  const auto M = static_cast<Eigen::Index>(v.size());
  Matrix jac = Matrix::Zero(M, M);
  auto prod_except = [&](Eigen::Index k, Eigen::Index skip, cplx sh) {
    cplx p = 1.0;
    for (Eigen::Index m = 0; m < M; ++m)
      if (m != k && m != skip) p *= v[k] - v[m] + sh;
    return p;
  };
  for (Eigen::Index k = 0; k < M; ++k) {
    cplx a = 1.0, d = 1.0, da = 0.0, dd = 0.0;
    for (const cplx th : spec.theta) {
      da = da * (v[k] - th + kI) + a;
      a *= v[k] - th + kI;
      dd = dd * (v[k] - th - kI) + d;
      d *= v[k] - th - kI;
    }
    const cplx sp = 2.0 * kI * c, sm = -2.0 * kI * c;
    const cplx pp = prod_except(k, -1, sp), pm = prod_except(k, -1, sm);
    jac(k, k) = dd * pp - da * pm;
    for (Eigen::Index l = 0; l < M; ++l) {
      if (l == k) continue;
      const cplx gp = prod_except(k, l, sp), gm = prod_except(k, l, sm);
      jac(k, k) += d * gp - a * gm;
      jac(k, l) = -(d * gp - a * gm);
    }
  }
  return jac;
}

NewtonOut newton_cleared(std::vector<cplx> v, const ChainSpec& spec, cplx c, double tol, int max_iter) {
  NewtonOut out;
  Cleared cl = cleared_coupled(v, spec, c);
  double res = cleared_norm(cl);
  for (int it = 0; it < max_iter && res > tol; ++it) {
    const Matrix jac = cleared_jacobian(v, spec, c);
    Vector rhs(static_cast<Eigen::Index>(v.size()));
    for (std::size_t k = 0; k < v.size(); ++k) rhs(static_cast<Eigen::Index>(k)) = cl.r[k];
    const Vector step = jac.fullPivLu().solve(rhs);
    if (!step.allFinite()) break;
    std::vector<cplx> trial = v;
    for (std::size_t k = 0; k < v.size(); ++k) trial[k] -= step(static_cast<Eigen::Index>(k));
    Cleared ct = cleared_coupled(trial, spec, c);
    const double nt = cleared_norm(ct);
    if (!(nt < res)) break;
    v = std::move(trial);
    cl = std::move(ct);
    res = nt;
  }
  out.v = std::move(v);
  out.res = res;
  out.ok = res <= tol;
  return out;
}

long long binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  long long r = 1;
  for (int j = 1; j <= k; ++j) r = r * (n - k + j) / j;
  return r;
}

bool real_data(const ChainSpec& spec) {
  return std::all_of(spec.theta.begin(), spec.theta.end(), [](cplx t) { return t.imag() == 0.0; });
}

// Log form for real roots and real theta:
//   sum_j atan(v_k - th_j) - sum_{l != k} atan((v_k - v_l)/2) - pi I_k = 0.
std::optional<std::vector<double>> log_newton(const std::vector<double>& twiceI, const ChainSpec& spec,
                                              int max_iter) {
  const auto M = static_cast<Eigen::Index>(twiceI.size());
  const double L = static_cast<double>(spec.L);
  double center = 0.0;
  for (const cplx t : spec.theta) center += t.real() / L;
  Eigen::VectorXd v(M);
  for (Eigen::Index k = 0; k < M; ++k) v(k) = center + std::tan(kPi * twiceI[k] / (2.0 * L));

  auto F = [&](const Eigen::VectorXd& x) {
    Eigen::VectorXd f(M);
    for (Eigen::Index k = 0; k < M; ++k) {
      double s = -kPi * twiceI[k] / 2.0;
      for (const cplx t : spec.theta) s += std::atan(x(k) - t.real());
      for (Eigen::Index l = 0; l < M; ++l)
        if (l != k) s -= std::atan((x(k) - x(l)) / 2.0);
      f(k) = s;
    }
    return f;
  };
  Eigen::VectorXd f = F(v);
  for (int it = 0; it < max_iter && f.cwiseAbs().maxCoeff() > 1e-14; ++it) {
    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(M, M);
    for (Eigen::Index k = 0; k < M; ++k) {
      for (const cplx t : spec.theta) jac(k, k) += 1.0 / (1.0 + std::pow(v(k) - t.real(), 2));
      for (Eigen::Index l = 0; l < M; ++l) {
        if (l == k) continue;
        const double w = 0.5 / (1.0 + std::pow((v(k) - v(l)) / 2.0, 2));
        jac(k, k) -= w;
        jac(k, l) += w;
      }
    }
    const Eigen::VectorXd step = jac.fullPivLu().solve(f);
    if (!step.allFinite()) return std::nullopt;
    double lambda = 1.0;
    bool improved = false;
    for (int ls = 0; ls < 20; ++ls, lambda *= 0.5) {
      const Eigen::VectorXd trial = v - lambda * step;
      const Eigen::VectorXd ft = F(trial);
      if (ft.cwiseAbs().maxCoeff() < f.cwiseAbs().maxCoeff()) {
        v = trial;
        f = ft;
        improved = true;
        break;
      }
    }
    if (!improved) break;
  }
  if (f.cwiseAbs().maxCoeff() > 1e-9) return std::nullopt;
  return std::vector<double>(v.data(), v.data() + M);
}

void combinations(int n, int k, int start, std::vector<int>& cur, std::vector<std::vector<int>>& out) {
  if (static_cast<int>(cur.size()) == k) {
    out.push_back(cur);
    return;
  }
  for (int i = start; i < n; ++i) {
    cur.push_back(i);
    combinations(n, k, i + 1, cur, out);
    cur.pop_back();
  }
}

std::vector<std::vector<int>> combinations(int n, int k) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur;
  if (k <= n) combinations(n, k, 0, cur, out);
  return out;
}

std::string fmt_roots(std::span<const cplx> v) {
  std::ostringstream os;
  os.precision(6);
  os << "{";
  for (std::size_t k = 0; k < v.size(); ++k) os << (k ? ", " : "") << v[k];
  os << "}";
  return os.str();
}

bool less_roots(std::span<const cplx> a, std::span<const cplx> b) {
  for (std::size_t k = 0; k < std::min(a.size(), b.size()); ++k) {
    if (a[k].real() != b[k].real()) return a[k].real() < b[k].real();
    if (a[k].imag() != b[k].imag()) return a[k].imag() < b[k].imag();
  }
  return a.size() < b.size();
}

void canonical_order(std::vector<cplx>& v) {
  std::sort(v.begin(), v.end(), [](cplx a, cplx b) {
    if (std::abs(a.real() - b.real()) > 1e-9) return a.real() < b.real();
    return a.imag() < b.imag();
  });
}

void fill_quantum_numbers(BetheState& st, const ChainSpec& spec) {
  st.twice_quantum_numbers.clear();
  const auto& v = st.levels[0];
  if (!real_data(spec)) return;
  for (const cplx x : v)
    if (std::abs(x.imag()) > 1e-9) return;
  for (std::size_t k = 0; k < v.size(); ++k) {
    double s = 0.0;
    for (const cplx t : spec.theta) s += std::atan(v[k].real() - t.real());
    for (std::size_t l = 0; l < v.size(); ++l)
      if (l != k) s -= std::atan((v[k].real() - v[l].real()) / 2.0);
    st.twice_quantum_numbers.push_back(static_cast<int>(std::lround(2.0 * s / kPi)));
  }
}

}  // namespace

double max_abs(std::span<const cplx> r) {
  double m = 0.0;
  for (const cplx x : r) m = std::max(m, std::abs(x));
  return m;
}

std::vector<cplx> residual_su2(std::span<const cplx> v, const ChainSpec& spec, double pole_tol) {
  return residual_coupled(v, spec, 1.0, pole_tol);
}

Matrix jacobian_su2(std::span<const cplx> v, const ChainSpec& spec) {
  return jacobian_coupled(v, spec, 1.0);
}

std::vector<cplx> residual_nested(const std::vector<std::vector<cplx>>& levels, int N, const ChainSpec& spec,
                                  double pole_tol) {
  if (N < 2) throw std::invalid_argument("nested equations need N >= 2");
  if (static_cast<int>(levels.size()) != N - 1) throw std::invalid_argument("need N - 1 levels of roots");
  static const std::vector<cplx> kEmpty;
  auto level = [&](int t) -> const std::vector<cplx>& {
    if (t == 0) return spec.theta;
    if (t >= N) return kEmpty;
    return levels[t - 1];
  };
  auto ratio = [&](cplx num, cplx den) {
    if (std::abs(den) < pole_tol) throw SingularConfiguration("nested rapidity at a pole");
    return num / den;
  };
  std::vector<cplx> out;
  for (int t = 1; t < N; ++t) {
    const auto& cur = level(t);
    check_distinct(cur, pole_tol);
    for (std::size_t k = 0; k < cur.size(); ++k) {
      const cplx v = cur[k];
      cplx p = 1.0;
      for (const cplx w : level(t - 1)) p *= ratio(v - w + kI, v - w - kI);
      for (std::size_t l = 0; l < cur.size(); ++l)
        if (l != k) p *= ratio(v - cur[l] - 2.0 * kI, v - cur[l] + 2.0 * kI);
      for (const cplx w : level(t + 1)) p *= ratio(v - w - kI, v - w + kI);
      out.push_back(p - 1.0);
    }
  }
  return out;
}

std::optional<BetheState> polish(std::vector<cplx> guess, const ChainSpec& spec, const SolveOptions& opts) {
  auto nw = newton(std::move(guess), spec, 1.0, opts.tol, opts.max_iter);
  if (!nw.ok) return std::nullopt;
  if (min_separation(nw.v) < opts.collision_tol) return std::nullopt;
  // the residual also vanishes as roots run off to infinity
  double reach = 0.0;
  for (const cplx t : spec.theta) reach = std::max(reach, std::abs(t));
  if (max_abs(nw.v) > opts.divergence_radius * (1.0 + reach)) return std::nullopt;
  BetheState st;
  canonical_order(nw.v);
  st.levels = {nw.v};
  st.residual_norm = max_abs(residual_su2(st.levels[0], spec));
  if (spec.is_homogeneous()) st.energy = energy_complex(st.levels[0], spec);
  fill_quantum_numbers(st, spec);
  return st;
}

SolveResult solve(const ChainSpec& spec, int M, const SolveOptions& opts) {
  spec.validate();
  if (M < 0 || 2 * M > spec.L) throw std::invalid_argument("solve: need 0 <= M <= L/2");
  if (!(opts.tol > 0.0)) throw std::invalid_argument("solve: tol must be positive");
  SolveResult res;
  auto add = [&](BetheState st, const std::string& origin) {
    if (st.residual_norm > opts.tol) {
      res.log.push_back(origin + ": residual " + std::to_string(st.residual_norm) + " above tol, dropped");
      return;
    }
    for (const auto& s : res.states)
      if (root_set_distance(s.roots(), st.roots()) < opts.dedup_tol) return;
    res.states.push_back(std::move(st));
  };

  if (M == 0) {
    BetheState vac;
    vac.levels = {{}};
    if (spec.is_homogeneous()) vac.energy = energy_complex({}, spec);
    res.states.push_back(vac);
    return res;
  }

  const int L = spec.L;
  if ((opts.strategy == Strategy::Seeds || opts.strategy == Strategy::Auto) && real_data(spec)) {
    const int n = L - M;
    for (const auto& comb : combinations(n, M)) {
      std::vector<double> twiceI;
      for (const int j : comb) twiceI.push_back(static_cast<double>(2 * j - (n - 1)));
      const auto sol = log_newton(twiceI, spec, opts.max_iter);
      std::ostringstream tag;
      tag << "seeds 2I={";
      for (std::size_t k = 0; k < twiceI.size(); ++k) tag << (k ? "," : "") << twiceI[k];
      tag << "}";
      if (!sol) {
        res.log.push_back(tag.str() + ": no real solution");
        continue;
      }
      std::vector<cplx> guess(sol->begin(), sol->end());
      if (auto st = polish(guess, spec, opts)) {
        add(std::move(*st), tag.str());
      } else {
        res.log.push_back(tag.str() + ": polish failed");
      }
    }
  }

  if (opts.strategy == Strategy::Homotopy || opts.strategy == Strategy::Auto) {
    // Decoupled seeds solve prod_j (v - th_j - i)/(v - th_j + i) = 1.
    const Polynomial seedpoly = spec.d() - spec.a();
    const auto seeds = aberth_roots(seedpoly).roots;
    for (const double gamma : opts.gammas) {
      for (const auto& comb : combinations(static_cast<int>(seeds.size()), M)) {
        std::vector<cplx> v;
        for (const int j : comb) v.push_back(seeds[j]);
        std::ostringstream tag;
        tag << "homotopy gamma=" << gamma << " seeds " << fmt_roots(v);
        auto coupling = [gamma](double s) { return cplx(s, gamma * s * (1.0 - s)); };
        double s = 0.0;
        double ds = 1.0 / opts.homotopy_steps;
        bool failed = false;
        std::string why;
        std::vector<cplx> prev_v = v;
        double prev_s = 0.0;
        while (s < 1.0) {
          const double s_next = std::min(1.0, s + ds);
          // secant predictor from the last accepted step
          std::vector<cplx> pred = v;
          if (s > prev_s)
            for (std::size_t k = 0; k < v.size(); ++k) pred[k] += (v[k] - prev_v[k]) * ((s_next - s) / (s - prev_s));
          auto nw = newton_cleared(pred, spec, coupling(s_next), 1e-12, 8);
          double disp = 0.0, corr = 0.0;
          for (std::size_t k = 0; k < v.size() && nw.ok; ++k) {
            disp = std::max(disp, std::abs(nw.v[k] - v[k]));
            corr = std::max(corr, std::abs(nw.v[k] - pred[k]));
          }
          const double sep = min_separation(v);
          if (nw.ok && disp < 0.5 * std::max(sep, 0.05) && corr < 0.1 * std::max(sep, 0.05) &&
              min_separation(nw.v) > opts.collision_tol) {
            prev_v = v;
            prev_s = s;
            v = std::move(nw.v);
            s = s_next;
            ds = std::min(ds * 1.5, 1.0 / opts.homotopy_steps);
            if (max_abs(v) > opts.divergence_radius) {
              failed = true;
              why = "diverged";
              break;
            }
          } else {
            ds *= 0.5;
            if (ds < 1e-6) {
              failed = true;
              why = "step underflow at s=" + std::to_string(s) + " roots " + fmt_roots(v);
              break;
            }
          }
        }
        if (failed) {
          ++res.n_singular;
          res.log.push_back(tag.str() + ": " + why);
          continue;
        }
        if (auto st = polish(v, spec, opts)) {
          add(std::move(*st), tag.str());
        } else {
          res.log.push_back(tag.str() + ": final polish failed at " + fmt_roots(v));
        }
      }
    }
  }

  if (opts.strategy == Strategy::Auto) {
    const auto expected = static_cast<std::size_t>(binomial(L, M) - binomial(L, M - 1));
    std::vector<double> reals;
    for (const cplx r : aberth_roots(spec.d() - spec.a()).roots) reals.push_back(r.real());
    std::sort(reals.begin(), reals.end());
    std::vector<double> centers = reals;
    for (std::size_t k = 0; k + 1 < reals.size(); ++k) centers.push_back(0.5 * (reals[k] + reals[k + 1]));
    std::sort(centers.begin(), centers.end());
    int tried = 0;
    for (int p = 1; 2 * p <= M && res.states.size() < expected; ++p) {
      for (const auto& cc : combinations(static_cast<int>(centers.size()), p)) {
        for (const auto& rc : combinations(static_cast<int>(reals.size()), M - 2 * p)) {
          if (res.states.size() >= expected || tried >= opts.max_string_guesses) break;
          ++tried;
          std::vector<cplx> g;
          for (const int j : cc) {
            g.emplace_back(centers[j], 1.05);
            g.emplace_back(centers[j], -1.05);
          }
          for (const int j : rc) g.emplace_back(reals[j], 0.0);
          if (auto st = polish(g, spec, opts)) add(std::move(*st), "strings " + fmt_roots(g));
        }
      }
    }
    if (tried > 0) res.log.push_back("string guesses tried: " + std::to_string(tried));
  }

  std::sort(res.states.begin(), res.states.end(), [](const BetheState& a, const BetheState& b) {
    if (a.energy && b.energy && std::abs(a.energy->real() - b.energy->real()) > 1e-9)
      return a.energy->real() < b.energy->real();
    return less_roots(a.roots(), b.roots());
  });
  return res;
}

NestedResult solve_nested(const ChainSpec& spec, int N, std::span<const int> counts, const SolveOptions& opts) {
  spec.validate();
  if (static_cast<int>(counts.size()) != N - 1) throw std::invalid_argument("need N - 1 root counts");
  NestedResult out;
  out.best.residual_norm = std::numeric_limits<double>::infinity();

  const auto seeds = aberth_roots(spec.d() - spec.a()).roots;
  std::mt19937_64 rng(opts.gammas.size() + 17);
  std::normal_distribution<double> gauss(0.0, 0.5);

  auto flatten = [](const std::vector<std::vector<cplx>>& lv) {
    std::vector<cplx> f;
    for (const auto& l : lv) f.insert(f.end(), l.begin(), l.end());
    return f;
  };
  auto unflatten = [&](const std::vector<cplx>& f) {
    std::vector<std::vector<cplx>> lv;
    std::size_t pos = 0;
    for (const int c : counts) {
      lv.emplace_back(f.begin() + static_cast<std::ptrdiff_t>(pos), f.begin() + static_cast<std::ptrdiff_t>(pos + c));
      pos += static_cast<std::size_t>(c);
    }
    return lv;
  };
  auto eval = [&](const std::vector<cplx>& f) -> std::optional<std::vector<cplx>> {
    try {
      return residual_nested(unflatten(f), N, spec);
    } catch (const SingularConfiguration&) {
      return std::nullopt;
    }
  };

  const int n_starts = 24;
  int escaped = 0;
  for (int start = 0; start < n_starts; ++start) {
    std::vector<std::vector<cplx>> lv;
    for (std::size_t t = 0; t < counts.size(); ++t) {
      std::vector<cplx> level;
      for (int k = 0; k < counts[t]; ++k) {
        const cplx base = seeds.empty() ? cplx{} : seeds[(k + start) % seeds.size()];
        level.push_back(base + cplx(gauss(rng), gauss(rng)) + 0.5 * static_cast<double>(t) * kI);
      }
      lv.push_back(std::move(level));
    }
    std::vector<cplx> x = flatten(lv);
    auto r = eval(x);
    if (!r) continue;
    ++out.starts;
    double res = max_abs(*r);
    for (int it = 0; it < 4 * opts.max_iter && res > opts.tol; ++it) {
      const auto n = static_cast<Eigen::Index>(x.size());
      Matrix jac(static_cast<Eigen::Index>(r->size()), n);
      bool ok = true;
      for (Eigen::Index j = 0; j < n && ok; ++j) {
        const double h = 1e-7 * std::max(1.0, std::abs(x[j]));
        auto xp = x, xm = x;
        xp[j] += h;
        xm[j] -= h;
        const auto rp = eval(xp), rm = eval(xm);
        if (!rp || !rm) {
          ok = false;
          break;
        }
        for (std::size_t i = 0; i < rp->size(); ++i)
          jac(static_cast<Eigen::Index>(i), j) = ((*rp)[i] - (*rm)[i]) / (2.0 * h);
      }
      if (!ok) break;
      Vector rhs(static_cast<Eigen::Index>(r->size()));
      for (std::size_t i = 0; i < r->size(); ++i) rhs(static_cast<Eigen::Index>(i)) = (*r)[i];
      const Vector step = jac.completeOrthogonalDecomposition().solve(rhs);
      if (!step.allFinite()) break;
      double lambda = 1.0;
      bool improved = false;
      for (int ls = 0; ls < 20; ++ls, lambda *= 0.5) {
        auto trial = x;
        for (Eigen::Index j = 0; j < n; ++j) trial[j] -= lambda * step(j);
        const auto rt = eval(trial);
        if (rt && max_abs(*rt) < res) {
          x = std::move(trial);
          r = rt;
          res = max_abs(*rt);
          improved = true;
          break;
        }
      }
      if (!improved) break;
      if (max_abs(x) > opts.divergence_radius) {
        out.log.push_back("start " + std::to_string(start) + ": roots escaped beyond |v| = " +
                          std::to_string(opts.divergence_radius) + " (residual " + std::to_string(res) + ")");
        break;
      }
    }
    if (max_abs(x) > opts.divergence_radius) {
      ++escaped;
      continue;
    }
    if (res < out.best.residual_norm) {
      out.best.levels = unflatten(x);
      out.best.residual_norm = res;
    }
    if (res <= opts.tol) {
      out.converged = true;
      break;
    }
  }
  if (!out.converged) {
    std::ostringstream os;
    os << "no start converged; " << escaped << " of " << out.starts << " escaped to infinity";
    if (std::isfinite(out.best.residual_norm)) os << "; best bounded residual " << out.best.residual_norm;
    out.log.push_back(os.str());
  }
  return out;
}

cplx energy_complex(std::span<const cplx> roots, const ChainSpec& spec) {
  cplx e = spec.J * spec.L;
  for (const cplx v : roots) e += -8.0 * spec.J / (v * v + 1.0);
  return e;
}

double energy(const BetheState& state, const ChainSpec& spec) {
  if (!spec.is_homogeneous()) throw std::domain_error("energy: homogeneous chains only");
  const cplx e = energy_complex(state.roots(), spec);
  if (std::abs(e.imag()) > 1e-9 * std::max(1.0, std::abs(e))) throw std::domain_error("energy: non-real result");
  return e.real();
}

cplx energy_from_transfer(const Polynomial& T1, const ChainSpec& spec) {
  const cplx t = T1(kI);
  return 4.0 * kI * spec.J * T1.derivative()(kI) / t - spec.J * spec.L;
}

Polynomial q_polynomial(std::span<const cplx> roots) { return Polynomial::from_roots(roots); }

Polynomial tq_residual(const Polynomial& T1, const BetheState& state, const ChainSpec& spec) {
  if (T1.degree() != spec.L) throw std::invalid_argument("tq_residual: deg T1 must equal L");
  const Polynomial Q = q_polynomial(state.roots());
  return T1 * Q - spec.a() * Q.shifted(-2.0 * kI) - spec.d() * Q.shifted(2.0 * kI);
}

Polynomial transfer_from_roots(std::span<const cplx> roots, const ChainSpec& spec, double rel_tol) {
  const Polynomial Q = q_polynomial(roots);
  const Polynomial num = spec.a() * Q.shifted(-2.0 * kI) + spec.d() * Q.shifted(2.0 * kI);
  return divide_exact(num, Q, rel_tol);
}

BaxterQ baxter_q_from_transfer(const Polynomial& T1, int M, const ChainSpec& spec) {
  const Polynomial a = spec.a(), d = spec.d();
  auto term = [&](int m) {
    std::vector<cplx> c(m + 1, 0.0);
    c[m] = 1.0;
    const Polynomial um(c);
    return T1 * um - a * um.shifted(-2.0 * kI) - d * um.shifted(2.0 * kI);
  };
  const int rows = spec.L + M + 1;
  Matrix A(rows, M);
  Vector b(rows);
  const Polynomial top = term(M);
  for (int r = 0; r < rows; ++r) b(r) = -top[r];
  for (int m = 0; m < M; ++m) {
    const Polynomial col = term(m);
    for (int r = 0; r < rows; ++r) A(r, m) = col[r];
  }
  BaxterQ out;
  std::vector<cplx> q(M + 1, 0.0);
  q[M] = 1.0;
  if (M > 0) {
    const Vector sol = A.colPivHouseholderQr().solve(b);
    for (int m = 0; m < M; ++m) q[m] = sol(m);
    out.defect = (A * sol - b).norm() / std::max({b.norm(), A.norm(), 1e-300});
  } else {
    out.defect = b.norm() / std::max(T1.scale(), 1e-300);
  }
  out.Q = Polynomial(q);
  if (M > 0) {
    out.roots = aberth_roots(out.Q).roots;
    canonical_order(out.roots);
  }
  return out;
}

double root_set_distance(std::span<const cplx> a, std::span<const cplx> b) {
  if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
  double d = 0.0;
  auto one_way = [&](std::span<const cplx> x, std::span<const cplx> y) {
    for (const cplx p : x) {
      double m = std::numeric_limits<double>::infinity();
      for (const cplx q : y) m = std::min(m, std::abs(p - q));
      d = std::max(d, m);
    }
  };
  one_way(a, b);
  one_way(b, a);
  return d;
}

std::vector<EigenRecord> enumerate_states(const ChainSpec& spec, const EnumerateOptions& opts) {
  spec.validate();
  const auto nodes = transfer_nodes(spec);
  const auto joint = simultaneous_labels(spec, nodes);

  std::vector<SolveResult> solved;
  for (int M = 0; 2 * M <= spec.L; ++M) solved.push_back(solve(spec, M, opts.solver));

  std::vector<EigenRecord> out;
  for (const auto& st : joint) {
    if (!st.highest_weight) continue;
    EigenRecord rec;
    rec.ed = st;
    rec.transfer = interpolate(nodes, st.transfer);
    const double tscale = rec.transfer.scale();

    double best = std::numeric_limits<double>::infinity();
    const BetheState* hit = nullptr;
    for (const auto& b : solved[st.M].states) {
      const double err = (transfer_from_roots(b.roots(), spec) - rec.transfer).scale() / tscale;
      if (err < best) {
        best = err;
        hit = &b;
      }
    }
    if (hit && best <= opts.match_tol) {
      rec.bethe = *hit;
      rec.from_solver = true;
      rec.match_error = best;
    } else {
      const auto bq = baxter_q_from_transfer(rec.transfer, st.M, spec);
      BetheState b;
      b.levels = {bq.roots};
      try {
        b.residual_norm = max_abs(residual_su2(b.levels[0], spec, 1e-6));
        if (auto p = polish(b.levels[0], spec, opts.solver)) b = *p;
      } catch (const SingularConfiguration&) {
        b.singular = true;
        b.residual_norm = std::numeric_limits<double>::quiet_NaN();
      }
      if (spec.is_homogeneous())
        b.energy = b.singular ? energy_from_transfer(rec.transfer, spec) : energy_complex(b.roots(), spec);
      rec.bethe = std::move(b);
      rec.match_error = best;
    }
    if (!rec.bethe.energy && st.energy) rec.bethe.energy = *st.energy;
    rec.id = static_cast<int>(out.size());
    out.push_back(std::move(rec));
  }
  return out;
}

}  // namespace taulab
