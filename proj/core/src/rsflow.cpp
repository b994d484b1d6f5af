#include "taulab/rsflow.hpp"

#include "taulab/io.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <sstream>

namespace taulab {

namespace {

double min_sep(std::span<const cplx> v) {
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < v.size(); ++i)
    for (std::size_t k = 0; k < i; ++k) m = std::min(m, std::abs(v[i] - v[k]));
  return m;
}

double max_disp(std::span<const cplx> a, std::span<const cplx> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

TimesVector at_t1(double t1) {
  TimesVector t(1);
  t.set(1, t1);
  return t;
}

// Zeros at t1_to continued from `prev` at t1_from, subdividing when the
// step moves a zero too far relative to the spacing.
std::vector<cplx> advance(const MasterT& m, double t1_from, double t1_to, const std::vector<cplx>& prev,
                          const TrackOptions& opts, int depth) {
  auto next = match_positions(prev, m.zeros(at_t1(t1_to), prev));
  const double limit = opts.max_step_fraction * min_sep(prev);
  if (max_disp(prev, next) <= limit || prev.size() < 2) return next;
  if (depth >= opts.max_subdivisions)
    throw RootFailure("zero continuation step too large at t1 = " + fmt17(t1_to));
  const double mid = 0.5 * (t1_from + t1_to);
  const auto half = advance(m, t1_from, mid, prev, opts, depth + 1);
  return advance(m, mid, t1_to, half, opts, depth + 1);
}

}  // namespace

std::vector<cplx> match_positions(std::span<const cplx> prev, std::span<const cplx> next) {
  const std::size_t n = prev.size();
  if (next.size() != n) throw std::invalid_argument("match_positions: size mismatch");
  std::vector<cplx> out(n);
  if (n <= 8) {
    std::vector<std::size_t> perm(n), best;
    std::iota(perm.begin(), perm.end(), 0);
    double best_cost = std::numeric_limits<double>::infinity();
    do {
      double c = 0.0;
      for (std::size_t i = 0; i < n && c < best_cost; ++i) c += std::abs(prev[i] - next[perm[i]]);
      if (c < best_cost) {
        best_cost = c;
        best = perm;
      }
    } while (std::next_permutation(perm.begin(), perm.end()));
    for (std::size_t i = 0; i < n; ++i) out[i] = next[best[i]];
    return out;
  }
  std::vector<char> used(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t bj = 0;
    double bd = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j)
      if (!used[j] && std::abs(prev[i] - next[j]) < bd) {
        bd = std::abs(prev[i] - next[j]);
        bj = j;
      }
    used[bj] = 1;
    out[i] = next[bj];
  }
  return out;
}

Trajectory track(const MasterT& m, double t1_start, double t1_end, double h, const TrackOptions& opts) {
  if (h == 0.0) throw std::invalid_argument("track: h must be nonzero");
  if ((t1_end - t1_start) * h < 0.0) throw std::invalid_argument("track: h points away from t1_end");
  Trajectory traj;
  traj.h = h;
  traj.state_id = m.table().state_id();
  const auto& theta = m.table().spec().theta;

  std::vector<cplx> cur;
  try {
    cur = match_positions(theta, m.zeros(at_t1(0.0), theta));
    if (t1_start != 0.0) {
      const double dir = t1_start > 0 ? std::abs(h) : -std::abs(h);
      const int n0 = static_cast<int>(std::ceil(std::abs(t1_start / h)));
      double prev_t = 0.0;
      for (int g = 1; g <= n0; ++g) {
        const double tt = g == n0 ? t1_start : g * dir;
        cur = advance(m, prev_t, tt, cur, opts, 0);
        prev_t = tt;
      }
    }
  } catch (const std::runtime_error& e) {
    traj.truncated = true;
    traj.diagnostic = std::string("could not reach t1_start: ") + e.what();
    return traj;
  }

  const int n = static_cast<int>(std::llround((t1_end - t1_start) / h));
  double prev_t = t1_start;
  for (int g = 0; g <= n; ++g) {
    const double tt = t1_start + g * h;
    try {
      if (g > 0) cur = advance(m, prev_t, tt, cur, opts, 0);
    } catch (const std::runtime_error& e) {
      traj.truncated = true;
      traj.diagnostic = "stopped at t1 = " + fmt17(tt) + ": " + e.what();
      break;
    }
    if (cur.size() > 1 && min_sep(cur) <= opts.collision_tol) {
      traj.truncated = true;
      traj.diagnostic = "collision at t1 = " + fmt17(tt);
      break;
    }
    traj.t1.push_back(tt);
    traj.positions.push_back(cur);
    prev_t = tt;
  }
  return traj;
}

cplx rs_kernel(cplx x, cplx eta, RSKernel kernel) {
  const cplx e2 = eta * eta;
  if (kernel == RSKernel::Rational) return -2.0 * e2 / (x * (x * x - e2));
  return 2.0 / (x * x - e2);
}

RSResidual rs_residual(const Trajectory& traj, const RSParams& params) {
  if (!(params.h > 0.0)) throw std::invalid_argument("rs_residual: h must be positive");
  if (params.eta == cplx{}) throw std::invalid_argument("rs_residual: eta must be nonzero");
  if (traj.positions.size() < 3) throw std::invalid_argument("rs_residual: need at least 3 grid points");
  const double h = traj.h;
  RSResidual out;
  const cplx e2 = params.eta * params.eta;
  for (std::size_t g = 1; g + 1 < traj.positions.size(); ++g) {
    const auto& um = traj.positions[g - 1];
    const auto& uc = traj.positions[g];
    const auto& up = traj.positions[g + 1];
    const std::size_t L = uc.size();
    std::vector<cplx> ud(L), udd(L), res(L);
    for (std::size_t i = 0; i < L; ++i) {
      ud[i] = (up[i] - um[i]) / (2.0 * h);
      udd[i] = (up[i] - 2.0 * uc[i] + um[i]) / (h * h);
    }
    for (std::size_t i = 0; i < L; ++i) {
      cplx force = 0.0;
      for (std::size_t k = 0; k < L; ++k) {
        if (k == i) continue;
        const cplx x = uc[i] - uc[k];
        const cplx den = params.kernel == RSKernel::Rational ? x * (x * x - e2) : x * x - e2;
        if (std::abs(den) < params.pole_tol)
          throw NearSingularPair("rs_residual: pair near kernel pole at t1 = " + fmt17(traj.t1[g]));
        force += ud[i] * ud[k] * rs_kernel(x, params.eta, params.kernel);
      }
      res[i] = udd[i] - force;
      out.max_abs = std::max(out.max_abs, std::abs(res[i]));
    }
    out.t1.push_back(traj.t1[g]);
    out.values.push_back(std::move(res));
  }
  return out;
}

Trajectory coarsen(const Trajectory& traj) {
  Trajectory c = traj;
  c.t1.clear();
  c.positions.clear();
  for (std::size_t g = 0; g < traj.t1.size(); g += 2) {
    c.t1.push_back(traj.t1[g]);
    c.positions.push_back(traj.positions[g]);
  }
  c.h = 2.0 * traj.h;
  return c;
}

EtaCalibration calibrate_eta(const Trajectory& traj, RSKernel kernel, std::vector<cplx> candidates,
                             double rel_threshold) {
  if (traj.positions.empty() || traj.positions[0].size() < 2)
    throw CalibrationFailure("calibrate_eta: needs at least two particles (no pairwise term)");
  if (traj.positions.size() < 5) throw CalibrationFailure("calibrate_eta: needs at least 5 grid points");

  const Trajectory coarse = coarsen(traj);
  double scale = 0.0;
  for (std::size_t g = 1; g + 1 < traj.positions.size(); ++g)
    for (std::size_t i = 0; i < traj.positions[g].size(); ++i)
      scale = std::max(scale, std::abs(traj.positions[g + 1][i] - 2.0 * traj.positions[g][i] +
                                       traj.positions[g - 1][i]) /
                                  (traj.h * traj.h));

  EtaCalibration out;
  out.threshold = rel_threshold * std::max(scale, 1e-300);
  double best = std::numeric_limits<double>::infinity();
  for (const cplx eta : candidates) {
    double score = std::numeric_limits<double>::infinity();
    try {
      const RSParams p{eta, std::abs(traj.h), kernel};
      const auto fine = rs_residual(traj, p);
      const auto crs = rs_residual(coarse, RSParams{eta, std::abs(coarse.h), kernel});
      score = 0.0;
      // coarse interior point c sits at fine grid index 2c + 2, fine interior index 2c + 1.
      for (std::size_t c = 0; c < crs.values.size(); ++c) {
        const std::size_t f = 2 * c + 1;
        if (f >= fine.values.size()) break;
        for (std::size_t i = 0; i < crs.values[c].size(); ++i)
          score = std::max(score, std::abs((4.0 * fine.values[f][i] - crs.values[c][i]) / 3.0));
      }
    } catch (const NearSingularPair&) {
    }
    out.scores.emplace_back(eta, score);
    if (score < best) {
      best = score;
      out.eta = eta;
    }
  }

  // Least-squares eta^2 by Gauss-Newton from the best candidate.
  cplx q = out.eta * out.eta;
  const double h = traj.h;
  for (int it = 0; it < 50; ++it) {
    cplx num = 0.0;
    double den = 0.0;
    double ss = 0.0;
    for (std::size_t g = 1; g + 1 < traj.positions.size(); ++g) {
      const auto& um = traj.positions[g - 1];
      const auto& uc = traj.positions[g];
      const auto& up = traj.positions[g + 1];
      for (std::size_t i = 0; i < uc.size(); ++i) {
        const cplx udi = (up[i] - um[i]) / (2.0 * h);
        cplx r = (up[i] - 2.0 * uc[i] + um[i]) / (h * h);
        cplx jac = 0.0;
        for (std::size_t k = 0; k < uc.size(); ++k) {
          if (k == i) continue;
          const cplx x = uc[i] - uc[k];
          const cplx udk = (up[k] - um[k]) / (2.0 * h);
          if (kernel == RSKernel::Rational) {
            r -= udi * udk * (-2.0 * q / (x * (x * x - q)));
            jac -= udi * udk * (-2.0 * x / ((x * x - q) * (x * x - q)));
          } else {
            r -= udi * udk * (2.0 / (x * x - q));
            jac -= udi * udk * (2.0 / ((x * x - q) * (x * x - q)));
          }
        }
        num += std::conj(jac) * r;
        den += std::norm(jac);
        ss = std::max(ss, std::abs(r));
      }
    }
    out.eta2_fit_residual = ss;
    if (den == 0.0) break;
    const cplx dq = -num / den;
    q += dq;
    if (std::abs(dq) < 1e-14 * std::max(1.0, std::abs(q))) break;
  }
  out.eta2_fit = q;

  if (!(best <= out.threshold)) {
    std::ostringstream os;
    os << "calibrate_eta: no candidate below threshold " << out.threshold << "; scores:";
    for (const auto& [e, s] : out.scores) os << " eta=" << e << " -> " << s;
    os << "; eta^2 fit " << q;
    throw CalibrationFailure(os.str());
  }
  return out;
}

Trajectory integrate_rs(std::vector<cplx> u0, std::vector<cplx> v0, cplx eta, double h, int steps,
                        RSKernel kernel) {
  const std::size_t L = u0.size();
  if (v0.size() != L) throw std::invalid_argument("integrate_rs: size mismatch");
  using State = std::vector<cplx>;  // u then v
  auto deriv = [&](const State& s) {
    State d(2 * L);
    for (std::size_t i = 0; i < L; ++i) {
      d[i] = s[L + i];
      cplx a = 0.0;
      for (std::size_t k = 0; k < L; ++k)
        if (k != i) a += s[L + i] * s[L + k] * rs_kernel(s[i] - s[k], eta, kernel);
      d[L + i] = a;
    }
    return d;
  };
  auto axpy = [](const State& x, double a, const State& y) {
    State r(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) r[i] = x[i] + a * y[i];
    return r;
  };
  State s(2 * L);
  for (std::size_t i = 0; i < L; ++i) {
    s[i] = u0[i];
    s[L + i] = v0[i];
  }
  Trajectory traj;
  traj.h = h;
  traj.state_id = -1;
  for (int g = 0; g <= steps; ++g) {
    traj.t1.push_back(g * h);
    traj.positions.emplace_back(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(L));
    if (g == steps) break;
    const State k1 = deriv(s);
    const State k2 = deriv(axpy(s, h / 2, k1));
    const State k3 = deriv(axpy(s, h / 2, k2));
    const State k4 = deriv(axpy(s, h, k3));
    for (std::size_t i = 0; i < s.size(); ++i) s[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  }
  return traj;
}

std::vector<cplx> initial_velocities(const TTable& table) {
  const auto& spec = table.spec();
  const Polynomial dphi = spec.phi().derivative();
  const Polynomial& t1 = table.at(Partition({1}));
  std::vector<cplx> v;
  for (const cplx th : spec.theta) {
    const cplx dp = dphi(th);
    if (std::abs(dp) < 1e-12) throw std::domain_error("initial_velocities: coincident inhomogeneities");
    v.push_back(-t1(th) / dp);
  }
  return v;
}

std::vector<cplx> fd_velocities(const MasterT& m, double h) {
  const auto& theta = m.table().spec().theta;
  auto z = [&](double t1) { return match_positions(theta, m.zeros(at_t1(t1), theta)); };
  const auto p1 = z(h), m1 = z(-h), p2 = z(2 * h), m2 = z(-2 * h);
  std::vector<cplx> v(theta.size());
  for (std::size_t j = 0; j < theta.size(); ++j) v[j] = (-p2[j] + 8.0 * p1[j] - 8.0 * m1[j] + m2[j]) / (12.0 * h);
  return v;
}

InverseReport inverse_problem_report(const std::vector<EigenRecord>& records,
                                     const std::vector<const MasterT*>& masters, double fd_h) {
  if (records.size() != masters.size()) throw std::invalid_argument("inverse_problem_report: size mismatch");
  InverseReport rep;
  rep.min_velocity_separation = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < records.size(); ++k) {
    const MasterT& m = *masters[k];
    const auto& theta = m.table().spec().theta;
    InverseRow row;
    row.state_id = records[k].id;
    row.M = records[k].ed.M;
    row.positions = match_positions(theta, m.zeros(TimesVector(1), theta));
    row.velocities = initial_velocities(m.table());
    row.energy = records[k].bethe.energy;
    row.bethe_residual = records[k].bethe.residual_norm;
    row.fd_velocity_error = max_disp(row.velocities, fd_velocities(m, fd_h));
    rep.position_spread = std::max(rep.position_spread, max_disp(row.positions, theta));
    rep.max_fd_error = std::max(rep.max_fd_error, row.fd_velocity_error);
    rep.rows.push_back(std::move(row));
  }
  std::sort(rep.rows.begin(), rep.rows.end(),
            [](const InverseRow& a, const InverseRow& b) { return a.state_id < b.state_id; });
  for (std::size_t a = 0; a < rep.rows.size(); ++a)
    for (std::size_t b = 0; b < a; ++b)
      rep.min_velocity_separation =
          std::min(rep.min_velocity_separation, max_disp(rep.rows[a].velocities, rep.rows[b].velocities));
  if (rep.rows.size() < 2) rep.min_velocity_separation = 0.0;
  return rep;
}

nlohmann::json to_json(const InverseReport& r) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : r.rows) {
    nlohmann::json pos = nlohmann::json::array(), vel = nlohmann::json::array();
    for (const cplx p : row.positions) pos.push_back(to_json(p));
    for (const cplx v : row.velocities) vel.push_back(to_json(v));
    rows.push_back({{"state", row.state_id},
                    {"M", row.M},
                    {"positions", pos},
                    {"velocities", vel},
                    {"energy", row.energy ? to_json(*row.energy) : nlohmann::json()},
                    {"bethe_residual", std::isfinite(row.bethe_residual) ? nlohmann::json(row.bethe_residual)
                                                                         : nlohmann::json()},
                    {"fd_velocity_error", row.fd_velocity_error}});
  }
  return {{"rows", rows},
          {"position_spread", r.position_spread},
          {"min_velocity_separation", r.min_velocity_separation},
          {"max_fd_error", r.max_fd_error}};
}

void write_trajectory_csv(std::ostream& os, const std::vector<Trajectory>& trajs) {
  CsvWriter w(os, {"eigenstate", "t1", "particle", "re_u", "im_u"});
  for (const auto& tr : trajs)
    for (std::size_t g = 0; g < tr.t1.size(); ++g)
      for (std::size_t j = 0; j < tr.positions[g].size(); ++j) {
        w.field(tr.state_id).field(tr.t1[g]).field(static_cast<int>(j));
        w.field(tr.positions[g][j].real()).field(tr.positions[g][j].imag());
        w.end_row();
      }
}

void write_residual_csv(std::ostream& os, const std::vector<std::pair<int, RSResidual>>& res, double h) {
  CsvWriter w(os, {"eigenstate", "t1", "particle", "abs_residual", "h"});
  for (const auto& [id, r] : res)
    for (std::size_t g = 0; g < r.t1.size(); ++g)
      for (std::size_t j = 0; j < r.values[g].size(); ++j) {
        w.field(id).field(r.t1[g]).field(static_cast<int>(j)).field(std::abs(r.values[g][j])).field(h);
        w.end_row();
      }
}

}  // namespace taulab
