// Acceptance criteria 1-10: one PASS/FAIL line each, nonzero exit if any fails.
#include "taulab/bethe.hpp"
#include "taulab/fusion.hpp"
#include "taulab/hirota.hpp"
#include "taulab/master.hpp"
#include "taulab/rsflow.hpp"
#include "taulab/spinchain.hpp"
#include "taulab/symfun.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <random>
#include <sstream>
#include <string>

using namespace taulab;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string sci(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2e", x);
  return buf;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Generic distinct inhomogeneities, spacing about 1.3.
ChainSpec generic_chain(int L) {
  static const std::map<int, std::vector<cplx>> kTheta{
      {2, {-0.66, 0.61}},
      {3, {-1.31, 0.07, 1.27}},
      {4, {-1.93, -0.62, 0.71, 1.98}},
  };
  return ChainSpec::inhomogeneous(kTheta.at(L));
}

struct StateTables {
  ChainSpec spec;
  std::vector<EigenRecord> records;
  std::vector<std::shared_ptr<const TTable>> tables;
};

StateTables tables_for(const ChainSpec& spec, const ConventionRecord& conv) {
  StateTables st{spec, enumerate_states(spec), {}};
  for (const auto& r : st.records)
    st.tables.push_back(std::make_shared<const TTable>(build_ttable(spec, r.bethe.roots(), r.id, conv)));
  return st;
}

const ConventionRecord& calibrated() {
  static const ConventionRecord conv = [] {
    // t0 step over the spec's candidates {1, i, 2i}; shifts held at the
    // values that pass the three-row and T_0 = phi targets.
    const ChainSpec spec = generic_chain(3);
    std::vector<std::vector<cplx>> roots;
    for (const auto& r : enumerate_states(spec)) roots.emplace_back(r.bethe.roots().begin(), r.bethe.roots().end());
    CalibrationOptions opts;
    opts.jt_shifts = {{0, -2}};
    opts.row_shifts = {{0, 1}};
    opts.t0_steps = {{1, 0}, {0, 1}, {0, 2}};
    return calibrate_conventions(spec, roots, opts).best;
  }();
  return conv;
}

// 1. ED-Bethe agreement
Outcome criterion1() {
  const auto t0 = Clock::now();
  double worst = 0.0;
  int n_states = 0;
  bool specific = true;
  std::ostringstream why;
  for (const int L : {2, 4, 6}) {
    const ChainSpec spec = ChainSpec::homogeneous(L);
    const SpinOperator H = hamiltonian(spec);
    for (int M = 0; 2 * M <= L; ++M) {
      std::vector<double> ed;
      for (const auto& e : diagonalize_sector(H, M)) ed.push_back(e.value.real());
      for (const auto& st : solve(spec, M).states) {
        const double E = energy(st, spec);
        double best = std::numeric_limits<double>::infinity();
        for (const double x : ed) best = std::min(best, std::abs(E - x) / std::max(1.0, std::abs(x)));
        worst = std::max(worst, best);
        ++n_states;
      }
    }
  }
  {
    const ChainSpec spec = ChainSpec::homogeneous(2);
    const auto res = solve(spec, 1).states;
    specific &= res.size() == 1 && std::abs(res[0].roots()[0]) < 1e-8 && std::abs(energy(res[0], spec) + 6.0) < 1e-8;
  }
  {
    const ChainSpec spec = ChainSpec::homogeneous(4);
    const auto res = solve(spec, 2).states;
    const double r = 1.0 / std::sqrt(3.0);
    bool found = false;
    for (const auto& st : res) {
      if (std::abs(energy(st, spec) + 8.0) > 1e-8) continue;
      const auto v = st.roots();
      found |= std::abs(v[0] + r) < 1e-8 && std::abs(v[1] - r) < 1e-8;
    }
    specific &= found;
  }
  const double secs = seconds_since(t0);
  why << n_states << " states, worst rel dE " << sci(worst) << ", specific examples " << (specific ? "ok" : "wrong")
      << ", " << sci(secs) << " s";
  return {worst <= 1e-8 && specific && secs < 60.0, why.str()};
}

// 2. TQ residual for every converged state, L <= 6
Outcome criterion2() {
  double worst = 0.0;
  int n = 0;
  for (const int L : {2, 3, 4, 5, 6}) {
    const ChainSpec spec = ChainSpec::homogeneous(L);
    for (const auto& r : enumerate_states(spec)) {
      if (r.bethe.singular) continue;
      const Polynomial Q = q_polynomial(r.bethe.roots());
      const double scale = std::max({(r.transfer * Q).scale(), (spec.a() * Q.shifted(-2.0 * kI)).scale(),
                                     (spec.d() * Q.shifted(2.0 * kI)).scale()});
      worst = std::max(worst, tq_residual(r.transfer, r.bethe, spec).scale() / scale);
      ++n;
    }
  }
  return {worst <= 1e-8, std::to_string(n) + " states, worst relative coefficient " + sci(worst)};
}

std::vector<ChainSpec> small_chains() {
  return {ChainSpec::homogeneous(2), ChainSpec::homogeneous(3), ChainSpec::homogeneous(4), generic_chain(2),
          generic_chain(3), generic_chain(4)};
}

// 3. three-row T_lambda vanish
Outcome criterion3() {
  const ConventionRecord& conv = calibrated();
  double worst = 0.0;
  int n = 0;
  std::vector<Partition> three;
  for (const auto& p : partitions_up_to(6))
    if (p.rows() >= 3) three.push_back(p);
  for (const auto& spec : small_chains()) {
    for (const auto& r : enumerate_states(spec)) {
      const auto rows = one_row_polynomials(7, r.bethe.roots(), spec, conv);
      double scale = 0.0;
      for (const auto& p : rows) scale = std::max(scale, p.scale());
      for (const auto& lam : three) worst = std::max(worst, jacobi_trudi(lam, rows, spec, conv).poly.scale() / scale);
      ++n;
    }
  }
  return {worst <= 1e-8, std::to_string(n) + " states x " + std::to_string(three.size()) +
                             " partitions, worst |T|/scale " + sci(worst)};
}

// 4. master Hirota residual
Outcome criterion4() {
  const auto t0 = Clock::now();
  const ConventionRecord& conv = calibrated();
  SamplerConfig cfg;
  cfg.n_samples = 200;
  cfg.seed = 2024;
  double worst = 0.0;
  // weakest (smallest) residual over states for fixed truncations K = 0, 2
  double weakest[2] = {std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  int n = 0;
  for (const auto& spec : small_chains()) {
    const auto st = tables_for(spec, conv);
    for (const auto& tab : st.tables) {
      worst = std::max(worst, hirota_check(MasterT(tab), cfg).normalized);
      for (const int K : {0, 2}) {
        MasterOptions fixed;
        fixed.K = K;
        fixed.adaptive = false;
        fixed.tail_tol = std::numeric_limits<double>::infinity();
        weakest[K / 2] = std::min(weakest[K / 2], hirota_check(MasterT(tab, fixed), cfg).normalized);
      }
      ++n;
    }
  }
  const double worst_k0 = weakest[0];
  const double secs = seconds_since(t0);
  std::ostringstream why;
  why << "delta = " << conv.t0_step << ", " << n << " states, worst " << sci(worst) << ", K=0 weakest "
      << sci(worst_k0) << " (K=2 weakest " << sci(weakest[1]) << "), " << sci(secs) << " s";
  return {worst <= 1e-6 && worst_k0 > 1e-3 && secs < 300.0, why.str()};
}

// 5. degree L, zeros at t = 0
Outcome criterion5() {
  const ConventionRecord& conv = calibrated();
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> U(-0.05, 0.05);
  bool degree_ok = true;
  double zero_err = 0.0;
  int n = 0;
  for (const auto& spec : small_chains()) {
    const auto st = tables_for(spec, conv);
    for (const auto& tab : st.tables) {
      const MasterT m(tab);
      for (int s = 0; s < 5; ++s) {
        TimesVector t(4);
        for (int k = 1; k <= 4; ++k) t.set(k, cplx(U(rng), U(rng)));
        const auto mp = m.polynomial(t);
        degree_ok &= mp.poly.degree(1e-10) == spec.L;
      }
      degree_ok &= m.polynomial(TimesVector(1)).poly.degree(1e-10) == spec.L;
      if (!spec.is_homogeneous()) {
        const auto z = match_positions(spec.theta, m.zeros(TimesVector(1)));
        for (int j = 0; j < spec.L; ++j) zero_err = std::max(zero_err, std::abs(z[j] - spec.theta[j]));
      }
      ++n;
    }
  }
  return {degree_ok && zero_err <= 1e-10,
          std::to_string(n) + " states, degree " + (degree_ok ? "L" : "wrong") + ", zero error " + sci(zero_err)};
}

// 6. RS dynamics
Outcome criterion6() {
  const ConventionRecord& conv = calibrated();
  const double h = 0.002;
  const double t1_end = 0.04;
  double ratio_lo = std::numeric_limits<double>::infinity(), ratio_hi = 0.0, wrong_floor = 1e300;
  int n = 0;
  std::string failure;
  std::map<std::string, int> etas;
  for (const int L : {2, 3, 4}) {
    const auto st = tables_for(generic_chain(L), conv);
    for (const auto& tab : st.tables) {
      const MasterT m(tab);
      const Trajectory fine = track(m, 0.0, t1_end, h / 2);
      if (fine.truncated) {
        failure = "trajectory truncated: " + fine.diagnostic;
        continue;
      }
      const Trajectory coarse = coarsen(fine);
      try {
        const EtaCalibration cal = calibrate_eta(fine);
        std::ostringstream es;
        es << cal.eta;
        ++etas[es.str()];
        RSParams p;
        p.eta = cal.eta;
        // shared interior points: every other point of the fine residual
        const auto rf = rs_residual(fine, p), rc = rs_residual(coarse, p);
        double mf = 0.0, mc = 0.0;
        for (std::size_t g = 0; g < rc.t1.size(); ++g) {
          const std::size_t gf = 2 * g + 1;
          for (std::size_t j = 0; j < rc.values[g].size(); ++j) {
            mc = std::max(mc, std::abs(rc.values[g][j]));
            mf = std::max(mf, std::abs(rf.values[gf][j]));
          }
        }
        const double ratio = mc / mf;
        ratio_lo = std::min(ratio_lo, ratio);
        ratio_hi = std::max(ratio_hi, ratio);
        RSParams wrong = p;
        wrong.eta = 2.0 * cal.eta;
        wrong_floor = std::min(wrong_floor, rs_residual(fine, wrong).max_abs);
      } catch (const std::exception& e) {
        failure = e.what();
      }
      ++n;
    }
  }
  std::ostringstream why;
  why << n << " states, eta";
  for (const auto& [k, v] : etas) why << " " << k << "x" << v;
  why << ", h-halving ratio in [" << ratio_lo << ", " << ratio_hi << "], wrong-eta floor " << sci(wrong_floor);
  if (!failure.empty()) why << "; " << failure;
  return {failure.empty() && ratio_lo >= 3.2 && ratio_hi <= 4.8 && wrong_floor > 1e-3, why.str()};
}

// 7. inverse problem
Outcome criterion7() {
  const ConventionRecord& conv = calibrated();
  double spread = 0.0, sep = std::numeric_limits<double>::infinity(), fd = 0.0;
  int n = 0;
  for (const int L : {2, 3, 4}) {
    const auto st = tables_for(generic_chain(L), conv);
    std::vector<std::unique_ptr<MasterT>> owned;
    std::vector<const MasterT*> ms;
    for (const auto& tab : st.tables) {
      owned.push_back(std::make_unique<MasterT>(tab));
      ms.push_back(owned.back().get());
    }
    const auto rep = inverse_problem_report(st.records, ms, 1e-3);
    spread = std::max(spread, rep.position_spread);
    sep = std::min(sep, rep.min_velocity_separation);
    fd = std::max(fd, rep.max_fd_error);
    n += static_cast<int>(rep.rows.size());
  }
  return {spread <= 1e-10 && sep > 1e-8 && fd <= 1e-6, std::to_string(n) + " rows, position spread " + sci(spread) +
                                                           ", min velocity separation " + sci(sep) +
                                                           ", fd error " + sci(fd)};
}

// 8. Hirota fixtures
Outcome criterion8() {
  SamplerConfig cfg;
  cfg.n_samples = 1000;
  const double c = sweep_check(fixtures::constant(2.5, 6), cfg).normalized;
  const double e = sweep_check(fixtures::plane_wave(cplx(0.7, 0.3), 12), cfg).normalized;
  double t1 = 0.0, anti = 0.0;
  const auto tau = fixtures::first_time(4);
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  for (int s = 0; s < 20; ++s) {
    TimesVector t(4);
    for (int k = 1; k <= 4; ++k) t.set(k, cplx(U(rng), U(rng)));
    t1 = std::max(t1, std::abs(residual_shift(tau, t, 1.0, 2.0, 3.0, 1.0).raw - 2.0));
    const cplx z1(U(rng), U(rng)), z2(U(rng), U(rng)), z3(U(rng), U(rng));
    const auto r = residual_shift(fixtures::two_plane_waves(1.0, 0.4, 0.5, -0.3, 6), t, z1, z2, z3, 1.0);
    const auto rs = residual_shift(fixtures::two_plane_waves(1.0, 0.4, 0.5, -0.3, 6), t, z2, z1, z3, 1.0);
    anti = std::max(anti, std::abs(r.raw + rs.raw) / std::max(r.scale, 1e-300));
  }
  std::ostringstream why;
  why << "constant " << sci(c) << ", exponential " << sci(e) << ", t_1 " << sci(t1) << ", antisymmetry " << sci(anti);
  return {c < 1e-14 && e < 1e-10 && t1 <= 1e-12 && anti <= 1e-14, why.str()};
}

// 9. Schur layer
Outcome criterion9() {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> U(-0.3, 0.3);
  const int K = 6;
  double cauchy = 0.0, closed = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    TimesVector t(K), s(K);
    for (int k = 1; k <= K; ++k) {
      t.set(k, cplx(U(rng), U(rng)));
      s.set(k, cplx(U(rng), U(rng)));
    }
    // degree-<=K part of exp(sum k t_k s_k): h-recurrence on a graded variable
    // q with p_k = k t_k s_k attached to q^k
    TimesVector prod(K);
    for (int k = 1; k <= K; ++k) prod.set(k, static_cast<double>(k) * t[k] * s[k]);
    cplx rhs = 0.0;
    for (const cplx h : h_from_times(prod, K)) rhs += h;
    cplx lhs = 0.0;
    for (const auto& lam : partitions_up_to(K)) lhs += schur(lam, t) * schur(lam, s);
    cauchy = std::max(cauchy, std::abs(lhs - rhs) / std::abs(rhs));

    const cplx s2 = t[1] * t[1] / 2.0 + t[2], s11 = t[1] * t[1] / 2.0 - t[2];
    closed = std::max({closed, std::abs(schur(Partition({2}), t) - s2), std::abs(schur(Partition({1, 1}), t) - s11)});
  }
  return {cauchy <= 1e-10 && closed <= 1e-15,
          "Cauchy order 6 rel error " + sci(cauchy) + ", s_(2)/s_(11) error " + sci(closed)};
}

// 10. nested su(3)
Outcome criterion10() {
  const ChainSpec spec = ChainSpec::homogeneous(3);
  const std::vector<int> counts{1, 1};
  const NestedResult res = solve_nested(spec, 3, counts);
  double norm = std::numeric_limits<double>::infinity();
  if (res.converged) {
    try {
      norm = max_abs(residual_nested(res.best.levels, 3, spec));
    } catch (const SingularConfiguration&) {
    }
  }
  std::string why = "residual " + sci(norm) + " after " + std::to_string(res.starts) + " starts";
  if (!res.log.empty()) why += "; " + res.log.back();
  return {res.converged && norm <= 1e-10, why};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"ED-Bethe agreement", criterion1},   {"TQ residual", criterion2},
      {"gl(2) truncation", criterion3},     {"master Hirota", criterion4},
      {"degree and t=0 zeros", criterion5}, {"RS dynamics", criterion6},
      {"inverse problem", criterion7},      {"Hirota fixtures", criterion8},
      {"Schur layer", criterion9},          {"nested su(3)", criterion10},
  };
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    Outcome o;
    const auto t0 = Clock::now();
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("[%s] %2zu %-22s %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", k + 1, criteria[k].first.c_str(),
                o.detail.c_str(), seconds_since(t0));
    std::fflush(stdout);
    failed += o.pass ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}
