#include "taulab/hirota.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace taulab {

namespace {

BilinearResidual combine(cplx z1, cplx z2, cplx z3, cplx p1, cplx p2, cplx p3) {
  BilinearResidual r;
  r.raw = (z2 - z3) * p1 + (z3 - z1) * p2 + (z1 - z2) * p3;
  r.scale = std::max({std::abs(p1), std::abs(p2), std::abs(p3)});
  r.normalized = r.scale > 0.0 ? std::abs(r.raw) / r.scale : 0.0;
  return r;
}

cplx random_in_disc(std::mt19937_64& rng, double radius) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double r = radius * std::sqrt(unit(rng));
  const double phi = 2.0 * std::numbers::pi * unit(rng);
  return std::polar(r, phi);
}

}  // namespace

BilinearResidual residual_shift(const TauFn& tau, const TimesVector& t, cplx z1, cplx z2, cplx z3,
                                cplx step) {
  const TimesVector base = t.widened(tau.kmax);
  const TimesVector s1 = shift_times(base, z1, step);
  const TimesVector s2 = shift_times(base, z2, step);
  const TimesVector s3 = shift_times(base, z3, step);
  const cplx p1 = tau.eval(s1) * tau.eval(shift_times(s2, z3, step));
  const cplx p2 = tau.eval(s2) * tau.eval(shift_times(s1, z3, step));
  const cplx p3 = tau.eval(s3) * tau.eval(shift_times(s1, z2, step));
  return combine(z1, z2, z3, p1, p2, p3);
}

cplx LatticeGrid::at(LatticeSite p) const {
  const auto it = values_.find(p);
  if (it == values_.end()) {
    throw IncompleteStencil("lattice point (" + std::to_string(p.u1) + "," + std::to_string(p.u2) +
                            "," + std::to_string(p.u3) + ") missing from grid");
  }
  return it->second;
}

BilinearResidual residual_lattice(const LatticeGrid& grid, LatticeSite p, cplx z1, cplx z2, cplx z3) {
  auto g = [&](int a, int b, int c) { return grid.at({p.u1 + a, p.u2 + b, p.u3 + c}); };
  const cplx p1 = g(0, 1, 1) * g(1, 0, 0);
  const cplx p2 = g(1, 0, 1) * g(0, 1, 0);
  const cplx p3 = g(1, 1, 0) * g(0, 0, 1);
  return combine(z1, z2, z3, p1, p2, p3);
}

LatticeGrid sample_lattice(const TauFn& tau, const TimesVector& base, cplx z1, cplx z2, cplx z3,
                           cplx step, int window) {
  LatticeGrid grid;
  const TimesVector b = base.widened(tau.kmax);
  TimesVector a = b;
  for (int i = 0; i <= window; ++i) {
    TimesVector ab = a;
    for (int j = 0; j <= window; ++j) {
      TimesVector abc = ab;
      for (int k = 0; k <= window; ++k) {
        grid.set({i, j, k}, tau.eval(abc));
        abc = shift_times(abc, z3, step);
      }
      ab = shift_times(ab, z2, step);
    }
    a = shift_times(a, z1, step);
  }
  return grid;
}

std::vector<Sample> draw_samples(const SamplerConfig& cfg, int kmax) {
  std::mt19937_64 rng(cfg.seed);
  std::vector<Sample> out;
  out.reserve(cfg.n_samples);
  for (int s = 0; s < cfg.n_samples; ++s) {
    Sample smp;
    smp.t = TimesVector(std::max(kmax, cfg.n_times));
    smp.t.set_t0(random_in_disc(rng, cfg.u_radius));
    for (int k = 1; k <= cfg.n_times; ++k) smp.t.set(k, random_in_disc(rng, cfg.t_radius));
    for (auto& z : smp.z) z = random_in_disc(rng, cfg.z_radius);
    out.push_back(std::move(smp));
  }
  return out;
}

SweepReport sweep_check(const TauFn& tau, const SamplerConfig& cfg) {
  SweepReport rep;
  rep.seed = cfg.seed;
  rep.normalized = -1.0;
  for (const auto& smp : draw_samples(cfg, tau.kmax)) {
    const auto r = residual_shift(tau, smp.t, smp.z[0], smp.z[1], smp.z[2], cfg.step);
    ++rep.n_samples;
    if (r.normalized > rep.normalized) {
      rep.normalized = r.normalized;
      rep.max_residual = std::abs(r.raw);
      rep.worst_sample = smp;
    }
  }
  if (rep.n_samples == 0) rep.normalized = 0.0;
  return rep;
}

nlohmann::json to_json(const SweepReport& r) {
  auto cj = [](cplx c) { return nlohmann::json::array({c.real(), c.imag()}); };
  nlohmann::json times = nlohmann::json::array();
  for (const cplx v : r.worst_sample.t.higher()) times.push_back(cj(v));
  nlohmann::json zs = nlohmann::json::array();
  for (const cplx z : r.worst_sample.z) zs.push_back(cj(z));
  return {
      {"max_residual", r.max_residual},
      {"normalized", r.normalized},
      {"n_samples", r.n_samples},
      {"seed", r.seed},
      {"worst_sample", {{"t0", cj(r.worst_sample.t.t0())}, {"t", times}, {"z", zs}}},
  };
}

namespace fixtures {

TauFn constant(cplx c, int kmax) {
  return {[c](const TimesVector&) { return c; }, kmax, "constant"};
}

TauFn plane_wave(cplx p, int kmax) {
  const cplx logp = std::log(p);
  return {[p, logp](const TimesVector& t) {
            cplx e = t.t0() * logp;
            cplx pk = 1.0;
            for (int k = 1; k <= t.kmax(); ++k) {
              pk *= p;
              e += t[k] * pk;
            }
            return std::exp(e);
          },
          kmax, "plane_wave"};
}

TauFn two_plane_waves(cplx c1, cplx p, cplx c2, cplx q, int kmax) {
  auto fp = plane_wave(p, kmax).eval;
  auto fq = plane_wave(q, kmax).eval;
  return {[=](const TimesVector& t) { return c1 * fp(t) + c2 * fq(t); }, kmax, "two_plane_waves"};
}

TauFn first_time(int kmax) {
  return {[](const TimesVector& t) { return t[1]; }, kmax, "first_time"};
}

}  // namespace fixtures

}  // namespace taulab
