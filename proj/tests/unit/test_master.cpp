#include "taulab/bethe.hpp"
#include "taulab/master.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <memory>

using namespace taulab;

namespace {

const ChainSpec& chain() {
  static const ChainSpec spec = ChainSpec::inhomogeneous({-1.31, 0.07, 1.27});
  return spec;
}

const std::vector<EigenRecord>& records() {
  static const auto recs = enumerate_states(chain());
  return recs;
}

std::shared_ptr<const TTable> table(const EigenRecord& r, int cutoff = 56) {
  TTableOptions opts;
  opts.cutoff = cutoff;
  return std::make_shared<const TTable>(build_ttable(chain(), r.bethe.roots(), r.id, ConventionRecord{}, opts));
}

double nearest(cplx x, std::span<const cplx> ys) {
  double best = 1e300;
  for (const cplx y : ys) best = std::min(best, std::abs(x - y));
  return best;
}

}  // namespace

TEST_CASE("t = 0 gives phi") {
  for (const auto& r : records()) {
    const MasterT m(table(r));
    const TimesVector zero(4);
    for (const cplx u : {cplx(0.3, 0.2), cplx(-1.0, 0.5), cplx(2.0, -1.0)}) {
      const auto v = m.eval(u, zero);
      CHECK(std::abs(v.value - chain().phi()(u)) < 1e-13 * std::max(1.0, std::abs(v.value)));
    }
    const auto p = m.polynomial(zero);
    CHECK((p.poly - chain().phi()).scale() < 1e-13);
    const auto z = m.zeros(zero);
    for (const cplx th : chain().theta) CHECK(nearest(th, z) < 1e-12);
  }
}

TEST_CASE("first-order response in t_1") {
  for (const auto& r : records()) {
    const MasterT m(table(r));
    const Polynomial T1 = m.table().at(Partition({1}));
    const double h = 1e-4;
    TimesVector tp(4), tm(4);
    tp.set(1, h);
    tm.set(1, -h);
    const cplx u(0.41, -0.22);
    const cplx fd = (m.eval(u, tp).value - m.eval(u, tm).value) / (2.0 * h);
    CHECK(std::abs(fd - T1(u)) < 1e-6 * std::max(1.0, std::abs(T1(u))));

    // zeros move as theta_j - t_1 T_(1)(theta_j) / phi'(theta_j)
    const double eps = 1e-6;
    TimesVector te(4);
    te.set(1, eps);
    const auto z = m.zeros(te, chain().theta);
    const Polynomial dphi = chain().phi().derivative();
    for (int j = 0; j < chain().L; ++j) {
      const cplx th = chain().theta[j];
      const cplx want = th - eps * T1(th) / dphi(th);
      CHECK(std::abs(z[j] - want) < 1e-9);
    }
  }
}

TEST_CASE("K = 0 reduces to phi") {
  MasterOptions o;
  o.K = 0;
  o.adaptive = false;
  o.tail_tol = std::numeric_limits<double>::infinity();
  const MasterT m(table(records().back()), o);
  TimesVector t(4);
  t.set(1, 0.04);
  t.set(3, cplx(0.0, 0.03));
  const cplx u(0.2, 0.7);
  CHECK(std::abs(m.eval(u, t).value - chain().phi()(u)) < 1e-14 * std::abs(chain().phi()(u)));
}

TEST_CASE("Hirota identity for the master T") {
  SamplerConfig cfg;
  cfg.n_samples = 30;
  for (const auto& r : records()) {
    const MasterT m(table(r));
    const auto rep = hirota_check(m, cfg);
    CHECK(rep.normalized < 1e-8);
  }

  // the lattice form agrees with the shift form on the Miwa lattice
  const MasterT m(table(records().front()));
  const TauFn tau = as_tau(m);
  TimesVector base(12);
  base.set(1, 0.01);
  base.set(2, cplx(0.0, 0.02));
  base.set_t0(cplx(0.3, 0.1));
  const cplx z1(0.05, 0.01), z2(-0.03, 0.04), z3(0.02, -0.06);
  const auto grid = sample_lattice(tau, base, z1, z2, z3, m.t0_step(), 1);
  const auto lat = residual_lattice(grid, {0, 0, 0}, z1, z2, z3);
  const auto sh = residual_shift(tau, base, z1, z2, z3, m.t0_step());
  CHECK(std::abs(lat.raw - sh.raw) <= 1e-8 * sh.scale);
}

TEST_CASE("cache returns bit-identical values") {
  MasterOptions o;
  o.cache = true;
  const MasterT m(table(records().front()), o);
  TimesVector t(4);
  t.set(1, 0.03);
  t.set(2, cplx(-0.01, 0.02));
  const cplx u(0.3, -0.4);
  const auto a = m.eval(u, t);
  CHECK(m.cache_size() == 1);
  const auto b = m.eval(u, t);
  CHECK(m.cache_size() == 1);
  CHECK(a.value == b.value);
  CHECK(a.K == b.K);
  const MasterT fresh(table(records().front()));
  CHECK(fresh.eval(u, t).value == a.value);
}

TEST_CASE("truncation failure") {
  const MasterT m(table(records().back(), 6));
  TimesVector t(4);
  for (int k = 1; k <= 4; ++k) t.set(k, 0.5);
  CHECK_THROWS_AS(m.eval(0.3, t), TruncationInsufficient);
}

TEST_CASE("calibration selects t0 step 2i") {
  std::vector<std::vector<cplx>> roots;
  for (const auto& r : records()) roots.emplace_back(r.bethe.roots().begin(), r.bethe.roots().end());
  CalibrationOptions opts;
  opts.jt_shifts = {{0, -2}, {0, 2}};
  opts.row_shifts = {{0, 1}, {0, -1}};
  opts.t0_steps = {{1, 0}, {0, 1}, {0, 2}};
  const auto rep = calibrate_conventions(chain(), roots, opts);
  REQUIRE(rep.ok);
  CHECK(rep.entries.size() == 12);
  CHECK(rep.best.t0_step == cplx(0, 2));
  CHECK(rep.best.jt_shift == cplx(0, -2));
  CHECK(rep.best.row_shift == cplx(0, 1));
  const auto j = to_json(rep);
  CHECK(j.contains("entries"));
}
