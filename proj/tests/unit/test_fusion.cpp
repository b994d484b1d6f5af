#include "taulab/bethe.hpp"
#include "taulab/fusion.hpp"
#include "taulab/master.hpp"

#include <doctest.h>

#include <cmath>
#include <fstream>

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

std::vector<cplx> roots_of(const EigenRecord& r) { return {r.bethe.roots().begin(), r.bethe.roots().end()}; }

double rel(const Polynomial& a, const Polynomial& b) {
  return (a - b).scale() / std::max({1.0, a.scale(), b.scale()});
}

}  // namespace

TEST_CASE("ts_raw small cases") {
  const ChainSpec& spec = chain();
  const std::vector<cplx> none;
  CHECK(rel(ts_raw(0, none, spec), spec.phi()) < 1e-15);
  // no roots: T_1 = a + d
  CHECK(rel(ts_raw(1, none, spec), spec.a() + spec.d()) < 1e-14);
  CHECK_THROWS_AS(ts_raw(-1, none, spec), std::invalid_argument);
  CHECK_THROWS_AS(ts_raw(7, none, spec), std::invalid_argument);
  CHECK(ts_norm_factor(0, spec).degree() == 0);
  CHECK(ts_norm_factor(1, spec).degree() == 0);
  CHECK(ts_norm_factor(3, spec).degree() == 2 * spec.L);
  for (const auto& r : records()) {
    const auto v = roots_of(r);
    CHECK(rel(ts_raw(1, v, spec), r.transfer) < 1e-9);
  }
}

TEST_CASE("raw and normalized one-row eigenvalues agree") {
  const ChainSpec& spec = chain();
  for (const auto& r : records()) {
    const auto v = roots_of(r);
    for (int s = 0; s <= 4; ++s) {
      const Polynomial n = ts_normalized(s, v, spec);
      CHECK(n.degree() == spec.L);
      CHECK(std::abs(n.leading() - double(s + 1)) < 1e-10);
      CHECK(rel(ts_raw(s, v, spec), ts_norm_factor(s, spec) * n) < 1e-9);
      const cplx u(0.37, 0.41);
      CHECK(std::abs(ts_value(s, v, spec, u) - n(u)) < 1e-9 * std::max(1.0, std::abs(n(u))));
    }
  }
}

TEST_CASE("T-system right-hand side is state independent") {
  const ChainSpec& spec = chain();
  const cplx u(0.23, -0.31);
  for (int s = 1; s <= 4; ++s) {
    std::vector<cplx> rhs;
    for (const auto& r : records()) {
      const auto v = roots_of(r);
      const cplx lhs = ts_value(s, v, spec, u + kI) * ts_value(s, v, spec, u - kI) -
                       ts_value(s + 1, v, spec, u) * ts_value(s - 1, v, spec, u);
      rhs.push_back(lhs);
    }
    for (const cplx x : rhs) CHECK(std::abs(x - rhs[0]) < 1e-8 * std::max(1.0, std::abs(rhs[0])));
  }
}

TEST_CASE("Jacobi-Trudi with the default conventions") {
  const ChainSpec& spec = chain();
  const ConventionRecord conv;
  for (const auto& r : records()) {
    const auto v = roots_of(r);
    CHECK(rel(t_lambda(Partition(), v, spec, conv), spec.phi()) < 1e-14);
    const auto rows = one_row_polynomials(4, v, spec, conv);
    CHECK(rel(rows[1], r.transfer.shifted(conv.row_shift)) < 1e-9);
    const auto three = jacobi_trudi(Partition({1, 1, 1}), rows, spec, conv);
    CHECK(three.poly.scale() <= 1e-8 * three.numerator_scale);
    for (const auto& lam : partitions_up_to(4, 2)) {
      const auto jt = jacobi_trudi(lam, rows, spec, conv);
      CHECK(jt.defect < 1e-10);
      CHECK(jt.poly.degree(1e-12) == spec.L);
    }
  }
  // a single column of two boxes is state independent in su(2)
  const Polynomial first = t_lambda(Partition({1, 1}), roots_of(records()[0]), spec, conv);
  for (const auto& r : records()) CHECK(rel(t_lambda(Partition({1, 1}), roots_of(r), spec, conv), first) < 1e-9);
}

TEST_CASE("TTable") {
  const ChainSpec& spec = chain();
  const auto& r = records().back();
  TTableOptions opts;
  opts.cutoff = 12;
  const TTable t = build_ttable(spec, r.bethe.roots(), r.id, ConventionRecord{}, opts);
  CHECK(t.cutoff() == 12);
  CHECK(t.state_id() == r.id);
  CHECK(rel(t.at(Partition()), spec.phi()) < 1e-14);
  CHECK(t.at(Partition({2, 1, 1})).is_zero());
  CHECK_THROWS_AS(t.at(Partition({13})), std::out_of_range);
  for (const auto& p : t.partitions()) CHECK(p.rows() <= 2);
  CHECK(t.partitions().size() == partitions_up_to(12, 2).size());

  const TTable back = ttable_from_json(to_json(t));
  REQUIRE(back.partitions().size() == t.partitions().size());
  for (std::size_t k = 0; k < t.partitions().size(); ++k) CHECK(back.polys()[k].coeffs() == t.polys()[k].coeffs());
  CHECK(back.conventions().t0_step == t.conventions().t0_step);

  const std::vector<cplx> bogus{{0.3, 0.2}};
  CHECK_THROWS_AS(build_ttable(spec, bogus, 0, ConventionRecord{}, opts), ConventionError);
}

TEST_CASE("convention record json") {
  ConventionRecord c;
  c.t0_step = {1.0, 0.0};
  const auto back = convention_from_json(to_json(c));
  CHECK(back.t0_step == c.t0_step);
  CHECK(back.jt_shift == c.jt_shift);
  CHECK(back.row_shift == c.row_shift);
  CHECK(back.eta == c.eta);
  CHECK(back.norm_factors == c.norm_factors);
}

TEST_CASE("stored conventions match a fresh calibration") {
  std::ifstream in(std::string(TAULAB_DATA_DIR) + "/conventions.json");
  REQUIRE(in.good());
  const auto stored = convention_from_json(nlohmann::json::parse(in).at("conventions"));
  std::vector<std::vector<cplx>> roots;
  for (const auto& r : records()) roots.push_back(roots_of(r));
  CalibrationOptions opts;
  opts.jt_shifts = {{0, -2}};
  opts.row_shifts = {{0, 1}};
  opts.t0_steps = {{1, 0}, {0, 1}, {0, 2}};
  const auto rep = calibrate_conventions(chain(), roots, opts);
  REQUIRE(rep.ok);
  CHECK(rep.best.t0_step == stored.t0_step);
  CHECK(rep.best.jt_shift == stored.jt_shift);
  CHECK(rep.best.row_shift == stored.row_shift);
}
