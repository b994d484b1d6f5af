#include "taulab/rsflow.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>

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

const MasterT& master(std::size_t k) {
  static std::vector<std::unique_ptr<MasterT>> ms;
  if (ms.empty())
    for (const auto& r : records())
      ms.push_back(std::make_unique<MasterT>(
          std::make_shared<const TTable>(build_ttable(chain(), r.bethe.roots(), r.id))));
  return *ms.at(k);
}

std::size_t n_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST_CASE("tracking") {
  const MasterT& m = master(records().size() - 1);
  const Trajectory tr = track(m, 0.0, 0.04, 0.002);
  REQUIRE(tr.t1.size() == 21);
  CHECK_FALSE(tr.truncated);
  CHECK(tr.t1.back() == doctest::Approx(0.04));
  for (int j = 0; j < chain().L; ++j) CHECK(std::abs(tr.positions[0][j] - chain().theta[j]) < 1e-12);

  // zeros are a function of t_1: refining the grid does not move them
  const Trajectory fine = track(m, 0.0, 0.04, 0.001);
  for (std::size_t g = 0; g < tr.t1.size(); ++g)
    for (int j = 0; j < chain().L; ++j) CHECK(std::abs(fine.positions[2 * g][j] - tr.positions[g][j]) < 1e-10);

  // walking back to t_1 = 0 returns to theta, with particle labels intact
  const Trajectory back = track(m, 0.04, 0.0, -0.002);
  REQUIRE(back.t1.size() == 21);
  for (int j = 0; j < chain().L; ++j) {
    CHECK(std::abs(back.positions.front()[j] - tr.positions.back()[j]) < 1e-10);
    CHECK(std::abs(back.positions.back()[j] - chain().theta[j]) < 1e-10);
  }
}

TEST_CASE("match_positions") {
  const std::vector<cplx> prev{{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}, {2.0, 2.0}};
  const std::vector<cplx> next{{2.01, 2.0}, {0.0, 1.02}, {0.01, 0.0}, {1.0, -0.01}};
  const auto m = match_positions(prev, next);
  for (std::size_t k = 0; k < prev.size(); ++k) CHECK(std::abs(m[k] - prev[k]) < 0.03);
}

TEST_CASE("velocities at t_1 = 0") {
  for (std::size_t k = 0; k < records().size(); ++k) {
    const MasterT& m = master(k);
    const auto v = initial_velocities(m.table());
    const auto fd = fd_velocities(m, 1e-3);
    const Polynomial T1 = m.table().at(Partition({1}));
    const Polynomial dphi = chain().phi().derivative();
    for (int j = 0; j < chain().L; ++j) {
      const cplx th = chain().theta[j];
      CHECK(std::abs(v[j] + T1(th) / dphi(th)) < 1e-13 * std::max(1.0, std::abs(v[j])));
      CHECK(std::abs(fd[j] - v[j]) < 1e-6 * std::max(1.0, std::abs(v[j])));
    }
  }
}

TEST_CASE("zeros obey the rational RS law") {
  const MasterT& m = master(records().size() - 1);
  const Trajectory fine = track(m, 0.0, 0.04, 0.001);
  const Trajectory coarse = coarsen(fine);
  CHECK(coarse.h == doctest::Approx(0.002));
  RSParams pf, pc;
  pf.h = fine.h;
  pc.h = coarse.h;
  const auto rf = rs_residual(fine, pf), rc = rs_residual(coarse, pc);
  // compare at shared interior points
  double mf = 0.0, mc = 0.0;
  for (std::size_t g = 0; g < rc.t1.size(); ++g) {
    const auto it = std::find_if(rf.t1.begin(), rf.t1.end(), [&](double x) { return std::abs(x - rc.t1[g]) < 1e-12; });
    REQUIRE(it != rf.t1.end());
    const auto& vf = rf.values[static_cast<std::size_t>(it - rf.t1.begin())];
    for (std::size_t j = 0; j < vf.size(); ++j) {
      mf = std::max(mf, std::abs(vf[j]));
      mc = std::max(mc, std::abs(rc.values[g][j]));
    }
  }
  CHECK(mc / mf == doctest::Approx(4.0).epsilon(0.2));

  const auto cal = calibrate_eta(fine);
  CHECK(cal.eta == cplx(0.0, 2.0));
  CHECK(std::abs(cal.eta2_fit + 4.0) < 0.05);

  // the printed kernel does not converge under refinement
  pf.kernel = pc.kernel = RSKernel::Printed;
  const double pfm = rs_residual(fine, pf).max_abs, pcm = rs_residual(coarse, pc).max_abs;
  CHECK(pfm > 1e-3);
  CHECK(pcm / pfm < 1.5);
  CHECK_THROWS_AS(calibrate_eta(fine, RSKernel::Printed), CalibrationFailure);
}

TEST_CASE("synthetic RS trajectories") {
  const Trajectory tr = integrate_rs({-1.0, 0.2, 1.5}, {0.3, -0.2, 0.1}, 1.0, 1e-3, 60);
  REQUIRE(tr.positions.size() == 61);
  const auto cal = calibrate_eta(tr);
  CHECK(cal.eta == cplx(1.0));

  RSParams p;
  p.eta = 1.0;
  p.h = tr.h;
  CHECK(rs_residual(tr, p).max_abs < 1e-5);

  const Trajectory one = integrate_rs({0.5}, {1.0}, 1.0, 1e-3, 10);
  CHECK_THROWS_AS(calibrate_eta(one), CalibrationFailure);
  // a free particle moves uniformly
  CHECK(std::abs(one.positions.back()[0] - (0.5 + 0.01)) < 1e-14);
}

TEST_CASE("kernel poles") {
  const cplx eta(0.0, 2.0);
  CHECK(std::abs(rs_kernel(1.0, eta, RSKernel::Rational) - (-2.0 * eta * eta / (1.0 - eta * eta))) < 1e-15);
  CHECK(std::abs(rs_kernel(1.0, eta, RSKernel::Printed) - 2.0 / (1.0 - eta * eta)) < 1e-15);

  Trajectory tr;
  tr.h = 1e-3;
  for (int g = 0; g < 3; ++g) {
    tr.t1.push_back(g * tr.h);
    tr.positions.push_back({0.0, eta + 1e-13 * g});
  }
  RSParams p;
  p.h = tr.h;
  CHECK_THROWS_AS(rs_residual(tr, p), NearSingularPair);
}

TEST_CASE("inverse problem report and CSV output") {
  std::vector<const MasterT*> ms;
  for (std::size_t k = 0; k < records().size(); ++k) ms.push_back(&master(k));
  const auto rep = inverse_problem_report(records(), ms);
  CHECK(rep.rows.size() == records().size());
  CHECK(rep.position_spread < 1e-10);
  CHECK(rep.min_velocity_separation > 1e-8);
  CHECK(rep.max_fd_error < 1e-6);
  CHECK(to_json(rep)["rows"].size() == records().size());

  const Trajectory tr = track(master(0), 0.0, 0.01, 0.005);
  std::ostringstream os;
  write_trajectory_csv(os, {tr});
  CHECK(os.str().rfind("eigenstate,t1,particle,re_u,im_u\n", 0) == 0);
  CHECK(n_lines(os.str()) == 1 + tr.t1.size() * chain().L);

  RSParams p;
  p.h = tr.h;
  std::ostringstream rs;
  write_residual_csv(rs, {{0, rs_residual(tr, p)}}, tr.h);
  CHECK(n_lines(rs.str()) == 1 + chain().L);
}
