#include "taulab/symfun.hpp"

#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>
#include <random>

using namespace taulab;

namespace {

std::mt19937_64& rng() {
  static std::mt19937_64 g(11);
  return g;
}

cplx rnd(double r) {
  std::uniform_real_distribution<double> U(-r, r);
  return {U(rng()), U(rng())};
}

TimesVector random_times(int kmax, double r) {
  TimesVector t(kmax);
  for (int k = 1; k <= kmax; ++k) t.set(k, rnd(r));
  return t;
}

// Bialternant formula det(x_i^{lambda_j + n - j}) / det(x_i^{n - j}).
cplx bialternant(const Partition& lam, const std::vector<cplx>& x) {
  const int n = static_cast<int>(x.size());
  Eigen::MatrixXcd num(n, n), den(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      num(i, j) = std::pow(x[i], lam[j] + n - 1 - j);
      den(i, j) = std::pow(x[i], n - 1 - j);
    }
  return num.determinant() / den.determinant();
}

}  // namespace

TEST_CASE("partition validation and parsing") {
  CHECK_THROWS_AS(Partition({1, 2}), std::invalid_argument);
  CHECK_THROWS_AS(Partition({2, -1}), std::invalid_argument);
  const Partition p({3, 1, 0, 0});
  CHECK(p.rows() == 2);
  CHECK(p.weight() == 4);
  CHECK(Partition::parse(p.to_string()) == p);
  CHECK(Partition::parse(Partition().to_string()).empty());
  CHECK(partitions_of(6).size() == 11);
  CHECK(partitions_of(6, 2).size() == 4);
  CHECK(partitions_up_to(4).size() == 1 + 1 + 2 + 3 + 5);
}

TEST_CASE("h_from_times examples") {
  const auto h0 = h_from_times(TimesVector(3), 3);
  REQUIRE(h0.size() == 4);
  CHECK(h0[0] == cplx(1.0));
  for (int k = 1; k <= 3; ++k) CHECK(h0[k] == cplx(0.0));

  TimesVector t(3);
  t.set(1, 1.0);
  const auto h = h_from_times(t, 3);
  CHECK(std::abs(h[1] - 1.0) < 1e-15);
  CHECK(std::abs(h[2] - 0.5) < 1e-15);
  CHECK(std::abs(h[3] - 1.0 / 6.0) < 1e-15);

  const cplx c(0.3, -0.4);
  TimesVector tc(8);
  for (int k = 1; k <= 8; ++k) tc.set(k, std::pow(c, k) / static_cast<double>(k));
  const auto hc = h_from_times(tc, 8);
  for (int k = 0; k <= 8; ++k) CHECK(std::abs(hc[k] - std::pow(c, k)) < 1e-15);
}

TEST_CASE("schur small cases") {
  const TimesVector t = random_times(4, 1.0);
  CHECK(schur(Partition(), t) == cplx(1.0));
  CHECK(std::abs(schur(Partition({1}), t) - t[1]) < 1e-15);
  CHECK(std::abs(schur(Partition({2}), t) - (t[1] * t[1] / 2.0 + t[2])) < 1e-15);
  CHECK(std::abs(schur(Partition({1, 1}), t) - (t[1] * t[1] / 2.0 - t[2])) < 1e-15);
}

TEST_CASE("schur agrees with the bialternant formula in Miwa variables") {
  const std::vector<cplx> x{{0.4, 0.1}, {-0.3, 0.2}, {0.1, -0.5}};
  std::vector<MiwaPoint> pts;
  for (const cplx xi : x) pts.push_back({xi, 1.0});
  const TimesVector t = miwa_times(pts, 10);
  for (const auto& lam : partitions_up_to(7, 3)) {
    const cplx want = bialternant(lam, x);
    CHECK(std::abs(schur(lam, t) - want) < 1e-13);
  }
  // more rows than points
  for (const auto& lam : partitions_up_to(7))
    if (lam.rows() > 3) CHECK(std::abs(schur(lam, t)) < 1e-12);
}

TEST_CASE("truncated Cauchy identity") {
  const int K = 6;
  for (int trial = 0; trial < 5; ++trial) {
    const TimesVector t = random_times(K, 0.4), s = random_times(K, 0.4);
    // graded expansion of exp(sum_k k t_k s_k z^k), read at z = 1
    std::vector<cplx> p(K + 1, 0.0), e(K + 1, 0.0);
    for (int k = 1; k <= K; ++k) p[k] = static_cast<double>(k) * t[k] * s[k];
    e[0] = 1.0;
    for (int n = 1; n <= K; ++n) {
      for (int m = 1; m <= n; ++m) e[n] += static_cast<double>(m) * p[m] * e[n - m];
      e[n] /= static_cast<double>(n);
    }
    cplx rhs = 0.0, lhs = 0.0;
    for (const cplx v : e) rhs += v;
    for (const auto& lam : partitions_up_to(K)) lhs += schur(lam, t) * schur(lam, s);
    CHECK(std::abs(lhs - rhs) < 1e-10 * std::abs(rhs));
  }
}

TEST_CASE("schur is weighted-homogeneous") {
  const TimesVector t = random_times(6, 0.7);
  const cplx c(1.3, 0.4);
  TimesVector ts(6);
  for (int k = 1; k <= 6; ++k) ts.set(k, std::pow(c, k) * t[k]);
  for (const auto& lam : partitions_up_to(6)) {
    const cplx want = std::pow(c, lam.weight()) * schur(lam, t);
    CHECK(std::abs(schur(lam, ts) - want) <= 1e-13 * std::max(1.0, std::abs(want)));
  }
}

TEST_CASE("miwa_times examples") {
  const cplx c(0.5, 0.25);
  const std::vector<MiwaPoint> one{{c, 1.0}};
  const TimesVector t = miwa_times(one, 3);
  CHECK(t.t0() == cplx(0.0));
  CHECK(std::abs(t[1] - c) < 1e-15);
  CHECK(std::abs(t[2] - c * c / 2.0) < 1e-15);
  CHECK(std::abs(t[3] - c * c * c / 3.0) < 1e-15);

  const TimesVector empty = miwa_times({}, 4);
  for (int k = 1; k <= 4; ++k) CHECK(empty[k] == cplx(0.0));

  const cplx a(0.2, 0.1), b(-0.7, 0.3);
  const std::vector<MiwaPoint> two{{a, 1.0}, {b, 1.0}};
  const TimesVector t2 = miwa_times(two, 5);
  for (int k = 1; k <= 5; ++k) CHECK(std::abs(t2[k] - (std::pow(a, k) + std::pow(b, k)) / double(k)) < 1e-15);

  const std::vector<MiwaPoint> with_zero{{0.0, 2.5}, {a, 1.0}};
  CHECK(miwa_times(with_zero, 2).t0() == cplx(2.5));
}

TEST_CASE("shift_times") {
  const TimesVector t = random_times(5, 0.3);
  const TimesVector s0 = shift_times(t, 0.0, 1.0);
  CHECK(s0.t0() == t.t0() + 1.0);
  for (int k = 1; k <= 5; ++k) CHECK(s0[k] == t[k]);

  const cplx z(0.2, 0.1), w(-0.1, 0.3), step(0.0, 2.0);
  const TimesVector zw = shift_times(shift_times(t, z, step), w, step);
  const TimesVector wz = shift_times(shift_times(t, w, step), z, step);
  CHECK(std::abs(zw.t0() - wz.t0()) < 1e-15);
  for (int k = 1; k <= 5; ++k) CHECK(std::abs(zw[k] - wz[k]) < 1e-15);

  const TimesVector from_zero = shift_times(TimesVector(4), z, 1.0);
  const std::vector<MiwaPoint> one{{z, 1.0}};
  const TimesVector m = miwa_times(one, 4);
  CHECK(from_zero.t0() == cplx(1.0));
  for (int k = 1; k <= 4; ++k) CHECK(std::abs(from_zero[k] - m[k]) < 1e-16);
}
