#include "taulab/spinchain.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace taulab;

namespace {

long long choose(int n, int k) {
  if (k < 0 || k > n) return 0;
  long long r = 1;
  for (int j = 1; j <= k; ++j) r = r * (n - k + j) / j;
  return r;
}

double rel_diff(const Matrix& a, const Matrix& b) {
  return (a - b).norm() / std::max(1.0, std::max(a.norm(), b.norm()));
}

}  // namespace

TEST_CASE("spec validation") {
  CHECK_THROWS_AS(ChainSpec::homogeneous(1).validate(), InvalidSpec);
  ChainSpec bad = ChainSpec::homogeneous(3);
  bad.theta.pop_back();
  CHECK_THROWS_AS(bad.validate(), InvalidSpec);
  CHECK(ChainSpec::homogeneous(3).is_homogeneous());
  const ChainSpec gen = ChainSpec::inhomogeneous({-0.5, 0.25, 1.0});
  CHECK_FALSE(gen.is_homogeneous());
  CHECK(gen.min_theta_separation() == doctest::Approx(0.75));
  CHECK(gen.phi()(0.25) == cplx(0.0));
  CHECK(std::abs(gen.a()(0.25 - kI)) < 1e-15);
  CHECK(std::abs(gen.d()(1.0 + kI)) < 1e-15);
}

TEST_CASE("L = 2 spectrum") {
  const SpinOperator H = hamiltonian(ChainSpec::homogeneous(2));
  Eigen::SelfAdjointEigenSolver<Matrix> es(H.matrix);
  const auto ev = es.eigenvalues();
  CHECK(ev[0] == doctest::Approx(-6.0));
  for (int k = 1; k < 4; ++k) CHECK(ev[k] == doctest::Approx(2.0));
}

TEST_CASE("transfer matrix kernel") {
  const std::vector<cplx> one{0.3};
  const cplx u(0.7, -0.2);
  const Matrix T1 = transfer_matrix_kernel(one, u);
  // one site: tr_a R_a1(u - theta) = 2 (u - theta) Id
  CHECK(rel_diff(T1, 2.0 * (u - one[0]) * Matrix::Identity(2, 2)) < 1e-15);
}

TEST_CASE("vacuum eigenvalue and commutation") {
  const ChainSpec spec = ChainSpec::inhomogeneous({-0.9, 0.1, 0.4, 1.3});
  const cplx u(0.37, 0.21), w(-0.8, 0.5);
  const Matrix Tu = transfer_matrix(spec, u).matrix, Tw = transfer_matrix(spec, w).matrix;
  const cplx vac = spec.a()(u) + spec.d()(u);
  CHECK(std::abs(Tu(0, 0) - vac) < 1e-13 * std::abs(vac));
  CHECK(Tu.col(0).tail(Tu.rows() - 1).norm() < 1e-13);
  CHECK(rel_diff(Tu * Tw, Tw * Tu) < 1e-13);

  const ChainSpec hom = ChainSpec::homogeneous(5);
  const Matrix H = hamiltonian(hom).matrix, T = transfer_matrix(hom, u).matrix;
  CHECK(rel_diff(H * T, T * H) < 1e-13);
  const Matrix S = raising_operator(5);
  CHECK(rel_diff(S * T, T * S) < 1e-13);
}

TEST_CASE("T(i) is a multiple of the cyclic shift") {
  for (const int L : {2, 3, 4, 5}) {
    const ChainSpec spec = ChainSpec::homogeneous(L);
    const Matrix U = transfer_matrix(spec, kI).matrix / std::pow(2.0 * kI, L);
    const int n = 1 << L;
    // a permutation matrix of order L
    for (int c = 0; c < n; ++c) {
      int hits = 0;
      for (int r = 0; r < n; ++r) {
        if (std::abs(U(r, c) - 1.0) < 1e-13) ++hits;
        else CHECK(std::abs(U(r, c)) < 1e-13);
      }
      CHECK(hits == 1);
    }
    Matrix P = Matrix::Identity(n, n);
    for (int k = 0; k < L; ++k) P = P * U;
    CHECK(rel_diff(P, Matrix::Identity(n, n)) < 1e-12);
    const Matrix H = hamiltonian(spec).matrix;
    CHECK(rel_diff(H * U, U * H) < 1e-13);
  }
}

TEST_CASE("transfer eigenvalues are degree-L polynomials") {
  const ChainSpec spec = ChainSpec::inhomogeneous({-0.7, 0.2, 0.9});
  const auto nodes = transfer_nodes(spec);
  REQUIRE(nodes.size() == 4);
  const Matrix Tg = transfer_matrix(spec, cplx(0.31, 0.17)).matrix;
  // a matrix-valued polynomial of degree L: interpolate entrywise and compare
  std::vector<Matrix> at;
  for (const cplx x : nodes) at.push_back(transfer_matrix(spec, x).matrix);
  const cplx probe(0.31, 0.17);
  Matrix interp = Matrix::Zero(8, 8);
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    cplx w = 1.0;
    for (std::size_t j = 0; j < nodes.size(); ++j)
      if (j != k) w *= (probe - nodes[j]) / (nodes[k] - nodes[j]);
    interp += w * at[k];
  }
  CHECK(rel_diff(interp, Tg) < 1e-12);
}

TEST_CASE("sector bookkeeping") {
  for (int L = 2; L <= 8; ++L)
    for (int M = 0; M <= L; ++M) {
      const auto b = sector_basis(L, M);
      CHECK(static_cast<long long>(b.size()) == choose(L, M));
      CHECK(std::is_sorted(b.begin(), b.end()));
      for (const int x : b) CHECK(__builtin_popcount(x) == M);
    }
  const SpinOperator H = hamiltonian(ChainSpec::homogeneous(4));
  const auto sec = diagonalize_sector(H, 2);
  CHECK(sec.size() == 6);
  for (std::size_t k = 1; k < sec.size(); ++k) CHECK(sec[k - 1].value.real() <= sec[k].value.real() + 1e-12);
  CHECK(sec.front().value.real() == doctest::Approx(-8.0));

  SpinOperator mixing{4, raising_operator(4) + raising_operator(4).adjoint(), std::nullopt};
  CHECK_THROWS_AS(diagonalize_sector(mixing, 2), SectorViolation);
}

TEST_CASE("joint labels") {
  const ChainSpec spec = ChainSpec::homogeneous(4);
  const std::vector<cplx> s1{{0.3, 0.1}, {1.1, -0.4}}, s2{{-0.6, 0.2}};
  const auto a = simultaneous_labels(spec, s1), b = simultaneous_labels(spec, s2);
  REQUIRE(a.size() == 16);
  REQUIRE(b.size() == a.size());
  int hw = 0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    CHECK(a[k].M == b[k].M);
    CHECK(a[k].index == b[k].index);
    CHECK(*a[k].energy == doctest::Approx(*b[k].energy));
    CHECK(std::abs(a[k].vector.dot(b[k].vector)) == doctest::Approx(1.0));
    CHECK_FALSE(a[k].unresolved);
    hw += a[k].highest_weight;
    // the stored sample is the eigenvalue of T at that point
    const Matrix T = transfer_matrix(spec, s1[1]).matrix;
    CHECK((T * a[k].vector - a[k].transfer[1] * a[k].vector).norm() < 1e-10 * std::max(1.0, std::abs(a[k].transfer[1])));
  }
  CHECK(hw == 1 + 3 + 2);
  CHECK(*std::min_element(a.begin(), a.end(), [](const auto& x, const auto& y) { return *x.energy < *y.energy; })->energy ==
        doctest::Approx(-8.0));

  const ChainSpec gen = ChainSpec::inhomogeneous({-1.1, 0.3, 0.8});
  const auto g = simultaneous_labels(gen, s1);
  CHECK(g.size() == 8);
  for (const auto& st : g) CHECK_FALSE(st.energy.has_value());
}
