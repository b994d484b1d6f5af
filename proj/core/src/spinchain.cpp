#include "taulab/spinchain.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <numeric>

namespace taulab {

ChainSpec ChainSpec::homogeneous(int L, double J) {
  return ChainSpec{L, J, std::vector<cplx>(std::max(L, 0), cplx{})};
}

ChainSpec ChainSpec::inhomogeneous(std::vector<cplx> theta, double J) {
  const int L = static_cast<int>(theta.size());
  return ChainSpec{L, J, std::move(theta)};
}

void ChainSpec::validate() const {
  if (L < 2) throw InvalidSpec("chain needs L >= 2 sites");
  if (static_cast<int>(theta.size()) != L)
    throw InvalidSpec("theta must have exactly L entries");
  if (L > 14) throw InvalidSpec("dense exact diagonalization limited to L <= 14");
}

bool ChainSpec::is_homogeneous() const {
  return std::all_of(theta.begin(), theta.end(), [](cplx t) { return t == cplx{}; });
}

double ChainSpec::min_theta_separation() const {
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < theta.size(); ++i)
    for (std::size_t j = 0; j < i; ++j) m = std::min(m, std::abs(theta[i] - theta[j]));
  return m;
}

Polynomial ChainSpec::phi() const { return Polynomial::from_roots(theta); }

Polynomial ChainSpec::a() const {
  std::vector<cplx> r(theta.size());
  std::transform(theta.begin(), theta.end(), r.begin(), [](cplx t) { return t - kI; });
  return Polynomial::from_roots(r);
}

Polynomial ChainSpec::d() const {
  std::vector<cplx> r(theta.size());
  std::transform(theta.begin(), theta.end(), r.begin(), [](cplx t) { return t + kI; });
  return Polynomial::from_roots(r);
}

SpinOperator hamiltonian(const ChainSpec& spec) {
  spec.validate();
  const int L = spec.L;
  const int dim = 1 << L;
  Matrix h = Matrix::Zero(dim, dim);
  for (int s = 0; s < dim; ++s) {
    for (int n = 0; n < L; ++n) {
      const int m = (n + 1) % L;
      const bool bn = (s >> n) & 1;
      const bool bm = (s >> m) & 1;
      if (bn == bm) {
        h(s, s) += spec.J;
      } else {
        h(s, s) -= spec.J;
        h(s ^ (1 << n) ^ (1 << m), s) += 2.0 * spec.J;
      }
    }
  }
  return {L, std::move(h), std::nullopt};
}

Matrix transfer_matrix_kernel(std::span<const cplx> theta, cplx u) {
  const int L = static_cast<int>(theta.size());
  const int dim = 1 << L;
  // Monodromy as a 2x2 block matrix over the auxiliary space.
  std::array<Matrix, 4> m;
  m[0] = Matrix::Identity(dim, dim);
  m[1] = Matrix::Zero(dim, dim);
  m[2] = Matrix::Zero(dim, dim);
  m[3] = Matrix::Identity(dim, dim);
  auto blk = [](int a, int b) { return 2 * a + b; };

  for (int j = 0; j < L; ++j) {
    const cplx x = u - theta[j];
    const int mask = 1 << j;
    std::array<Matrix, 4> next;
    for (int a = 0; a < 2; ++a) {
      for (int c = 0; c < 2; ++c) {
        Matrix out = (x - kI) * m[blk(a, c)];
        // sum_b E^{(j)}_{ba} M_{bc}: row r picks b = bit_j(r) and reads the
        // row with site j set to a.
        for (int r = 0; r < dim; ++r) {
          const int b = (r & mask) ? 1 : 0;
          const int src = a ? (r | mask) : (r & ~mask);
          out.row(r) += 2.0 * kI * m[blk(b, c)].row(src);
        }
        next[blk(a, c)] = std::move(out);
      }
    }
    m = std::move(next);
  }
  return m[0] + m[3];
}

SpinOperator transfer_matrix(const ChainSpec& spec, cplx u) {
  spec.validate();
  return {spec.L, transfer_matrix_kernel(spec.theta, u), std::nullopt};
}

Matrix raising_operator(int L) {
  const int dim = 1 << L;
  Matrix sp = Matrix::Zero(dim, dim);
  for (int s = 0; s < dim; ++s)
    for (int j = 0; j < L; ++j)
      if ((s >> j) & 1) sp(s & ~(1 << j), s) += 1.0;
  return sp;
}

std::vector<int> sector_basis(int L, int M) {
  std::vector<int> out;
  for (int s = 0; s < (1 << L); ++s)
    if (std::popcount(static_cast<unsigned>(s)) == M) out.push_back(s);
  return out;
}

namespace {

Matrix restrict_to(const Matrix& full, const std::vector<int>& basis) {
  const auto n = static_cast<Eigen::Index>(basis.size());
  Matrix b(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) b(i, j) = full(basis[i], basis[j]);
  return b;
}

void check_sector(const Matrix& full, const std::vector<int>& basis, double tol) {
  std::vector<char> in(full.rows(), 0);
  for (int s : basis) in[s] = 1;
  const double norm = std::max(full.cwiseAbs().maxCoeff(), 1e-300);
  double leak = 0.0;
  for (int r : basis)
    for (Eigen::Index c = 0; c < full.cols(); ++c)
      if (!in[c]) leak = std::max({leak, std::abs(full(r, c)), std::abs(full(c, r))});
  if (leak > tol * norm)
    throw SectorViolation("operator does not commute with total S^z: leak " +
                          std::to_string(leak / norm));
}

bool less_cplx(cplx a, cplx b) {
  if (a.real() != b.real()) return a.real() < b.real();
  return a.imag() < b.imag();
}

std::vector<Eigenpair> eigenpairs(const Matrix& block) {
  std::vector<Eigenpair> out;
  const double norm = std::max(block.cwiseAbs().maxCoeff(), 1e-300);
  if ((block - block.adjoint()).cwiseAbs().maxCoeff() <= 1e-12 * norm) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(block);
    for (Eigen::Index k = 0; k < block.rows(); ++k)
      out.push_back({es.eigenvalues()(k), es.eigenvectors().col(k)});
  } else {
    Eigen::ComplexEigenSolver<Matrix> es(block);
    for (Eigen::Index k = 0; k < block.rows(); ++k)
      out.push_back({es.eigenvalues()(k), es.eigenvectors().col(k).normalized()});
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const Eigenpair& x, const Eigenpair& y) { return less_cplx(x.value, y.value); });
  return out;
}

Vector embed(const Vector& sector_vec, const std::vector<int>& basis, int dim) {
  Vector v = Vector::Zero(dim);
  for (std::size_t i = 0; i < basis.size(); ++i) v(basis[i]) = sector_vec(static_cast<Eigen::Index>(i));
  return v;
}

cplx rayleigh(const Matrix& op, const Vector& v) { return v.dot(op * v) / v.squaredNorm(); }

// Fixed probe points for splitting degeneracies; generic w.r.t. any real theta.
constexpr std::array<cplx, 3> kProbes{cplx{0.3127, 0.4519}, cplx{-0.8311, 0.2273}, cplx{1.4142, -0.6180}};

}  // namespace

std::vector<Eigenpair> diagonalize_sector(const SpinOperator& op, int M, double tol) {
  if (M < 0 || M > op.L) throw std::invalid_argument("magnon number out of range");
  const auto basis = sector_basis(op.L, M);
  check_sector(op.matrix, basis, tol);
  return eigenpairs(restrict_to(op.matrix, basis));
}

std::vector<JointState> simultaneous_labels(const ChainSpec& spec, std::span<const cplx> u_samples,
                                            const LabelOptions& opts) {
  spec.validate();
  const int L = spec.L;
  const int dim = 1 << L;
  const bool homog = spec.is_homogeneous();
  const SpinOperator h = hamiltonian(spec);

  std::vector<Matrix> probes;
  for (const cplx p : kProbes) probes.push_back(transfer_matrix_kernel(spec.theta, p));
  std::vector<Matrix> samples;
  for (const cplx u : u_samples) samples.push_back(transfer_matrix_kernel(spec.theta, u));
  const Matrix sp = raising_operator(L);

  std::vector<JointState> out;
  for (int M = 0; M <= L; ++M) {
    const auto basis = sector_basis(L, M);
    std::vector<JointState> sector;

    auto push_state = [&](const Vector& sector_vec, std::optional<double> e, bool unresolved) {
      JointState st;
      st.M = M;
      st.energy = e;
      st.unresolved = unresolved;
      st.vector = embed(sector_vec, basis, dim).normalized();
      for (const auto& t : samples) st.transfer.push_back(rayleigh(t, st.vector));
      st.highest_weight = (sp * st.vector).norm() < 1e-8;
      sector.push_back(std::move(st));
    };

    if (homog) {
      const auto pairs = eigenpairs(restrict_to(h.matrix, basis));
      std::size_t g0 = 0;
      while (g0 < pairs.size()) {
        std::size_t g1 = g0 + 1;
        const double e0 = pairs[g0].value.real();
        while (g1 < pairs.size() &&
               std::abs(pairs[g1].value.real() - e0) <= opts.degeneracy_tol * std::max(1.0, std::abs(e0)))
          ++g1;
        const auto gsize = static_cast<Eigen::Index>(g1 - g0);
        if (gsize == 1) {
          push_state(pairs[g0].vector, e0, false);
        } else {
          Matrix v(basis.size(), gsize);
          for (Eigen::Index c = 0; c < gsize; ++c) v.col(c) = pairs[g0 + c].vector;
          bool resolved = false;
          Matrix vecs;
          for (const auto& probe : probes) {
            const Matrix restricted = v.adjoint() * restrict_to(probe, basis) * v;
            Eigen::ComplexEigenSolver<Matrix> es(restricted);
            const auto ev = es.eigenvalues();
            const double sc = std::max(1.0, ev.cwiseAbs().maxCoeff());
            bool distinct = true;
            for (Eigen::Index i = 0; i < gsize && distinct; ++i)
              for (Eigen::Index j = 0; j < i; ++j)
                if (std::abs(ev(i) - ev(j)) <= opts.degeneracy_tol * sc) {
                  distinct = false;
                  break;
                }
            vecs = v * es.eigenvectors();
            if (distinct) {
              resolved = true;
              break;
            }
          }
          for (Eigen::Index c = 0; c < gsize; ++c) push_state(vecs.col(c), e0, !resolved);
        }
        g0 = g1;
      }
    } else {
      for (const auto& p : eigenpairs(restrict_to(probes[0], basis))) {
        push_state(p.vector, std::nullopt, false);
      }
    }

    // Deterministic order: energy (if any), then T at the first probe point.
    auto key = [&](const JointState& s) { return rayleigh(probes[0], s.vector); };
    std::stable_sort(sector.begin(), sector.end(), [&](const JointState& x, const JointState& y) {
      if (x.energy && y.energy &&
          std::abs(*x.energy - *y.energy) > opts.degeneracy_tol * std::max(1.0, std::abs(*x.energy)))
        return *x.energy < *y.energy;
      return less_cplx(key(x), key(y));
    });
    for (std::size_t k = 0; k < sector.size(); ++k) {
      sector[k].index = static_cast<int>(k);
      out.push_back(std::move(sector[k]));
    }
  }
  return out;
}

std::vector<cplx> transfer_nodes(const ChainSpec& spec) {
  double r = 1.0;
  for (const cplx t : spec.theta) r = std::max(r, 1.0 + std::abs(t));
  std::vector<cplx> nodes;
  for (int k = 0; k <= spec.L; ++k)
    nodes.push_back(std::polar(r, 2.0 * std::numbers::pi * k / (spec.L + 1) + 0.3));
  return nodes;
}

}  // namespace taulab
