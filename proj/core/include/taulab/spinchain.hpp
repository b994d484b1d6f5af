#pragma once

#include "taulab/polynomial.hpp"

#include <Eigen/Dense>

#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace taulab {

using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

class InvalidSpec : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class SectorViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Periodic spin-1/2 chain: L sites, coupling J, inhomogeneities theta_j.
struct ChainSpec {
  int L = 2;
  double J = 1.0;
  std::vector<cplx> theta;  ///< size L; all zero for the homogeneous chain

  static ChainSpec homogeneous(int L, double J = 1.0);
  static ChainSpec inhomogeneous(std::vector<cplx> theta, double J = 1.0);

  /// Throws InvalidSpec when L < 2 or theta has the wrong length.
  void validate() const;
  bool is_homogeneous() const;
  /// min_{i != j} |theta_i - theta_j|
  double min_theta_separation() const;

  /// phi(u) = prod_j (u - theta_j)
  Polynomial phi() const;
  /// a(u) = prod_j (u - theta_j + i)
  Polynomial a() const;
  /// d(u) = prod_j (u - theta_j - i)
  Polynomial d() const;
};

/// Dense operator on the 2^L-dimensional chain space. Basis index bit j set
/// means site j carries spin down; the magnon number M is the popcount.
struct SpinOperator {
  int L = 0;
  Matrix matrix;
  std::optional<int> sector;
};

/// H = J sum_n sigma_n . sigma_{n+1}, periodic.
SpinOperator hamiltonian(const ChainSpec& spec);

/// T(u) = tr_a R_{aL}(u - theta_L) ... R_{a1}(u - theta_1),
/// R(u) = (u - i) Id + 2i P.
SpinOperator transfer_matrix(const ChainSpec& spec, cplx u);

/// Transfer matrix without the L >= 2 check (any number of sites >= 1).
Matrix transfer_matrix_kernel(std::span<const cplx> theta, cplx u);

/// Total S^+ (raising) operator, sum_j sigma_j^+ .
Matrix raising_operator(int L);

/// Basis indices with exactly M down spins, ascending.
std::vector<int> sector_basis(int L, int M);

struct Eigenpair {
  cplx value;
  Vector vector;  ///< coordinates in sector_basis(L, M)
};

/// Full spectrum of the magnon-number-M block, sorted by (Re, Im). Throws
/// SectorViolation when the operator couples the block to the rest by more
/// than tol relative to its norm.
std::vector<Eigenpair> diagonalize_sector(const SpinOperator& op, int M, double tol = 1e-10);

/// One joint eigenstate of the commuting family {H, T(u)}.
struct JointState {
  int M = 0;
  int index = 0;                 ///< position within its sector
  std::optional<double> energy;  ///< H eigenvalue (homogeneous chains only)
  std::vector<cplx> transfer;    ///< T(u_s) eigenvalue at each requested sample
  bool highest_weight = false;   ///< annihilated by S^+
  bool unresolved = false;       ///< degeneracy no probe point could split
  Vector vector;                 ///< unit-norm eigenvector in the full space
};

struct LabelOptions {
  double degeneracy_tol = 1e-8;
};

/// Joint eigenbasis sector by sector. Homogeneous chains are diagonalised
/// through H with degenerate blocks split by T at fixed probe points;
/// inhomogeneous chains through T at a fixed generic point. Ordering depends
/// only on the spec, never on u_samples.
std::vector<JointState> simultaneous_labels(const ChainSpec& spec, std::span<const cplx> u_samples,
                                            const LabelOptions& opts = {});

/// L + 1 interpolation nodes for transfer-matrix eigenvalues.
std::vector<cplx> transfer_nodes(const ChainSpec& spec);

}  // namespace taulab
