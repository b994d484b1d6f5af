#pragma once

#include "taulab/polynomial.hpp"
#include "taulab/spinchain.hpp"

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace taulab {

class SingularConfiguration : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Rapidities of one Bethe state; levels[0] are the su(2) (level-1) roots.
struct BetheState {
  std::vector<std::vector<cplx>> levels;
  double residual_norm = 0.0;
  std::optional<cplx> energy;
  /// 2 I_k for real-root states (log-form branch integers, doubled so that
  /// half-odd values stay integral).
  std::vector<int> twice_quantum_numbers;
  bool singular = false;

  std::span<const cplx> roots() const {
    return levels.empty() ? std::span<const cplx>{} : std::span<const cplx>(levels[0]);
  }
  int M() const { return levels.empty() ? 0 : static_cast<int>(levels[0].size()); }
};

/// Component k: prod_j (v_k - th_j - i)/(v_k - th_j + i)
///                - prod_{l != k} (v_k - v_l - 2i)/(v_k - v_l + 2i).
/// Throws SingularConfiguration within pole_tol of a pole or of a coincident pair.
std::vector<cplx> residual_su2(std::span<const cplx> v, const ChainSpec& spec, double pole_tol = 1e-12);

/// d residual_su2 / dv, analytic.
Matrix jacobian_su2(std::span<const cplx> v, const ChainSpec& spec);

/// Flattened residual of the nested su(N) equations; levels[t-1] holds the
/// level-t roots (t = 1..N-1). Level 0 is the inhomogeneities, level N empty.
/// Each component is (product over the three neighbour factors, l != k) - 1.
std::vector<cplx> residual_nested(const std::vector<std::vector<cplx>>& levels, int N,
                                  const ChainSpec& spec, double pole_tol = 1e-12);

double max_abs(std::span<const cplx> r);

enum class Strategy { Seeds, Homotopy, Auto };

struct SolveOptions {
  Strategy strategy = Strategy::Auto;
  double tol = 1e-11;
  int max_iter = 60;
  int homotopy_steps = 24;
  /// Imaginary bend of the coupling path c(s) = s + i gamma s (1 - s); one
  /// sweep per entry.
  std::vector<double> gammas{0.0, 0.35, -0.35};
  double collision_tol = 1e-4;
  /// Roots beyond divergence_radius (1 + max|theta|) count as escaped.
  double divergence_radius = 1e4;
  /// Auto only: cap on 2-string guesses (center +- 1.05i), tried while fewer
  /// than the highest-weight count have been found.
  int max_string_guesses = 4000;
  double dedup_tol = 1e-7;
};

struct SolveResult {
  std::vector<BetheState> states;
  std::vector<std::string> log;
  int n_singular = 0;
};

/// Solutions with M roots, deduplicated and sorted (energy, then roots).
SolveResult solve(const ChainSpec& spec, int M, const SolveOptions& opts = {});

/// Newton polish of a guess on residual_su2. Returns nullopt when it fails.
std::optional<BetheState> polish(std::vector<cplx> guess, const ChainSpec& spec, const SolveOptions& opts = {});

struct NestedResult {
  BetheState best;
  bool converged = false;
  int starts = 0;
  std::vector<std::string> log;
};

/// Damped Newton (finite-difference Jacobian) on residual_nested from a
/// deterministic family of starts; reports the best state found.
NestedResult solve_nested(const ChainSpec& spec, int N, std::span<const int> counts,
                          const SolveOptions& opts = {});

/// E = J L + sum_k -8J/(v_k^2 + 1). Homogeneous chains only; throws
/// std::domain_error on an inhomogeneous spec or a non-real energy.
double energy(const BetheState& state, const ChainSpec& spec);
cplx energy_complex(std::span<const cplx> roots, const ChainSpec& spec);

/// E from the transfer eigenvalue: 4iJ T'(i)/T(i) - J L (homogeneous).
cplx energy_from_transfer(const Polynomial& T1, const ChainSpec& spec);

/// Q(u) = prod_k (u - v_k).
Polynomial q_polynomial(std::span<const cplx> roots);

/// T1 Q - a Q(u - 2i) - d Q(u + 2i). Throws std::invalid_argument when
/// deg T1 != L.
Polynomial tq_residual(const Polynomial& T1, const BetheState& state, const ChainSpec& spec);

/// [a Q(u - 2i) + d Q(u + 2i)] / Q, exact division.
Polynomial transfer_from_roots(std::span<const cplx> roots, const ChainSpec& spec, double rel_tol = 1e-8);

/// Monic degree-M Q solving the TQ relation for a given transfer eigenvalue
/// (linear least squares on coefficients). `defect` is the relative residual.
struct BaxterQ {
  Polynomial Q;
  std::vector<cplx> roots;
  double defect = 0.0;
};
BaxterQ baxter_q_from_transfer(const Polynomial& T1, int M, const ChainSpec& spec);

/// Highest-weight joint eigenstate matched with its Bethe data.
struct EigenRecord {
  int id = 0;
  JointState ed;
  BetheState bethe;
  Polynomial transfer;  ///< T(u) eigenvalue, interpolated from ED
  bool from_solver = false;
  double match_error = 0.0;  ///< relative distance between solver and ED transfer polynomials
};

struct EnumerateOptions {
  SolveOptions solver;
  double match_tol = 1e-7;
};

/// All highest-weight states: ED supplies the list, the solver supplies roots;
/// states the solver misses (e.g. singular ones) get Q from the TQ relation.
std::vector<EigenRecord> enumerate_states(const ChainSpec& spec, const EnumerateOptions& opts = {});

/// Hausdorff distance between root multisets (equal sizes assumed).
double root_set_distance(std::span<const cplx> a, std::span<const cplx> b);

}  // namespace taulab
