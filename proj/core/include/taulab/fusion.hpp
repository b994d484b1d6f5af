#pragma once

#include "taulab/polynomial.hpp"
#include "taulab/spinchain.hpp"
#include "taulab/symfun.hpp"

#include <nlohmann/json.hpp>

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace taulab {

class ConventionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shift conventions tying the fused eigenvalues to the master T.
///   one-row:   T_(s)(x) = Tc_s(x + row_shift * s)
///   JT column: T_lambda(x) = det T_(lambda_i - i + j)(x + jt_shift (j - 1))
///                            / prod_{k=1}^{l-1} phi(x + jt_shift k)
///   master:    t_0 -> t_0 + 1 is realised as x -> x + t0_step
///   RS:        coupling eta of the zero dynamics
struct ConventionRecord {
  cplx jt_shift{0.0, -2.0};
  cplx row_shift{0.0, 1.0};
  cplx t0_step{0.0, 2.0};
  cplx eta{0.0, 2.0};
  /// Name of the scalar family dividing ts_raw: "G_s(u) = prod_{j=1}^{s-1} phi(u + (s - 2j) i)".
  std::string norm_factors = "prod_{j=1}^{s-1} phi(u+(s-2j)i)";
};

nlohmann::json to_json(const ConventionRecord& c);
ConventionRecord convention_from_json(const nlohmann::json& j);

/// Analytic-Bethe-ansatz sum of s + 1 terms built from a, d and the Q-ratio,
/// computed by exact polynomial division. s = 0 gives phi. Supported for
/// s <= 6; throws ConventionError if the poles fail to cancel.
Polynomial ts_raw(int s, std::span<const cplx> roots, const ChainSpec& spec);

/// G_s(u) = prod_{j=1}^{s-1} phi(u + (s - 2j) i); G_0 = G_1 = 1.
Polynomial ts_norm_factor(int s, const ChainSpec& spec);

/// Centered fused eigenvalue
///   Tc_s(u) = sum_{k=0}^s phi(u + (s-2k) i) Q(u+(s+1)i) Q(u-(s+1)i)
///                                   / [Q(u+(s+1-2k)i) Q(u+(s-1-2k)i)],
/// degree L with leading coefficient s + 1. Evaluated on a circle and fitted;
/// throws ConventionError when the fit is not a degree-L polynomial.
Polynomial ts_normalized(int s, std::span<const cplx> roots, const ChainSpec& spec, double defect_tol = 1e-9);

/// Pointwise value of the centered sum (poles must be avoided by the caller).
cplx ts_value(int s, std::span<const cplx> roots, const ChainSpec& spec, cplx u);

/// Quantum Jacobi-Trudi evaluation of T_lambda from one-row polynomials
/// (one_row[s] = T_(s), already row-shifted; T_(s<0) = 0).
struct JTResult {
  Polynomial poly;
  double numerator_scale = 0.0;  ///< largest Laplace-term scale before cancellation
  double defect = 0.0;           ///< remainder of the division by the phi product
};
JTResult jacobi_trudi(const Partition& lambda, std::span<const Polynomial> one_row, const ChainSpec& spec,
                      const ConventionRecord& conv);

/// T_(s)(x) = Tc_s(x + row_shift s) for s = 0..smax.
std::vector<Polynomial> one_row_polynomials(int smax, std::span<const cplx> roots, const ChainSpec& spec,
                                            const ConventionRecord& conv);

/// T_lambda(x) for one state (built from ts_normalized and jacobi_trudi).
Polynomial t_lambda(const Partition& lambda, std::span<const cplx> roots, const ChainSpec& spec,
                    const ConventionRecord& conv = {});

/// Stored T_lambda for every partition with at most two rows and weight up
/// to `cutoff`, for one eigenstate. Partitions with more rows read as zero.
class TTable {
 public:
  TTable() = default;
  TTable(ChainSpec spec, ConventionRecord conv, int cutoff, std::vector<Partition> parts,
         std::vector<Polynomial> polys, int state_id);

  const ChainSpec& spec() const { return spec_; }
  const ConventionRecord& conventions() const { return conv_; }
  int cutoff() const { return cutoff_; }
  int state_id() const { return state_id_; }
  std::span<const Partition> partitions() const { return parts_; }
  std::span<const Polynomial> polys() const { return polys_; }
  /// T_lambda; the zero polynomial for more than two rows. Throws
  /// std::out_of_range when |lambda| exceeds the cutoff.
  const Polynomial& at(const Partition& lambda) const;
  /// Worst division defect seen while building (0 for exact tables).
  double build_defect() const { return build_defect_; }
  void set_build_defect(double d) { build_defect_ = d; }

 private:
  ChainSpec spec_;
  ConventionRecord conv_;
  int cutoff_ = 0;
  std::vector<Partition> parts_;
  std::vector<Polynomial> polys_;
  int state_id_ = 0;
  double build_defect_ = 0.0;
  Polynomial zero_;
};

struct TTableOptions {
  int cutoff = 56;
  /// Strict: throw ConventionError on inexact divisions. Non-strict keeps the
  /// quotient and records the defect (used when sweeping conventions).
  bool strict = true;
};

TTable build_ttable(const ChainSpec& spec, std::span<const cplx> roots, int state_id,
                    const ConventionRecord& conv = {}, const TTableOptions& opts = {});

nlohmann::json to_json(const TTable& t);
TTable ttable_from_json(const nlohmann::json& j);

}  // namespace taulab
