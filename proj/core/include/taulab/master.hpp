#pragma once

#include "taulab/fusion.hpp"
#include "taulab/hirota.hpp"
#include "taulab/symfun.hpp"

#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <stdexcept>
#include <vector>

namespace taulab {

class TruncationInsufficient : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DegenerateLeading : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class RootFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct MasterOptions {
  int K = 6;            ///< starting cutoff on |lambda|
  bool adaptive = true; ///< raise K up to the table cutoff until the tail is small
  double tail_tol = 1e-10;
  bool cache = false;
};

struct MasterValue {
  cplx value;
  double tail = 0.0;  ///< weight of the top strata relative to the whole sum
  int K = 0;          ///< cutoff actually used
};

struct MasterPolynomial {
  Polynomial poly;
  cplx C;  ///< leading coefficient
  double tail = 0.0;
  int K = 0;
};

/// T(u, t) = sum_{|lambda| <= K, rows <= 2} s_lambda(t) T_lambda(u) for one
/// eigenstate. The tail estimate is the share of the top w strata, w being
/// the highest nonzero time index.
class MasterT {
 public:
  explicit MasterT(std::shared_ptr<const TTable> table, MasterOptions opts = {});

  /// Throws TruncationInsufficient when no K up to the table cutoff brings
  /// the tail below tail_tol.
  MasterValue eval(cplx u, const TimesVector& t) const;
  MasterPolynomial polynomial(const TimesVector& t) const;
  /// All L zeros, warm-started from `warm` (or from theta). Throws
  /// DegenerateLeading or RootFailure.
  std::vector<cplx> zeros(const TimesVector& t, std::span<const cplx> warm = {}) const;

  cplx t0_step() const { return table_->conventions().t0_step; }
  const TTable& table() const { return *table_; }
  const MasterOptions& options() const { return opts_; }
  std::size_t cache_size() const;

 private:
  // Per-stratum data for one evaluation: magnitudes and partial sums.
  template <class Term>
  int choose_cutoff(const TimesVector& t, Term&& term, std::vector<double>& mag) const;
  MasterValue eval_uncached(cplx u, const TimesVector& t) const;

  std::shared_ptr<const TTable> table_;
  MasterOptions opts_;
  mutable std::mutex mu_;
  mutable std::map<std::vector<double>, MasterValue> cache_;
};

/// tau(t) := T(t_0, t), with the t_0 slot read as the spectral parameter.
TauFn as_tau(const MasterT& m, int kmax = 12);

/// sweep_check on as_tau(m) with the record's t0 step.
SweepReport hirota_check(const MasterT& m, const SamplerConfig& cfg, int kmax = 12);

/// Convention sweep over jt_shift x row_shift x t0_step.
struct CalibrationEntry {
  ConventionRecord conv;
  double three_row = 0.0;   ///< worst |T_lambda| / entry scale over 3-row lambda
  double jt_defect = 0.0;   ///< worst two-row division defect
  double hirota = 0.0;      ///< worst normalized Hirota residual over states
  bool admissible = false;
};

struct CalibrationReport {
  ConventionRecord best;
  std::vector<CalibrationEntry> entries;
  bool ok = false;
};

struct CalibrationOptions {
  std::vector<cplx> jt_shifts{{0, -2}, {0, 2}, {0, -1}, {0, 1}};
  std::vector<cplx> row_shifts{{0, 1}, {0, -1}, {0, 0}};
  std::vector<cplx> t0_steps{{1, 0}, {0, 1}, {0, 2}, {0, -2}};
  SamplerConfig sampler{.n_samples = 40};
  int cutoff = 56;
};

CalibrationReport calibrate_conventions(const ChainSpec& spec, const std::vector<std::vector<cplx>>& state_roots,
                                        const CalibrationOptions& opts = {});

nlohmann::json to_json(const CalibrationReport& r);

}  // namespace taulab
