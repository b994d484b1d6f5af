#pragma once

#include "taulab/symfun.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>

namespace taulab {

/// A tau-function candidate: deterministic evaluation at a point of the time
/// space, plus the highest time index it reads.
struct TauFn {
  std::function<cplx(const TimesVector&)> eval;
  int kmax = 1;
  std::string name;
};

/// Three-term bilinear combination. `scale` is the largest magnitude among the
/// three tau-products; `normalized` = |raw| / scale (0 when scale is 0).
struct BilinearResidual {
  cplx raw;
  double scale = 0.0;
  double normalized = 0.0;
};

/// Continuous-shift form:
///   (z2-z3) tau(t+[z1]) tau(t+[z2]+[z3]) + (z3-z1) tau(t+[z2]) tau(t+[z1]+[z3])
///     + (z1-z2) tau(t+[z3]) tau(t+[z1]+[z2]).
/// Each [z] also advances t_0 by `step`. t is widened to tau.kmax first.
BilinearResidual residual_shift(const TauFn& tau, const TimesVector& t, cplx z1, cplx z2, cplx z3,
                                cplx step);

struct LatticeSite {
  int u1 = 0;
  int u2 = 0;
  int u3 = 0;
  friend auto operator<=>(const LatticeSite&, const LatticeSite&) = default;
};

class IncompleteStencil : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// tau sampled on integer points of a three-dimensional lattice.
class LatticeGrid {
 public:
  void set(LatticeSite p, cplx value) { values_[p] = value; }
  bool contains(LatticeSite p) const { return values_.count(p) != 0; }
  /// Throws IncompleteStencil when p was never set.
  cplx at(LatticeSite p) const;
  std::size_t size() const { return values_.size(); }

 private:
  std::map<LatticeSite, cplx> values_;
};

/// Lattice form evaluated at p; every one of the six neighbours must be present.
BilinearResidual residual_lattice(const LatticeGrid& grid, LatticeSite p, cplx z1, cplx z2, cplx z3);

/// Samples tau on {0..window}^3 through the Miwa embedding: the point
/// (u1,u2,u3) is base + u1[z1] + u2[z2] + u3[z3] (each unit adds a Miwa point
/// and advances t_0 by `step`).
LatticeGrid sample_lattice(const TauFn& tau, const TimesVector& base, cplx z1, cplx z2, cplx z3,
                           cplx step, int window);

struct SamplerConfig {
  double t_radius = 0.05;  ///< |t_k| bound for the randomised times
  int n_times = 4;         ///< t_1..t_{n_times} are randomised, the rest stay 0
  double z_radius = 0.1;   ///< |z_i| bound
  double u_radius = 1.0;   ///< |t_0| bound
  int n_samples = 200;
  std::uint64_t seed = 1;
  cplx step = 1.0;  ///< t_0 increment carried by each [z]
};

struct Sample {
  TimesVector t;
  std::array<cplx, 3> z{};
};

struct SweepReport {
  double max_residual = 0.0;  ///< |raw| at the worst (normalized) sample
  double normalized = 0.0;    ///< worst normalized residual
  int n_samples = 0;
  std::uint64_t seed = 0;
  Sample worst_sample;
};

/// Deterministic random sweep over (t, z1, z2, z3) recording the worst
/// normalized residual.
SweepReport sweep_check(const TauFn& tau, const SamplerConfig& cfg);

/// Draws the i-th sample of a sweep (exposed so callers can reproduce samples).
std::vector<Sample> draw_samples(const SamplerConfig& cfg, int kmax);

nlohmann::json to_json(const SweepReport& r);

/// Closed-form fixtures used to validate the residual evaluators.
namespace fixtures {
/// tau = c.
TauFn constant(cplx c, int kmax);
/// tau = p^{t_0} exp(sum_k t_k p^k).
TauFn plane_wave(cplx p, int kmax);
/// tau = c1 f_p + c2 f_q with f_p as in plane_wave.
TauFn two_plane_waves(cplx c1, cplx p, cplx c2, cplx q, int kmax);
/// tau = t_1.
TauFn first_time(int kmax);
}  // namespace fixtures

}  // namespace taulab
