#pragma once

#include "taulab/bethe.hpp"
#include "taulab/master.hpp"

#include <nlohmann/json.hpp>

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace taulab {

class NearSingularPair : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class CalibrationFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Zeros of the master T along a uniform t_1 grid, with persistent particle
/// identity.
struct Trajectory {
  std::vector<double> t1;
  std::vector<std::vector<cplx>> positions;  ///< positions[g][j]
  double h = 0.0;
  int state_id = 0;
  bool truncated = false;
  std::string diagnostic;
};

struct TrackOptions {
  double collision_tol = 1e-6;
  /// Largest allowed per-step displacement as a fraction of the minimum
  /// pairwise separation; larger steps are subdivided.
  double max_step_fraction = 0.25;
  int max_subdivisions = 10;
};

/// Grid t1_start, t1_start + h, ... up to t1_end (h may be negative). Starts
/// from theta at t_1 = 0 and continues out to t1_start when it is nonzero.
Trajectory track(const MasterT& m, double t1_start, double t1_end, double h, const TrackOptions& opts = {});

/// Matches `next` to `prev` by minimal total displacement (exhaustive for
/// up to 8 points, greedy beyond).
std::vector<cplx> match_positions(std::span<const cplx> prev, std::span<const cplx> next);

enum class RSKernel {
  Rational,  ///< u''_i = -sum_k 2 eta^2 u'_i u'_k / (x (x^2 - eta^2)), x = u_i - u_k
  Printed,   ///< u''_i =  sum_k 2 u'_i u'_k / (x^2 - eta^2)
};

struct RSParams {
  cplx eta{0.0, 2.0};
  double h = 1e-3;
  RSKernel kernel = RSKernel::Rational;
  double pole_tol = 1e-9;
};

/// Pair force factor multiplying u'_i u'_k.
cplx rs_kernel(cplx x, cplx eta, RSKernel kernel);

struct RSResidual {
  std::vector<double> t1;                 ///< interior grid points
  std::vector<std::vector<cplx>> values;  ///< per point, per particle
  double max_abs = 0.0;
};

/// Central-difference residual of the equations of motion at each interior
/// point. Throws NearSingularPair near a kernel pole.
RSResidual rs_residual(const Trajectory& traj, const RSParams& params);

/// Every other grid point (step 2h).
Trajectory coarsen(const Trajectory& traj);

struct EtaCalibration {
  cplx eta;
  std::vector<std::pair<cplx, double>> scores;  ///< Richardson-extrapolated residual per candidate
  cplx eta2_fit;                                ///< least-squares eta^2 (diagnostic)
  double eta2_fit_residual = 0.0;
  double threshold = 0.0;
};

/// Picks eta from the candidates by the h-extrapolated residual. Throws
/// CalibrationFailure for a single particle or when no candidate gets below
/// the discrimination threshold (relative to the size of u'').
EtaCalibration calibrate_eta(const Trajectory& traj, RSKernel kernel = RSKernel::Rational,
                             std::vector<cplx> candidates = {{1, 0}, {2, 0}, {0, 1}, {0, 2}},
                             double rel_threshold = 1e-3);

/// RK4 integration of the equations of motion (synthetic trajectories).
Trajectory integrate_rs(std::vector<cplx> u0, std::vector<cplx> v0, cplx eta, double h, int steps,
                        RSKernel kernel = RSKernel::Rational);

/// u'_j(0) = -T_(1)(theta_j) / phi'(theta_j).
std::vector<cplx> initial_velocities(const TTable& table);

/// Five-point finite-difference velocities of the master-T zeros at t_1 = 0.
std::vector<cplx> fd_velocities(const MasterT& m, double h);

struct InverseRow {
  int state_id = 0;
  int M = 0;
  std::vector<cplx> positions;
  std::vector<cplx> velocities;
  std::optional<cplx> energy;
  double bethe_residual = 0.0;
  double fd_velocity_error = 0.0;
};

struct InverseReport {
  std::vector<InverseRow> rows;
  double position_spread = 0.0;       ///< max |u_j(0) - theta_j| over rows
  double min_velocity_separation = 0.0;
  double max_fd_error = 0.0;
};

/// One row per eigenstate record (records[k] paired with masters[k]).
InverseReport inverse_problem_report(const std::vector<EigenRecord>& records, const std::vector<const MasterT*>& masters,
                                     double fd_h = 1e-3);

nlohmann::json to_json(const InverseReport& r);
void write_trajectory_csv(std::ostream& os, const std::vector<Trajectory>& trajs);
void write_residual_csv(std::ostream& os, const std::vector<std::pair<int, RSResidual>>& res, double h);

}  // namespace taulab
