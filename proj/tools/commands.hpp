#pragma once

#include "config.hpp"

#include <string>

namespace taulab::cli {

int cmd_spectrum(const RunConfig& cfg);
int cmd_bethe_solve(const RunConfig& cfg);
int cmd_verify_tq(const RunConfig& cfg);
int cmd_build_master(const RunConfig& cfg);
// fixture empty: master-T sweep; otherwise constant, plane-wave,
// two-plane-waves, first-time or all
int cmd_verify_hirota(const RunConfig& cfg, const std::string& fixture);
int cmd_zeros_flow(const RunConfig& cfg);
int cmd_rs_check(const RunConfig& cfg);
int cmd_inverse_velocities(const RunConfig& cfg);
int cmd_report(const RunConfig& cfg);

}  // namespace taulab::cli
