#pragma once

#include "taulab/bethe.hpp"
#include "taulab/spinchain.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace taulab::cli {

// Bad config or missing upstream artifact; exit code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  struct Chain {
    int L = 4;
    double J = 1.0;
    std::vector<cplx> theta;  // empty: homogeneous
  } chain;
  struct Solver {
    double tol = 1e-11;
    int max_iter = 60;
    std::string strategy = "auto";
    int nested_N = 0;  // 0: no nested check
    std::vector<int> nested_counts;
  } solver;
  struct Master {
    int K = 6;
    int cutoff = 56;
    std::vector<cplx> delta_candidates{{1, 0}, {0, 1}, {0, 2}};
    double t_radius = 0.05;
    double z_radius = 0.1;
  } master;
  struct Rs {
    double h = 0.002;
    double t1_start = 0.0;
    double t1_end = 0.04;
    std::vector<cplx> eta_candidates{{1, 0}, {2, 0}, {0, 1}, {0, 2}};
  } rs;
  struct Sampling {
    int count = 200;
    std::uint64_t seed = 1;
  } sampling;
  struct Output {
    std::string directory = "taulab-out";
    std::vector<std::string> formats{"csv", "json"};
  } output;

  ChainSpec spec() const;
  Strategy strategy_enum() const;
  bool wants(const std::string& format) const;
};

// Throws UsageError naming the offending field path.
void validate(const RunConfig& c);

nlohmann::json to_json(const RunConfig& c);
// Fields absent from j keep their current value in c.
void merge_json(RunConfig& c, const nlohmann::json& j);

// FNV-1a of the canonical dump, output section excluded.
std::string config_hash(const RunConfig& c);
std::string chain_hash(const RunConfig& c);

}  // namespace taulab::cli
