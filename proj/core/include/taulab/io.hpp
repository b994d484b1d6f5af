#pragma once

#include "taulab/bethe.hpp"
#include "taulab/polynomial.hpp"
#include "taulab/spinchain.hpp"

#include <nlohmann/json.hpp>

#include <iosfwd>
#include <string>
#include <vector>

namespace taulab {

/// %.17g: enough digits for an exact double round trip.
std::string fmt17(double x);

nlohmann::json to_json(cplx z);
cplx cplx_from_json(const nlohmann::json& j);

nlohmann::json to_json(const Polynomial& p);
Polynomial polynomial_from_json(const nlohmann::json& j);

nlohmann::json to_json(const ChainSpec& spec);
ChainSpec chainspec_from_json(const nlohmann::json& j);

/// {L, M, levels: [[ [re, im], ... ], ...], residual_norm, energy, ...}
nlohmann::json to_json(const BetheState& st, const ChainSpec& spec);
BetheState bethestate_from_json(const nlohmann::json& j);

/// Comma-separated rows; doubles printed with fmt17.
class CsvWriter {
 public:
  CsvWriter(std::ostream& os, const std::vector<std::string>& header);
  CsvWriter& field(const std::string& s);
  CsvWriter& field(double x);
  CsvWriter& field(long long n);
  CsvWriter& field(int n) { return field(static_cast<long long>(n)); }
  void end_row();

 private:
  std::ostream& os_;
  bool first_ = true;
};

/// L, M, index, energy, highest_weight, then Re/Im of T at each sample.
void write_spectrum_csv(std::ostream& os, int L, const std::vector<JointState>& states,
                        const std::vector<cplx>& samples);

}  // namespace taulab
