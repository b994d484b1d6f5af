#include "taulab/io.hpp"

#include <cstdio>
#include <ostream>

namespace taulab {

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

nlohmann::json to_json(cplx z) { return nlohmann::json::array({z.real(), z.imag()}); }

cplx cplx_from_json(const nlohmann::json& j) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (!j.is_array() || j.size() != 2) throw std::invalid_argument("complex number must be [re, im]");
  return {j[0].get<double>(), j[1].get<double>()};
}

nlohmann::json to_json(const Polynomial& p) {
  nlohmann::json a = nlohmann::json::array();
  for (const cplx c : p.coeffs()) a.push_back(to_json(c));
  return a;
}

Polynomial polynomial_from_json(const nlohmann::json& j) {
  std::vector<cplx> c;
  for (const auto& e : j) c.push_back(cplx_from_json(e));
  return Polynomial(std::move(c));
}

nlohmann::json to_json(const ChainSpec& spec) {
  nlohmann::json th = nlohmann::json::array();
  for (const cplx t : spec.theta) th.push_back(to_json(t));
  return {{"L", spec.L}, {"J", spec.J}, {"theta", th}};
}

ChainSpec chainspec_from_json(const nlohmann::json& j) {
  ChainSpec s;
  s.L = j.at("L").get<int>();
  s.J = j.value("J", 1.0);
  if (j.contains("theta")) {
    for (const auto& t : j.at("theta")) s.theta.push_back(cplx_from_json(t));
  } else {
    s.theta.assign(std::max(s.L, 0), cplx{});
  }
  return s;
}

nlohmann::json to_json(const BetheState& st, const ChainSpec& spec) {
  nlohmann::json levels = nlohmann::json::array();
  for (const auto& lv : st.levels) {
    nlohmann::json a = nlohmann::json::array();
    for (const cplx v : lv) a.push_back(to_json(v));
    levels.push_back(a);
  }
  nlohmann::json j = {{"L", spec.L},
                      {"M", st.M()},
                      {"levels", levels},
                      {"singular", st.singular},
                      {"twice_quantum_numbers", st.twice_quantum_numbers}};
  j["residual_norm"] = std::isfinite(st.residual_norm) ? nlohmann::json(st.residual_norm) : nlohmann::json();
  j["energy"] = st.energy ? to_json(*st.energy) : nlohmann::json();
  return j;
}

BetheState bethestate_from_json(const nlohmann::json& j) {
  BetheState st;
  for (const auto& lv : j.at("levels")) {
    std::vector<cplx> v;
    for (const auto& e : lv) v.push_back(cplx_from_json(e));
    st.levels.push_back(std::move(v));
  }
  const auto& r = j.at("residual_norm");
  st.residual_norm = r.is_null() ? std::numeric_limits<double>::quiet_NaN() : r.get<double>();
  if (j.contains("energy") && !j.at("energy").is_null()) st.energy = cplx_from_json(j.at("energy"));
  st.singular = j.value("singular", false);
  if (j.contains("twice_quantum_numbers"))
    st.twice_quantum_numbers = j.at("twice_quantum_numbers").get<std::vector<int>>();
  return st;
}

CsvWriter::CsvWriter(std::ostream& os, const std::vector<std::string>& header) : os_(os) {
  for (const auto& h : header) field(h);
  end_row();
}

CsvWriter& CsvWriter::field(const std::string& s) {
  if (!first_) os_ << ',';
  os_ << s;
  first_ = false;
  return *this;
}

CsvWriter& CsvWriter::field(double x) { return field(fmt17(x)); }

CsvWriter& CsvWriter::field(long long n) { return field(std::to_string(n)); }

void CsvWriter::end_row() {
  os_ << '\n';
  first_ = true;
}

void write_spectrum_csv(std::ostream& os, int L, const std::vector<JointState>& states,
                        const std::vector<cplx>& samples) {
  std::vector<std::string> header{"L", "M", "index", "energy", "highest_weight"};
  for (std::size_t k = 0; k < samples.size(); ++k) {
    header.push_back("T" + std::to_string(k) + "_re");
    header.push_back("T" + std::to_string(k) + "_im");
  }
  CsvWriter w(os, header);
  for (const auto& s : states) {
    w.field(L).field(s.M).field(s.index);
    if (s.energy)
      w.field(*s.energy);
    else
      w.field(std::string{});
    w.field(s.highest_weight ? 1 : 0);
    for (const cplx t : s.transfer) w.field(t.real()).field(t.imag());
    w.end_row();
  }
}

}  // namespace taulab
