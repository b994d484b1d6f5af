#include "config.hpp"

#include "taulab/io.hpp"

#include <algorithm>
#include <cstdio>

namespace taulab::cli {

namespace {

using nlohmann::json;

json cplx_list(const std::vector<cplx>& v) {
  json a = json::array();
  for (const cplx z : v) a.push_back(taulab::to_json(z));
  return a;
}

template <class T>
void read(const json& j, const char* key, const std::string& path, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw UsageError(path + "." + key + ": wrong type (" + j.at(key).dump() + ")");
  }
}

void read_cplx_list(const json& j, const char* key, const std::string& path, std::vector<cplx>& out) {
  if (!j.contains(key)) return;
  const json& a = j.at(key);
  if (!a.is_array()) throw UsageError(path + "." + key + ": expected a list");
  std::vector<cplx> v;
  for (std::size_t k = 0; k < a.size(); ++k) {
    try {
      v.push_back(cplx_from_json(a[k]));
    } catch (const std::exception&) {
      throw UsageError(path + "." + key + "[" + std::to_string(k) + "]: expected a number or [re, im]");
    }
  }
  out = std::move(v);
}

const json& section(const json& j, const char* key) {
  static const json kEmpty = json::object();
  if (!j.contains(key)) return kEmpty;
  if (!j.at(key).is_object()) throw UsageError(std::string(key) + ": expected an object");
  return j.at(key);
}

std::string fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (const unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace

ChainSpec RunConfig::spec() const {
  if (chain.theta.empty()) return ChainSpec::homogeneous(chain.L, chain.J);
  return ChainSpec::inhomogeneous(chain.theta, chain.J);
}

Strategy RunConfig::strategy_enum() const {
  if (solver.strategy == "seeds") return Strategy::Seeds;
  if (solver.strategy == "homotopy") return Strategy::Homotopy;
  return Strategy::Auto;
}

bool RunConfig::wants(const std::string& format) const {
  return std::find(output.formats.begin(), output.formats.end(), format) != output.formats.end();
}

void validate(const RunConfig& c) {
  auto fail = [](const std::string& path, const std::string& what) { throw UsageError(path + ": " + what); };
  if (c.chain.L < 2 || c.chain.L > 12) fail("chain.L", "must lie in [2, 12]");
  if (!c.chain.theta.empty() && static_cast<int>(c.chain.theta.size()) != c.chain.L)
    fail("chain.theta", "expected " + std::to_string(c.chain.L) + " entries, got " + std::to_string(c.chain.theta.size()));
  if (!(c.solver.tol > 0.0)) fail("solver.tol", "must be positive");
  if (c.solver.max_iter < 1) fail("solver.max_iter", "must be >= 1");
  if (c.solver.strategy != "auto" && c.solver.strategy != "seeds" && c.solver.strategy != "homotopy")
    fail("solver.strategy", "one of auto, seeds, homotopy");
  if (c.solver.nested_N != 0) {
    if (c.solver.nested_N < 2) fail("solver.nested.N", "must be 0 (off) or >= 2");
    if (static_cast<int>(c.solver.nested_counts.size()) != c.solver.nested_N - 1)
      fail("solver.nested.counts", "expected N - 1 entries");
    for (const int n : c.solver.nested_counts)
      if (n < 0) fail("solver.nested.counts", "entries must be >= 0");
  }
  if (c.master.K < 0) fail("master.K", "must be >= 0");
  if (c.master.cutoff < c.master.K) fail("master.cutoff", "must be >= master.K");
  if (c.master.delta_candidates.empty()) fail("master.delta_candidates", "must not be empty");
  if (!(c.master.t_radius >= 0.0)) fail("master.t_radius", "must be >= 0");
  if (!(c.master.z_radius > 0.0)) fail("master.z_radius", "must be positive");
  if (!(c.rs.h > 0.0)) fail("rs.h", "must be positive");
  if (!(c.rs.t1_end > c.rs.t1_start)) fail("rs.t1_range", "end must exceed start");
  if (c.rs.eta_candidates.empty()) fail("rs.eta_candidates", "must not be empty");
  if (c.sampling.count < 1) fail("sampling.count", "must be >= 1");
  if (c.output.directory.empty()) fail("output.directory", "must not be empty");
  for (const auto& f : c.output.formats)
    if (f != "csv" && f != "json") fail("output.formats", "unknown format '" + f + "'");
}

json to_json(const RunConfig& c) {
  return {
      {"chain", {{"L", c.chain.L}, {"J", c.chain.J}, {"theta", cplx_list(c.chain.theta)}}},
      {"solver",
       {{"tol", c.solver.tol},
        {"max_iter", c.solver.max_iter},
        {"strategy", c.solver.strategy},
        {"nested", {{"N", c.solver.nested_N}, {"counts", c.solver.nested_counts}}}}},
      {"master",
       {{"K", c.master.K},
        {"cutoff", c.master.cutoff},
        {"delta_candidates", cplx_list(c.master.delta_candidates)},
        {"t_radius", c.master.t_radius},
        {"z_radius", c.master.z_radius}}},
      {"rs",
       {{"h", c.rs.h}, {"t1_range", {c.rs.t1_start, c.rs.t1_end}}, {"eta_candidates", cplx_list(c.rs.eta_candidates)}}},
      {"sampling", {{"count", c.sampling.count}, {"seed", c.sampling.seed}}},
      {"output", {{"directory", c.output.directory}, {"formats", c.output.formats}}},
  };
}

void merge_json(RunConfig& c, const json& j) {
  if (!j.is_object()) throw UsageError("config: expected a JSON object");
  for (const auto& [key, _] : j.items())
    if (key != "chain" && key != "solver" && key != "master" && key != "rs" && key != "sampling" && key != "output")
      throw UsageError(key + ": unknown section");

  const json& ch = section(j, "chain");
  read(ch, "L", "chain", c.chain.L);
  read(ch, "J", "chain", c.chain.J);
  read_cplx_list(ch, "theta", "chain", c.chain.theta);

  const json& so = section(j, "solver");
  read(so, "tol", "solver", c.solver.tol);
  read(so, "max_iter", "solver", c.solver.max_iter);
  read(so, "strategy", "solver", c.solver.strategy);
  if (so.contains("nested")) {
    const json& ne = so.at("nested");
    read(ne, "N", "solver.nested", c.solver.nested_N);
    read(ne, "counts", "solver.nested", c.solver.nested_counts);
  }

  const json& ma = section(j, "master");
  read(ma, "K", "master", c.master.K);
  read(ma, "cutoff", "master", c.master.cutoff);
  read_cplx_list(ma, "delta_candidates", "master", c.master.delta_candidates);
  read(ma, "t_radius", "master", c.master.t_radius);
  read(ma, "z_radius", "master", c.master.z_radius);

  const json& rs = section(j, "rs");
  read(rs, "h", "rs", c.rs.h);
  if (rs.contains("t1_range")) {
    std::vector<double> r;
    read(rs, "t1_range", "rs", r);
    if (r.size() != 2) throw UsageError("rs.t1_range: expected [start, end]");
    c.rs.t1_start = r[0];
    c.rs.t1_end = r[1];
  }
  read_cplx_list(rs, "eta_candidates", "rs", c.rs.eta_candidates);

  const json& sa = section(j, "sampling");
  read(sa, "count", "sampling", c.sampling.count);
  read(sa, "seed", "sampling", c.sampling.seed);

  const json& ou = section(j, "output");
  read(ou, "directory", "output", c.output.directory);
  read(ou, "formats", "output", c.output.formats);
}

std::string config_hash(const RunConfig& c) {
  json j = to_json(c);
  j.erase("output");
  return fnv1a(j.dump());
}

std::string chain_hash(const RunConfig& c) { return fnv1a(to_json(c).at("chain").dump()); }

}  // namespace taulab::cli
