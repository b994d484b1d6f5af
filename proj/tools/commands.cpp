#include "commands.hpp"

#include "workspace.hpp"

#include "taulab/bethe.hpp"
#include "taulab/fusion.hpp"
#include "taulab/hirota.hpp"
#include "taulab/io.hpp"
#include "taulab/master.hpp"
#include "taulab/rsflow.hpp"
#include "taulab/spinchain.hpp"
#include "taulab/symfun.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <memory>
#include <random>
#include <set>
#include <sstream>

namespace taulab::cli {

using nlohmann::json;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

json cplx_list(std::span<const cplx> v) {
  json a = json::array();
  for (const cplx z : v) a.push_back(taulab::to_json(z));
  return a;
}

std::vector<cplx> cplx_vector(const json& a) {
  std::vector<cplx> v;
  for (const auto& e : a) v.push_back(cplx_from_json(e));
  return v;
}

std::string str(cplx z) {
  std::ostringstream os;
  os << fmt17(z.real()) << (z.imag() < 0 ? "-" : "+") << fmt17(std::abs(z.imag())) << "i";
  return os.str();
}

// Records as stored by bethe-solve; only the fields downstream stages read.
std::vector<EigenRecord> load_records(const Workspace& ws) {
  const json bj = ws.read_json("bethe.json", "bethe-solve");
  std::vector<EigenRecord> out;
  for (const auto& s : bj.at("states")) {
    EigenRecord r;
    r.id = s.at("id").get<int>();
    r.ed.M = s.at("M").get<int>();
    r.ed.index = s.at("index").get<int>();
    r.bethe = bethestate_from_json(s.at("bethe"));
    r.transfer = polynomial_from_json(s.at("transfer"));
    r.from_solver = s.at("from_solver").get<bool>();
    out.push_back(std::move(r));
  }
  return out;
}

struct Masters {
  ConventionRecord conv;
  std::vector<std::shared_ptr<const TTable>> tables;
  std::vector<std::unique_ptr<MasterT>> masters;
};

Masters load_masters(const Workspace& ws) {
  const json mj = ws.read_json("master.json", "build-master");
  Masters m;
  m.conv = convention_from_json(mj.at("conventions"));
  for (const auto& t : mj.at("states")) {
    m.tables.push_back(std::make_shared<const TTable>(ttable_from_json(t)));
    MasterOptions o;
    o.K = ws.config().master.K;
    m.masters.push_back(std::make_unique<MasterT>(m.tables.back(), o));
  }
  return m;
}

json trajectory_json(const Trajectory& tr) {
  json pos = json::array();
  for (const auto& p : tr.positions) pos.push_back(cplx_list(p));
  return {{"id", tr.state_id}, {"h", tr.h},         {"t1", tr.t1},
          {"positions", pos},  {"truncated", tr.truncated}, {"diagnostic", tr.diagnostic}};
}

Trajectory trajectory_from_json(const json& j) {
  Trajectory tr;
  tr.state_id = j.at("id").get<int>();
  tr.h = j.at("h").get<double>();
  tr.t1 = j.at("t1").get<std::vector<double>>();
  for (const auto& p : j.at("positions")) tr.positions.push_back(cplx_vector(p));
  tr.truncated = j.at("truncated").get<bool>();
  tr.diagnostic = j.at("diagnostic").get<std::string>();
  return tr;
}

}  // namespace

int cmd_spectrum(const RunConfig& cfg) {
  Workspace ws(cfg, "spectrum");
  const ChainSpec spec = cfg.spec();
  const auto samples = transfer_nodes(spec);
  const auto states = simultaneous_labels(spec, samples);
  ws.stage("diagonalize");

  json js = json::array();
  int unresolved = 0, hw = 0;
  double emin = kInf;
  for (const auto& s : states) {
    js.push_back({{"M", s.M},
                  {"index", s.index},
                  {"energy", s.energy ? json(*s.energy) : json()},
                  {"highest_weight", s.highest_weight},
                  {"unresolved", s.unresolved},
                  {"transfer", cplx_list(s.transfer)}});
    unresolved += s.unresolved;
    hw += s.highest_weight;
    if (s.energy) emin = std::min(emin, *s.energy);
  }
  ws.write_json("spectrum.json", {{"chain", to_json(spec)}, {"samples", cplx_list(samples)}, {"states", js}});
  if (cfg.wants("csv")) {
    std::ostringstream os;
    write_spectrum_csv(os, spec.L, states, samples);
    ws.write("spectrum.csv", os.str());
  }
  ws.add({"state_count_defect", 0, std::abs(double(states.size()) - std::ldexp(1.0, spec.L)), "<=", 0.0,
          std::to_string(states.size()) + " joint eigenstates"});
  ws.add({"unresolved_degeneracies", 0, double(unresolved), "<=", 0.0, ""});
  ws.note("states", states.size());
  ws.note("highest_weight", hw);
  if (std::isfinite(emin)) {
    ws.note("min_energy", emin);
    std::printf("min energy %s\n", fmt17(emin).c_str());
  }
  return ws.finish();
}

int cmd_bethe_solve(const RunConfig& cfg) {
  Workspace ws(cfg, "bethe-solve");
  const ChainSpec spec = cfg.spec();
  const json sp = ws.read_json("spectrum.json", "spectrum");
  const auto samples = cplx_vector(sp.at("samples"));
  std::map<std::pair<int, int>, json> ed;
  int n_hw = 0;
  for (const auto& s : sp.at("states")) {
    ed[{s.at("M").get<int>(), s.at("index").get<int>()}] = s;
    n_hw += s.at("highest_weight").get<bool>();
  }

  EnumerateOptions eo;
  eo.solver.tol = cfg.solver.tol;
  eo.solver.max_iter = cfg.solver.max_iter;
  eo.solver.strategy = cfg.strategy_enum();
  const auto recs = enumerate_states(spec, eo);
  ws.stage("solve");

  double energy_err = 0.0, transfer_err = 0.0;
  int n_solver = 0, n_singular = 0;
  json states = json::array();
  for (const auto& r : recs) {
    const auto it = ed.find({r.ed.M, r.ed.index});
    if (it == ed.end()) throw std::runtime_error("bethe-solve: state not present in spectrum.json; rerun `taulab spectrum`");
    const json& e = it->second;
    n_solver += r.from_solver;
    n_singular += r.bethe.singular;
    if (r.from_solver && !r.bethe.singular) {
      // roots alone reproduce the ED data
      const Polynomial T = transfer_from_roots(r.bethe.roots(), spec);
      const auto vals = cplx_vector(e.at("transfer"));
      for (std::size_t k = 0; k < samples.size(); ++k)
        transfer_err = std::max(transfer_err, std::abs(T(samples[k]) - vals[k]) / std::max(1.0, std::abs(vals[k])));
      if (spec.is_homogeneous()) {
        const double E = energy_complex(r.bethe.roots(), spec).real();
        const double Eed = e.at("energy").get<double>();
        energy_err = std::max(energy_err, std::abs(E - Eed) / std::max(1.0, std::abs(Eed)));
      }
    }
    states.push_back({{"id", r.id},
                      {"M", r.ed.M},
                      {"index", r.ed.index},
                      {"from_solver", r.from_solver},
                      {"match_error", r.match_error},
                      {"bethe", to_json(r.bethe, spec)},
                      {"transfer", to_json(r.transfer)}});
  }
  json out = {{"chain", to_json(spec)}, {"states", states}};

  ws.add({"highest_weight_coverage", 0, std::abs(double(recs.size()) - n_hw), "<=", 0.0,
          std::to_string(recs.size()) + " of " + std::to_string(n_hw) + " highest-weight states, " +
              std::to_string(n_solver) + " from the solver, " + std::to_string(n_singular) + " singular"});
  if (spec.is_homogeneous())
    ws.add({"energy_vs_spectrum", 1, energy_err, "<=", 1e-8, "relative, solver states"});
  ws.add({"transfer_vs_spectrum", 0, transfer_err, "<=", 1e-8, "T from roots at the ED sample points"});

  if (cfg.solver.nested_N > 0) {
    SolveOptions so;
    so.tol = cfg.solver.tol;
    so.max_iter = cfg.solver.max_iter;
    const NestedResult nr = solve_nested(spec, cfg.solver.nested_N, cfg.solver.nested_counts, so);
    double norm = kInf;
    if (nr.converged) {
      try {
        norm = max_abs(residual_nested(nr.best.levels, cfg.solver.nested_N, spec));
      } catch (const SingularConfiguration&) {
      }
    }
    json lv = json::array();
    for (const auto& l : nr.best.levels) lv.push_back(cplx_list(l));
    out["nested"] = {{"N", cfg.solver.nested_N}, {"counts", cfg.solver.nested_counts}, {"converged", nr.converged},
                     {"starts", nr.starts},      {"levels", lv},                      {"log", nr.log}};
    ws.add({"nested_residual", 10, norm, "<=", 1e-10, nr.log.empty() ? "" : nr.log.back()});
    ws.stage("nested");
  }
  ws.write_json("bethe.json", out);
  if (cfg.wants("csv")) {
    std::ostringstream os;
    CsvWriter w(os, {"eigenstate", "M", "root", "re", "im", "singular", "from_solver"});
    for (const auto& r : recs)
      for (int k = 0; k < r.bethe.M(); ++k) {
        w.field(r.id).field(r.bethe.M()).field(k).field(r.bethe.roots()[k].real()).field(r.bethe.roots()[k].imag());
        w.field(r.bethe.singular ? 1 : 0).field(r.from_solver ? 1 : 0);
        w.end_row();
      }
    ws.write("roots.csv", os.str());
  }
  return ws.finish();
}

int cmd_verify_tq(const RunConfig& cfg) {
  Workspace ws(cfg, "verify-tq");
  const ChainSpec spec = cfg.spec();
  const auto recs = load_records(ws);
  double worst = 0.0;
  int n = 0, skipped = 0;
  std::ostringstream os;
  CsvWriter w(os, {"eigenstate", "M", "residual", "scale", "relative"});
  json rows = json::array();
  for (const auto& r : recs) {
    if (r.bethe.singular) {
      ++skipped;
      continue;
    }
    const Polynomial Q = q_polynomial(r.bethe.roots());
    const double scale = std::max({(r.transfer * Q).scale(), (spec.a() * Q.shifted(-2.0 * kI)).scale(),
                                   (spec.d() * Q.shifted(2.0 * kI)).scale()});
    const double res = tq_residual(r.transfer, r.bethe, spec).scale();
    worst = std::max(worst, res / scale);
    ++n;
    w.field(r.id).field(r.bethe.M()).field(res).field(scale).field(res / scale);
    w.end_row();
    rows.push_back({{"id", r.id}, {"residual", res}, {"scale", scale}});
  }
  ws.write_json("tq.json", {{"states", rows}, {"singular_skipped", skipped}});
  if (cfg.wants("csv")) ws.write("tq.csv", os.str());
  ws.add({"tq_residual", 2, worst, "<=", 1e-8,
          std::to_string(n) + " states, " + std::to_string(skipped) + " singular skipped"});
  return ws.finish();
}

int cmd_build_master(const RunConfig& cfg) {
  Workspace ws(cfg, "build-master");
  const ChainSpec spec = cfg.spec();
  const auto recs = load_records(ws);
  std::vector<std::vector<cplx>> roots;
  for (const auto& r : recs) roots.emplace_back(r.bethe.roots().begin(), r.bethe.roots().end());

  CalibrationOptions co;
  co.jt_shifts = {{0, -2}};
  co.row_shifts = {{0, 1}};
  co.t0_steps = cfg.master.delta_candidates;
  co.cutoff = cfg.master.cutoff;
  co.sampler.seed = cfg.sampling.seed;
  co.sampler.t_radius = cfg.master.t_radius;
  co.sampler.z_radius = cfg.master.z_radius;
  const CalibrationReport cal = calibrate_conventions(spec, roots, co);
  ws.stage("calibrate");
  ws.write_json("conventions.json", {{"conventions", to_json(cal.best)}, {"calibration", to_json(cal)}});
  ws.add({"calibration_admissible", 4, cal.ok ? 0.0 : 1.0, "<=", 0.0, "t0 step " + str(cal.best.t0_step)});

  TTableOptions to;
  to.cutoff = cfg.master.cutoff;
  json tables = json::array();
  std::vector<std::shared_ptr<const TTable>> tabs;
  for (std::size_t k = 0; k < recs.size(); ++k) {
    tabs.push_back(std::make_shared<const TTable>(build_ttable(spec, recs[k].bethe.roots(), recs[k].id, cal.best, to)));
    tables.push_back(to_json(*tabs.back()));
  }
  ws.write_json("master.json", {{"chain", to_json(spec)}, {"conventions", to_json(cal.best)}, {"states", tables}});
  ws.stage("tables");

  // three-row T_lambda, |lambda| <= 6
  double three = 0.0;
  std::vector<Partition> rows3;
  for (const auto& p : partitions_up_to(6))
    if (p.rows() >= 3) rows3.push_back(p);
  for (const auto& r : recs) {
    const auto rows = one_row_polynomials(7, r.bethe.roots(), spec, cal.best);
    double scale = 0.0;
    for (const auto& p : rows) scale = std::max(scale, p.scale());
    for (const auto& lam : rows3) three = std::max(three, jacobi_trudi(lam, rows, spec, cal.best).poly.scale() / scale);
  }
  ws.add({"three_row_t_lambda", 3, three, "<=", 1e-8, std::to_string(rows3.size()) + " partitions"});

  // degree L in u; zeros at t = 0
  std::mt19937_64 rng(cfg.sampling.seed);
  std::uniform_real_distribution<double> U(-cfg.master.t_radius, cfg.master.t_radius);
  int bad_degree = 0;
  double zero_err = 0.0;
  for (const auto& tab : tabs) {
    const MasterT m(tab);
    for (int s = 0; s < 5; ++s) {
      TimesVector t(4);
      for (int k = 1; k <= 4; ++k) t.set(k, cplx(U(rng), U(rng)));
      bad_degree += m.polynomial(t).poly.degree(1e-10) != spec.L;
    }
    bad_degree += m.polynomial(TimesVector(1)).poly.degree(1e-10) != spec.L;
    if (spec.min_theta_separation() > 0.0) {
      const auto z = match_positions(spec.theta, m.zeros(TimesVector(1)));
      for (int j = 0; j < spec.L; ++j) zero_err = std::max(zero_err, std::abs(z[j] - spec.theta[j]));
    }
  }
  ws.add({"degree_defects", 5, double(bad_degree), "<=", 0.0, "deg_u T(u, t) = L at t = 0 and 5 random t"});
  if (spec.min_theta_separation() > 0.0)
    ws.add({"zeros_at_t0", 5, zero_err, "<=", 1e-10, "max |u_j(0) - theta_j|"});

  // Schur layer the master T is built on
  std::uniform_real_distribution<double> V(-0.3, 0.3);
  double cauchy = 0.0, closed = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    TimesVector t(6), s(6), prod(6);
    for (int k = 1; k <= 6; ++k) {
      t.set(k, cplx(V(rng), V(rng)));
      s.set(k, cplx(V(rng), V(rng)));
      prod.set(k, double(k) * t[k] * s[k]);
    }
    cplx rhs = 0.0, lhs = 0.0;
    for (const cplx h : h_from_times(prod, 6)) rhs += h;
    for (const auto& lam : partitions_up_to(6)) lhs += schur(lam, t) * schur(lam, s);
    cauchy = std::max(cauchy, std::abs(lhs - rhs) / std::abs(rhs));
    closed = std::max({closed, std::abs(schur(Partition({2}), t) - (t[1] * t[1] / 2.0 + t[2])),
                       std::abs(schur(Partition({1, 1}), t) - (t[1] * t[1] / 2.0 - t[2]))});
  }
  ws.add({"cauchy_identity_order6", 9, cauchy, "<=", 1e-10, "relative"});
  ws.add({"schur_two_box_closed_form", 9, closed, "<=", 1e-15, ""});
  ws.note("t0_step", taulab::to_json(cal.best.t0_step));
  ws.note("states", recs.size());
  return ws.finish();
}

int cmd_verify_hirota(const RunConfig& cfg, const std::string& fixture) {
  if (!fixture.empty()) {
    static const std::set<std::string> kNames{"constant", "plane-wave", "two-plane-waves", "first-time", "all"};
    if (!kNames.count(fixture)) throw UsageError("--fixture: one of constant, plane-wave, two-plane-waves, first-time, all");
    Workspace ws(cfg, "verify-hirota-fixtures");
    SamplerConfig sc;
    sc.n_samples = std::max(cfg.sampling.count, 1000);
    sc.seed = cfg.sampling.seed;
    const bool all = fixture == "all";
    json res = json::object();
    auto sweep = [&](const char* name, const TauFn& tau, double thr, int crit) {
      const SweepReport r = sweep_check(tau, sc);
      res[name] = to_json(r);
      ws.add({std::string(name) + "_residual", crit, r.normalized, "<=", thr,
              std::to_string(r.n_samples) + " samples, max |raw| " + fmt17(r.max_residual)});
      std::printf("%s: max residual %s\n", name, fmt17(r.max_residual).c_str());
    };
    if (all || fixture == "constant") sweep("constant", fixtures::constant(2.5, 6), 1e-14, 8);
    if (all || fixture == "plane-wave") sweep("plane-wave", fixtures::plane_wave(cplx(0.7, 0.3), 12), 1e-10, 8);
    if (all || fixture == "two-plane-waves")
      sweep("two-plane-waves", fixtures::two_plane_waves(1.0, 0.4, 0.5, -0.3, 12), 1e-9, 0);
    if (all || fixture == "first-time") {
      const auto tau = fixtures::first_time(4);
      std::mt19937_64 rng(sc.seed);
      std::uniform_real_distribution<double> U(-1.0, 1.0);
      double t1 = 0.0, anti = 0.0;
      for (int s = 0; s < 20; ++s) {
        TimesVector t(4);
        for (int k = 1; k <= 4; ++k) t.set(k, cplx(U(rng), U(rng)));
        t1 = std::max(t1, std::abs(residual_shift(tau, t, 1.0, 2.0, 3.0, 1.0).raw - 2.0));
        const cplx z1(U(rng), U(rng)), z2(U(rng), U(rng)), z3(U(rng), U(rng));
        const auto tw = fixtures::two_plane_waves(1.0, 0.4, 0.5, -0.3, 6);
        const auto r = residual_shift(tw, t, z1, z2, z3, 1.0), rs = residual_shift(tw, t, z2, z1, z3, 1.0);
        anti = std::max(anti, std::abs(r.raw + rs.raw) / std::max(r.scale, 1e-300));
      }
      res["first-time"] = {{"z123_error", t1}, {"antisymmetry", anti}};
      ws.add({"first_time_z123", 8, t1, "<=", 1e-12, "|residual - 2| at z = (1, 2, 3)"});
      ws.add({"antisymmetry", 8, anti, "<=", 1e-14, "relative, z1 <-> z2"});
    }
    ws.note("fixtures", all ? json::array({"constant", "plane-wave", "two-plane-waves", "first-time"})
                            : json::array({fixture}));
    ws.write_json("hirota-fixtures.json", res);
    return ws.finish();
  }

  Workspace ws(cfg, "verify-hirota");
  const Masters m = load_masters(ws);
  SamplerConfig sc;
  sc.n_samples = cfg.sampling.count;
  sc.seed = cfg.sampling.seed;
  sc.t_radius = cfg.master.t_radius;
  sc.z_radius = cfg.master.z_radius;
  double worst = 0.0, weak0 = kInf, weak2 = kInf;
  json rows = json::array();
  std::ostringstream os;
  CsvWriter w(os, {"eigenstate", "normalized", "max_residual", "k0_normalized", "k2_normalized"});
  for (std::size_t k = 0; k < m.masters.size(); ++k) {
    const SweepReport r = hirota_check(*m.masters[k], sc);
    double fixed[2];
    for (const int K : {0, 2}) {
      MasterOptions o;
      o.K = K;
      o.adaptive = false;
      o.tail_tol = kInf;
      fixed[K / 2] = hirota_check(MasterT(m.tables[k], o), sc).normalized;
    }
    worst = std::max(worst, r.normalized);
    weak0 = std::min(weak0, fixed[0]);
    weak2 = std::min(weak2, fixed[1]);
    const int id = m.tables[k]->state_id();
    rows.push_back({{"id", id}, {"sweep", to_json(r)}, {"k0_normalized", fixed[0]}, {"k2_normalized", fixed[1]}});
    w.field(id).field(r.normalized).field(r.max_residual).field(fixed[0]).field(fixed[1]);
    w.end_row();
  }
  ws.stage("sweep");
  ws.write_json("hirota.json", {{"t0_step", taulab::to_json(m.conv.t0_step)}, {"states", rows}});
  if (cfg.wants("csv")) ws.write("hirota.csv", os.str());
  ws.add({"master_hirota", 4, worst, "<=", 1e-6,
          std::to_string(rows.size()) + " states x " + std::to_string(sc.n_samples) + " samples"});
  ws.add({"k0_discrimination", 4, weak0, ">", 1e-3, "weakest K = 2 residual " + fmt17(weak2)});
  return ws.finish();
}

int cmd_zeros_flow(const RunConfig& cfg) {
  Workspace ws(cfg, "zeros-flow");
  const Masters m = load_masters(ws);
  std::vector<Trajectory> trajs;
  json out = json::array();
  int truncated = 0;
  for (const auto& master : m.masters) {
    trajs.push_back(track(*master, cfg.rs.t1_start, cfg.rs.t1_end, cfg.rs.h));
    truncated += trajs.back().truncated;
    out.push_back(trajectory_json(trajs.back()));
  }
  ws.stage("track");
  ws.write_json("trajectories.json", {{"h", cfg.rs.h}, {"states", out}});
  if (cfg.wants("csv")) {
    std::ostringstream os;
    write_trajectory_csv(os, trajs);
    ws.write("trajectories.csv", os.str());
  }
  ws.add({"truncated_trajectories", 6, double(truncated), "<=", 0.0, ""});
  return ws.finish();
}

int cmd_rs_check(const RunConfig& cfg) {
  Workspace ws(cfg, "rs-check");
  const Masters m = load_masters(ws);
  const json tj = ws.read_json("trajectories.json", "zeros-flow");
  std::map<int, Trajectory> coarse_by_id;
  for (const auto& t : tj.at("states")) {
    Trajectory tr = trajectory_from_json(t);
    coarse_by_id[tr.state_id] = std::move(tr);
  }

  double lo = kInf, hi = 0.0, wrong_floor = kInf, grid_err = 0.0;
  int failures = 0;
  std::set<std::string> etas;
  json rows = json::array();
  std::ostringstream os;
  CsvWriter w(os, {"eigenstate", "t1", "particle", "abs_res", "h"});
  for (const auto& master : m.masters) {
    const int id = master->table().state_id();
    const auto it = coarse_by_id.find(id);
    if (it == coarse_by_id.end()) throw UsageError("trajectories.json lacks state " + std::to_string(id) + "; rerun `taulab zeros-flow`");
    const Trajectory& coarse = it->second;
    const Trajectory fine = track(*master, cfg.rs.t1_start, cfg.rs.t1_end, cfg.rs.h / 2);
    json row = {{"id", id}};
    try {
      if (fine.truncated || coarse.truncated) throw std::runtime_error("truncated trajectory: " + fine.diagnostic + coarse.diagnostic);
      for (std::size_t g = 0; g < coarse.t1.size() && 2 * g < fine.t1.size(); ++g)
        for (std::size_t j = 0; j < coarse.positions[g].size(); ++j)
          grid_err = std::max(grid_err, std::abs(fine.positions[2 * g][j] - coarse.positions[g][j]));
      const EtaCalibration cal = calibrate_eta(fine, RSKernel::Rational, cfg.rs.eta_candidates);
      etas.insert(str(cal.eta));
      RSParams pf, pc;
      pf.eta = pc.eta = cal.eta;
      pf.h = fine.h;
      pc.h = coarse.h;
      const RSResidual rf = rs_residual(fine, pf), rc = rs_residual(coarse, pc);
      double mf = 0.0, mc = 0.0;
      for (std::size_t g = 0; g < rc.t1.size(); ++g)
        for (std::size_t j = 0; j < rc.values[g].size(); ++j) {
          mc = std::max(mc, std::abs(rc.values[g][j]));
          mf = std::max(mf, std::abs(rf.values[2 * g + 1][j]));
        }
      const double ratio = mc / mf;
      lo = std::min(lo, ratio);
      hi = std::max(hi, ratio);
      RSParams wrong = pf;
      wrong.eta = 2.0 * cal.eta;
      const double wr = rs_residual(fine, wrong).max_abs;
      wrong_floor = std::min(wrong_floor, wr);
      for (const auto* r : {&rc, &rf})
        for (std::size_t g = 0; g < r->t1.size(); ++g)
          for (std::size_t j = 0; j < r->values[g].size(); ++j) {
            w.field(id).field(r->t1[g]).field(static_cast<int>(j)).field(std::abs(r->values[g][j]));
            w.field(r == &rc ? coarse.h : fine.h);
            w.end_row();
          }
      json scores = json::array();
      for (const auto& [e, s] : cal.scores) scores.push_back({{"eta", taulab::to_json(e)}, {"score", s}});
      row.update({{"eta", taulab::to_json(cal.eta)}, {"scores", scores}, {"eta2_fit", taulab::to_json(cal.eta2_fit)},
                  {"residual_h", mc}, {"residual_h_half", mf}, {"ratio", ratio}, {"wrong_eta_residual", wr}});
    } catch (const std::exception& e) {
      ++failures;
      row["error"] = e.what();
    }
    rows.push_back(row);
  }
  ws.stage("rs");
  ws.write_json("rs.json", {{"h", cfg.rs.h}, {"states", rows}});
  if (cfg.wants("csv")) ws.write("rs_residual.csv", os.str());
  std::string eta_list;
  for (const auto& e : etas) eta_list += (eta_list.empty() ? "" : ", ") + e;
  ws.add({"rs_failures", 6, double(failures), "<=", 0.0, "eta " + eta_list});
  ws.add({"h_halving_ratio_min", 6, lo, ">=", 3.2, ""});
  ws.add({"h_halving_ratio_max", 6, hi, "<=", 4.8, ""});
  ws.add({"wrong_eta_floor", 6, wrong_floor, ">", 1e-3, "eta -> 2 eta"});
  ws.add({"grid_consistency", 0, grid_err, "<=", 1e-9, "zeros-flow vs refined track"});
  return ws.finish();
}

int cmd_inverse_velocities(const RunConfig& cfg) {
  Workspace ws(cfg, "inverse-velocities");
  const auto recs = load_records(ws);
  const Masters m = load_masters(ws);
  std::map<int, const MasterT*> by_id;
  for (const auto& x : m.masters) by_id[x->table().state_id()] = x.get();
  std::vector<const MasterT*> ms;
  for (const auto& r : recs) {
    const auto it = by_id.find(r.id);
    if (it == by_id.end()) throw UsageError("master.json lacks state " + std::to_string(r.id) + "; rerun `taulab build-master`");
    ms.push_back(it->second);
  }
  const InverseReport rep = inverse_problem_report(recs, ms, 1e-3);
  ws.write_json("inverse.json", to_json(rep));
  if (cfg.wants("csv")) {
    std::ostringstream os;
    CsvWriter w(os, {"eigenstate", "particle", "re_u", "im_u", "re_v", "im_v"});
    for (const auto& row : rep.rows)
      for (std::size_t j = 0; j < row.positions.size(); ++j) {
        w.field(row.state_id).field(static_cast<int>(j)).field(row.positions[j].real()).field(row.positions[j].imag());
        w.field(row.velocities[j].real()).field(row.velocities[j].imag());
        w.end_row();
      }
    ws.write("velocities.csv", os.str());
  }
  const ChainSpec spec = cfg.spec();
  const bool distinct = spec.min_theta_separation() > 0.0;
  ws.add({"position_spread", 7, rep.position_spread, "<=", 1e-10,
          distinct ? "" : "repeated theta: zeros form an L-fold root"});
  ws.add({"velocity_separation", 7, rep.min_velocity_separation, ">", 1e-8, ""});
  ws.add({"fd_velocity_error", 7, rep.max_fd_error, "<=", 1e-6, "five-point stencil, h = 1e-3"});
  return ws.finish();
}

int cmd_report(const RunConfig& cfg) {
  const json manifests = load_manifests(cfg.output.directory);
  if (manifests.empty())
    throw UsageError("no artifacts in " + cfg.output.directory + "; run `taulab spectrum` to start the pipeline");

  struct Source {
    int criterion;
    const char* name;
    const char* command;
    const char* manifest;
  };
  static const Source kSources[] = {
      {1, "ED-Bethe agreement", "bethe-solve", "bethe-solve"},
      {2, "TQ residual", "verify-tq", "verify-tq"},
      {3, "gl(2) truncation", "build-master", "build-master"},
      {4, "master Hirota", "verify-hirota", "verify-hirota"},
      {5, "degree and t=0 zeros", "build-master", "build-master"},
      {6, "RS dynamics", "rs-check", "rs-check"},
      {7, "inverse problem", "inverse-velocities", "inverse-velocities"},
      {8, "Hirota fixtures", "verify-hirota --fixture all", "verify-hirota-fixtures"},
      {9, "Schur layer", "build-master", "build-master"},
      {10, "nested su(3)", "bethe-solve --nested 3 --nested-counts 1,1", "bethe-solve"},
  };

  std::vector<std::string> missing;
  for (const auto& s : kSources)
    if (!manifests.contains(s.manifest)) missing.push_back(std::string("`taulab ") + s.command + "`");
  std::string chain;
  for (const auto& [cmd, m] : manifests.items()) {
    if (cmd == "verify-hirota-fixtures") continue;
    const std::string h = m.value("chain_hash", "");
    if (chain.empty()) chain = h;
    if (h != chain) throw UsageError("manifests in " + cfg.output.directory + " come from different chains; rerun the pipeline");
  }
  if (!missing.empty()) {
    std::sort(missing.begin(), missing.end());
    missing.erase(std::unique(missing.begin(), missing.end()), missing.end());
    std::string msg = "missing upstream artifacts; run";
    for (const auto& m : missing) msg += " " + m;
    throw UsageError(msg);
  }

  bool all = true;
  json crit = json::array();
  std::ostringstream os;
  CsvWriter w(os, {"criterion", "name", "status", "command", "detail"});
  std::printf("%-3s %-22s %-8s %s\n", "#", "criterion", "status", "detail");
  for (const auto& s : kSources) {
    json checks = json::array();
    bool pass = true;
    std::string detail;
    for (const auto& c : manifests.at(s.manifest).at("checks"))
      if (c.at("criterion").get<int>() == s.criterion) {
        checks.push_back(c);
        pass &= c.at("passed").get<bool>();
        if (!detail.empty()) detail += "; ";
        const json& v = c.at("value");
        detail += c.at("name").get<std::string>() + " " + (v.is_number() ? fmt17(v.get<double>()) : v.get<std::string>());
      }
    if (s.criterion == 8) {
      const auto fx = manifests.at(s.manifest).at("summary").at("fixtures");
      if (fx.size() < 4) {
        pass = false;
        detail = "partial fixture run; " + detail;
      }
    }
    std::string status = pass ? "PASS" : "FAIL";
    if (checks.empty()) {
      status = "NOT RUN";
      pass = false;
      detail = s.criterion == 1    ? "energies need a homogeneous chain (no --theta)"
               : s.criterion == 10 ? std::string("run `taulab ") + s.command + "`"
                                   : "no checks recorded";
    }
    all &= pass;
    crit.push_back({{"criterion", s.criterion}, {"name", s.name}, {"status", status}, {"command", s.command},
                    {"checks", checks}});
    w.field(s.criterion).field(s.name).field(status).field(s.command).field(detail);
    w.end_row();
    std::printf("%-3d %-22s %-8s %s\n", s.criterion, s.name, status.c_str(), detail.c_str());
  }
  json hashes = json::object();
  for (const auto& [cmd, m] : manifests.items()) hashes[cmd] = m.at("config_hash");
  Workspace ws(cfg, "report");
  ws.write_json("report.json", {{"criteria", crit}, {"passed", all}, {"config_hashes", hashes}});
  ws.write("report.csv", os.str());
  return all ? 0 : 1;
}

}  // namespace taulab::cli
