#include "commands.hpp"
#include "config.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

using namespace taulab;
using namespace taulab::cli;

namespace {

// "1.5", "-2", "0:2" (re:im) or "2i"
cplx parse_cplx(const std::string& path, const std::string& s) {
  try {
    std::size_t used = 0;
    if (const auto colon = s.find(':'); colon != std::string::npos) {
      const double re = std::stod(s.substr(0, colon), &used);
      const double im = std::stod(s.substr(colon + 1));
      return {re, im};
    }
    if (!s.empty() && s.back() == 'i') {
      const std::string body = s.substr(0, s.size() - 1);
      return {0.0, body.empty() || body == "+" ? 1.0 : body == "-" ? -1.0 : std::stod(body)};
    }
    const double re = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return {re, 0.0};
  } catch (const std::logic_error&) {
    throw UsageError(path + ": cannot read '" + s + "' as a number (use re, re:im or <im>i)");
  }
}

std::vector<cplx> parse_cplx_list(const std::string& path, const std::vector<std::string>& v) {
  std::vector<cplx> out;
  for (const auto& s : v) out.push_back(parse_cplx(path, s));
  return out;
}

// Flags are parsed into a scratch config; only the ones given on the command
// line are copied over the file-based config afterwards.
struct Flags {
  RunConfig v;
  std::vector<std::string> theta, delta, eta;
  std::string config_path;
  std::string fixture;
  std::vector<std::pair<CLI::Option*, std::function<void(RunConfig&)>>> apply;
};

void add_common(CLI::App* sub, Flags& f) {
  auto bind = [&](CLI::Option* o, std::function<void(RunConfig&)> fn) { f.apply.emplace_back(o, std::move(fn)); };
  sub->add_option("--config", f.config_path, "RunConfig JSON file")->check(CLI::ExistingFile);

  bind(sub->add_option("--L", f.v.chain.L, "chain length")->group("Chain"), [&f](RunConfig& c) { c.chain.L = f.v.chain.L; });
  bind(sub->add_option("--J", f.v.chain.J, "coupling")->group("Chain"), [&f](RunConfig& c) { c.chain.J = f.v.chain.J; });
  bind(sub->add_option("--theta", f.theta, "inhomogeneities, comma separated (re or re:im)")->delimiter(',')->group("Chain"),
       [&f](RunConfig& c) { c.chain.theta = parse_cplx_list("chain.theta", f.theta); });

  bind(sub->add_option("--tol", f.v.solver.tol, "Bethe residual tolerance")->group("Solver"),
       [&f](RunConfig& c) { c.solver.tol = f.v.solver.tol; });
  bind(sub->add_option("--max-iter", f.v.solver.max_iter, "Newton iterations")->group("Solver"),
       [&f](RunConfig& c) { c.solver.max_iter = f.v.solver.max_iter; });
  bind(sub->add_option("--strategy", f.v.solver.strategy, "auto, seeds or homotopy")->group("Solver"),
       [&f](RunConfig& c) { c.solver.strategy = f.v.solver.strategy; });
  bind(sub->add_option("--nested", f.v.solver.nested_N, "also solve the nested su(N) equations (0: off)")->group("Solver"),
       [&f](RunConfig& c) { c.solver.nested_N = f.v.solver.nested_N; });
  bind(sub->add_option("--nested-counts", f.v.solver.nested_counts, "roots per nested level")->delimiter(',')->group("Solver"),
       [&f](RunConfig& c) { c.solver.nested_counts = f.v.solver.nested_counts; });

  bind(sub->add_option("--K", f.v.master.K, "starting truncation |lambda| <= K")->group("Master"),
       [&f](RunConfig& c) { c.master.K = f.v.master.K; });
  bind(sub->add_option("--cutoff", f.v.master.cutoff, "largest stored |lambda|")->group("Master"),
       [&f](RunConfig& c) { c.master.cutoff = f.v.master.cutoff; });
  bind(sub->add_option("--delta", f.delta, "t0 step candidates")->delimiter(',')->group("Master"),
       [&f](RunConfig& c) { c.master.delta_candidates = parse_cplx_list("master.delta_candidates", f.delta); });
  bind(sub->add_option("--t-radius", f.v.master.t_radius, "|t_k| bound for sampled times")->group("Master"),
       [&f](RunConfig& c) { c.master.t_radius = f.v.master.t_radius; });
  bind(sub->add_option("--z-radius", f.v.master.z_radius, "|z_i| bound for sampled shifts")->group("Master"),
       [&f](RunConfig& c) { c.master.z_radius = f.v.master.z_radius; });

  bind(sub->add_option("--rs-h", f.v.rs.h, "t_1 grid step")->group("RS"), [&f](RunConfig& c) { c.rs.h = f.v.rs.h; });
  bind(sub->add_option("--t1-start", f.v.rs.t1_start)->group("RS"), [&f](RunConfig& c) { c.rs.t1_start = f.v.rs.t1_start; });
  bind(sub->add_option("--t1-end", f.v.rs.t1_end)->group("RS"), [&f](RunConfig& c) { c.rs.t1_end = f.v.rs.t1_end; });
  bind(sub->add_option("--eta", f.eta, "eta candidates")->delimiter(',')->group("RS"),
       [&f](RunConfig& c) { c.rs.eta_candidates = parse_cplx_list("rs.eta_candidates", f.eta); });

  bind(sub->add_option("--samples", f.v.sampling.count, "random samples per sweep")->group("Sampling"),
       [&f](RunConfig& c) { c.sampling.count = f.v.sampling.count; });
  bind(sub->add_option("--seed", f.v.sampling.seed)->group("Sampling"),
       [&f](RunConfig& c) { c.sampling.seed = f.v.sampling.seed; });

  bind(sub->add_option("--out", f.v.output.directory, "output directory (env TAULAB_OUTPUT_DIR)")->group("Output"),
       [&f](RunConfig& c) { c.output.directory = f.v.output.directory; });
  bind(sub->add_option("--formats", f.v.output.formats, "csv,json")->delimiter(',')->group("Output"),
       [&f](RunConfig& c) { c.output.formats = f.v.output.formats; });
}

RunConfig resolve(const Flags& f) {
  RunConfig cfg;
  if (!f.config_path.empty()) {
    std::ifstream in(f.config_path);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw UsageError(f.config_path + ": " + e.what());
    }
    merge_json(cfg, j);
  }
  if (const char* env = std::getenv("TAULAB_OUTPUT_DIR"); env && *env) cfg.output.directory = env;
  for (const auto& [opt, fn] : f.apply)
    if (opt->count() > 0) fn(cfg);
  validate(cfg);
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spin-chain master T-operator toolkit"};
  app.require_subcommand(1);
  Flags flags;

  struct Command {
    const char* name;
    const char* help;
    std::function<int(const RunConfig&)> run;
  };
  const std::vector<Command> commands{
      {"spectrum", "exact diagonalisation: joint eigenbasis of H and T(u)", cmd_spectrum},
      {"bethe-solve", "Bethe roots for every highest-weight state", cmd_bethe_solve},
      {"verify-tq", "TQ-relation residual per state", cmd_verify_tq},
      {"build-master", "calibrate conventions and store T_lambda tables", cmd_build_master},
      {"verify-hirota", "Hirota sweep of the master T, or of a closed-form fixture",
       [&](const RunConfig& c) { return cmd_verify_hirota(c, flags.fixture); }},
      {"zeros-flow", "track the zeros of T(u, t) along t_1", cmd_zeros_flow},
      {"rs-check", "equations of motion of the zeros under h -> h/2", cmd_rs_check},
      {"inverse-velocities", "initial zero positions and velocities per state", cmd_inverse_velocities},
      {"report", "aggregate manifests into a pass/fail table", cmd_report},
  };
  std::vector<std::pair<CLI::App*, const Command*>> subs;
  for (const auto& c : commands) {
    CLI::App* sub = app.add_subcommand(c.name, c.help);
    add_common(sub, flags);
    if (std::string(c.name) == "verify-hirota")
      sub->add_option("--fixture", flags.fixture, "constant, plane-wave, two-plane-waves, first-time or all");
    subs.emplace_back(sub, &c);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  CLI::App* active = app.get_subcommands().front();

  try {
    const RunConfig cfg = resolve(flags);
    for (const auto& [sub, cmd] : subs)
      if (sub == active) return cmd->run(cfg);
  } catch (const UsageError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "failed: %s\n", e.what());
    return 1;
  }
  return 2;
}
