#include "workspace.hpp"

#include "taulab/io.hpp"

#include <CLI11.hpp>
#include <Eigen/Core>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>

namespace taulab::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json number(double x) {
  if (std::isfinite(x)) return x;
  return x > 0 ? "inf" : (x < 0 ? "-inf" : "nan");
}

}  // namespace

bool Check::passed() const {
  if (relation == ">") return value > threshold;
  if (relation == ">=") return value >= threshold;
  return value <= threshold;
}

json to_json(const Check& c) {
  return {{"name", c.name},      {"criterion", c.criterion}, {"value", number(c.value)},
          {"relation", c.relation}, {"threshold", c.threshold}, {"passed", c.passed()},
          {"detail", c.detail}};
}

json versions() {
  return {{"taulab", TAULAB_VERSION},
          {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                        std::to_string(EIGEN_MINOR_VERSION)},
          {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
          {"cli11", CLI11_VERSION},
          {"compiler", __VERSION__}};
}

Workspace::Workspace(RunConfig cfg, std::string command)
    : cfg_(std::move(cfg)), command_(std::move(command)), dir_(cfg_.output.directory) {
  t0_ = last_ = std::chrono::steady_clock::now();
}

void Workspace::write(const std::string& name, const std::string& content) {
  fs::create_directories(dir_);
  std::ofstream out(dir_ / name, std::ios::binary);
  if (!out) throw UsageError("cannot write " + (dir_ / name).string());
  out << content;
  artifacts_.push_back(name);
}

void Workspace::write_json(const std::string& name, const json& j) { write(name, j.dump(2) + "\n"); }

json Workspace::require(const std::string& producer) const {
  const fs::path p = dir_ / ("manifest-" + producer + ".json");
  std::ifstream in(p);
  if (!in)
    throw UsageError("missing upstream artifact " + p.string() + "; run `taulab " + producer + "` first");
  json m;
  try {
    m = json::parse(in);
  } catch (const json::exception&) {
    throw UsageError("unreadable " + p.string() + "; rerun `taulab " + producer + "`");
  }
  if (m.value("chain_hash", "") != chain_hash(cfg_))
    throw UsageError(p.string() + " was produced for a different chain; rerun `taulab " + producer +
                     "` with this configuration");
  return m;
}

json Workspace::read_json(const std::string& name, const std::string& producer) const {
  require(producer);
  std::ifstream in(dir_ / name);
  if (!in) throw UsageError("missing upstream artifact " + (dir_ / name).string() + "; run `taulab " + producer + "`");
  try {
    return json::parse(in);
  } catch (const json::exception&) {
    throw UsageError("unreadable " + (dir_ / name).string() + "; rerun `taulab " + producer + "`");
  }
}

void Workspace::add(Check c) { checks_.push_back(std::move(c)); }

void Workspace::stage(const std::string& name) {
  const auto now = std::chrono::steady_clock::now();
  stages_[name] = std::chrono::duration<double>(now - last_).count();
  last_ = now;
}

int Workspace::finish() {
  bool ok = true;
  json checks = json::array();
  for (const auto& c : checks_) {
    checks.push_back(to_json(c));
    ok &= c.passed();
    std::printf("%-4s %-28s %s %s %s%s%s\n", c.passed() ? "ok" : "FAIL", c.name.c_str(), fmt17(c.value).c_str(),
                c.relation.c_str(), fmt17(c.threshold).c_str(), c.detail.empty() ? "" : "  ", c.detail.c_str());
  }
  json cfg = cli::to_json(cfg_);
  cfg.erase("output");
  json manifest = {{"command", command_},
                   {"config_hash", config_hash(cfg_)},
                   {"chain_hash", chain_hash(cfg_)},
                   {"config", cfg},
                   {"versions", versions()},
                   {"artifacts", artifacts_},
                   {"checks", checks},
                   {"passed", ok}};
  if (!extra_.empty()) manifest["summary"] = extra_;
  write_json("manifest-" + command_ + ".json", manifest);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
  write_json("timings-" + command_ + ".json", {{"command", command_}, {"wall_seconds", wall}, {"stages", stages_}});
  return ok ? 0 : 1;
}

json load_manifests(const fs::path& dir) {
  json out = json::object();
  if (!fs::is_directory(dir)) return out;
  std::map<std::string, fs::path> found;
  for (const auto& e : fs::directory_iterator(dir)) {
    const std::string n = e.path().filename().string();
    if (n.rfind("manifest-", 0) == 0 && e.path().extension() == ".json")
      found[n.substr(9, n.size() - 9 - 5)] = e.path();
  }
  for (const auto& [cmd, p] : found) {
    std::ifstream in(p);
    try {
      out[cmd] = json::parse(in);
    } catch (const json::exception&) {
      throw UsageError("unreadable " + p.string() + "; rerun `taulab " + cmd + "`");
    }
  }
  return out;
}

}  // namespace taulab::cli
