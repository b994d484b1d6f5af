#pragma once

#include "config.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <filesystem>
#include <string>
#include <vector>

namespace taulab::cli {

struct Check {
  std::string name;
  int criterion = 0;  // acceptance criterion this feeds, 0 for none
  double value = 0.0;
  std::string relation;  // "<=", ">" or ">="
  double threshold = 0.0;
  std::string detail;
  bool passed() const;
};

nlohmann::json to_json(const Check& c);

// One command's view of the output directory. Artifacts are written as they
// are produced; finish() writes manifest-<command>.json (byte-reproducible)
// and timings-<command>.json.
class Workspace {
 public:
  Workspace(RunConfig cfg, std::string command);

  const RunConfig& config() const { return cfg_; }
  const std::filesystem::path& dir() const { return dir_; }

  void write(const std::string& name, const std::string& content);
  void write_json(const std::string& name, const nlohmann::json& j);

  // Manifest of an upstream command; UsageError naming the producer when it is
  // missing or was made for another chain.
  nlohmann::json require(const std::string& producer) const;
  // Upstream artifact, with the same dependency error.
  nlohmann::json read_json(const std::string& name, const std::string& producer) const;

  void add(Check c);
  void note(const std::string& key, nlohmann::json value) { extra_[key] = std::move(value); }
  void stage(const std::string& name);

  // Prints the checks; returns 0 when all pass, 1 otherwise.
  int finish();

 private:
  RunConfig cfg_;
  std::string command_;
  std::filesystem::path dir_;
  std::vector<std::string> artifacts_;
  std::vector<Check> checks_;
  nlohmann::json extra_ = nlohmann::json::object();
  std::chrono::steady_clock::time_point t0_;
  std::chrono::steady_clock::time_point last_;
  nlohmann::json stages_ = nlohmann::json::object();
};

nlohmann::json versions();

// Every manifest-*.json in dir, keyed by command name.
nlohmann::json load_manifests(const std::filesystem::path& dir);

}  // namespace taulab::cli
