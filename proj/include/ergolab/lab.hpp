#pragma once

#include <nlohmann/json.hpp>

#include <optional>
#include <string>
#include <vector>

#include "ergolab/rational.hpp"

namespace ergolab {

/// { "experiment": id, "seed": n, "output": dir, "params": {...} }.
struct ExperimentConfig {
  std::string experiment;
  std::uint64_t seed = 1;
  std::string output;  // empty: no files written
  nlohmann::json params = nlohmann::json::object();

  static ExperimentConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

enum class Status { Pass, Refuted, Inconclusive };
const char* to_string(Status s);

/// One measured quantity; asserted inequalities carry bound and margin.
struct Metric {
  std::string name;
  double value = 0.0;
  std::optional<double> bound;
  std::optional<double> margin;  // bound - value, positive when satisfied
  bool asserted = false;
  bool pass = true;
  std::string exact;  // exact rational form when available
};

struct ExperimentReport {
  std::string experiment;
  nlohmann::json config;  // fully resolved
  Status status = Status::Pass;
  std::vector<Metric> metrics;
  std::vector<std::string> artifacts;
  nlohmann::json details = nlohmann::json::object();
  double wall_clock = 0.0;

  /// An exact assertion failing makes the run REFUTED.
  void assert_metric(Metric m);
  /// An empirical check failing makes the run INCONCLUSIVE (never downgrades REFUTED).
  void check_metric(Metric m);
  void info(std::string name, double value, std::string exact = {});
  nlohmann::json to_json() const;
  /// name,value,bound,margin,asserted,pass,exact
  std::string csv() const;
};

ExperimentReport exp_main_inequality(const ExperimentConfig& config);
ExperimentReport exp_sqrt_recurrence(const ExperimentConfig& config);
ExperimentReport exp_theorem_stage(const ExperimentConfig& config);
ExperimentReport exp_equidistribution(const ExperimentConfig& config);

struct ExperimentInfo {
  std::string id;
  std::string summary;
};
std::vector<ExperimentInfo> list_experiments();

/// Dispatch by id, time it, and write report.json plus metrics.csv when an
/// output directory is configured.
ExperimentReport run_experiment(const ExperimentConfig& config);

/// Write via a temporary file and rename.
void write_atomic(const std::string& path, const std::string& content);

}  // namespace ergolab
