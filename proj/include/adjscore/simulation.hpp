#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "adjscore/solver.hpp"

namespace adjscore::sim {

// Monte Carlo study description.  Covariates are generated once (or loaded
// from a file) and held fixed across replications; responses are redrawn per
// replication from deterministic substreams keyed by (seed, replication).
struct SimulationConfig {
  std::string model;  // "betareg" or "betabinom"
  std::vector<Method> methods = {Method::ml, Method::mean_br,
                                 Method::median_br};
  int replications = 1000;
  std::uint64_t seed = 1;
  double level = 0.95;
  int threads = 0;  // 0 -> hardware concurrency

  Vector beta_truth;
  Vector gamma_truth;

  // Design source: either the generated double-index design (intercept,
  // standard-normal column, log-uniform(1,2) column, shared by both blocks)
  // or named columns of a CSV file.
  bool generated_design = true;
  int n = 0;
  std::string data_path;
  std::vector<std::string> mean_cols;
  std::vector<std::string> prec_cols;
  bool mean_intercept = true;
  bool prec_intercept = true;
  std::string trials_col;

  std::string mean_link = "logit";
  std::string prec_link;  // defaults: betareg "log", betabinom "identity"

  std::vector<std::string> exp_transform_components;

  SolverOptions solver;
};

// Key-value section config file; paths are resolved relative to the file.
SimulationConfig parse_config_file(const std::string& path);

struct ReplicationRecord {
  int replication = 0;
  Method method = Method::ml;
  bool converged = false;
  bool diverged = false;
  Vector estimate;
  Vector std_errors;
};

struct ComponentMetrics {
  std::string name;
  double pu = 0.0;    // % of used replications strictly below the truth
  double over = 0.0;  // % strictly above
  double ties = 0.0;  // % exactly equal
  double bias = 0.0;
  double rmse = 0.0;
  double wald = 0.0;  // % coverage of the level CI
  std::optional<double> transformed_bias;
};

struct MethodMetrics {
  Method method = Method::ml;
  int used = 0;          // replications entering the moment metrics
  int nonconverged = 0;  // excluded and reported separately
  int diverged = 0;      // excluded and reported separately
  std::vector<ComponentMetrics> components;
};

struct SimulationReport {
  SimulationConfig config;
  Index design_rows = 0;
  std::vector<std::string> component_names;
  Vector truth;
  std::vector<MethodMetrics> methods;
  std::vector<ReplicationRecord> records;  // replication-major order
};

SimulationReport run_study(const SimulationConfig& config);

// Metric assembly from per-replication records, exposed so the CSV dump can
// be checked to reproduce the report exactly.
std::vector<MethodMetrics> compute_metrics(
    const SimulationConfig& config,
    const std::vector<std::string>& component_names, const Vector& truth,
    const std::vector<ReplicationRecord>& records);

// Deterministic JSON rendering (byte-identical for identical reports).
std::string report_to_json(const SimulationReport& report);

void write_dump_csv(const SimulationReport& report, const std::string& path);

}  // namespace adjscore::sim
