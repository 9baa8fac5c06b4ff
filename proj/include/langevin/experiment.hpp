#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "langevin/config.hpp"
#include "langevin/metrics.hpp"
#include "langevin/samplers.hpp"

namespace langevin {

// One point of an error-vs-cost curve.
struct CurvePoint {
  std::uint64_t cost_units = 0;  // gradient evaluations actually spent
  std::uint64_t iterations = 0;
  double error = 0.0;
};

struct CurveResult {
  CurveSpec spec;
  StepsizeReport admissibility;
  std::vector<CurvePoint> points;
};

struct ExperimentResult {
  ExperimentConfig config;
  std::uint64_t config_hash = 0;
  std::vector<CurveResult> curves;
  double wall_seconds = 0.0;
};

// Runs every curve of the config over its cost grid. Trials are distributed
// over worker threads in fixed-size blocks and reduced in block order, so
// results are bit-identical for any worker count. Worker count comes from
// ULMC_BENCH_WORKERS, else hardware concurrency. Writes
// <output_dir>/results.csv and <output_dir>/manifest.json when output_dir is
// set. Throws ConfigError / NumericalError.
ExperimentResult run_experiment(const ExperimentConfig& config);

// CSV with header algorithm,cost_units,iterations,error,metric_name,seed.
std::string results_csv(const ExperimentResult& result,
                        const std::string& metric_name);

std::string manifest_json(const ExperimentResult& result);

// Ratio table between the RC curve (tag prefix "rc") and each plain curve at
// equal cost. Requires the curves to share the cost grid exactly.
struct ComparePoint {
  std::uint64_t cost_units = 0;
  double rc_error = 0.0;
  double other_error = 0.0;
  double ratio = 0.0;  // rc_error / other_error
};

struct CompareResult {
  std::string rc_tag;
  std::string other_tag;
  std::vector<ComparePoint> points;
  // First grid index where RC wins and keeps winning, -1 if never.
  int crossover_index = -1;
};

std::vector<CompareResult> compare_curves(const ExperimentResult& result);
std::string compare_csv(const std::vector<CompareResult>& tables);

// Rebuilds curves (tags, points, seed) from a results CSV written by
// run_experiment, grouping rows by tag in file order.
ExperimentResult load_results_csv(const std::string& path);

// Exact second-moment iterates and the two lower-bound curves of the
// small-stepsize oracle preset.
struct OracleRow {
  std::int64_t iteration = 0;
  double ew2 = 0.0;           // E|w|^2 under the exact recursion
  double moment_lower = 0.0;  // closed-form lower bound on E|w|^2
  double w2_lower = 0.0;      // induced Wasserstein lower bound
};

struct OracleResult {
  int dim = 0;
  double h = 0.0;
  std::vector<OracleRow> rows;
};

OracleResult run_prop5_oracle(const ExperimentConfig& config);
std::string oracle_csv(const OracleResult& result);

}  // namespace langevin
