#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace langevin {

// Raised for malformed configs, unknown keys, or inadmissible strict-mode
// settings. Maps to process exit code 1.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Raised when a run produces non-finite results. Maps to exit code 2.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// One benchmarked sampler configuration. A run sweeps each curve over the
// shared cost grid.
struct CurveSpec {
  std::string tag;        // row label; "rc" prefix marks the RC curve
  std::string algorithm;  // "ulmc" | "rc-ulmc"
  double h = 0.0;
  std::string phi = "uniform";  // "uniform" | "optimal"
};

struct ExperimentConfig {
  std::string preset;  // empty when fully spelled out in the file

  // Target.
  std::string target = "product";  // "product" | "gaussian" | "graph"
  int dim = 100;
  std::uint64_t target_seed = 7;
  std::string graph_file;  // target = "graph"
  double graph_alpha = 1.0;
  double graph_beta = 0.5;

  // Sampler defaults shared by every curve.
  double gamma = 1.0;
  bool strict_admissibility = false;

  // Estimator.
  int head_dim = 10;
  double init_shift = 0.5;
  int trials = 10000;
  std::vector<std::uint64_t> cost_grid;

  std::uint64_t seed = 1;
  std::vector<CurveSpec> curves;

  std::string output_dir;  // empty: in-memory only

  // prop5-oracle preset knobs.
  int oracle_dim = 10;
  double oracle_h = 1e-9;
  std::int64_t oracle_iters = 100000;
  std::int64_t oracle_stride = 1000;
};

// Built-in configurations addressable by name.
std::vector<std::string> preset_names();
ExperimentConfig preset_config(const std::string& name);

// INI subset: [section] headers, key = value lines, '#' or ';' comments,
// blank lines. Section "curve" repeats, one per curve; every other section
// is single. Unknown sections or keys are errors.
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config_file(const std::string& path);

// Stable hash of the fully resolved config: FNV-1a over the canonical
// "key=value\n" listing, keys sorted. Identical settings hash identically
// regardless of source formatting.
std::uint64_t config_hash(const ExperimentConfig& config);
std::string canonical_config_text(const ExperimentConfig& config);

}  // namespace langevin
