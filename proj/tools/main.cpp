#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "langevin/experiment.hpp"
#include "langevin/oracles.hpp"

namespace {

using namespace langevin;

ExperimentConfig resolve_config(const std::string& preset,
                                const std::string& config_path) {
  if (!preset.empty() && !config_path.empty()) {
    throw ConfigError("give either --preset or --config, not both");
  }
  if (preset.empty() && config_path.empty()) {
    throw ConfigError("one of --preset or --config is required");
  }
  return preset.empty() ? load_config_file(config_path) : preset_config(preset);
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  out << text;
}

int do_run(ExperimentConfig cfg) {
  const ExperimentResult result = run_experiment(cfg);
  if (cfg.output_dir.empty()) {
    std::cout << results_csv(result, "head_moment_spectral");
  } else {
    for (const auto& curve : result.curves) {
      const CurvePoint& last = curve.points.back();
      std::cout << curve.spec.tag << ": error " << last.error << " at cost "
                << last.cost_units << "\n";
    }
    std::cout << "wrote " << cfg.output_dir << "/results.csv and manifest.json"
              << " (" << result.wall_seconds << " s)\n";
  }
  return 0;
}

int do_compare(const std::string& input, const std::string& output) {
  const ExperimentResult result = load_results_csv(input);
  const std::vector<CompareResult> tables = compare_curves(result);
  for (const auto& t : tables) {
    std::ostream& log = output.empty() ? std::cerr : std::cout;
    if (t.crossover_index < 0) {
      log << t.rc_tag << " vs " << t.other_tag << ": no crossover\n";
    } else {
      log << t.rc_tag << " vs " << t.other_tag << ": " << t.rc_tag
          << " leads from cost "
          << t.points[static_cast<std::size_t>(t.crossover_index)].cost_units
          << "\n";
    }
  }
  const std::string csv = compare_csv(tables);
  if (output.empty()) {
    std::cout << csv;
  } else {
    write_file(output, csv);
  }
  return 0;
}

int do_validate(const ExperimentConfig& cfg, double epsilon, double w0_arg) {
  // Reuses the run-side checks so a config that validates also runs.
  ExperimentConfig probe = cfg;
  probe.output_dir.clear();
  const ExperimentConfig& c = probe;
  if (c.curves.empty()) throw ConfigError("no [curve] sections");

  std::unique_ptr<TargetPotential> target;
  if (c.target == "product") {
    target = std::make_unique<ProductExperimentTarget>(c.dim, c.target_seed);
  } else if (c.target == "gaussian") {
    target = std::make_unique<QuadraticTarget>(standard_gaussian_target(c.dim));
  } else if (c.target == "graph") {
    target = std::make_unique<GraphTarget>(GraphTarget::from_edge_file(
        c.graph_file, c.dim, c.graph_alpha, c.graph_beta));
  } else {
    throw ConfigError("unknown target kind '" + c.target + "'");
  }

  const ConditionNumbers cn = condition_numbers(*target);
  const double w0 = w0_arg > 0.0 ? w0_arg : std::sqrt(c.dim);
  std::cout << "target: " << c.target << ", dim " << c.dim << ", mu "
            << target->mu() << ", L " << target->big_L() << ", kappa "
            << cn.kappa << "\n";

  bool all_ok = true;
  for (const auto& spec : c.curves) {
    SamplerConfig sc;
    sc.gamma = c.gamma;
    sc.h = spec.h;
    const Algorithm algo =
        spec.algorithm == "rc-ulmc" ? Algorithm::RC_ULMC : Algorithm::ULMC;
    if (algo == Algorithm::RC_ULMC) {
      sc.schedule = spec.phi == "optimal"
                        ? CoordinateSchedule(optimal_phi(target->coord_L()),
                                             spec.h)
                        : CoordinateSchedule::uniform(target->dim(), spec.h);
    }
    const StepsizeReport rep = validate_stepsize(*target, sc, algo);
    std::cout << "curve " << spec.tag << " (" << spec.algorithm
              << ", h = " << spec.h << "):\n";
    for (const auto& check : rep.checks) {
      std::cout << "  " << check.name << ": value " << check.value
                << ", bound " << check.bound << " -> "
                << (check.pass ? "ok" : "FAIL") << "\n";
    }
    std::cout << "  " << (rep.all_pass ? "admissible" : "inadmissible")
              << " (binding: " << rep.binding << ")\n";
    all_ok = all_ok && rep.all_pass;

    // Iterations until the contraction term alone is below epsilon/2.
    double rate, per_iter_cost;
    if (algo == Algorithm::ULMC) {
      rate = 0.375 * target->mu() * sc.h * std::sqrt(sc.gamma);
      per_iter_cost = target->dim();
      const double target_log = std::log(2.0 * std::sqrt(2.0) * w0 / epsilon);
      const double m = std::ceil(target_log / rate);
      std::cout << "  transient below " << epsilon << "/2 from W0 = " << w0
                << ": " << m << " iterations (" << m * per_iter_cost
                << " cost units)\n";
      const double floor = std::sqrt(2.0 * c.dim) * cn.kappa * sc.h;
      if (floor > epsilon / 2.0) {
        std::cout << "  note: stepsize floor " << floor
                  << " exceeds half the error budget\n";
      }
    } else {
      rate = target->mu() * sc.gamma * sc.h / 8.0;
      const double m = std::ceil(std::log(8.0 * w0 / epsilon) / rate);
      std::cout << "  transient below " << epsilon << "/2 from W0 = " << w0
                << ": " << m << " iterations (" << m << " cost units)\n";
      const Eigen::VectorXd phi =
          sc.schedule ? sc.schedule->phi()
                      : Eigen::VectorXd::Constant(c.dim, 1.0 / c.dim);
      const double var_sum = (cn.kappa_vec.array() / phi.array()).square().sum();
      const double floor =
          40.0 * std::sqrt(sc.gamma) * sc.h * std::sqrt(var_sum);
      if (floor > epsilon / 2.0) {
        std::cout << "  note: stepsize floor " << floor
                  << " exceeds half the error budget\n";
      }
    }
  }
  return all_ok ? 0 : 1;
}

int do_oracle(const ExperimentConfig& cfg, const std::string& output) {
  const OracleResult result = run_prop5_oracle(cfg);
  const std::string csv = oracle_csv(result);
  if (output.empty()) {
    std::cout << csv;
  } else {
    std::filesystem::create_directories(output);
    write_file(std::filesystem::path(output) / "oracle.csv", csv);
    std::cout << "wrote " << output << "/oracle.csv (" << result.rows.size()
              << " rows)\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ULMC / RC-ULMC sampling benchmark"};
  app.require_subcommand(1);

  std::string preset, config_path, output;
  std::uint64_t seed = 0;
  int trials = 0, workers = 0;
  bool strict = false;

  CLI::App* run = app.add_subcommand("run", "run an error-vs-cost benchmark");
  run->add_option("--preset", preset,
                  "built-in configuration (fig3-desk, prop5-oracle)");
  run->add_option("--config", config_path, "configuration file");
  run->add_option("--output", output, "output directory");
  CLI::Option* run_seed = run->add_option("--seed", seed, "master seed");
  CLI::Option* run_trials = run->add_option("--trials", trials, "trial count");
  CLI::Option* run_workers =
      run->add_option("--workers", workers, "worker threads");
  run->add_flag("--strict", strict, "refuse inadmissible stepsizes");

  std::string cmp_input, cmp_output;
  CLI::App* compare =
      app.add_subcommand("compare", "cost-matched curve ratios from a results CSV");
  compare->add_option("input", cmp_input, "results.csv from a run")->required();
  compare->add_option("--output", cmp_output, "write the comparison CSV here");

  double epsilon = 0.1, w0 = -1.0;
  CLI::App* validate =
      app.add_subcommand("validate", "admissibility and iteration estimates");
  validate->add_option("--preset", preset, "built-in configuration");
  validate->add_option("--config", config_path, "configuration file");
  validate->add_option("--epsilon", epsilon, "target accuracy");
  validate->add_option("--w0", w0, "initial distance (default sqrt(dim))");

  CLI::App* oracle = app.add_subcommand(
      "oracle", "exact small-stepsize second-moment recursion and bounds");
  oracle->add_option("--preset", preset, "built-in configuration");
  oracle->add_option("--config", config_path, "configuration file");
  oracle->add_option("--output", output, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*run) {
      langevin::ExperimentConfig cfg = resolve_config(preset, config_path);
      if (*run_seed) cfg.seed = seed;
      if (*run_trials) cfg.trials = trials;
      if (!output.empty()) cfg.output_dir = output;
      if (strict) cfg.strict_admissibility = true;
      if (*run_workers) {
        if (workers < 1) throw langevin::ConfigError("--workers must be >= 1");
        setenv("ULMC_BENCH_WORKERS", std::to_string(workers).c_str(), 1);
      }
      return do_run(std::move(cfg));
    }
    if (*compare) return do_compare(cmp_input, cmp_output);
    if (*validate) {
      return do_validate(resolve_config(preset, config_path), epsilon, w0);
    }
    if (*oracle) return do_oracle(resolve_config(preset, config_path), output);
  } catch (const langevin::NumericalError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const langevin::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
