#include "langevin/experiment.hpp"

#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <thread>

#include "json.hpp"

#include "langevin/oracles.hpp"
#include "langevin/rng.hpp"

namespace langevin {

namespace {

std::string fmt_double(double x) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

int worker_count() {
  if (const char* env = std::getenv("ULMC_BENCH_WORKERS")) {
    const int n = std::atoi(env);
    if (n < 1) throw ConfigError("ULMC_BENCH_WORKERS must be a positive integer");
    return n;
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc > 0 ? static_cast<int>(hc) : 1;
}

void validate_for_run(const ExperimentConfig& cfg) {
  if (cfg.dim < 1) throw ConfigError("target dim must be >= 1");
  if (cfg.target == "product" && cfg.dim < 10) {
    throw ConfigError("product target requires dim >= 10");
  }
  if (cfg.target == "graph" && cfg.graph_file.empty()) {
    throw ConfigError("graph target requires graph_file");
  }
  if (!(cfg.gamma > 0.0)) throw ConfigError("gamma must be > 0");
  if (cfg.head_dim < 1 || cfg.head_dim > cfg.dim) {
    throw ConfigError("head_dim must lie in [1, dim]");
  }
  if (cfg.trials < 1) throw ConfigError("trials must be >= 1");
  if (cfg.cost_grid.empty()) throw ConfigError("cost_grid is empty");
  for (std::size_t i = 0; i + 1 < cfg.cost_grid.size(); ++i) {
    if (cfg.cost_grid[i] >= cfg.cost_grid[i + 1]) {
      throw ConfigError("cost_grid must be strictly increasing");
    }
  }
  if (cfg.cost_grid.front() < 1) throw ConfigError("cost_grid entries must be >= 1");
  if (cfg.curves.empty()) throw ConfigError("no [curve] sections");
  for (const auto& c : cfg.curves) {
    if (c.tag.empty()) throw ConfigError("curve tag must be set");
    if (!(c.h > 0.0)) throw ConfigError("curve '" + c.tag + "': h must be > 0");
    const bool is_rc = c.algorithm == "rc-ulmc";
    if (!is_rc && c.algorithm != "ulmc") {
      throw ConfigError("curve '" + c.tag + "': unknown algorithm");
    }
    // The tag doubles as the row label, so its prefix must name the family.
    if (is_rc != (c.tag.rfind("rc", 0) == 0)) {
      throw ConfigError("curve '" + c.tag + "': tag must start with \"rc\" "
                        "exactly for rc-ulmc curves");
    }
    if (is_rc && c.phi != "uniform" && c.phi != "optimal") {
      throw ConfigError("curve '" + c.tag + "': phi must be \"uniform\" or "
                        "\"optimal\"");
    }
  }
  for (std::size_t i = 0; i < cfg.curves.size(); ++i) {
    for (std::size_t j = i + 1; j < cfg.curves.size(); ++j) {
      if (cfg.curves[i].tag == cfg.curves[j].tag) {
        throw ConfigError("duplicate curve tag '" + cfg.curves[i].tag + "'");
      }
    }
  }
}

std::unique_ptr<TargetPotential> build_target(const ExperimentConfig& cfg) {
  if (cfg.target == "product") {
    return std::make_unique<ProductExperimentTarget>(cfg.dim, cfg.target_seed);
  }
  if (cfg.target == "gaussian") {
    return std::make_unique<QuadraticTarget>(standard_gaussian_target(cfg.dim));
  }
  if (cfg.target == "graph") {
    return std::make_unique<GraphTarget>(GraphTarget::from_edge_file(
        cfg.graph_file, cfg.dim, cfg.graph_alpha, cfg.graph_beta));
  }
  throw ConfigError("unknown target kind '" + cfg.target + "'");
}

Eigen::MatrixXd head_reference(const ExperimentConfig& cfg,
                               const TargetPotential& target) {
  if (cfg.target == "product" &&
      cfg.head_dim == ProductExperimentTarget::kHeadDim) {
    return reference_second_moment(
        static_cast<const ProductExperimentTarget&>(target));
  }
  const Eigen::MatrixXd h = target.hessian();
  Eigen::LLT<Eigen::MatrixXd> llt(h);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("target Hessian is not positive definite");
  }
  Eigen::MatrixXd inv = llt.solve(Eigen::MatrixXd::Identity(h.rows(), h.cols()));
  Eigen::MatrixXd block = inv.topLeftCorner(cfg.head_dim, cfg.head_dim);
  return 0.5 * (block + block.transpose().eval());
}

SamplerConfig curve_sampler_config(const ExperimentConfig& cfg,
                                   const CurveSpec& spec,
                                   const TargetPotential& target) {
  SamplerConfig sc;
  sc.gamma = cfg.gamma;
  sc.h = spec.h;
  if (spec.algorithm == "rc-ulmc") {
    if (spec.phi == "optimal") {
      sc.schedule = CoordinateSchedule(optimal_phi(target.coord_L()), spec.h);
    } else {
      sc.schedule = CoordinateSchedule::uniform(target.dim(), spec.h);
    }
  }
  return sc;
}

constexpr std::size_t kTrialBlock = 64;

struct BlockAccum {
  std::vector<Eigen::MatrixXd> psi;        // one k x k sum per checkpoint
  std::vector<std::uint64_t> iters, cost;  // from the block's first trial
};

CurveResult run_curve(const ExperimentConfig& cfg, const CurveSpec& spec,
                      std::size_t curve_index, const TargetPotential& target,
                      const Eigen::MatrixXd& reference, const InitSpec& init,
                      int workers) {
  const int k = cfg.head_dim;
  const int d = target.dim();
  const std::size_t ncp = cfg.cost_grid.size();
  const Algorithm algo =
      spec.algorithm == "rc-ulmc" ? Algorithm::RC_ULMC : Algorithm::ULMC;
  const SamplerConfig base = curve_sampler_config(cfg, spec, target);
  const std::uint64_t budget = cfg.cost_grid.back();
  const std::uint64_t n_iters =
      algo == Algorithm::ULMC
          ? (budget + static_cast<std::uint64_t>(d) - 1) / d
          : budget;

  const std::size_t n_trials = static_cast<std::size_t>(cfg.trials);
  const std::size_t n_blocks = (n_trials + kTrialBlock - 1) / kTrialBlock;
  std::vector<BlockAccum> blocks(n_blocks);
  for (auto& b : blocks) {
    b.psi.assign(ncp, Eigen::MatrixXd::Zero(k, k));
  }

  std::atomic<std::size_t> next_block{0};
  std::vector<std::exception_ptr> errors(n_blocks);

  auto work = [&]() {
    for (std::size_t b = next_block.fetch_add(1); b < n_blocks;
         b = next_block.fetch_add(1)) {
      try {
        BlockAccum& acc = blocks[b];
        const std::size_t lo = b * kTrialBlock;
        const std::size_t hi = std::min(lo + kTrialBlock, n_trials);
        for (std::size_t t = lo; t < hi; ++t) {
          SamplerConfig sc = base;
          sc.rng_seed = derive_seed(cfg.seed, curve_index * n_trials + t);
          ChainCallbacks cb;
          cb.cost_checkpoints = cfg.cost_grid;
          cb.on_checkpoint = [&](const PhaseState& s, std::size_t idx) {
            const auto head = s.x.head(k);
            acc.psi[idx].noalias() += head * head.transpose();
            if (t == lo) {
              acc.iters.push_back(s.iter);
              acc.cost.push_back(s.cost_units);
            }
          };
          run_chain(target, sc, algo, n_iters, init, &cb);
        }
      } catch (...) {
        errors[b] = std::current_exception();
      }
    }
  };

  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  // Reduce in block order so the float sums do not depend on scheduling.
  CurveResult result;
  result.spec = spec;
  result.admissibility = validate_stepsize(target, base, algo);
  if (blocks[0].iters.size() != ncp) {
    throw NumericalError("curve '" + spec.tag +
                         "': checkpoint bookkeeping out of step");
  }
  for (std::size_t i = 0; i < ncp; ++i) {
    Eigen::MatrixXd total = Eigen::MatrixXd::Zero(k, k);
    for (const auto& b : blocks) total += b.psi[i];
    const Eigen::MatrixXd empirical = total / static_cast<double>(n_trials);
    if (!empirical.allFinite()) {
      throw NumericalError("curve '" + spec.tag +
                           "' produced non-finite samples at cost " +
                           std::to_string(cfg.cost_grid[i]));
    }
    CurvePoint p;
    p.cost_units = blocks[0].cost[i];
    p.iterations = blocks[0].iters[i];
    p.error = spectral_norm(empirical - reference);
    if (!std::isfinite(p.error)) {
      throw NumericalError("curve '" + spec.tag +
                           "' produced a non-finite error");
    }
    result.points.push_back(p);
  }
  return result;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  validate_for_run(cfg);
  const std::unique_ptr<TargetPotential> target = build_target(cfg);
  const Eigen::MatrixXd reference = head_reference(cfg, *target);

  InitSpec init;
  if (cfg.target == "product") {
    init.kind = InitSpec::Kind::TargetHeadShifted;
  } else {
    init.kind = InitSpec::Kind::Normal;
  }
  init.shift = cfg.init_shift;

  ExperimentResult result;
  result.config = cfg;
  result.config_hash = config_hash(cfg);

  for (std::size_t i = 0; i < cfg.curves.size(); ++i) {
    const SamplerConfig sc = curve_sampler_config(cfg, cfg.curves[i], *target);
    const Algorithm algo = cfg.curves[i].algorithm == "rc-ulmc"
                               ? Algorithm::RC_ULMC
                               : Algorithm::ULMC;
    const StepsizeReport rep = validate_stepsize(*target, sc, algo);
    if (cfg.strict_admissibility && !rep.all_pass) {
      throw ConfigError("curve '" + cfg.curves[i].tag +
                        "': inadmissible under strict mode, violated " +
                        rep.binding);
    }
  }

  const int workers = worker_count();
  for (std::size_t i = 0; i < cfg.curves.size(); ++i) {
    result.curves.push_back(run_curve(cfg, cfg.curves[i], i, *target,
                                      reference, init, workers));
  }

  result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();

  if (!cfg.output_dir.empty()) {
    namespace fs = std::filesystem;
    fs::create_directories(cfg.output_dir);
    {
      std::ofstream out(fs::path(cfg.output_dir) / "results.csv");
      if (!out) throw ConfigError("cannot write to '" + cfg.output_dir + "'");
      out << results_csv(result, "head_moment_spectral");
    }
    {
      std::ofstream out(fs::path(cfg.output_dir) / "manifest.json");
      out << manifest_json(result) << "\n";
    }
  }
  return result;
}

std::string results_csv(const ExperimentResult& result,
                        const std::string& metric_name) {
  std::string out = "algorithm,cost_units,iterations,error,metric_name,seed\n";
  for (const auto& curve : result.curves) {
    for (const auto& p : curve.points) {
      out += curve.spec.tag;
      out += ',';
      out += std::to_string(p.cost_units);
      out += ',';
      out += std::to_string(p.iterations);
      out += ',';
      out += fmt_double(p.error);
      out += ',';
      out += metric_name;
      out += ',';
      out += std::to_string(result.config.seed);
      out += '\n';
    }
  }
  return out;
}

std::string manifest_json(const ExperimentResult& result) {
  using nlohmann::json;
  const ExperimentConfig& cfg = result.config;
  json j;
  j["preset"] = cfg.preset;
  j["config_hash"] = result.config_hash;
  j["config"] = json::parse(R"({})");
  j["config"]["target"] = {{"kind", cfg.target},
                           {"dim", cfg.dim},
                           {"seed", cfg.target_seed}};
  if (cfg.target == "graph") {
    j["config"]["target"]["graph_file"] = cfg.graph_file;
    j["config"]["target"]["graph_alpha"] = cfg.graph_alpha;
    j["config"]["target"]["graph_beta"] = cfg.graph_beta;
  }
  j["config"]["sampler"] = {{"gamma", cfg.gamma},
                            {"strict", cfg.strict_admissibility}};
  j["config"]["estimator"] = {{"head_dim", cfg.head_dim},
                              {"init_shift", cfg.init_shift},
                              {"trials", cfg.trials},
                              {"cost_grid", cfg.cost_grid}};
  j["config"]["run"] = {{"seed", cfg.seed}, {"output_dir", cfg.output_dir}};
  j["config"]["curves"] = json::array();
  for (const auto& c : cfg.curves) {
    j["config"]["curves"].push_back({{"tag", c.tag},
                                     {"algorithm", c.algorithm},
                                     {"h", c.h},
                                     {"phi", c.phi}});
  }
  j["seeds"] = {
      {"master", cfg.seed},
      {"scheme", "derive_seed(master, curve_index*trials + trial_index)"}};
  j["admissibility"] = json::array();
  for (const auto& curve : result.curves) {
    json a;
    a["tag"] = curve.spec.tag;
    a["all_pass"] = curve.admissibility.all_pass;
    a["binding"] = curve.admissibility.binding;
    a["checks"] = json::array();
    for (const auto& c : curve.admissibility.checks) {
      a["checks"].push_back({{"name", c.name},
                             {"bound", c.bound},
                             {"value", c.value},
                             {"pass", c.pass}});
    }
    j["admissibility"].push_back(a);
  }
  j["wall_seconds"] = result.wall_seconds;
  j["outputs"] = {"results.csv", "manifest.json"};
  return j.dump(2);
}

std::vector<CompareResult> compare_curves(const ExperimentResult& result) {
  const CurveResult* rc = nullptr;
  for (const auto& curve : result.curves) {
    if (curve.spec.tag.rfind("rc", 0) == 0) {
      if (rc) throw ConfigError("compare: more than one rc curve");
      rc = &curve;
    }
  }
  if (!rc) throw ConfigError("compare: no curve tagged rc*");

  std::vector<CompareResult> tables;
  for (const auto& curve : result.curves) {
    if (&curve == rc) continue;
    if (curve.points.size() != rc->points.size()) {
      throw ConfigError("compare: mismatched cost grids between '" +
                        rc->spec.tag + "' and '" + curve.spec.tag + "'");
    }
    CompareResult table;
    table.rc_tag = rc->spec.tag;
    table.other_tag = curve.spec.tag;
    for (std::size_t i = 0; i < curve.points.size(); ++i) {
      if (curve.points[i].cost_units != rc->points[i].cost_units) {
        throw ConfigError("compare: mismatched cost grids between '" +
                          rc->spec.tag + "' and '" + curve.spec.tag + "'");
      }
      ComparePoint p;
      p.cost_units = curve.points[i].cost_units;
      p.rc_error = rc->points[i].error;
      p.other_error = curve.points[i].error;
      p.ratio = p.rc_error / p.other_error;
      table.points.push_back(p);
    }
    int cross = -1;
    for (int i = static_cast<int>(table.points.size()) - 1; i >= 0; --i) {
      if (table.points[i].rc_error < table.points[i].other_error) {
        cross = i;
      } else {
        break;
      }
    }
    table.crossover_index = cross;
    tables.push_back(std::move(table));
  }
  return tables;
}

std::string compare_csv(const std::vector<CompareResult>& tables) {
  std::string out = "rc_curve,other_curve,cost_units,rc_error,other_error,ratio\n";
  for (const auto& t : tables) {
    for (const auto& p : t.points) {
      out += t.rc_tag;
      out += ',';
      out += t.other_tag;
      out += ',';
      out += std::to_string(p.cost_units);
      out += ',';
      out += fmt_double(p.rc_error);
      out += ',';
      out += fmt_double(p.other_error);
      out += ',';
      out += fmt_double(p.ratio);
      out += '\n';
    }
  }
  return out;
}

OracleResult run_prop5_oracle(const ExperimentConfig& cfg) {
  const int d = cfg.oracle_dim;
  const double h = cfg.oracle_h;
  if (d < 1) throw ConfigError("oracle dim must be >= 1");
  if (!(h > 0.0)) throw ConfigError("oracle h must be > 0");
  if (cfg.oracle_iters < 0 || cfg.oracle_stride < 1) {
    throw ConfigError("oracle iters/stride out of range");
  }
  if (d * h > 1e-8) {
    throw ConfigError("oracle requires d*h <= 1e-8");
  }

  const double shift = 1.0 / 400.0;
  const double floor_term =
      (4.0 * d - 5.7 * d * d * h) / (2.0 - 2.9 * d * h);
  OracleResult result;
  result.dim = d;
  result.h = h;
  MomentTriple triple = shifted_init_moments(d, shift);
  auto record = [&](std::int64_t m) {
    OracleRow row;
    row.iteration = m;
    row.ew2 = triple.ew2;
    row.moment_lower = std::pow(1.0 - 2.0 * h, static_cast<double>(m)) *
                           (d / 320000.0) +
                       floor_term;
    row.w2_lower = prop5_lower_bound(d, h, static_cast<std::uint64_t>(m));
    if (row.ew2 < row.moment_lower * (1.0 - 1e-9)) {
      throw NumericalError("oracle: second-moment recursion fell below its "
                           "lower bound at iteration " + std::to_string(m));
    }
    result.rows.push_back(row);
  };
  record(0);
  for (std::int64_t m = 1; m <= cfg.oracle_iters; ++m) {
    triple = rc_second_moment_step(triple, d, h);
    if (m % cfg.oracle_stride == 0 || m == cfg.oracle_iters) record(m);
  }
  return result;
}

std::string oracle_csv(const OracleResult& result) {
  std::string out = "iteration,ew2,moment_lower,w2_lower\n";
  for (const auto& row : result.rows) {
    out += std::to_string(row.iteration);
    out += ',';
    out += fmt_double(row.ew2);
    out += ',';
    out += fmt_double(row.moment_lower);
    out += ',';
    out += fmt_double(row.w2_lower);
    out += '\n';
  }
  return out;
}

ExperimentResult load_results_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line) ||
      line != "algorithm,cost_units,iterations,error,metric_name,seed") {
    throw ConfigError("'" + path + "' is not a results CSV");
  }
  ExperimentResult result;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string tag, cost, iters, error, metric, seed;
    if (!std::getline(row, tag, ',') || !std::getline(row, cost, ',') ||
        !std::getline(row, iters, ',') || !std::getline(row, error, ',') ||
        !std::getline(row, metric, ',') || !std::getline(row, seed, ',')) {
      throw ConfigError(path + " line " + std::to_string(lineno) +
                        ": expected 6 columns");
    }
    CurveResult* curve = nullptr;
    for (auto& c : result.curves) {
      if (c.spec.tag == tag) curve = &c;
    }
    if (!curve) {
      CurveResult fresh;
      fresh.spec.tag = tag;
      fresh.spec.algorithm = tag.rfind("rc", 0) == 0 ? "rc-ulmc" : "ulmc";
      result.curves.push_back(std::move(fresh));
      curve = &result.curves.back();
    }
    try {
      CurvePoint p;
      p.cost_units = std::stoull(cost);
      p.iterations = std::stoull(iters);
      p.error = std::stod(error);
      curve->points.push_back(p);
      result.config.seed = std::stoull(seed);
    } catch (const std::exception&) {
      throw ConfigError(path + " line " + std::to_string(lineno) +
                        ": bad numeric field");
    }
  }
  if (result.curves.empty()) throw ConfigError("'" + path + "' has no rows");
  return result;
}

}  // namespace langevin
