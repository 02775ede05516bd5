// bsgm: sparse Bayesian Gaussian mixture clustering from the command line.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "bsgm/experiment.hpp"
#include "bsgm/preprocess.hpp"

namespace fs = std::filesystem;
using namespace bsgm;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitRuntime = 4;

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::ConfigError:
    case ErrorKind::InvalidHyperparams:
    case ErrorKind::BadSpec:
    case ErrorKind::InvalidK:
      return kExitConfig;
    case ErrorKind::NonFiniteEntry:
    case ErrorKind::TooFewObservations:
    case ErrorKind::ParseError:
    case ErrorKind::EmptyAfterFilter:
    case ErrorKind::EmptyObservation:
    case ErrorKind::DimensionMismatch:
    case ErrorKind::LengthMismatch:
    case ErrorKind::LabelOutOfRange:
    case ErrorKind::MismatchedLengths:
    case ErrorKind::DegeneratePartition:
      return kExitData;
    default:
      return kExitRuntime;
  }
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::ConfigError, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
  } else {
    write_text(out_path, text);
  }
}

ScenarioKind scenario_kind(const std::string& name) {
  if (name == "one") return ScenarioKind::One;
  if (name == "two") return ScenarioKind::Two;
  if (name == "three") return ScenarioKind::Three;
  throw Error(ErrorKind::ConfigError, "unknown scenario '" + name + "'");
}

struct ScenarioFlags {
  std::string kind;
  std::optional<int> k_star, s;
  std::optional<Eigen::Index> p, n;
  std::optional<double> mean_scale;
  std::optional<std::uint64_t> seed;

  void add_to(CLI::App* app) {
    app->add_option("--scenario", kind, "one, two or three");
    app->add_option("--k-star", k_star, "clusters in scenario one (3 or 5)");
    app->add_option("--support", s, "support size");
    app->add_option("--p", p, "features");
    app->add_option("--n", n, "observations");
    app->add_option("--mean-scale", mean_scale, "multiplies the scenario means");
    app->add_option("--data-seed", seed, "simulation seed");
  }

  bool any() const {
    return !kind.empty() || k_star || s || p || n || mean_scale || seed;
  }

  void apply(ScenarioSpec& spec) const {
    if (!kind.empty()) spec.kind = scenario_kind(kind);
    if (k_star) spec.k_star = *k_star;
    if (s) spec.s = *s;
    if (p) spec.p = *p;
    if (n) spec.n = *n;
    if (mean_scale) spec.mean_scale = *mean_scale;
    if (seed) spec.seed = *seed;
  }
};

int cmd_simulate(const ScenarioFlags& flags, const std::string& config_path,
                 const std::string& out_data, const std::string& out_truth) {
  ScenarioSpec spec;
  if (!config_path.empty()) {
    const auto cfg = parse_experiment_config(slurp(config_path));
    if (!cfg.scenario) {
      throw Error(ErrorKind::ConfigError, "config has no 'scenario'");
    }
    spec = *cfg.scenario;
  }
  flags.apply(spec);
  const auto syn = generate(spec);
  write_csv(out_data, syn.data.values);
  write_truth(out_truth, Truth{syn.z_true, syn.mu_true});
  std::cerr << "wrote " << out_data << " (" << syn.data.p() << " x "
            << syn.data.n() << ") and " << out_truth << "\n";
  return 0;
}

int cmd_preprocess(const std::string& counts, bool transpose, double min_total,
                   const std::string& out, const std::string& genes_out) {
  const auto raw = read_csv(counts, transpose);
  const auto res = preprocess_scrna(raw.values, min_total);
  for (const auto& w : res.warnings) std::cerr << "warning: " << w << "\n";
  write_csv(out, res.data.values);
  if (!genes_out.empty()) {
    std::ostringstream os;
    os << "gene\n";
    for (auto g : res.kept_genes) os << g + 1 << "\n";
    write_text(genes_out, os.str());
  }
  std::cerr << "kept " << res.data.p() << " of " << raw.values.rows()
            << " genes across " << res.data.n() << " cells\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse Bayesian Gaussian mixture clustering"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string("bsgm ") + kVersion);

  // simulate
  auto* sim = app.add_subcommand("simulate", "generate a synthetic scenario");
  ScenarioFlags sim_flags;
  sim_flags.add_to(sim);
  std::string sim_config, sim_data = "data.csv", sim_truth = "truth.json";
  sim->add_option("--config", sim_config, "JSON config with a 'scenario' block");
  sim->add_option("--out", sim_data, "matrix CSV (features x observations)");
  sim->add_option("--truth-out", sim_truth, "JSON sidecar with z_true, mu_true");

  // preprocess
  auto* pre = app.add_subcommand("preprocess", "normalize a scRNA-seq count matrix");
  std::string pre_in, pre_out = "expression.csv", pre_genes;
  bool pre_transpose = false;
  double pre_min_total = 10.0;
  pre->add_option("counts", pre_in, "count CSV (genes x cells)")->required();
  pre->add_flag("--transpose", pre_transpose, "input is cells x genes");
  pre->add_option("--min-total", pre_min_total, "drop genes with total count <= this");
  pre->add_option("--out", pre_out, "standardized matrix CSV");
  pre->add_option("--genes-out", pre_genes, "1-based input rows that were kept");

  // fit
  auto* fit = app.add_subcommand("fit", "fit a model and write a run directory");
  std::string fit_config, fit_dataset, fit_truth, fit_method, fit_out, fit_init;
  bool fit_transpose = false, fit_no_traces = false, fit_quiet = false;
  ScenarioFlags fit_flags;
  std::optional<std::uint64_t> fit_seed;
  std::optional<int> fit_burn, fit_keep, fit_chains, fit_thin, fit_k, fit_s,
      fit_threads;
  fit->add_option("--config", fit_config, "JSON experiment config");
  fit->add_option("--dataset", fit_dataset, "matrix CSV (features x observations)");
  fit->add_flag("--transpose", fit_transpose, "dataset is observations x features");
  fit->add_option("--truth", fit_truth, "truth JSON for evaluation");
  fit_flags.add_to(fit);
  fit->add_option("--method", fit_method, "bayesian, cmle or kmeans");
  fit->add_option("--out", fit_out, "run directory");
  fit->add_option("--seed", fit_seed, "sampler / restart seed");
  fit->add_option("--burn", fit_burn, "burn-in sweeps");
  fit->add_option("--keep", fit_keep, "kept sweeps");
  fit->add_option("--chains", fit_chains, "independent chains");
  fit->add_option("--thin", fit_thin, "keep every thin-th sweep");
  fit->add_option("--init", fit_init, "single, random_k or kmeans++");
  fit->add_option("--k", fit_k, "clusters for cmle / kmeans");
  fit->add_option("--s", fit_s, "row-sparsity budget for cmle");
  fit->add_option("--threads", fit_threads, "worker threads (default BSGM_THREADS)");
  fit->add_flag("--no-traces", fit_no_traces, "skip trace files");
  fit->add_flag("--quiet", fit_quiet, "no progress output");

  // evaluate
  auto* ev = app.add_subcommand("evaluate", "score an estimate against the truth");
  std::string ev_est, ev_truth, ev_out;
  ev->add_option("--estimate", ev_est, "estimate.json")->required();
  ev->add_option("--truth", ev_truth, "truth JSON")->required();
  ev->add_option("--out", ev_out, "metrics JSON (stdout if absent)");

  // diagnose
  auto* dg = app.add_subcommand("diagnose", "PSRF over the chains of a run");
  std::string dg_run, dg_out;
  dg->add_option("--run", dg_run, "run directory written by fit")->required();
  dg->add_option("--out", dg_out, "PSRF JSON (stdout if absent)");

  // report
  auto* rp = app.add_subcommand("report", "summarize a run directory");
  std::string rp_run;
  rp->add_option("run", rp_run, "run directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  try {
    if (*sim) return cmd_simulate(sim_flags, sim_config, sim_data, sim_truth);
    if (*pre) {
      return cmd_preprocess(pre_in, pre_transpose, pre_min_total, pre_out,
                            pre_genes);
    }
    if (*fit) {
      ExperimentConfig cfg;
      if (!fit_config.empty()) cfg = parse_experiment_config(slurp(fit_config));
      if (!fit_dataset.empty()) {
        cfg.dataset = fit_dataset;
        cfg.scenario.reset();
      }
      if (fit_transpose) cfg.transpose = true;
      if (!fit_truth.empty()) cfg.truth = fit_truth;
      if (fit_flags.any()) {
        if (!cfg.scenario) cfg.scenario.emplace();
        fit_flags.apply(*cfg.scenario);
        cfg.dataset.reset();
      }
      if (!fit_method.empty()) {
        cfg.method = fit_method == "bayesian" ? Method::Bayesian
                     : fit_method == "cmle"   ? Method::Cmle
                     : fit_method == "kmeans"
                         ? Method::KMeans
                         : throw Error(ErrorKind::ConfigError,
                                       "unknown method '" + fit_method + "'");
      }
      if (!fit_out.empty()) cfg.output_dir = fit_out;
      if (cfg.output_dir.empty()) {
        throw Error(ErrorKind::ConfigError, "fit needs --out or 'output'");
      }
      if (fit_seed) cfg.run.seed = cfg.cmle.seed = *fit_seed;
      if (fit_burn) cfg.run.n_burn = *fit_burn;
      if (fit_keep) cfg.run.n_keep = *fit_keep;
      if (fit_chains) cfg.run.n_chains = *fit_chains;
      if (fit_thin) cfg.run.thin = *fit_thin;
      if (!fit_init.empty()) {
        cfg.run.init.kind =
            fit_init == "single"     ? InitKind::SingleCluster
            : fit_init == "random_k" ? InitKind::RandomK
            : fit_init == "kmeans++"
                ? InitKind::KMeansPlusPlus
                : throw Error(ErrorKind::ConfigError,
                              "unknown init '" + fit_init + "'");
      }
      if (fit_k) cfg.cmle.k = *fit_k;
      if (fit_s) cfg.cmle.s = *fit_s;
      if (fit_threads) cfg.run.n_workers = cfg.cmle.n_workers = *fit_threads;
      if (fit_no_traces) cfg.write_traces = false;
      if (!fit_quiet) {
        cfg.run.progress = [](const Progress& p) {
          std::fprintf(stderr, "chain %d  iter %d/%d  K=%d  loglik=%.2f\n",
                       p.chain_id, p.iteration, p.total, p.k,
                       p.log_likelihood);
        };
      }
      const auto bundle = run_experiment(cfg);
      for (const auto& w : bundle.warnings) std::cerr << "warning: " << w << "\n";
      std::cout << render_report(cfg.output_dir);
      return 0;
    }
    if (*ev) {
      const auto est = read_estimate(ev_est);
      const auto truth = read_truth(ev_truth);
      emit(to_json(evaluate(est, truth)), ev_out);
      return 0;
    }
    if (*dg) {
      const fs::path run = dg_run;
      const auto cfg = parse_experiment_config(
          nlohmann::json::parse(slurp(run / "manifest.json")).at("config").dump());
      const auto loaded = load_data(cfg);
      std::vector<ChainTrace> chains;
      for (int c = 0;; ++c) {
        const auto path = run / "traces" / ("chain_" + std::to_string(c) + ".ndjson");
        if (!fs::exists(path)) break;
        chains.push_back(read_trace(path));
      }
      emit(to_json(psrf_table(chains, loaded.data)), dg_out);
      return 0;
    }
    if (*rp) {
      std::cout << render_report(rp_run);
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error [" << to_string(e.kind()) << "]: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error [ParseError]: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return 0;
}
