#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bsgm/cmle.hpp"
#include "bsgm/core.hpp"
#include "bsgm/gibbs.hpp"
#include "bsgm/io.hpp"
#include "bsgm/posterior.hpp"
#include "bsgm/synthgen.hpp"

namespace bsgm {

inline constexpr const char* kVersion = "0.1.0";

enum class Method { Bayesian, Cmle, KMeans };

/// Hyperparameter fields left empty take their data-dependent defaults.
struct HyperOverrides {
  std::optional<double> lambda0, lambda1, kappa, beta_theta, alpha,
      poisson_lambda;
  std::optional<int> k_max;
  std::optional<SslMode> ssl_mode;
  std::optional<VnMode> vn_mode;
};

/// Defaults for p, then overrides. beta_theta follows an overridden kappa
/// unless set itself; k_max is capped at n unless set explicitly.
Hyperparams resolve_hyperparams(const HyperOverrides& overrides,
                                Eigen::Index p, Eigen::Index n);

struct ExperimentConfig {
  // Exactly one of `dataset` and `scenario`.
  std::optional<std::filesystem::path> dataset;
  bool transpose = false;
  std::optional<std::filesystem::path> truth;  // sidecar for a dataset
  std::optional<ScenarioSpec> scenario;

  Method method = Method::Bayesian;
  HyperOverrides hyper;
  RunConfig run;
  CmleConfig cmle;  // k = 0 / s = 0 fall back to the truth when known
  std::filesystem::path output_dir;  // empty: nothing is written
  bool write_traces = true;
};

/// Throws ConfigError on malformed JSON, unknown enum names or wrongly
/// typed fields.
ExperimentConfig parse_experiment_config(std::string_view json_text);
std::string to_json(const ExperimentConfig& config);

/// Throws ConfigError unless exactly one data source is given and a dataset
/// path (and truth path) exists.
void check_config(const ExperimentConfig& config);

struct LoadedData {
  DataMatrix data;
  std::optional<Truth> truth;
};

LoadedData load_data(const ExperimentConfig& config);

struct Evaluation {
  double ari = 0.0;
  std::optional<double> nmi;  // empty when either partition is a single cluster
  double d_hamming = 0.0;
  double mean_matrix_error = 0.0;
  int k_hat = 0;
  int k_true = 0;
};

Evaluation evaluate(const ClusterEstimate& est, const Truth& truth);
std::string to_json(const Evaluation& eval);
std::string to_json(const std::vector<PsrfEntry>& table);

struct ReportBundle {
  ClusterEstimate estimate;
  Hyperparams hyper;
  std::optional<PosteriorEstimate> posterior;  // Bayesian only
  std::optional<Evaluation> evaluation;
  std::vector<PsrfEntry> psrf;  // Bayesian with >= 2 chains
  std::vector<std::string> warnings;
  std::vector<std::filesystem::path> files;  // relative to output_dir
};

/// Load or simulate, fit, align, estimate, evaluate against the truth when
/// known, diagnose, and write the run directory.
ReportBundle run_experiment(const ExperimentConfig& config);

/// Plain-text summary of a run directory.
std::string render_report(const std::filesystem::path& run_dir);

}  // namespace bsgm
