#pragma once

#include <functional>
#include <vector>

#include "bsgm/core.hpp"
#include "bsgm/mfm_urn.hpp"
#include "bsgm/rng.hpp"

namespace bsgm {

enum class InitKind { SingleCluster, RandomK, KMeansPlusPlus };

struct InitSpec {
  InitKind kind = InitKind::RandomK;
  int k = 0;  // 0 selects min(round(poisson_lambda), k_max)
};

/// Starting value of the inclusion indicators.
enum class XiInit { AllSlab, AllSpike };

struct Progress {
  int chain_id = 0;
  int iteration = 0;  // 1-based, counting burn-in
  int total = 0;
  int k = 0;
  double log_likelihood = 0.0;
};

using ProgressFn = std::function<void(const Progress&)>;

struct RunConfig {
  int n_burn = 1000;
  int n_keep = 4000;
  int n_chains = 1;
  int thin = 1;
  std::uint64_t seed = 0;
  InitSpec init;
  XiInit xi_init = XiInit::AllSlab;
  bool dense_snapshots = false;
  int n_workers = 0;  // 0: BSGM_THREADS or hardware concurrency
  int progress_every = 100;
  ProgressFn progress;
};

/// Worker count from the BSGM_THREADS environment variable, falling back to
/// the hardware concurrency.
int default_thread_count();

/// D^2-seeded centers (observation indices), then nearest-center labels
/// (ties to the lower center).
std::vector<int> kmeanspp_labels(const Matrix& y, int k, Rng& rng);

/// Initial partition per `init`, cluster means at the cluster sample means,
/// phi = 1, xi per `xi_init`, theta at its prior mean 1 / (1 + beta_theta).
/// Throws InvalidK when the requested k exceeds k_max or n.
ModelState init_state(const DataMatrix& data, const Hyperparams& hyper,
                      const InitSpec& init, XiInit xi_init, Rng& rng);

/// One full iteration: reseat i = 0..n-1, then mu, phi, xi, theta.
void sweep(ModelState& state, const DataMatrix& data, const VnTable& vn,
           const Hyperparams& hyper, Rng& rng);

/// sum_i log N(Y_i | mu_{z_i}, I_p).
double log_likelihood(const ModelState& state, const DataMatrix& data);

Snapshot take_snapshot(const ModelState& state, const Hyperparams& hyper,
                       bool dense);

ChainTrace run_chain(const DataMatrix& data, const Hyperparams& hyper,
                     const RunConfig& config, int chain_id);

/// Chains in chain_id order; output does not depend on the worker count.
std::vector<ChainTrace> run_chains(const DataMatrix& data,
                                   const Hyperparams& hyper,
                                   const RunConfig& config);

}  // namespace bsgm
