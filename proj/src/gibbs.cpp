#include "bsgm/gibbs.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <numbers>
#include <thread>

#include "bsgm/ssl_prior.hpp"

namespace bsgm {

int default_thread_count() {
  if (const char* env = std::getenv("BSGM_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

std::vector<int> kmeanspp_labels(const Matrix& y, int k, Rng& rng) {
  const Eigen::Index n = y.cols();
  std::vector<Eigen::Index> centers;
  centers.push_back(static_cast<Eigen::Index>(rng.uniform_index(n)));
  Vector d2 =
      (y.colwise() - y.col(centers[0])).colwise().squaredNorm().transpose();
  while (static_cast<int>(centers.size()) < k) {
    const double total = d2.sum();
    Eigen::Index next = 0;
    if (total > 0.0) {
      const double u = rng.uniform() * total;
      double acc = 0.0;
      next = n - 1;
      for (Eigen::Index i = 0; i < n; ++i) {
        acc += d2[i];
        if (u < acc) {
          next = i;
          break;
        }
      }
    } else {
      next = static_cast<Eigen::Index>(rng.uniform_index(n));
    }
    centers.push_back(next);
    const Vector dn =
        (y.colwise() - y.col(next)).colwise().squaredNorm().transpose();
    d2 = d2.cwiseMin(dn);
  }
  std::vector<int> z(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (int c = 0; c < k; ++c) {
      const double d = (y.col(i) - y.col(centers[c])).squaredNorm();
      if (d < best) {
        best = d;
        z[i] = c;
      }
    }
  }
  return z;
}

ModelState init_state(const DataMatrix& data, const Hyperparams& hyper,
                      const InitSpec& init, XiInit xi_init, Rng& rng) {
  const Eigen::Index p = data.p();
  const Eigen::Index n = data.n();
  int k = init.k;
  if (k == 0) {
    k = std::min(static_cast<int>(std::lround(hyper.poisson_lambda)),
                 hyper.k_max);
    k = std::max(k, 1);
  }
  if (init.kind == InitKind::SingleCluster) k = 1;
  if (k < 1 || k > hyper.k_max || k > n) {
    throw Error(ErrorKind::InvalidK, "initial k = " + std::to_string(k) +
                                         " outside [1, min(k_max, n)]");
  }

  ModelState s;
  s.z.assign(static_cast<std::size_t>(n), 0);
  switch (init.kind) {
    case InitKind::SingleCluster:
      break;
    case InitKind::RandomK:
      for (auto& label : s.z) label = static_cast<int>(rng.uniform_index(k));
      break;
    case InitKind::KMeansPlusPlus:
      s.z = kmeanspp_labels(data.values, k, rng);
      break;
  }
  s.clusters.resize(static_cast<std::size_t>(k));
  compact_labels(s);

  const int slab = xi_init == XiInit::AllSlab ? 1 : 0;
  std::vector<Vector> sums(s.clusters.size(), Vector::Zero(p));
  for (Eigen::Index i = 0; i < n; ++i) sums[s.z[i]] += data.values.col(i);
  for (std::size_t c = 0; c < s.clusters.size(); ++c) {
    Cluster& cl = s.clusters[c];
    cl.mu = sums[c] / static_cast<double>(cl.size);
    cl.phi = Vector::Ones(p);
    if (hyper.ssl_mode == SslMode::ColumnSSL) {
      cl.xi = Eigen::VectorXi::Constant(p, slab);
    }
  }
  if (hyper.ssl_mode == SslMode::JointSSL) {
    s.xi = Eigen::VectorXi::Constant(p, slab);
  }
  s.theta = 1.0 / (1.0 + hyper.beta_theta);
  return s;
}

void sweep(ModelState& state, const DataMatrix& data, const VnTable& vn,
           const Hyperparams& hyper, Rng& rng) {
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    reseat_observation(i, state, vn, data, hyper, rng);
  }
  const auto ctx = make_ssl_context(state, data, hyper);
  update_mu(state, ctx, rng);
  update_phi(state, hyper, rng);
  update_xi(state, hyper, rng);
  update_theta(state, hyper, rng);
#ifndef NDEBUG
  check_state(state, hyper, data.p());
#endif
}

double log_likelihood(const ModelState& state, const DataMatrix& data) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    acc += (data.values.col(i) - state.clusters[state.z[i]].mu).squaredNorm();
  }
  const double np = static_cast<double>(data.n() * data.p());
  return -0.5 * acc - 0.5 * np * std::log(2.0 * std::numbers::pi);
}

Snapshot take_snapshot(const ModelState& state, const Hyperparams& hyper,
                       bool dense) {
  Snapshot snap;
  snap.z = state.z;
  snap.k = state.k();
  snap.theta = state.theta;
  snap.dense = dense;
  const Eigen::Index p = state.clusters.front().mu.size();
  for (Eigen::Index j = 0; j < p; ++j) {
    bool on = false;
    if (hyper.ssl_mode == SslMode::JointSSL) {
      on = state.xi[j] != 0;
    } else {
      for (const Cluster& cl : state.clusters) on = on || cl.xi[j] != 0;
    }
    if (on) snap.support.push_back(static_cast<int>(j));
  }
  const Eigen::Index rows =
      dense ? p : static_cast<Eigen::Index>(snap.support.size());
  snap.mu.resize(rows, snap.k);
  for (int c = 0; c < snap.k; ++c) {
    const Vector& mu = state.clusters[c].mu;
    if (dense) {
      snap.mu.col(c) = mu;
    } else {
      for (Eigen::Index r = 0; r < rows; ++r) snap.mu(r, c) = mu[snap.support[r]];
    }
  }
  return snap;
}

ChainTrace run_chain(const DataMatrix& data, const Hyperparams& hyper,
                     const RunConfig& config, int chain_id) {
  validate_dataset(data);
  check_hyperparams(hyper, data.n());
  if (config.n_burn < 0 || config.n_keep < 1 || config.thin < 1) {
    throw Error(ErrorKind::ConfigError,
                "run needs n_burn >= 0, n_keep >= 1, thin >= 1");
  }

  Rng rng = Rng::stream(config.seed, static_cast<std::uint64_t>(chain_id));
  const VnTable vn = build_vn_table(data.n(), hyper);
  ModelState state = init_state(data, hyper, config.init, config.xi_init, rng);

  ChainTrace trace;
  trace.meta.n_burn = config.n_burn;
  trace.meta.thin = config.thin;
  trace.meta.seed = config.seed;
  trace.meta.chain_id = chain_id;
  trace.meta.hyper_hash = hyperparams_hash(hyper);
  trace.meta.p = data.p();
  trace.meta.n = data.n();
  trace.snapshots.reserve(static_cast<std::size_t>(config.n_keep));

  const int total = config.n_burn + config.n_keep * config.thin;
  for (int it = 1; it <= total; ++it) {
    sweep(state, data, vn, hyper, rng);
    const int kept_phase = it - config.n_burn;
    if (kept_phase > 0 && kept_phase % config.thin == 0) {
      trace.snapshots.push_back(
          take_snapshot(state, hyper, config.dense_snapshots));
    }
    if (config.progress && config.progress_every > 0 &&
        (it % config.progress_every == 0 || it == total)) {
      config.progress(
          {chain_id, it, total, state.k(), log_likelihood(state, data)});
    }
  }
  return trace;
}

std::vector<ChainTrace> run_chains(const DataMatrix& data,
                                   const Hyperparams& hyper,
                                   const RunConfig& config) {
  if (config.n_chains < 1) {
    throw Error(ErrorKind::ConfigError, "n_chains must be >= 1");
  }
  const int workers = std::min(
      config.n_workers > 0 ? config.n_workers : default_thread_count(),
      config.n_chains);
  std::vector<ChainTrace> out(static_cast<std::size_t>(config.n_chains));
  if (workers <= 1) {
    for (int c = 0; c < config.n_chains; ++c) out[c] = run_chain(data, hyper, config, c);
    return out;
  }

  RunConfig cfg = config;
  std::mutex progress_mutex;
  if (config.progress) {
    cfg.progress = [&](const Progress& pr) {
      std::lock_guard lock(progress_mutex);
      config.progress(pr);
    };
  }
  std::atomic<int> next{0};
  std::vector<std::exception_ptr> errors(out.size());
  {
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (int c = next++; c < cfg.n_chains; c = next++) {
          try {
            out[c] = run_chain(data, hyper, cfg, c);
          } catch (...) {
            errors[c] = std::current_exception();
          }
        }
      });
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

}  // namespace bsgm
