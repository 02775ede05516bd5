#include "bsgm/cmle.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <limits>
#include <numeric>
#include <thread>

#include "bsgm/gibbs.hpp"
#include "bsgm/rng.hpp"

namespace bsgm {

Matrix sparsify_rows(const Matrix& mu, std::span<const int> sizes, int s) {
  const Eigen::Index p = mu.rows();
  if (s >= p) return mu;
  Vector score = Vector::Zero(p);
  for (Eigen::Index k = 0; k < mu.cols(); ++k) {
    score += static_cast<double>(sizes[k]) * mu.col(k).cwiseAbs2();
  }
  std::vector<Eigen::Index> order(static_cast<std::size_t>(p));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) {
                     return score[a] > score[b];
                   });
  Matrix out = Matrix::Zero(p, mu.cols());
  for (int r = 0; r < std::max(s, 0); ++r) out.row(order[r]) = mu.row(order[r]);
  return out;
}

double cmle_objective(const DataMatrix& data, const Matrix& mu,
                      std::span<const int> z) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    acc += (data.values.col(i) - mu.col(z[i])).squaredNorm();
  }
  return acc;
}

namespace {

struct Fit {
  Matrix mu;
  std::vector<int> z;
  double objective = std::numeric_limits<double>::infinity();
};

Matrix cluster_means(const Matrix& y, std::span<const int> z, int k,
                     std::vector<int>& sizes) {
  Matrix mu = Matrix::Zero(y.rows(), k);
  sizes.assign(static_cast<std::size_t>(k), 0);
  for (Eigen::Index i = 0; i < y.cols(); ++i) {
    mu.col(z[i]) += y.col(i);
    ++sizes[z[i]];
  }
  for (int c = 0; c < k; ++c) {
    if (sizes[c] > 0) mu.col(c) /= static_cast<double>(sizes[c]);
  }
  return mu;
}

// Nearest center with ties to the lowest index, then re-seed empty clusters
// at the currently worst-fit observation.
void assign(const Matrix& y, const Matrix& mu, std::vector<int>& z) {
  const Eigen::Index n = y.cols();
  const int k = static_cast<int>(mu.cols());
  Vector fit(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (int c = 0; c < k; ++c) {
      const double d = (y.col(i) - mu.col(c)).squaredNorm();
      if (d < best) {
        best = d;
        z[i] = c;
      }
    }
    fit[i] = best;
  }
  std::vector<int> sizes(static_cast<std::size_t>(k), 0);
  for (int label : z) ++sizes[label];
  for (int c = 0; c < k; ++c) {
    if (sizes[c] > 0) continue;
    Eigen::Index worst = -1;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (sizes[z[i]] < 2) continue;
      if (worst < 0 || fit[i] > fit[worst]) worst = i;
    }
    if (worst < 0) break;
    --sizes[z[worst]];
    z[worst] = c;
    sizes[c] = 1;
    fit[worst] = 0.0;
  }
}

Fit lloyd(const DataMatrix& data, const CmleConfig& cfg, std::vector<int> z) {
  const Matrix& y = data.values;
  std::vector<int> sizes;
  Fit best;
  std::vector<int> previous;
  for (int iter = 0; iter < cfg.max_iters; ++iter) {
    const Matrix means = cluster_means(y, z, cfg.k, sizes);
    const Matrix mu = sparsify_rows(means, sizes, cfg.s);
    const double obj = cmle_objective(data, mu, z);
    if (obj < best.objective) best = {mu, z, obj};
    previous = z;
    assign(y, mu, z);
    if (z == previous) break;
  }
  return best;
}

std::vector<int> initial_labels(const DataMatrix& data, const CmleConfig& cfg,
                                int restart) {
  const Eigen::Index n = data.n();
  std::vector<int> z(static_cast<std::size_t>(n));
  if (restart == 0 && cfg.init_centers) {
    assign(data.values, *cfg.init_centers, z);
    return z;
  }
  Rng rng = Rng::stream(cfg.seed, static_cast<std::uint64_t>(restart));
  if (restart % 2 == 0) return kmeanspp_labels(data.values, cfg.k, rng);
  for (auto& label : z) label = static_cast<int>(rng.uniform_index(cfg.k));
  // A uniformly random partition may miss clusters; give each one a member.
  for (int c = 0; c < cfg.k; ++c) {
    if (std::find(z.begin(), z.end(), c) == z.end()) {
      z[static_cast<std::size_t>(c)] = c;
    }
  }
  return z;
}

}  // namespace

CmleResult fit_cmle(const DataMatrix& data, const CmleConfig& cfg) {
  validate_dataset(data);
  if (cfg.k < 1 || cfg.k > data.n()) {
    throw Error(ErrorKind::InvalidK, "cmle k outside [1, n]");
  }
  if (cfg.s < 1 || cfg.s > data.p()) {
    throw Error(ErrorKind::ConfigError, "cmle s outside [1, p]");
  }
  if (cfg.n_restarts < 1 || cfg.max_iters < 1) {
    throw Error(ErrorKind::ConfigError,
                "cmle needs positive n_restarts and max_iters");
  }
  if (cfg.init_centers && (cfg.init_centers->rows() != data.p() ||
                           cfg.init_centers->cols() != cfg.k)) {
    throw Error(ErrorKind::DimensionMismatch, "init_centers must be p x k");
  }

  std::vector<Fit> fits(static_cast<std::size_t>(cfg.n_restarts));
  std::vector<std::exception_ptr> errors(fits.size());
  std::atomic<int> next{0};
  auto work = [&] {
    for (int r; (r = next.fetch_add(1)) < cfg.n_restarts;) {
      try {
        fits[r] = lloyd(data, cfg, initial_labels(data, cfg, r));
      } catch (...) {
        errors[r] = std::current_exception();
      }
    }
  };
  const int workers = std::min(
      cfg.n_restarts, cfg.n_workers > 0 ? cfg.n_workers : default_thread_count());
  {
    std::vector<std::jthread> pool;
    for (int w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  CmleResult out;
  std::size_t best = 0;
  for (std::size_t r = 0; r < fits.size(); ++r) {
    out.restart_objectives.push_back(fits[r].objective);
    if (fits[r].objective < fits[best].objective) best = r;
  }
  out.mu_hat = std::move(fits[best].mu);
  out.z_hat = std::move(fits[best].z);
  out.objective = fits[best].objective;
  return out;
}

CmleResult fit_kmeans(const DataMatrix& data, int k, std::uint64_t seed,
                      int n_restarts, int max_iters) {
  CmleConfig cfg;
  cfg.k = k;
  cfg.s = static_cast<int>(data.p());
  cfg.seed = seed;
  cfg.n_restarts = n_restarts;
  cfg.max_iters = max_iters;
  return fit_cmle(data, cfg);
}

}  // namespace bsgm
