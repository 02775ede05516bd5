#pragma once

#include <optional>
#include <span>
#include <vector>

#include "bsgm/core.hpp"

namespace bsgm {

struct CmleConfig {
  int k = 0;  // required
  int s = 0;  // joint row-sparsity budget, required
  int max_iters = 100;
  int n_restarts = 10;
  std::uint64_t seed = 0;
  int n_workers = 0;  // 0: default_thread_count()
  // Optional p x k starting centers, used by the first restart.
  std::optional<Matrix> init_centers;
};

struct CmleResult {
  Matrix mu_hat;           // p x k, at most s non-zero rows
  std::vector<int> z_hat;  // 0-based
  double objective = 0.0;  // ||Y - mu_hat L^T||_F^2
  std::vector<double> restart_objectives;
};

/// Zeroes all but the `s` rows with the largest sum_k sizes[k] * mu(j, k)^2;
/// ties keep the lower row index.
Matrix sparsify_rows(const Matrix& mu, std::span<const int> sizes, int s);

/// sum_i ||Y_i - mu_{z_i}||^2.
double cmle_objective(const DataMatrix& data, const Matrix& mu,
                      std::span<const int> z);

/// Lloyd-style alternation of nearest-center assignment, cluster means and
/// row sparsification, best of `n_restarts`. Restarts alternate k-means++
/// seeding and a uniformly random partition. A heuristic: the global
/// optimum is not guaranteed.
CmleResult fit_cmle(const DataMatrix& data, const CmleConfig& config);

/// Plain k-means through the same machinery with s = p.
CmleResult fit_kmeans(const DataMatrix& data, int k, std::uint64_t seed,
                      int n_restarts = 10, int max_iters = 100);

}  // namespace bsgm
