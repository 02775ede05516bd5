#pragma once

#include <span>
#include <vector>

#include "bsgm/core.hpp"

namespace bsgm {

/// Counts of (true cluster k, estimated cluster k'). Labels of both inputs
/// are arbitrary integers, mapped to rows/columns in ascending order.
struct ContingencyTable {
  Eigen::MatrixXi counts;
  std::vector<int> row_totals;
  std::vector<int> col_totals;
  int n = 0;
};

ContingencyTable contingency(std::span<const int> z_true,
                             std::span<const int> z_est);

/// Adjusted Rand index. Returns 1 when both partitions are identical and
/// the index is 0/0 (all-in-one or all-singletons on both sides).
double ari(std::span<const int> z_true, std::span<const int> z_est);

/// Mutual information over the geometric mean of the two entropies.
/// Throws DegeneratePartition when either side has a single cluster.
double nmi(std::span<const int> z_true, std::span<const int> z_est);

/// Mis-clustering rate (1/n) min over label permutations tau of
/// #{i : z_i != tau(z'_i)}, labels in [0, k).
double min_hamming(std::span<const int> z, std::span<const int> z_prime, int k);

/// Same, with both label sets densified and k = the larger label count.
double min_hamming(std::span<const int> z, std::span<const int> z_prime);

/// || mu_hat L_hat^T - mu_true L_true^T ||_F^2, i.e. the sum over
/// observations of || mu_hat[z_hat_i] - mu_true[z_true_i] ||^2.
double mean_matrix_error(const Matrix& mu_hat, std::span<const int> z_hat,
                         const Matrix& mu_true, std::span<const int> z_true);

/// Labels remapped to 0..K-1 in order of increasing original label.
std::vector<int> densify_labels(std::span<const int> z);

}  // namespace bsgm
