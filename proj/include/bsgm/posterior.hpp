#pragma once

#include <string>
#include <utility>
#include <vector>

#include "bsgm/core.hpp"

namespace bsgm {

/// A trace after label alignment. Snapshot labels live in the reference
/// snapshot's label space: matched clusters take the reference label,
/// surplus clusters take labels K_ref, K_ref + 1, ... in their original
/// order. Column c of an aligned snapshot's `mu` holds label c; columns of
/// labels absent from that snapshot are zero.
struct AlignedTrace {
  TraceMeta meta;
  std::vector<Snapshot> snapshots;
  std::vector<std::vector<int>> permutations;  // [b][old label] = new label
  std::size_t reference = 0;
};

/// ||Y - mu L^T||_F^2 for one snapshot (off-support rows of mu are zero).
double reconstruction_error(const Snapshot& snap, const DataMatrix& data);

/// Index of the snapshot with the smallest reconstruction error (first on
/// ties).
std::size_t best_snapshot(const std::vector<Snapshot>& snaps,
                          const DataMatrix& data);

/// Permutation old -> new label of `snap` that minimizes
/// ||mu_ref - mu_snap P||_F^2, padding the cost matrix when cluster counts
/// differ.
std::vector<int> alignment_permutation(const Snapshot& snap,
                                       const Matrix& ref_mu_dense,
                                       Eigen::Index p);

Snapshot apply_permutation(const Snapshot& snap, const std::vector<int>& perm);

/// Reference snapshot = reconstruction-error minimizer; every snapshot is
/// permuted onto it. Throws ConfigError on an empty trace.
AlignedTrace align_labels(const ChainTrace& trace, const DataMatrix& data);

/// Aligns onto an explicitly given reference snapshot.
AlignedTrace align_to(const ChainTrace& trace, const Snapshot& reference,
                      Eigen::Index p);

struct PosteriorEstimate {
  ClusterEstimate estimate;
  int k_mode = 0;                             // posterior mode of K
  std::vector<std::pair<int, int>> k_counts;  // (K, #snapshots), K ascending
  Vector inclusion;                           // posterior mean of xi_j
};

/// K mode, per-observation modal label among snapshots with K equal to the
/// mode, mean aligned cluster means over the same snapshots, and features
/// with inclusion frequency >= `support_threshold`. Labels of z_hat are
/// compacted to 0..k_hat-1 in aligned-label order; k_hat is the number of
/// labels that z_hat actually uses (normally equal to k_mode).
PosteriorEstimate point_estimates(const AlignedTrace& aligned, Eigen::Index p,
                                  double support_threshold = 0.5);

/// Gelman-Rubin potential scale reduction factor over equal-length chains.
/// Returns 1 when every chain is constant at the same value and +inf when
/// within-chain variance is zero but chain means differ.
double psrf(const std::vector<std::vector<double>>& chains);

struct PsrfEntry {
  std::string name;
  double value = 0.0;
};

/// PSRF of theta, K, and mu_k[0] for every aligned label present in every
/// snapshot of every chain; all chains share the pooled best reference.
std::vector<PsrfEntry> psrf_table(const std::vector<ChainTrace>& chains,
                                  const DataMatrix& data);

}  // namespace bsgm
