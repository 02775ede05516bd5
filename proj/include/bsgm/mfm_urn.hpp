#pragma once

#include <vector>

#include "bsgm/core.hpp"
#include "bsgm/rng.hpp"

namespace bsgm {

/// log V_n(t) for t = 1..k_max; V_n(t) = 0 beyond the truncation.
class VnTable {
 public:
  VnTable() = default;
  VnTable(Eigen::Index n, std::vector<double> log_vn)
      : n_(n), log_vn_(std::move(log_vn)) {}

  /// -infinity for t < 1 or t > k_max.
  double log_vn(int t) const;
  int k_max() const { return static_cast<int>(log_vn_.size()); }
  Eigen::Index n() const { return n_; }

 private:
  Eigen::Index n_ = 0;
  std::vector<double> log_vn_;
};

/// Exact mode: V_n(t) = sum_{k=t}^{k_max} p_K(k) k_(t) / (alpha k)^(n) with
/// p_K the truncated Poisson prior, evaluated in log space.
/// Approximate mode: (t!/n!) Gamma(alpha t) / n^(alpha t - 1) p_K(t).
VnTable build_vn_table(Eigen::Index n, const Hyperparams& hyper);

/// Log-weights of the reseating categorical for observation i; exposed so
/// tests can inspect them. `removed` describes the state after i has been
/// taken out of its cluster; the candidate's weight is the last entry, or
/// absent when the candidate is suppressed.
struct ReseatWeights {
  std::vector<double> log_weights;
  bool has_candidate = false;
};

ReseatWeights reseat_log_weights(const ModelState& removed,
                                 const Cluster* candidate,
                                 const VnTable& vn,
                                 Eigen::Ref<const Vector> y,
                                 const Hyperparams& hyper);

/// Removes observation i, draws its new cluster (possibly a new one), and
/// keeps labels dense. A departing singleton is offered back as the
/// candidate; otherwise the candidate is drawn from the prior. With
/// t = k_max remaining clusters the candidate is suppressed and no prior
/// draw happens. `offered`, when given, receives the candidate.
void reseat_observation(Eigen::Index i, ModelState& state, const VnTable& vn,
                        const DataMatrix& data, const Hyperparams& hyper,
                        Rng& rng, Cluster* offered = nullptr);

}  // namespace bsgm
