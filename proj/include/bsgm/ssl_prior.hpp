#pragma once

#include <span>
#include <vector>

#include "bsgm/core.hpp"
#include "bsgm/rng.hpp"

namespace bsgm {

/// Sufficient statistics of the current partition.
struct SslConditionalContext {
  std::vector<Vector> cluster_sums;  // sum of Y_l over l in c
  std::vector<int> cluster_sizes;
  double lambda0 = 100.0;
  double lambda1 = 1.0;
  double beta_theta = 1.0;
  SslMode mode = SslMode::JointSSL;
};

SslConditionalContext make_ssl_context(const ModelState& state,
                                       const DataMatrix& data,
                                       const Hyperparams& hyper);

/// Indicator of feature j in cluster c under the active SSL mode.
inline int indicator(const ModelState& state, const Cluster& cluster,
                     Eigen::Index j, SslMode mode) {
  return mode == SslMode::JointSSL ? state.xi[j] : cluster.xi[j];
}

/// (mu_c)_j ~ N(S_cj / (n_c + lambda^2/phi_cj), 1 / (n_c + lambda^2/phi_cj)),
/// clusters in label order, coordinates ascending.
void update_mu(ModelState& state, const SslConditionalContext& ctx, Rng& rng);

/// (phi_c)_j ~ GIG(1/2, (mu_c)_j^2 lambda^2, 1).
void update_phi(ModelState& state, const Hyperparams& hyper, Rng& rng);

/// Posterior inclusion probability of one feature given its (mu, phi) pairs
/// across the clusters sharing the indicator. The 1/sqrt(phi) factors of the
/// two hypotheses are identical and cancel, so they are left out.
double xi_inclusion_prob(std::span<const double> mu, std::span<const double> phi,
                         double theta, double lambda0, double lambda1);

/// xi_j ~ Bernoulli(theta') for every feature (JointSSL) or every
/// (cluster, feature) pair (ColumnSSL, cluster-major order).
void update_xi(ModelState& state, const Hyperparams& hyper, Rng& rng);

/// theta ~ Beta(1 + sum xi, beta_theta + m - sum xi), m = p (JointSSL) or
/// p K (ColumnSSL).
void update_theta(ModelState& state, const Hyperparams& hyper, Rng& rng);

/// Fresh cluster from the prior given the current indicators: phi_j ~
/// Exp(rate 1/2), mu_j ~ N(0, phi_j / lambda^2). In ColumnSSL a fresh
/// indicator column ~ Bernoulli(theta) is drawn first.
Cluster draw_prior_cluster(const ModelState& state, const Hyperparams& hyper,
                           Eigen::Index p, Rng& rng);

}  // namespace bsgm
