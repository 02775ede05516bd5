#include "bsgm/ssl_prior.hpp"

#include <cmath>

#include "bsgm/distributions.hpp"

namespace bsgm {
namespace {

double lambda_of(int xi, double lambda0, double lambda1) {
  return xi ? lambda1 : lambda0;
}

// 1 / (1 + exp(-x)) without overflow.
double logistic(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

SslConditionalContext make_ssl_context(const ModelState& state,
                                       const DataMatrix& data,
                                       const Hyperparams& hyper) {
  SslConditionalContext ctx;
  const int k = state.k();
  ctx.cluster_sums.assign(k, Vector::Zero(data.p()));
  ctx.cluster_sizes.assign(k, 0);
  for (std::size_t i = 0; i < state.z.size(); ++i) {
    const int c = state.z[i];
    ctx.cluster_sums[c] += data.values.col(static_cast<Eigen::Index>(i));
    ++ctx.cluster_sizes[c];
  }
  ctx.lambda0 = hyper.lambda0;
  ctx.lambda1 = hyper.lambda1;
  ctx.beta_theta = hyper.beta_theta;
  ctx.mode = hyper.ssl_mode;
  return ctx;
}

void update_mu(ModelState& state, const SslConditionalContext& ctx, Rng& rng) {
  for (int c = 0; c < state.k(); ++c) {
    Cluster& cl = state.clusters[c];
    const double n_c = ctx.cluster_sizes[c];
    const Vector& sum = ctx.cluster_sums[c];
    for (Eigen::Index j = 0; j < cl.mu.size(); ++j) {
      const double lam =
          lambda_of(indicator(state, cl, j, ctx.mode), ctx.lambda0, ctx.lambda1);
      const double precision = n_c + lam * lam / cl.phi[j];
      const double var = 1.0 / precision;
      cl.mu[j] = sum[j] * var + std::sqrt(var) * rng.normal();
    }
  }
}

void update_phi(ModelState& state, const Hyperparams& hyper, Rng& rng) {
  for (Cluster& cl : state.clusters) {
    for (Eigen::Index j = 0; j < cl.phi.size(); ++j) {
      const double lam = lambda_of(indicator(state, cl, j, hyper.ssl_mode),
                                   hyper.lambda0, hyper.lambda1);
      const double chi = cl.mu[j] * cl.mu[j] * lam * lam;
      cl.phi[j] = sample_gig({0.5, chi, 1.0}, rng);
    }
  }
}

double xi_inclusion_prob(std::span<const double> mu, std::span<const double> phi,
                         double theta, double lambda0, double lambda1) {
  // log-odds of slab versus spike, accumulated per cluster.
  double log_odds = std::log(theta) - std::log1p(-theta);
  const double log_ratio = std::log(lambda1) - std::log(lambda0);
  const double dl2 = lambda0 * lambda0 - lambda1 * lambda1;
  for (std::size_t c = 0; c < mu.size(); ++c) {
    log_odds += log_ratio + 0.5 * dl2 * mu[c] * mu[c] / phi[c];
  }
  return logistic(log_odds);
}

void update_xi(ModelState& state, const Hyperparams& hyper, Rng& rng) {
  const double l0 = hyper.lambda0;
  const double l1 = hyper.lambda1;
  if (hyper.ssl_mode == SslMode::JointSSL) {
    const int k = state.k();
    std::vector<double> mu(k), phi(k);
    for (Eigen::Index j = 0; j < state.xi.size(); ++j) {
      for (int c = 0; c < k; ++c) {
        mu[c] = state.clusters[c].mu[j];
        phi[c] = state.clusters[c].phi[j];
      }
      const double prob = xi_inclusion_prob(mu, phi, state.theta, l0, l1);
      state.xi[j] = rng.bernoulli(prob) ? 1 : 0;
    }
    return;
  }
  for (Cluster& cl : state.clusters) {
    for (Eigen::Index j = 0; j < cl.xi.size(); ++j) {
      const double m = cl.mu[j];
      const double f = cl.phi[j];
      const double prob = xi_inclusion_prob({&m, 1}, {&f, 1}, state.theta, l0, l1);
      cl.xi[j] = rng.bernoulli(prob) ? 1 : 0;
    }
  }
}

void update_theta(ModelState& state, const Hyperparams& hyper, Rng& rng) {
  double included = 0.0;
  double total = 0.0;
  if (hyper.ssl_mode == SslMode::JointSSL) {
    included = state.xi.sum();
    total = static_cast<double>(state.xi.size());
  } else {
    for (const Cluster& cl : state.clusters) {
      included += cl.xi.sum();
      total += static_cast<double>(cl.xi.size());
    }
  }
  double theta = rng.beta(1.0 + included, hyper.beta_theta + total - included);
  // Keep log(theta) and log(1 - theta) finite for the next xi update.
  constexpr double kEps = 1e-300;
  if (theta < kEps) theta = kEps;
  if (theta >= 1.0) theta = std::nextafter(1.0, 0.0);
  state.theta = theta;
}

Cluster draw_prior_cluster(const ModelState& state, const Hyperparams& hyper,
                           Eigen::Index p, Rng& rng) {
  Cluster cl;
  if (hyper.ssl_mode == SslMode::ColumnSSL) {
    cl.xi.resize(p);
    for (Eigen::Index j = 0; j < p; ++j) {
      cl.xi[j] = rng.bernoulli(state.theta) ? 1 : 0;
    }
  }
  cl.phi.resize(p);
  for (Eigen::Index j = 0; j < p; ++j) cl.phi[j] = 2.0 * rng.exponential();
  cl.mu.resize(p);
  for (Eigen::Index j = 0; j < p; ++j) {
    const double lam = lambda_of(indicator(state, cl, j, hyper.ssl_mode),
                                 hyper.lambda0, hyper.lambda1);
    cl.mu[j] = std::sqrt(cl.phi[j]) / lam * rng.normal();
  }
  cl.size = 0;
  return cl;
}

}  // namespace bsgm
