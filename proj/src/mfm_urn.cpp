#include "bsgm/mfm_urn.hpp"

#include <cmath>
#include <limits>

#include "bsgm/distributions.hpp"
#include "bsgm/ssl_prior.hpp"

namespace bsgm {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// log of the rising factorial x^(m) = x (x+1) ... (x+m-1).
double log_rising(double x, Eigen::Index m) {
  double acc = 0.0;
  for (Eigen::Index r = 0; r < m; ++r) acc += std::log(x + static_cast<double>(r));
  return acc;
}

// log of the falling factorial k_(t) = k (k-1) ... (k-t+1); -inf when t > k.
double log_falling(int k, int t) {
  if (t > k) return kNegInf;
  double acc = 0.0;
  for (int r = 0; r < t; ++r) acc += std::log(static_cast<double>(k - r));
  return acc;
}

}  // namespace

double VnTable::log_vn(int t) const {
  if (t < 1 || t > k_max()) return kNegInf;
  return log_vn_[static_cast<std::size_t>(t - 1)];
}

VnTable build_vn_table(Eigen::Index n, const Hyperparams& hyper) {
  const int k_max = hyper.k_max;
  std::vector<double> log_pk(static_cast<std::size_t>(k_max));
  for (int k = 1; k <= k_max; ++k) {
    log_pk[k - 1] = log_trunc_poisson_pmf(k, hyper.poisson_lambda, k_max);
  }
  std::vector<double> out(static_cast<std::size_t>(k_max));
  if (hyper.vn_mode == VnMode::Approximate) {
    const double nd = static_cast<double>(n);
    for (int t = 1; t <= k_max; ++t) {
      const double at = hyper.alpha * t;
      out[t - 1] = std::lgamma(t + 1.0) - std::lgamma(nd + 1.0) +
                   std::lgamma(at) - (at - 1.0) * std::log(nd) + log_pk[t - 1];
    }
    return VnTable(n, std::move(out));
  }
  std::vector<double> log_rise(static_cast<std::size_t>(k_max));
  for (int k = 1; k <= k_max; ++k) {
    log_rise[k - 1] = log_rising(hyper.alpha * k, n);
  }
  std::vector<double> terms;
  for (int t = 1; t <= k_max; ++t) {
    terms.clear();
    for (int k = t; k <= k_max; ++k) {
      terms.push_back(log_pk[k - 1] + log_falling(k, t) - log_rise[k - 1]);
    }
    out[t - 1] = log_sum_exp(terms);
  }
  return VnTable(n, std::move(out));
}

ReseatWeights reseat_log_weights(const ModelState& removed,
                                 const Cluster* candidate, const VnTable& vn,
                                 Eigen::Ref<const Vector> y,
                                 const Hyperparams& hyper) {
  ReseatWeights w;
  const int t = removed.k();
  w.log_weights.reserve(static_cast<std::size_t>(t) + 1);
  // The -(p/2) log(2 pi) term is common to every entry and dropped.
  for (const Cluster& cl : removed.clusters) {
    w.log_weights.push_back(std::log(cl.size + hyper.alpha) -
                            0.5 * (y - cl.mu).squaredNorm());
  }
  if (candidate != nullptr) {
    w.has_candidate = true;
    w.log_weights.push_back(std::log(hyper.alpha) + vn.log_vn(t + 1) -
                            vn.log_vn(t) -
                            0.5 * (y - candidate->mu).squaredNorm());
  }
  return w;
}

void reseat_observation(Eigen::Index i, ModelState& state, const VnTable& vn,
                        const DataMatrix& data, const Hyperparams& hyper,
                        Rng& rng, Cluster* offered) {
  const auto idx = static_cast<std::size_t>(i);
  const int old = state.z[idx];
  Cluster candidate;
  bool singleton = false;
  if (--state.clusters[old].size == 0) {
    singleton = true;
    candidate = std::move(state.clusters[old]);
    state.clusters.erase(state.clusters.begin() + old);
    for (int& label : state.z) {
      if (label > old) --label;
    }
  }
  state.z[idx] = -1;

  const int t = state.k();
  bool has_candidate = singleton;
  if (!singleton && t < hyper.k_max) {
    candidate = draw_prior_cluster(state, hyper, data.p(), rng);
    has_candidate = true;
  }
  if (offered != nullptr && has_candidate) *offered = candidate;

  const auto weights = reseat_log_weights(
      state, has_candidate ? &candidate : nullptr, vn, data.values.col(i), hyper);
  const auto choice =
      static_cast<int>(sample_categorical_log(weights.log_weights, rng));
  if (choice == t) {
    candidate.size = 1;
    state.clusters.push_back(std::move(candidate));
  } else {
    ++state.clusters[choice].size;
  }
  state.z[idx] = choice;
}

}  // namespace bsgm
