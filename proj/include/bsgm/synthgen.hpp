#pragma once

#include <optional>
#include <vector>

#include "bsgm/core.hpp"

namespace bsgm {

enum class ScenarioKind {
  One,    // well-separated sparse means, K* in {3, 5}
  Two,    // one tiny cluster, inflated variance in cluster 2
  Three,  // as Two but multivariate t noise and balanced weights
  Custom,
};

struct ScenarioSpec {
  ScenarioKind kind = ScenarioKind::One;
  int k_star = 3;        // scenario One only
  int s = 0;             // support size; 0 picks 6 (One) or 8 (Two/Three)
  Eigen::Index p = 400;
  Eigen::Index n = 200;
  double mean_scale = 1.0;  // multiplies every named-scenario mean
  std::uint64_t seed = 0;

  // Custom mixture: p x K means, K weights, p x K diagonal variances
  // (empty means unit variance), optional t degrees of freedom.
  Matrix means;
  std::vector<double> weights;
  Matrix variances;
  std::optional<double> t_dof;
};

/// The fully specified mixture behind a scenario.
struct MixtureDesign {
  Matrix means;
  std::vector<double> weights;
  Matrix variances;
  std::optional<double> t_dof;
};

/// Throws BadSpec on inconsistent dimensions, weights not summing to one,
/// negative variances or an unknown scenario variant.
MixtureDesign scenario_design(const ScenarioSpec& spec);

struct SyntheticData {
  DataMatrix data;
  std::vector<int> z_true;  // 0-based
  Matrix mu_true;           // p x K*
};

/// Labels first (i ascending), then each observation's noise. The t variant
/// scales a Gaussian draw by sqrt(nu / chi2_nu) per observation.
SyntheticData generate(const ScenarioSpec& spec);

}  // namespace bsgm
