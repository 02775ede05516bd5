#include "bsgm/synthgen.hpp"

#include <cmath>
#include <numeric>

#include "bsgm/rng.hpp"

namespace bsgm {
namespace {

[[noreturn]] void bad(const std::string& msg) {
  throw Error(ErrorKind::BadSpec, msg);
}

// Fill the first `s` rows of column k with the repeating pattern.
void fill_pattern(Matrix& means, int k, int s, std::initializer_list<double> pattern,
                  double scale) {
  const std::vector<double> pat(pattern);
  for (int j = 0; j < s; ++j) {
    means(j, k) = scale * pat[static_cast<std::size_t>(j) % pat.size()];
  }
}

}  // namespace

MixtureDesign scenario_design(const ScenarioSpec& spec) {
  if (spec.p < 1 || spec.n < 2) bad("scenario needs p >= 1 and n >= 2");
  MixtureDesign d;
  const double sc = spec.mean_scale;
  switch (spec.kind) {
    case ScenarioKind::One: {
      const int s = spec.s == 0 ? 6 : spec.s;
      if (s < 1 || s > spec.p) bad("support size outside [1, p]");
      if (spec.k_star == 3) {
        d.means = Matrix::Zero(spec.p, 3);
        fill_pattern(d.means, 0, s, {3.0}, sc);
        fill_pattern(d.means, 1, s, {-1.5}, sc);
        d.weights = {0.3, 0.3, 0.4};
      } else if (spec.k_star == 5) {
        d.means = Matrix::Zero(spec.p, 5);
        fill_pattern(d.means, 0, s, {4.0}, sc);
        fill_pattern(d.means, 1, s, {-4.0}, sc);
        fill_pattern(d.means, 3, s, {-4.0, 4.0}, sc);
        fill_pattern(d.means, 4, s, {1.5, -1.5}, sc);
        d.weights = {0.2, 0.2, 0.2, 0.2, 0.2};
      } else {
        bad("scenario One supports K* = 3 or 5");
      }
      d.variances = Matrix::Ones(spec.p, spec.k_star);
      break;
    }
    case ScenarioKind::Two:
    case ScenarioKind::Three: {
      const int s = spec.s == 0 ? 8 : spec.s;
      if (s < 1 || s > spec.p) bad("support size outside [1, p]");
      d.means = Matrix::Zero(spec.p, 3);
      fill_pattern(d.means, 0, s, {5.0, 2.0}, sc);
      fill_pattern(d.means, 1, s, {10.0, 5.0}, sc);
      fill_pattern(d.means, 2, s, {15.0, 2.0}, sc);
      d.variances = Matrix::Ones(spec.p, 3);
      d.variances.col(1).head(s).setConstant(4.0);
      if (spec.kind == ScenarioKind::Two) {
        d.weights = {0.02, 0.48, 0.5};
      } else {
        d.weights = {0.2, 0.4, 0.4};
        d.t_dof = 5.0;
      }
      break;
    }
    case ScenarioKind::Custom: {
      d.means = spec.means;
      d.weights = spec.weights;
      d.variances = spec.variances.size() == 0
                        ? Matrix::Ones(spec.means.rows(), spec.means.cols())
                        : spec.variances;
      d.t_dof = spec.t_dof;
      if (d.means.rows() != spec.p) bad("custom means must have p rows");
      break;
    }
  }
  const auto k = static_cast<std::size_t>(d.means.cols());
  if (k == 0 || d.weights.size() != k) bad("need one weight per cluster");
  if (d.variances.rows() != d.means.rows() ||
      d.variances.cols() != d.means.cols()) {
    bad("variances must match the means' shape");
  }
  if ((d.variances.array() < 0.0).any()) bad("negative variance");
  double wsum = 0.0;
  for (double w : d.weights) {
    if (w < 0.0) bad("negative weight");
    wsum += w;
  }
  if (std::abs(wsum - 1.0) > 1e-9) bad("weights must sum to 1");
  if (d.t_dof && !(*d.t_dof > 0.0)) bad("t degrees of freedom must be positive");
  return d;
}

SyntheticData generate(const ScenarioSpec& spec) {
  const MixtureDesign d = scenario_design(spec);
  Rng rng(spec.seed);
  const Eigen::Index p = spec.p;
  const Eigen::Index n = spec.n;

  std::vector<double> cumulative(d.weights.size());
  std::partial_sum(d.weights.begin(), d.weights.end(), cumulative.begin());
  SyntheticData out;
  out.z_true.resize(static_cast<std::size_t>(n));
  for (auto& label : out.z_true) {
    const double u = rng.uniform() * cumulative.back();
    label = static_cast<int>(cumulative.size()) - 1;
    for (std::size_t k = 0; k < cumulative.size(); ++k) {
      if (u < cumulative[k]) {
        label = static_cast<int>(k);
        break;
      }
    }
  }

  const Matrix sd = d.variances.cwiseSqrt();
  Matrix y(p, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const int k = out.z_true[i];
    double scale = 1.0;
    if (d.t_dof) {
      const double nu = *d.t_dof;
      scale = std::sqrt(nu / (2.0 * rng.gamma(0.5 * nu)));
    }
    for (Eigen::Index j = 0; j < p; ++j) {
      y(j, i) = d.means(j, k) + scale * sd(j, k) * rng.normal();
    }
  }
  out.data = DataMatrix(std::move(y));
  out.mu_true = d.means;
  return out;
}

}  // namespace bsgm
