#include "bsgm/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "bsgm/core.hpp"

namespace bsgm {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// zeta = 1/2, chi > 0: 1/X is inverse Gaussian with mean sqrt(tau/chi) and
// shape tau. Michael-Schucany-Haas, rewritten in terms of X so that neither
// tiny chi nor huge means cancel or overflow.
double sample_gig_half(double chi, double tau, Rng& rng) {
  const double m = std::sqrt(chi / tau);
  const double nu = rng.normal();
  const double y = nu * nu;
  const double xs =
      m + y / (2.0 * tau) + std::sqrt(4.0 * tau * y * m + y * y) / (2.0 * tau);
  if (rng.uniform() * (xs + m) <= xs) return xs;
  return m * m / xs;
}

double gig_mode(double lambda, double omega) {
  if (lambda >= 1.0) {
    return (std::sqrt((lambda - 1.0) * (lambda - 1.0) + omega * omega) +
            (lambda - 1.0)) /
           omega;
  }
  return omega / (std::sqrt((1.0 - lambda) * (1.0 - lambda) + omega * omega) +
                  (1.0 - lambda));
}

// Ratio-of-uniforms with mode shift (Dagpunar; Lehner) for the standardized
// density y^(lambda-1) exp(-omega/2 (y + 1/y)), lambda >= 0, omega > 0.
double sample_gig_rou_shift(double lambda, double omega, Rng& rng) {
  const double t = 0.5 * (lambda - 1.0);
  const double s = 0.25 * omega;
  const double xm = gig_mode(lambda, omega);
  const double nc = t * std::log(xm) - s * (xm + 1.0 / xm);

  // Extremes of (x - xm) sqrt(f(x)) solve y^3 + a y^2 + b y + c = 0.
  const double a = -(2.0 * (lambda + 1.0) / omega + xm);
  const double b = 2.0 * (lambda - 1.0) * xm / omega - 1.0;
  const double c = xm;
  const double p = b - a * a / 3.0;
  const double q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
  const double fi = std::acos(-q / (2.0 * std::sqrt(-(p * p * p) / 27.0)));
  const double fak = 2.0 * std::sqrt(-p / 3.0);
  const double y1 = fak * std::cos(fi / 3.0) - a / 3.0;
  const double y2 =
      fak * std::cos(fi / 3.0 + 4.0 / 3.0 * std::numbers::pi) - a / 3.0;
  const double uplus =
      (y1 - xm) * std::exp(t * std::log(y1) - s * (y1 + 1.0 / y1) - nc);
  const double uminus =
      (y2 - xm) * std::exp(t * std::log(y2) - s * (y2 + 1.0 / y2) - nc);

  for (;;) {
    const double u = uminus + rng.uniform() * (uplus - uminus);
    const double v = rng.uniform_open();
    const double x = u / v + xm;
    if (x <= 0.0) continue;
    if (std::log(v) <= t * std::log(x) - s * (x + 1.0 / x) - nc) return x;
  }
}

}  // namespace

double sample_gig(const GigParams& params, Rng& rng) {
  const double zeta = params.zeta;
  const double chi = params.chi;
  const double tau = params.tau;
  if (!(tau > 0.0) || !(chi >= 0.0)) {
    throw Error(ErrorKind::NonNormalizable, "GIG needs tau > 0 and chi >= 0");
  }
  if (chi < kGigChiFloor) {
    if (!(zeta > 0.0)) {
      throw Error(ErrorKind::NonNormalizable,
                  "GIG with chi = 0 needs zeta > 0");
    }
    return rng.gamma(zeta) * 2.0 / tau;
  }
  if (zeta == 0.5) return sample_gig_half(chi, tau, rng);
  if (zeta < 0.0) {
    // X ~ GIG(zeta, chi, tau)  <=>  1/X ~ GIG(-zeta, tau, chi)
    return 1.0 / sample_gig({-zeta, tau, chi}, rng);
  }
  const double scale = std::sqrt(chi / tau);
  const double omega = std::sqrt(chi * tau);
  return scale * sample_gig_rou_shift(zeta, omega, rng);
}

double log_sum_exp(std::span<const double> values) {
  double hi = kNegInf;
  for (double v : values) hi = std::max(hi, v);
  if (hi == kNegInf) return kNegInf;
  if (hi == std::numeric_limits<double>::infinity()) return hi;
  double acc = 0.0;
  for (double v : values) acc += std::exp(v - hi);
  return hi + std::log(acc);
}

double log_trunc_poisson_pmf(int k, double lambda, int k_max) {
  if (k < 1 || k > k_max) {
    throw Error(ErrorKind::OutOfSupport,
                "k = " + std::to_string(k) + " outside {1..k_max}");
  }
  const double log_lambda = std::log(lambda);
  std::vector<double> terms(static_cast<std::size_t>(k_max));
  for (int j = 1; j <= k_max; ++j) {
    terms[j - 1] = j * log_lambda - std::lgamma(j + 1.0);
  }
  return terms[k - 1] - log_sum_exp(terms);
}

std::size_t sample_categorical_log(std::span<const double> log_weights,
                                   Rng& rng) {
  double hi = kNegInf;
  for (double w : log_weights) {
    if (!std::isnan(w)) hi = std::max(hi, w);
  }
  if (hi == kNegInf) {
    throw Error(ErrorKind::AllWeightsNegInfinite,
                "categorical draw with no finite log-weight");
  }
  std::vector<double> cumulative(log_weights.size());
  double total = 0.0;
  for (std::size_t j = 0; j < log_weights.size(); ++j) {
    const double w = log_weights[j];
    if (!std::isnan(w) && w != kNegInf) total += std::exp(w - hi);
    cumulative[j] = total;
  }
  const double u = rng.uniform() * total;
  for (std::size_t j = 0; j < cumulative.size(); ++j) {
    if (u < cumulative[j]) return j;
  }
  // u == total can only happen through rounding; return the last live index.
  for (std::size_t j = cumulative.size(); j-- > 0;) {
    if (log_weights[j] != kNegInf && !std::isnan(log_weights[j])) return j;
  }
  return 0;
}

double log_normal_pdf(double x, double mean, double var) {
  const double d = x - mean;
  return -0.5 * (std::log(2.0 * std::numbers::pi * var) + d * d / var);
}

}  // namespace bsgm
