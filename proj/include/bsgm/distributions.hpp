#pragma once

#include <span>

#include "bsgm/rng.hpp"

namespace bsgm {

/// Generalized inverse Gaussian with density proportional to
/// x^(zeta-1) exp(-(chi/x + tau x)/2) on x > 0.
struct GigParams {
  double zeta = 0.5;
  double chi = 0.0;
  double tau = 1.0;
};

/// chi below this is treated as exactly zero (Gamma branch).
inline constexpr double kGigChiFloor = 1e-300;

/// Exact draw. zeta = 1/2 goes through the inverse-Gaussian reciprocal
/// identity, chi = 0 through Gamma(zeta, rate tau/2), anything else through
/// ratio-of-uniforms with mode shift. Throws NonNormalizable when chi = 0
/// and zeta <= 0, or when tau <= 0.
double sample_gig(const GigParams& params, Rng& rng);

/// log of lambda^k / k! normalized over k in {1, ..., k_max}.
double log_trunc_poisson_pmf(int k, double lambda, int k_max);

double log_sum_exp(std::span<const double> values);

/// Index j with probability exp(w_j - logsumexp(w)). Entries equal to
/// -infinity are never chosen.
std::size_t sample_categorical_log(std::span<const double> log_weights,
                                   Rng& rng);

/// log N(x | mean, var).
double log_normal_pdf(double x, double mean, double var);

}  // namespace bsgm
