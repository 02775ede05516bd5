#include <cmath>
#include <vector>

#include "bsgm/ssl_prior.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace bsgm;

namespace {

// One cluster over p features with the given mean and phi, joint indicators.
ModelState one_cluster(std::vector<double> mu, std::vector<double> phi, int xi) {
  ModelState s;
  const auto p = static_cast<Eigen::Index>(mu.size());
  Cluster c;
  c.mu = Eigen::Map<Vector>(mu.data(), p);
  c.phi = Eigen::Map<Vector>(phi.data(), p);
  c.size = 1;
  s.clusters.push_back(c);
  s.xi = Eigen::VectorXi::Constant(p, xi);
  s.z = {0};
  return s;
}

SslConditionalContext context(double sum, int size, double lambda0, double lambda1) {
  SslConditionalContext ctx;
  ctx.cluster_sums = {Vector::Constant(1, sum)};
  ctx.cluster_sizes = {size};
  ctx.lambda0 = lambda0;
  ctx.lambda1 = lambda1;
  return ctx;
}

struct Draws {
  std::vector<double> x, x2;
};

Draws mu_draws(const SslConditionalContext& ctx, double phi, int draws,
               std::uint64_t seed) {
  ModelState s = one_cluster({0.0}, {phi}, 1);
  Rng rng(seed);
  Draws d;
  for (int i = 0; i < draws; ++i) {
    update_mu(s, ctx, rng);
    d.x.push_back(s.clusters[0].mu[0]);
    d.x2.push_back(s.clusters[0].mu[0] * s.clusters[0].mu[0]);
  }
  return d;
}

}  // namespace

TEST_CASE("update_mu: n=1, sum 2, lambda^2/phi = 1 gives N(1, 1/2)") {
  const auto d = mu_draws(context(2.0, 1, 100.0, 1.0), 1.0, 100000, 1);
  const double mean = oracle::mean_of(d.x);
  CHECK(std::abs(mean - 1.0) < 3 * oracle::iid_se(d.x));
  std::vector<double> centred;
  for (double v : d.x) centred.push_back((v - 1.0) * (v - 1.0));
  CHECK(std::abs(oracle::mean_of(centred) - 0.5) < 3 * oracle::iid_se(centred));
  CHECK(oracle::ks_pvalue(d.x, [](double x) { return oracle::normal_cdf(x, 1.0, 0.5); }) >
        0.01);
}

TEST_CASE("update_mu: vanishing prior gives the likelihood limit N(0, 1/4)") {
  const auto d = mu_draws(context(0.0, 4, 100.0, 1.0), 1e300, 100000, 2);
  CHECK(std::abs(oracle::mean_of(d.x)) < 3 * oracle::iid_se(d.x));
  CHECK(std::abs(oracle::mean_of(d.x2) - 0.25) < 3 * oracle::iid_se(d.x2));
}

TEST_CASE("update_mu leaves the conjugate normal invariant (KS)") {
  // Spike precision lambda0^2/phi = 4, n_c = 4, sum 3: N(3/8, 1/8).
  SslConditionalContext ctx = context(3.0, 4, 2.0, 1.0);
  ModelState s = one_cluster({0.0}, {1.0}, 0);
  Rng rng(3);
  std::vector<double> xs;
  for (int i = 0; i < 20000; ++i) {
    update_mu(s, ctx, rng);
    xs.push_back(s.clusters[0].mu[0]);
  }
  CHECK(oracle::ks_pvalue(xs, [](double x) { return oracle::normal_cdf(x, 0.375, 0.125); }) >
        0.01);
}

TEST_CASE("update_phi") {
  Hyperparams h;
  Rng rng(4);
  SUBCASE("mu = 0 gives a Gamma(1/2, rate 1/2) draw") {
    std::vector<double> xs;
    ModelState s = one_cluster({0.0}, {1.0}, 1);
    for (int i = 0; i < 100000; ++i) {
      update_phi(s, h, rng);
      xs.push_back(s.clusters[0].phi[0]);
    }
    CHECK(std::abs(oracle::mean_of(xs) - 1.0) < 4 * oracle::iid_se(xs));
  }
  SUBCASE("mu^2 lambda^2 = 1 gives conditional mean 2") {
    std::vector<double> xs;
    ModelState s = one_cluster({1.0}, {1.0}, 1);  // lambda1 = 1
    for (int i = 0; i < 100000; ++i) {
      update_phi(s, h, rng);
      xs.push_back(s.clusters[0].phi[0]);
    }
    const double target = oracle::gig_moment_quadrature(0.5, 1.0, 1.0, 1);
    CHECK(target == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(std::abs(oracle::mean_of(xs) - target) < 4 * oracle::iid_se(xs));
  }
  SUBCASE("draws are strictly positive") {
    ModelState s = one_cluster({0.0, 1e-200, 3.0, 1e6}, {1, 1, 1, 1}, 0);
    for (int i = 0; i < 5000; ++i) {
      update_phi(s, h, rng);
      for (Eigen::Index j = 0; j < 4; ++j) REQUIRE(s.clusters[0].phi[j] > 0.0);
    }
  }
}

TEST_CASE("xi inclusion probability") {
  const double mu0 = 0.0, phi1 = 1.0;
  SUBCASE("equal spike and slab returns theta") {
    const std::vector<double> mu{0.3, -2.0}, phi{0.5, 4.0};
    CHECK(xi_inclusion_prob(mu, phi, 0.37, 2.0, 2.0) == doctest::Approx(0.37).epsilon(1e-14));
  }
  SUBCASE("mu = 0, phi = 1") {
    const double theta = 0.3, l0 = 20.0, l1 = 1.5;
    const double expected = l1 * theta / (l1 * theta + l0 * (1 - theta));
    CHECK(xi_inclusion_prob({&mu0, 1}, {&phi1, 1}, theta, l0, l1) ==
          doctest::Approx(expected).epsilon(1e-14));
  }
  SUBCASE("slab dominates for mu^2/phi = 1 with lambda0 = 100") {
    const double one = 1.0;
    const double direct = std::exp(-0.5) / (std::exp(-0.5) + 100 * std::exp(-5000.0));
    CHECK(xi_inclusion_prob({&one, 1}, {&phi1, 1}, 0.5, 100.0, 1.0) == direct);
    CHECK(direct == 1.0);
  }
  SUBCASE("no overflow for lambda0^2 mu^2 up to 1e6 and beyond") {
    for (double m : {1e-3, 1.0, 10.0, 1e3}) {
      for (double l0 : {10.0, 1000.0}) {
        const double prob = xi_inclusion_prob({&m, 1}, {&phi1, 1}, 0.5, l0, 1.0);
        CHECK(std::isfinite(prob));
        CHECK(prob >= 0.0);
        CHECK(prob <= 1.0);
      }
    }
    std::vector<double> many(20, 1e3), phis(20, 1e-3);
    CHECK(xi_inclusion_prob(many, phis, 1e-300, 100.0, 1.0) == 1.0);
    std::vector<double> zeros(20, 0.0), ones(20, 1.0);
    const double tiny = xi_inclusion_prob(zeros, ones, 0.5, 100.0, 1.0);
    CHECK(tiny >= 0.0);
    CHECK(tiny < 1e-30);
  }
}

TEST_CASE("update_xi follows the inclusion probability in both modes") {
  Hyperparams h;
  h.lambda0 = 3.0;
  Rng rng(6);
  ModelState s = one_cluster({0.4}, {1.0}, 0);
  s.theta = 0.4;
  const double m = 0.4, f = 1.0;
  const double expected = xi_inclusion_prob({&m, 1}, {&f, 1}, 0.4, 3.0, 1.0);
  std::vector<double> hits;
  for (int i = 0; i < 50000; ++i) {
    update_xi(s, h, rng);
    hits.push_back(s.xi[0]);
  }
  CHECK(std::abs(oracle::mean_of(hits) - expected) < 4 * oracle::iid_se(hits));

  h.ssl_mode = SslMode::ColumnSSL;
  s.clusters[0].xi = Eigen::VectorXi::Zero(1);
  hits.clear();
  for (int i = 0; i < 50000; ++i) {
    update_xi(s, h, rng);
    hits.push_back(s.clusters[0].xi[0]);
  }
  CHECK(std::abs(oracle::mean_of(hits) - expected) < 4 * oracle::iid_se(hits));
  CHECK(s.xi.size() == 1);
}

TEST_CASE("update_theta Beta shapes") {
  Hyperparams h;
  h.beta_theta = 10.0;
  Rng rng(7);
  auto theta_mean = [&](ModelState s, int draws) {
    std::vector<double> xs;
    for (int i = 0; i < draws; ++i) {
      update_theta(s, h, rng);
      xs.push_back(s.theta);
    }
    return std::pair{oracle::mean_of(xs), oracle::iid_se(xs)};
  };
  ModelState s = one_cluster({0, 0, 0}, {1, 1, 1}, 0);
  s.xi << 1, 0, 0;
  auto [m, se] = theta_mean(s, 100000);
  CHECK(std::abs(m - 2.0 / 14.0) < 3 * se);

  s.xi.setZero();
  std::tie(m, se) = theta_mean(s, 100000);
  CHECK(std::abs(m - 1.0 / 14.0) < 4 * se);

  s.xi.setOnes();
  std::tie(m, se) = theta_mean(s, 100000);
  CHECK(std::abs(m - 4.0 / 14.0) < 4 * se);

  SUBCASE("ColumnSSL counts all p K indicators") {
    h.ssl_mode = SslMode::ColumnSSL;
    ModelState two = one_cluster({0, 0, 0}, {1, 1, 1}, 0);
    two.clusters.push_back(two.clusters[0]);
    two.clusters[0].xi = Eigen::VectorXi::Ones(3);
    two.clusters[1].xi = Eigen::VectorXi::Zero(3);
    std::tie(m, se) = theta_mean(two, 100000);
    CHECK(std::abs(m - 4.0 / 17.0) < 4 * se);  // Beta(1 + 3, 10 + 6 - 3)
  }
}

TEST_CASE("prior cluster draw respects the joint indicators") {
  Hyperparams h;
  h.lambda0 = 1000.0;
  ModelState s = one_cluster({0, 0}, {1, 1}, 0);
  s.xi << 1, 0;
  Rng rng(8);
  std::vector<double> slab, spike;
  for (int i = 0; i < 20000; ++i) {
    const Cluster c = draw_prior_cluster(s, h, 2, rng);
    REQUIRE(c.phi.minCoeff() > 0.0);
    slab.push_back(c.mu[0] * c.mu[0]);
    spike.push_back(c.mu[1] * c.mu[1]);
  }
  // E[mu^2] = E[phi] / lambda^2 = 2 / lambda^2.
  CHECK(std::abs(oracle::mean_of(slab) - 2.0) < 4 * oracle::iid_se(slab));
  CHECK(std::abs(oracle::mean_of(spike) - 2e-6) < 4 * oracle::iid_se(spike));

  h.ssl_mode = SslMode::ColumnSSL;
  s.theta = 0.25;
  std::vector<double> included;
  for (int i = 0; i < 20000; ++i) {
    const Cluster c = draw_prior_cluster(s, h, 2, rng);
    REQUIRE(c.xi.size() == 2);
    included.push_back(c.xi[0]);
  }
  CHECK(std::abs(oracle::mean_of(included) - 0.25) < 4 * oracle::iid_se(included));
}
