#include <cmath>
#include <vector>

#include "bsgm/synthgen.hpp"
#include "doctest.h"

using namespace bsgm;

namespace {

int nonzero_rows(const Matrix& m) {
  int count = 0;
  for (Eigen::Index j = 0; j < m.rows(); ++j) count += !m.row(j).isZero(0.0);
  return count;
}

}  // namespace

TEST_CASE("scenario one means") {
  ScenarioSpec spec;
  spec.s = 6;
  const auto d = scenario_design(spec);
  CHECK(d.means.col(0).head(6) == Vector::Constant(6, 3.0));
  CHECK(d.means.col(1).head(6) == Vector::Constant(6, -1.5));
  CHECK(d.means.col(2).isZero());
  CHECK(d.weights == std::vector<double>{0.3, 0.3, 0.4});
  CHECK(nonzero_rows(d.means) == 6);

  spec.k_star = 5;
  spec.s = 12;
  const auto five = scenario_design(spec);
  CHECK(five.means.cols() == 5);
  CHECK(nonzero_rows(five.means) == 12);
  for (double w : five.weights) CHECK(w == 0.2);

  spec.k_star = 4;
  CHECK_THROWS_AS(scenario_design(spec), Error);
}

TEST_CASE("scenario two and three designs") {
  ScenarioSpec spec;
  spec.kind = ScenarioKind::Two;
  const auto two = scenario_design(spec);
  CHECK(two.weights == std::vector<double>{0.02, 0.48, 0.5});
  CHECK(two.means(0, 0) == 5.0);
  CHECK(two.means(1, 0) == 2.0);
  CHECK(two.means(0, 1) == 10.0);
  CHECK(two.means(1, 2) == 2.0);
  CHECK(two.variances(7, 1) == 4.0);
  CHECK(two.variances(8, 1) == 1.0);
  CHECK(two.variances(0, 0) == 1.0);
  CHECK(nonzero_rows(two.means) == 8);
  CHECK(two.weights[0] * spec.n == doctest::Approx(4.0));
  CHECK_FALSE(two.t_dof);

  spec.kind = ScenarioKind::Three;
  const auto three = scenario_design(spec);
  CHECK(three.weights == std::vector<double>{0.2, 0.4, 0.4});
  CHECK(three.t_dof == 5.0);
  CHECK(three.means == two.means);

  spec.mean_scale = 0.5;
  CHECK(scenario_design(spec).means(0, 1) == 5.0);
}

TEST_CASE("custom mixtures") {
  ScenarioSpec spec;
  spec.kind = ScenarioKind::Custom;
  spec.p = 2;
  spec.n = 30;
  spec.means = Matrix{{1.0, -4.0}, {2.0, 0.5}};
  spec.weights = {0.5, 0.5};
  spec.variances = Matrix::Zero(2, 2);
  const auto out = generate(spec);
  for (Eigen::Index i = 0; i < 30; ++i) {
    CHECK(out.data.values.col(i) == spec.means.col(out.z_true[i]));
  }

  spec.weights = {0.5, 0.6};
  CHECK_THROWS_AS(generate(spec), Error);
  spec.weights = {0.5, 0.5};
  spec.variances = Matrix::Constant(2, 2, -1.0);
  CHECK_THROWS_AS(generate(spec), Error);
  spec.variances = Matrix::Ones(3, 2);
  CHECK_THROWS_AS(generate(spec), Error);
  spec.variances.resize(0, 0);
  spec.p = 3;
  try {
    generate(spec);
    FAIL("expected BadSpec");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::BadSpec);
  }
}

TEST_CASE("generation is deterministic per seed") {
  ScenarioSpec spec;
  spec.kind = ScenarioKind::Three;
  spec.p = 20;
  spec.n = 50;
  spec.seed = 9;
  const auto a = generate(spec), b = generate(spec);
  CHECK(a.data.values == b.data.values);
  CHECK(a.z_true == b.z_true);
  spec.seed = 10;
  CHECK_FALSE(generate(spec).data.values == a.data.values);
}

TEST_CASE("cluster sample means converge to the design means") {
  ScenarioSpec spec;
  spec.p = 30;
  spec.n = 3000;
  spec.seed = 4;
  const auto out = generate(spec);
  const int k = static_cast<int>(out.mu_true.cols());
  Matrix sums = Matrix::Zero(spec.p, k);
  std::vector<int> counts(k, 0);
  for (Eigen::Index i = 0; i < spec.n; ++i) {
    sums.col(out.z_true[i]) += out.data.values.col(i);
    ++counts[out.z_true[i]];
  }
  for (int c = 0; c < k; ++c) {
    REQUIRE(counts[c] >= 500);
    const Vector mean = sums.col(c) / counts[c];
    CHECK((mean - out.mu_true.col(c)).cwiseAbs().maxCoeff() < 0.2);
  }
  CHECK(nonzero_rows(out.mu_true) == 6);
}

TEST_CASE("t noise has heavier tails than Gaussian noise") {
  ScenarioSpec spec;
  spec.kind = ScenarioKind::Custom;
  spec.p = 1;
  spec.n = 100000;
  spec.means = Matrix::Zero(1, 1);
  spec.weights = {1.0};
  spec.seed = 5;
  const auto gauss = generate(spec);
  spec.t_dof = 5.0;
  const auto t = generate(spec);
  // Var of t_5 is 5/3.
  CHECK(t.data.values.squaredNorm() / spec.n == doctest::Approx(5.0 / 3.0).epsilon(0.05));
  CHECK(gauss.data.values.squaredNorm() / spec.n == doctest::Approx(1.0).epsilon(0.02));
}
