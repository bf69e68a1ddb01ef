#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "grasswalk/errors.hpp"
#include "grasswalk/geometry.hpp"

using namespace grasswalk;

TEST_CASE("subspace rejects bad bases") {
  CHECK_THROWS_AS(Subspace(Eigen::MatrixXd::Ones(3, 2)), ArgumentError);
  CHECK_THROWS_AS(Subspace(Eigen::MatrixXd(3, 0)), ArgumentError);
  CHECK_THROWS_AS(Subspace(Eigen::MatrixXd::Identity(4, 4) * 2.0), ArgumentError);
  Subspace s(Eigen::MatrixXd::Identity(4, 2));
  CHECK(s.ambient_dim() == 4);
  CHECK(s.sub_dim() == 2);
}

TEST_CASE("embed and coordinates_of round trip") {
  RngStream rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    const Subspace s = sample_uniform(9, 4, rng);
    CHECK(s.orthonormality_error() < 1e-12);
    const Eigen::VectorXd u = rng.normal_vector(4);
    CHECK((coordinates_of(s, embed(s, u)) - u).norm() < 1e-12);
    const Eigen::VectorXd x = rng.normal_vector(9);
    const Eigen::VectorXd p = s.project(x);
    CHECK((s.project(p) - p).norm() < 1e-12);
    CHECK((s.basis().transpose() * (x - p)).norm() < 1e-12);
  }
}

TEST_CASE("k = d gives the whole space") {
  RngStream rng(2);
  const Subspace s = sample_uniform(5, 5, rng);
  const Eigen::VectorXd x = rng.normal_vector(5);
  CHECK((s.project(x) - x).norm() < 1e-12);
}

TEST_CASE("lines in the plane have uniform angle (KS)") {
  RngStream rng(3);
  const int n = 20000;
  std::vector<double> angles;
  for (int i = 0; i < n; ++i) {
    const Subspace s = sample_uniform(2, 1, rng);
    double a = std::atan2(s.basis()(1, 0), s.basis()(0, 0));
    if (a < 0) a += std::numbers::pi;  // lines are unoriented
    if (a >= std::numbers::pi) a -= std::numbers::pi;
    angles.push_back(a / std::numbers::pi);
  }
  std::sort(angles.begin(), angles.end());
  double dmax = 0;
  for (int i = 0; i < n; ++i) {
    dmax = std::max({dmax, std::abs(angles[i] - double(i) / n), std::abs(angles[i] - double(i + 1) / n)});
  }
  CHECK(dmax < 1.63 / std::sqrt(double(n)));  // 1% level
}

TEST_CASE("projection of a fixed unit vector has mean squared norm k/d") {
  RngStream rng(4);
  const int d = 8, k = 3, n = 20000;
  Eigen::VectorXd e = Eigen::VectorXd::Zero(d);
  e[2] = 1;
  double acc = 0;
  for (int i = 0; i < n; ++i) acc += sample_uniform(d, k, rng).project(e).squaredNorm();
  CHECK(acc / n == doctest::Approx(double(k) / d).epsilon(0.03));
}

TEST_CASE("conditioned planes contain the anchor") {
  RngStream rng(5);
  for (auto mode : {ConditionedMode::kInvariant, ConditionedMode::kSpanGaussian}) {
    for (int i = 0; i < 50; ++i) {
      const Eigen::VectorXd x = 3.0 * rng.normal_vector(7);
      const Subspace s = sample_conditioned(x, 3, rng, mode);
      CHECK(s.orthonormality_error() < 1e-12);
      CHECK((s.project(x) - x).norm() < kContainmentTolerance * x.norm());
      CHECK((s.basis().col(0) - x.normalized()).norm() < 1e-12);
    }
  }
  CHECK_THROWS_AS(sample_conditioned(Eigen::VectorXd::Zero(3), 2, rng), ArgumentError);
}

TEST_CASE("second direction of a conditioned plane is uniform in the complement") {
  // d = 3, k = 2, x = e3: the second column lies on the equator, so its
  // squared first coordinate has mean 1/2; for d = 5 it is 1/4.
  for (auto mode : {ConditionedMode::kInvariant, ConditionedMode::kSpanGaussian}) {
    RngStream rng(6);
    Eigen::VectorXd x = Eigen::VectorXd::Zero(5);
    x[4] = 2.0;
    const int n = 20000;
    double acc = 0;
    for (int i = 0; i < n; ++i) {
      const Subspace s = sample_conditioned(x, 2, rng, mode);
      CHECK(std::abs(s.basis()(4, 1)) < 1e-12);
      acc += s.basis()(0, 1) * s.basis()(0, 1);
    }
    CHECK(acc / n == doctest::Approx(0.25).epsilon(0.04));
  }
}

TEST_CASE("sampling is a function of the stream") {
  RngStream a(9, {1});
  RngStream b(9, {1});
  const Subspace s1 = sample_uniform(6, 2, a);
  const Subspace s2 = sample_uniform(6, 2, b);
  CHECK(s1.basis() == s2.basis());
  CHECK_THROWS_AS(sample_uniform(3, 4, a), ArgumentError);
  CHECK_THROWS_AS(sample_uniform(3, 0, a), ArgumentError);
}
