#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include <Eigen/Geometry>

#include "grasswalk/analysis.hpp"
#include "grasswalk/errors.hpp"

using namespace grasswalk;

namespace {
LossPtr bowl(Eigen::VectorXd c) { return std::make_shared<const QuadraticLoss>(std::move(c)); }
}  // namespace

TEST_CASE("moments") {
  const std::vector<double> v{1, 2, 3, 4};
  const SampleMoments m = moments(v);
  CHECK(m.count == 4);
  CHECK(m.min == 1);
  CHECK(m.max == 4);
  CHECK(m.mean == 2.5);
  CHECK(m.l2_dev == doctest::Approx(std::sqrt(1.25)));
  const std::vector<double> bad{1, NAN};
  CHECK_THROWS_AS(moments(bad), DegenerateError);
}

TEST_CASE("phi statistics of |x - e1|^2 over lines in the plane") {
  const PhiStats s = estimate_phi_stats(bowl(Eigen::Vector2d(1, 0)), PlaneFamily::uniform(), 1,
                                        10000, ExactQuadratic{}, RngStream(2));
  CHECK(s.alpha_min_hat == doctest::Approx(0.0).epsilon(1e-3));
  CHECK(s.alpha_min_hat >= 0.0);
  CHECK(s.alpha_max_hat == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(std::abs(s.mean_hat - 0.5) < 0.02);
  CHECK(std::abs(s.l2_dev_hat - std::sqrt(0.125)) < 0.02);
  CHECK(std::abs(s.delta_hat - 0.25) < 0.02);
  CHECK(s.values.size() == 10000);
  CHECK(s.solver_evals == 2 * 10000);
}

TEST_CASE("phi sampling ignores thread count") {
  auto loss = bowl(Eigen::Vector3d(1, 2, -1));
  const RngStream rng(8);
  const auto a = sample_phi(loss, PlaneFamily::uniform(), 2, 500, ShrinkDescent({10, 2, 1.0}), rng, 1);
  const auto b = sample_phi(loss, PlaneFamily::uniform(), 2, 500, ShrinkDescent({10, 2, 1.0}), rng, 4);
  CHECK(a == b);
}

TEST_CASE("degenerate phi families") {
  CHECK_THROWS_AS(estimate_phi_stats(bowl(Eigen::VectorXd::Zero(4)), PlaneFamily::uniform(), 2, 100,
                                     ExactQuadratic{}, RngStream(1)),
                  DegenerateError);
  CHECK_THROWS_AS(estimate_phi_stats(bowl(Eigen::Vector2d(1, 0)),
                                     PlaneFamily::conditioned(Eigen::Vector2d(0, 1)), 1, 100,
                                     ExactQuadratic{}, RngStream(1)),
                  DegenerateError);
}

TEST_CASE("minimum of phi matches the global minimum") {
  // every sampled plane is a lower bound of nothing below the global min
  const Eigen::VectorXd c = Eigen::VectorXd::Constant(5, 0.4);
  const auto v = sample_phi(bowl(c), PlaneFamily::uniform(), 5, 50, ExactQuadratic{}, RngStream(3));
  for (double x : v) CHECK(std::abs(x) < 1e-9);
  const auto w = sample_phi(bowl(c), PlaneFamily::uniform(), 2, 2000, ExactQuadratic{}, RngStream(3));
  for (double x : w) CHECK(x >= -1e-12);
}

TEST_CASE("gap ratios match a dense integration over planes through the anchor") {
  const Eigen::Vector3d c(0.8, -0.3, 0.5);
  auto loss = bowl(c);
  RngStream arng(4);
  std::vector<Eigen::VectorXd> anchors;
  for (int i = 0; i < 4; ++i) anchors.push_back(1.5 * arng.unit_vector(3));

  GapConfig cfg;
  cfg.k = 2;
  cfg.planes_per_anchor = 20000;
  const GapEstimate est = estimate_gap_at(loss, anchors, cfg, ExactQuadratic{}, RngStream(5));
  REQUIRE(est.anchors.size() == anchors.size());

  double oracle_min = 1e300;
  for (std::size_t a = 0; a < anchors.size(); ++a) {
    const Eigen::Vector3d xh = anchors[a].normalized();
    Eigen::Vector3d p = xh.unitOrthogonal();
    const Eigen::Vector3d q = xh.cross(p);
    const int grid = 200000;
    std::vector<double> phi(grid);
    for (int j = 0; j < grid; ++j) {
      const double psi = std::numbers::pi * (j + 0.5) / grid;
      const Eigen::Vector3d v = std::cos(psi) * p + std::sin(psi) * q;
      const double cn = c.dot(xh.cross(v));
      phi[j] = cn * cn;
    }
    const SampleMoments m = moments(phi);
    const double ratio = m.l2_dev / (m.max - m.min);
    oracle_min = std::min(oracle_min, ratio);
    CHECK(std::abs(est.anchors[a].ratio - ratio) < 0.03);
  }
  CHECK(std::abs(est.theta_hat - oracle_min) < 0.03);
}

TEST_CASE("constant loss has no gap") {
  auto flat = std::make_shared<const FunctionLoss>(3, [](const Eigen::VectorXd&) { return 1.0; });
  CHECK_THROWS_AS(estimate_gap(flat, gaussian_anchor_sampler(3, 1.0), 4, GapConfig{},
                               ShrinkDescent({4, 1, 1.0}), RngStream(0)),
                  DegenerateError);
}

TEST_CASE("theta_T grows toward 1 with T") {
  double prev = 0.0;
  for (int T = 1; T <= 4096; T *= 2) {
    const double t = theta_T(0.3, T);
    CHECK(t >= prev);
    if (T <= 64) CHECK(t > prev);
    CHECK(t <= 1.0);
    prev = t;
  }
  CHECK(prev == doctest::Approx(1.0));
  CHECK(theta_T(0.3, 1) == doctest::Approx(0.045));
}

TEST_CASE("level-set bound on the circle") {
  const LevelSetReport r = verify_level_set(sin_circle(), -1.0, 100000, RngStream(1));
  CHECK(std::abs(r.delta - 0.25) < 0.01);
  CHECK(std::abs(r.threshold - 0.5) < 0.01);
  CHECK(std::abs(r.measure_hat - 2.0 / 3.0) < 0.01);
  CHECK(r.bound == doctest::Approx(r.delta * r.delta));
  CHECK(r.status == BoundStatus::kHolds);

  const LevelSetReport s = verify_level_set(sin_circle(), -0.99, 100000, RngStream(2));
  CHECK(std::abs(s.u_measure_hat - 0.04505) < 0.005);
  CHECK(s.u_measure_hat < s.u_limit);
  CHECK(std::abs(s.delta - 0.2009) < 0.01);
  CHECK(std::abs(s.measure_hat - 0.7049) < 0.01);
  CHECK(s.status == BoundStatus::kHolds);

  // exceptional set too large for the precondition
  const LevelSetReport t = verify_level_set(sin_circle(), 0.9, 20000, RngStream(3));
  CHECK(t.status == BoundStatus::kNotApplicable);

  const SampledFunction flat{"flat", [](RngStream&) { return 3.0; }};
  CHECK_THROWS_AS(verify_level_set(flat, 0.0, 100, RngStream(0)), DegenerateError);
}

TEST_CASE("best-of-T amplification on the circle") {
  const BestOfTReport r1 = verify_best_of_T(sin_circle(), 1, 20000, RngStream(4), 100000);
  const LevelSetReport l = verify_level_set_at_min(sin_circle(), 100000, RngStream(4).child(0));
  CHECK(r1.bound == doctest::Approx(l.bound).epsilon(1e-12));
  CHECK(r1.status == BoundStatus::kHolds);

  const BestOfTReport r5 = verify_best_of_T(sin_circle(), 5, 20000, RngStream(5), 100000);
  CHECK(std::abs(r5.rate - (1 - std::pow(1.0 / 3, 5))) < 0.005);
  CHECK(r5.bound == doctest::Approx(1 - std::pow(1 - 1.0 / 16, 5)).epsilon(0.02));
  CHECK(r5.status == BoundStatus::kHolds);

  const BestOfTReport r32 = verify_best_of_T(sin_circle(), 32, 5000, RngStream(6), 100000);
  CHECK(r32.rate >= 0.999);
}

TEST_CASE("bound predictions") {
  const BoundPrediction p = predict_bounds(0.0, std::sqrt(2.0) * 0.1, 1.0, 1e-3, 1, 3);
  CHECK(p.predicted_iterations == 67);
  CHECK(p.rate_bound == doctest::Approx(std::pow(0.9, 3)));

  const BoundPrediction z = predict_bounds(0.2, 0.5, 3.0, 1e-3, 2, 0);
  CHECK(z.rate_bound == (1 - 0.2) * 3.0);
  CHECK(z.success_probability == doctest::Approx(1 - std::pow(1 - 0.04, 2)));

  const BoundPrediction near = predict_bounds(0.1, std::sqrt(2.0) * (1 - 1e-12), 1.0, 1e-3, 1, 2);
  CHECK(near.rate_bound < 1e-20);

  CHECK_THROWS_AS(predict_bounds(0.1, 0.0, 1.0, 1e-3, 1, 1), ArgumentError);
  CHECK_THROWS_AS(predict_bounds(1.0, 0.5, 1.0, 1e-3, 1, 1), ArgumentError);
  CHECK_THROWS_AS(predict_bounds(0.1, 0.5, 1.0, 0.0, 1, 1), ArgumentError);
  CHECK_THROWS_AS(predict_bounds(0.1, 0.5, 1.0, 1e-3, 0, 1), ArgumentError);
}

TEST_CASE("clipped analysis") {
  const Eigen::VectorXd c = Eigen::VectorXd::Constant(6, 0.5);
  auto base = bowl(c);
  ClippedAnalysisConfig cfg;
  cfg.k = 2;
  cfg.samples = 3000;
  const RngStream rng(12);
  const ExactQuadratic exact;

  const PhiStats plain = estimate_phi_stats(base, PlaneFamily::uniform(), 2, 3000, exact, rng.child(0));
  const ClippedAnalysis id = clipped_analysis(base, -1.0, cfg, exact, rng);
  CHECK(id.phi.values == plain.values);
  CHECK(id.phi.delta_hat == plain.delta_hat);
  CHECK_FALSE(id.gap.has_value());

  CHECK_THROWS_AS(clipped_analysis(base, 100.0, cfg, exact, rng), DegenerateError);

  // a tiny deep spike changes almost nothing once clipped above its floor
  Eigen::VectorXd far = Eigen::VectorXd::Zero(6);
  far[1] = 4.0;
  auto spiked = std::make_shared<const SpikedLoss>(base, far, 1e-3, 100.0);
  const ShrinkDescent sd({30, 4, 1.0});
  const PhiStats ref = estimate_phi_stats(base, PlaneFamily::uniform(), 2, 3000, sd, rng.child(0));
  const ClippedAnalysis sp = clipped_analysis(spiked, spiked->floor() + 1.0, cfg, sd, rng);
  CHECK(std::abs(sp.phi.delta_hat - ref.delta_hat) < 0.02);

  cfg.anchors = 4;
  cfg.planes_per_anchor = 32;
  const ClippedAnalysis withgap = clipped_analysis(base, -1.0, cfg, exact, rng);
  REQUIRE(withgap.gap.has_value());
  CHECK(withgap.gap->theta_hat > 0.0);
}
