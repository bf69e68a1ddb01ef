#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "grasswalk/geometry.hpp"
#include "grasswalk/objectives.hpp"
#include "grasswalk/rng.hpp"
#include "grasswalk/solvers.hpp"

namespace grasswalk {

/// Family of planes over which the restricted minimum phi is sampled.
struct PlaneFamily {
  enum class Kind { kUniform, kConditioned };
  Kind kind = Kind::kUniform;
  Eigen::VectorXd anchor;  // only for kConditioned
  ConditionedMode mode = ConditionedMode::kInvariant;

  static PlaneFamily uniform() { return {}; }
  static PlaneFamily conditioned(Eigen::VectorXd x,
                                 ConditionedMode mode = ConditionedMode::kInvariant) {
    return {Kind::kConditioned, std::move(x), mode};
  }
};

/// Plug-in moments of a sample, accumulated in index order with compensated
/// summation.
struct SampleMoments {
  std::size_t count = 0;
  double min = 0.0;
  double max = 0.0;
  double mean = 0.0;
  double l2_dev = 0.0;  // sqrt(mean((v - mean)^2))
};

SampleMoments moments(std::span<const double> values);

/// Empirical statistics of phi(eta) = min over eta of the loss. Extremes are
/// sample extremes, so delta_hat is a plug-in estimate.
struct PhiStats {
  PlaneFamily family;
  std::size_t samples = 0;
  double alpha_min_hat = 0.0;
  double alpha_max_hat = 0.0;
  double mean_hat = 0.0;
  double l2_dev_hat = 0.0;
  double delta_hat = 0.0;  // l2_dev / (sqrt 2 * range)
  std::uint64_t solver_evals = 0;
  std::vector<double> values;
};

/// phi over `num_samples` planes of the family. Sample i uses streams
/// rng.child({i, 0}) for the plane and rng.child({i, 1}) for the solver.
std::vector<double> sample_phi(const LossPtr& loss, const PlaneFamily& family, int k,
                               std::size_t num_samples, const InnerSolver& solver,
                               const RngStream& rng, int threads = 1,
                               std::uint64_t* solver_evals = nullptr);

/// Throws DegenerateError when phi is constant over the sample (delta undefined).
PhiStats estimate_phi_stats(const LossPtr& loss, const PlaneFamily& family, int k,
                            std::size_t num_samples, const InnerSolver& solver,
                            const RngStream& rng, int threads = 1);

/// 1 - (1 - theta^2 / 2)^T
double theta_T(double theta, int T);

struct AnchorRatio {
  Eigen::VectorXd anchor;
  double ratio = 0.0;  // l2_dev / range of phi over planes through the anchor
  SampleMoments moments;
};

/// Sampled estimate of the gap parameter. The minimum over finitely many
/// anchors can only overestimate the true infimum.
struct GapEstimate {
  std::vector<AnchorRatio> anchors;
  std::size_t skipped_degenerate = 0;
  double theta_hat = 0.0;
  int T = 1;
  double theta_T_hat = 0.0;
};

using AnchorSampler = std::function<Eigen::VectorXd(RngStream&)>;

/// radius * (standard normal vector in R^d)
AnchorSampler gaussian_anchor_sampler(Eigen::Index d, double radius);

struct GapConfig {
  int k = 2;
  std::size_t planes_per_anchor = 64;
  int T = 1;
  int threads = 1;
};

/// Draws `num_anchors` anchors with rng.child({a, 0}) and measures each with
/// rng.child({a, 1}). Anchors with constant phi are skipped; throws
/// DegenerateError if every anchor is skipped.
GapEstimate estimate_gap(const LossPtr& loss, const AnchorSampler& sampler,
                         std::size_t num_anchors, const GapConfig& cfg,
                         const InnerSolver& solver, const RngStream& rng);

/// Same for explicit anchors, e.g. the iterates of a walk.
GapEstimate estimate_gap_at(const LossPtr& loss, std::span<const Eigen::VectorXd> anchors,
                            const GapConfig& cfg, const InnerSolver& solver,
                            const RngStream& rng);

/// A real function on a compact homogeneous space, observed through values at
/// Haar-random points.
struct SampledFunction {
  std::string name;
  std::function<double(RngStream&)> draw;
};

/// sin(theta) with theta uniform on [0, 2 pi).
SampledFunction sin_circle();
/// sum_i sin(theta_i) on the n-torus with independent uniform angles.
SampledFunction sin_torus(int n);
/// phi(eta) for Haar-uniform eta in G_{k,d}.
SampledFunction phi_on_grassmannian(LossPtr loss, int k, SolverPtr solver);

enum class BoundStatus { kHolds, kViolated, kNotApplicable };
std::string to_string(BoundStatus status);

/// Empirical check of the level-set measure bound with an exceptional set
/// {f < alpha_prime}.
struct LevelSetReport {
  double alpha_prime = 0.0;
  std::size_t samples = 0;
  SampleMoments f;
  double u_measure_hat = 0.0;   // fraction of samples below alpha_prime
  double u_limit = 0.0;         // l2_dev^2 / range^2; U must be smaller
  double delta = 0.0;
  double threshold = 0.0;       // alpha_max - delta (alpha_max - alpha_prime)
  double measure_hat = 0.0;     // fraction of samples at or below threshold
  double bound = 0.0;           // delta^2
  double ci_half_width = 0.0;   // 3 sigma binomial
  BoundStatus status = BoundStatus::kNotApplicable;
};

LevelSetReport verify_level_set(const SampledFunction& f, double alpha_prime,
                                std::size_t num_samples, const RngStream& rng, int threads = 1);

/// alpha_prime = sampled minimum (empty exceptional set).
LevelSetReport verify_level_set_at_min(const SampledFunction& f, std::size_t num_samples,
                                       const RngStream& rng, int threads = 1);

struct BestOfTReport {
  int T = 1;
  std::size_t trials = 0;
  std::size_t calibration_samples = 0;
  double delta = 0.0;
  double threshold = 0.0;  // m + (1 - delta)(M - m)
  double rate = 0.0;
  double bound = 0.0;      // 1 - (1 - delta^2)^T
  double ci_half_width = 0.0;
  BoundStatus status = BoundStatus::kHolds;
};

/// Calibrates m, M and delta from `calibration_samples` draws (stream
/// rng.child(0)), then measures how often the best of T fresh draws lands at
/// or below the threshold (trial t uses rng.child({1, t})).
BestOfTReport verify_best_of_T(const SampledFunction& f, int T, std::size_t trials,
                               const RngStream& rng, std::size_t calibration_samples = 100000,
                               int threads = 1);

struct BoundPrediction {
  double rate_bound = 0.0;            // (1-delta)(1-theta/sqrt2)^n (alpha range)
  int predicted_iterations = 0;       // iteration count after which steps fall below epsilon_a
  double success_probability = 0.0;   // (1-(1-delta^2)^T)(1-(1-theta^2/2)^T)^n
  std::optional<int> T_for_half;      // T that makes the success probability >= 1/2
};

/// Convergence-bound quantities. Requires 0 < theta < sqrt 2, 0 <= delta < 1,
/// alpha_range > 0, epsilon_a > 0, T >= 1, n >= 0.
BoundPrediction predict_bounds(double delta, double theta, double alpha_range, double epsilon_a,
                               int T, int n);

struct ClippedAnalysisConfig {
  int k = 2;
  std::size_t samples = 10000;
  std::size_t anchors = 0;  // 0 skips the gap estimate
  std::size_t planes_per_anchor = 64;
  double anchor_radius = 1.0;
  int T = 1;
  int threads = 1;
};

struct ClippedAnalysis {
  double alpha_prime = 0.0;
  PhiStats phi;                     // phi of max(loss, alpha_prime) over G_{k,d}
  std::optional<GapEstimate> gap;   // gap parameter of the clipped loss
};

/// phi and gap statistics of the clipped loss. Phi stats use rng.child(0),
/// the gap estimate rng.child(1).
ClippedAnalysis clipped_analysis(const LossPtr& loss, double alpha_prime,
                                 const ClippedAnalysisConfig& cfg, const InnerSolver& solver,
                                 const RngStream& rng);

}  // namespace grasswalk
