#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "grasswalk/geometry.hpp"
#include "grasswalk/objectives.hpp"
#include "grasswalk/rng.hpp"
#include "grasswalk/solvers.hpp"

namespace grasswalk {

struct WalkConfig {
  int k = 2;
  int T = 1;                  // planes sampled per round
  double epsilon_a = 1e-9;    // stop once a round improves by no more than this
  int max_rounds = 1000;
  std::uint64_t seed = 0;
  std::optional<Eigen::VectorXd> x0;  // zero vector when unset
  ConditionedMode conditioned_mode = ConditionedMode::kInvariant;
  int threads = 1;            // concurrency of the T sub-solves; never changes results
  /// Round 1 samples planes through x0 and solves from x0 instead of taking
  /// uniform planes solved from the origin (the Thomson runs start this way).
  bool anchored_start = false;
  /// Ignore the epsilon rule and run exactly max_rounds rounds (fixed-time runs).
  bool budget_only = false;
};

enum class TerminationReason { kEpsilonRule, kBudget, kConvergedExact };

std::string to_string(TerminationReason reason);
TerminationReason termination_from_string(const std::string& s);

namespace round_flags {
inline constexpr const char* kZeroAnchorUniform = "zero_anchor_uniform";
inline constexpr const char* kAllNonfinite = "all_nonfinite";
inline constexpr const char* kAnchorRetained = "anchor_retained";
inline constexpr const char* kWorseThanStart = "worse_than_start";
inline constexpr const char* kSingularEvals = "singular_evals";
}  // namespace round_flags

struct RoundRecord {
  int round = 0;
  Eigen::VectorXd x;
  double loss = 0.0;
  std::vector<double> sample_minima;  // one restricted minimum per sampled plane
  int chosen_sample = -1;             // -1 when the previous iterate was kept
  std::uint64_t solver_evals = 0;
  double min_evaluated = 0.0;         // lowest finite loss evaluated in the round
  std::vector<std::string> flags;
};

struct WalkTrace {
  Eigen::VectorXd x0;
  double initial_loss = 0.0;
  std::vector<RoundRecord> rounds;
  TerminationReason termination = TerminationReason::kEpsilonRule;
};

struct WalkResult {
  Eigen::VectorXd x;
  double loss = 0.0;
  int rounds = 0;
  std::uint64_t loss_evals = 0;
  WalkTrace trace;
};

/// Bitwise equality of two traces (NaN payloads compare equal to themselves).
bool identical(const RoundRecord& a, const RoundRecord& b);
bool identical(const WalkTrace& a, const WalkTrace& b);

/// Called for every sampled plane as (round, sample, plane). May be invoked
/// from worker threads when cfg.threads > 1.
using PlaneObserver = std::function<void(int, int, const Subspace&)>;

/// Random-subspace walk. Round 1 takes the best of T uniform planes solved from
/// the origin; each later round takes the best of T planes through the current
/// iterate solved from that iterate. Stops once a round improves the loss by
/// at most epsilon_a, or after max_rounds.
WalkResult run_walk(const LossPtr& loss, const WalkConfig& cfg, const InnerSolver& solver,
                    const PlaneObserver& observer = {});

/// Same, drawing all randomness from `root` instead of RngStream(cfg.seed).
WalkResult run_walk(const LossPtr& loss, const WalkConfig& cfg, const InnerSolver& solver,
                    const RngStream& root, const PlaneObserver& observer = {});

struct CoupledResult {
  WalkResult plain;
  WalkResult clipped;
  /// First round in which the plain walk evaluated a point with loss below
  /// alpha_prime (0 means the start point itself).
  std::optional<int> divergence_round;
};

/// Runs the walk on loss and on clip(loss, alpha_prime) with identical streams.
CoupledResult run_coupled(const LossPtr& loss, double alpha_prime, const WalkConfig& cfg,
                          const InnerSolver& solver);
CoupledResult run_coupled(const LossPtr& loss, double alpha_prime, const WalkConfig& cfg,
                          const InnerSolver& solver, const RngStream& root);

/// Throws ArgumentError unless cfg is usable with a loss of dimension d.
void validate(const WalkConfig& cfg, Eigen::Index d);

}  // namespace grasswalk
