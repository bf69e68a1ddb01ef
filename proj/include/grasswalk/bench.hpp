#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "grasswalk/objectives.hpp"
#include "grasswalk/rng.hpp"
#include "grasswalk/solvers.hpp"
#include "grasswalk/walk.hpp"

namespace grasswalk {

/// Declarative description of a built-in objective.
struct ProblemSpec {
  std::string kind = "quadratic";  // quadratic | rastrigin | ackley | thomson
  int dim = 10;                    // ignored for thomson (d = N n)
  double center = 0.0;             // every coordinate of the center/shift
  int num_points = 2;              // thomson N
  int sphere_dim = 2;              // thomson n
};

LossPtr build_loss(const ProblemSpec& spec);

struct SolverSpec {
  std::string kind = "shrink";  // shrink | exact | nelder-mead
  ShrinkDescentConfig shrink;
  NelderMeadConfig nelder_mead;
};

SolverPtr build_solver(const SolverSpec& spec);

enum class StartMode {
  kZero,      // x0 = 0
  kGaussian,  // x0 ~ N(0, I), drawn per trial
};

std::string to_string(StartMode mode);
StartMode start_mode_from_string(const std::string& s);
std::string to_string(ConditionedMode mode);
ConditionedMode conditioned_mode_from_string(const std::string& s);

struct TrialStudy {
  ProblemSpec problem;
  SolverSpec solver;
  WalkConfig walk;
  StartMode start = StartMode::kZero;
  int num_trials = 10;
  double success_tolerance = 1e-4;
  bool relative_tolerance = true;       // tolerance scaled by |optimum| (when nonzero)
  std::optional<double> optimum;        // overrides the loss's known_optimum
};

struct TrialOutcome {
  int trial = 0;
  double final_loss = 0.0;
  int rounds = 0;
  std::uint64_t evals = 0;
  bool success = false;
  WalkResult walk;
};

struct StudySummary {
  int trials = 0;
  int successes = 0;
  double optimum = 0.0;
  double tolerance = 0.0;  // absolute tolerance actually applied
  double success_rate = 0.0;
  double ci_low = 0.0;     // success_rate -/+ 3 binomial sigma, clamped to [0, 1]
  double ci_high = 0.0;
  double loss_min = 0.0;
  double loss_q25 = 0.0;
  double loss_median = 0.0;
  double loss_q75 = 0.0;
  double loss_max = 0.0;
  double mean_rounds = 0.0;
  double mean_evals = 0.0;
  std::vector<TrialOutcome> outcomes;
};

/// Independent trials; trial t draws everything from root.child(t), so the
/// summary is a function of the master seed alone. Trials run on
/// `threads` workers.
StudySummary run_study(const TrialStudy& study, const RngStream& root, int threads = 1);

struct BlindSpotStudy {
  ProblemSpec base;
  Eigen::VectorXd spike_center;
  double spike_radius = 1e-6;
  double spike_depth = 1.0;
  double alpha_prime = 0.0;
  SolverSpec solver;
  WalkConfig walk;
  StartMode start = StartMode::kZero;
  int num_trials = 10;
};

struct BlindSpotOutcome {
  int trial = 0;
  std::optional<int> divergence_round;
  double max_abs_loss_diff = 0.0;  // per-round |loss - clipped loss|, max over rounds
  bool identical_traces = false;
  double final_loss = 0.0;
  double final_clipped_loss = 0.0;
  CoupledResult coupled;
};

struct BlindSpotSummary {
  int trials = 0;
  int hits = 0;
  double hit_frequency = 0.0;
  /// Max per-round loss difference over trials that never hit; 0 when the
  /// coupling holds.
  double max_abs_loss_diff_nonhitting = 0.0;
  bool nonhitting_identical = true;
  std::vector<BlindSpotOutcome> outcomes;
};

std::shared_ptr<const SpikedLoss> build_spiked(const BlindSpotStudy& study);

BlindSpotSummary run_blindspot_study(const BlindSpotStudy& study, const RngStream& root,
                                     int threads = 1);

using StudyPreset = std::variant<TrialStudy, BlindSpotStudy>;

/// Named configurations: quadratic, thomson-n2 .. thomson-n12, blindspot-far,
/// blindspot-center, paper-hpc-42-r7, paper-hpc-120-r4.
StudyPreset study_preset(const std::string& name);
std::vector<std::string> preset_names();

}  // namespace grasswalk
