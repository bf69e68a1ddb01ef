#include "grasswalk/bench.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "grasswalk/errors.hpp"
#include "grasswalk/parallel.hpp"

namespace grasswalk {
namespace {

double quantile(std::vector<double> sorted, double q) {
  std::sort(sorted.begin(), sorted.end());
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = static_cast<std::size_t>(std::ceil(pos));
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

WalkConfig trial_config(const WalkConfig& base, StartMode start, Eigen::Index d,
                        const RngStream& trial_root) {
  WalkConfig cfg = base;
  cfg.threads = 1;
  if (start == StartMode::kGaussian) {
    // Round indices start at 1, so child 0 is free for the start point.
    RngStream x0_rng = trial_root.child(0);
    cfg.x0 = x0_rng.normal_vector(d);
  }
  return cfg;
}

}  // namespace

LossPtr build_loss(const ProblemSpec& spec) {
  if (spec.kind == "thomson") {
    return std::make_shared<const ThomsonProblem>(spec.num_points, spec.sphere_dim);
  }
  if (spec.dim < 1) throw ArgumentError("problem dimension must be >= 1");
  const Eigen::VectorXd c = Eigen::VectorXd::Constant(spec.dim, spec.center);
  if (spec.kind == "quadratic") return std::make_shared<const QuadraticLoss>(c);
  if (spec.kind == "rastrigin") return std::make_shared<const RastriginLoss>(c);
  if (spec.kind == "ackley") return std::make_shared<const AckleyLoss>(c);
  throw ArgumentError("unknown problem kind: " + spec.kind);
}

SolverPtr build_solver(const SolverSpec& spec) {
  if (spec.kind == "shrink") return std::make_shared<const ShrinkDescent>(spec.shrink);
  if (spec.kind == "exact") return std::make_shared<const ExactQuadratic>();
  if (spec.kind == "nelder-mead") return std::make_shared<const NelderMead>(spec.nelder_mead);
  throw ArgumentError("unknown solver kind: " + spec.kind);
}

std::string to_string(StartMode mode) { return mode == StartMode::kZero ? "zero" : "gaussian"; }

StartMode start_mode_from_string(const std::string& s) {
  if (s == "zero") return StartMode::kZero;
  if (s == "gaussian") return StartMode::kGaussian;
  throw ArgumentError("unknown start mode: " + s);
}

std::string to_string(ConditionedMode mode) {
  return mode == ConditionedMode::kInvariant ? "invariant" : "span-gaussian";
}

ConditionedMode conditioned_mode_from_string(const std::string& s) {
  if (s == "invariant") return ConditionedMode::kInvariant;
  if (s == "span-gaussian") return ConditionedMode::kSpanGaussian;
  throw ArgumentError("unknown conditioned sampling mode: " + s);
}

StudySummary run_study(const TrialStudy& study, const RngStream& root, int threads) {
  if (study.num_trials < 1) throw ArgumentError("study needs at least one trial");
  if (!(study.success_tolerance >= 0.0)) throw ArgumentError("success tolerance must be >= 0");
  const LossPtr loss = build_loss(study.problem);
  const SolverPtr solver = build_solver(study.solver);
  validate(study.walk, loss->dim());
  const std::optional<double> optimum = study.optimum ? study.optimum : loss->known_optimum();
  if (!optimum) throw ArgumentError("study needs a known optimum for " + loss->name());

  StudySummary summary;
  summary.trials = study.num_trials;
  summary.optimum = *optimum;
  summary.tolerance = study.relative_tolerance && *optimum != 0.0
                          ? study.success_tolerance * std::abs(*optimum)
                          : study.success_tolerance;

  summary.outcomes.resize(static_cast<std::size_t>(study.num_trials));
  parallel_for(summary.outcomes.size(), threads, [&](std::size_t t) {
    const RngStream trial_root = root.child(t);
    const WalkConfig cfg = trial_config(study.walk, study.start, loss->dim(), trial_root);
    TrialOutcome& o = summary.outcomes[t];
    o.trial = static_cast<int>(t);
    o.walk = run_walk(loss, cfg, *solver, trial_root);
    o.final_loss = o.walk.loss;
    o.rounds = o.walk.rounds;
    o.evals = o.walk.loss_evals;
    o.success = o.final_loss <= summary.optimum + summary.tolerance;
  });

  std::vector<double> losses;
  double rounds = 0.0;
  double evals = 0.0;
  for (const TrialOutcome& o : summary.outcomes) {
    summary.successes += o.success ? 1 : 0;
    losses.push_back(o.final_loss);
    rounds += o.rounds;
    evals += static_cast<double>(o.evals);
  }
  const double n = summary.trials;
  summary.success_rate = summary.successes / n;
  const double half = 3.0 * std::sqrt(summary.success_rate * (1.0 - summary.success_rate) / n);
  summary.ci_low = std::max(0.0, summary.success_rate - half);
  summary.ci_high = std::min(1.0, summary.success_rate + half);
  summary.loss_min = quantile(losses, 0.0);
  summary.loss_q25 = quantile(losses, 0.25);
  summary.loss_median = quantile(losses, 0.5);
  summary.loss_q75 = quantile(losses, 0.75);
  summary.loss_max = quantile(losses, 1.0);
  summary.mean_rounds = rounds / n;
  summary.mean_evals = evals / n;
  return summary;
}

std::shared_ptr<const SpikedLoss> build_spiked(const BlindSpotStudy& study) {
  return std::make_shared<const SpikedLoss>(build_loss(study.base), study.spike_center,
                                            study.spike_radius, study.spike_depth);
}

BlindSpotSummary run_blindspot_study(const BlindSpotStudy& study, const RngStream& root,
                                     int threads) {
  if (study.num_trials < 1) throw ArgumentError("blind-spot study needs at least one trial");
  const LossPtr loss = build_spiked(study);
  const SolverPtr solver = build_solver(study.solver);
  validate(study.walk, loss->dim());

  BlindSpotSummary summary;
  summary.trials = study.num_trials;
  summary.outcomes.resize(static_cast<std::size_t>(study.num_trials));
  parallel_for(summary.outcomes.size(), threads, [&](std::size_t t) {
    const RngStream trial_root = root.child(t);
    const WalkConfig cfg = trial_config(study.walk, study.start, loss->dim(), trial_root);
    BlindSpotOutcome& o = summary.outcomes[t];
    o.trial = static_cast<int>(t);
    o.coupled = run_coupled(loss, study.alpha_prime, cfg, *solver, trial_root);
    o.divergence_round = o.coupled.divergence_round;
    const auto& a = o.coupled.plain.trace.rounds;
    const auto& b = o.coupled.clipped.trace.rounds;
    const std::size_t common = std::min(a.size(), b.size());
    for (std::size_t i = 0; i < common; ++i) {
      o.max_abs_loss_diff = std::max(o.max_abs_loss_diff, std::abs(a[i].loss - b[i].loss));
    }
    if (a.size() != b.size()) o.max_abs_loss_diff = std::numeric_limits<double>::infinity();
    o.identical_traces = identical(o.coupled.plain.trace, o.coupled.clipped.trace);
    o.final_loss = o.coupled.plain.loss;
    o.final_clipped_loss = o.coupled.clipped.loss;
  });

  for (const BlindSpotOutcome& o : summary.outcomes) {
    if (o.divergence_round) {
      ++summary.hits;
      continue;
    }
    summary.max_abs_loss_diff_nonhitting =
        std::max(summary.max_abs_loss_diff_nonhitting, o.max_abs_loss_diff);
    summary.nonhitting_identical = summary.nonhitting_identical && o.identical_traces;
  }
  summary.hit_frequency = static_cast<double>(summary.hits) / summary.trials;
  return summary;
}

std::vector<std::string> preset_names() {
  std::vector<std::string> names{"quadratic"};
  for (int n = 2; n <= 12; ++n) names.push_back("thomson-n" + std::to_string(n));
  names.insert(names.end(),
               {"blindspot-far", "blindspot-center", "paper-hpc-42-r7", "paper-hpc-120-r4"});
  return names;
}

StudyPreset study_preset(const std::string& name) {
  if (name == "quadratic") {
    TrialStudy s;
    s.problem = {"quadratic", 10, 0.0};
    s.solver.kind = "exact";
    s.walk.k = 2;
    s.walk.T = 1;
    s.num_trials = 20;
    s.success_tolerance = 1e-12;
    s.relative_tolerance = false;
    return s;
  }
  if (name.rfind("thomson-n", 0) == 0) {
    const int n = std::stoi(name.substr(9));
    if (n < 2 || n > 12) throw ArgumentError("thomson presets cover N = 2..12");
    TrialStudy s;
    s.problem.kind = "thomson";
    s.problem.num_points = n;
    s.problem.sphere_dim = 2;
    s.solver.kind = "shrink";
    if (n == 2) {
      s.walk.k = 2;
      s.solver.shrink = {40, 25, 1.0};
    } else {
      s.walk.k = 4;
      s.solver.shrink = {50, 50, 1.0};
    }
    s.walk.T = 1;
    s.walk.epsilon_a = 1e-9;
    s.walk.max_rounds = 5000;
    s.num_trials = 50;
    s.success_tolerance = 1e-4;
    s.relative_tolerance = true;
    return s;
  }
  if (name == "blindspot-far" || name == "blindspot-center") {
    BlindSpotStudy s;
    s.base = {"quadratic", 10, 0.5};
    s.solver.kind = "shrink";
    s.solver.shrink = {30, 4, 1.0};
    s.walk.k = 3;
    s.walk.T = 2;
    s.walk.epsilon_a = 1e-9;
    s.walk.max_rounds = 2000;
    s.spike_depth = 100.0;
    s.alpha_prime = -1.0;
    s.num_trials = 100;
    if (name == "blindspot-far") {
      s.spike_center = Eigen::VectorXd::Zero(10);
      s.spike_center[0] = 10.0;
      s.spike_radius = 1e-6;
    } else {
      s.spike_center = Eigen::VectorXd::Constant(10, 0.5);
      s.spike_radius = 0.1;
    }
    return s;
  }
  if (name == "paper-hpc-42-r7") {
    TrialStudy s;
    s.problem.kind = "thomson";
    s.problem.num_points = 42;
    s.problem.sphere_dim = 6;
    s.solver.kind = "shrink";
    s.solver.shrink = {20, 1, 1.0};
    s.walk.k = 150;
    s.walk.T = 1;
    s.walk.epsilon_a = 1e-12;
    s.walk.max_rounds = 15000000;
    s.walk.conditioned_mode = ConditionedMode::kSpanGaussian;
    s.start = StartMode::kGaussian;
    s.walk.anchored_start = true;
    s.walk.budget_only = true;
    s.num_trials = 1;
    s.optimum = 227.410;
    s.success_tolerance = 1e-5;
    s.relative_tolerance = true;
    return s;
  }
  if (name == "paper-hpc-120-r4") {
    TrialStudy s;
    s.problem.kind = "thomson";
    s.problem.num_points = 120;
    s.problem.sphere_dim = 3;
    s.solver.kind = "shrink";
    s.solver.shrink = {50, 1, 1.0};
    s.walk.k = 4;
    s.walk.T = 1;
    s.walk.epsilon_a = 1e-12;
    s.walk.max_rounds = 15000000;
    s.walk.conditioned_mode = ConditionedMode::kSpanGaussian;
    s.start = StartMode::kGaussian;
    s.walk.anchored_start = true;
    s.walk.budget_only = true;
    s.num_trials = 1000;
    s.optimum = 5395.0;
    s.success_tolerance = 1e-6;
    s.relative_tolerance = true;
    return s;
  }
  throw ArgumentError("unknown preset: " + name);
}

}  // namespace grasswalk
