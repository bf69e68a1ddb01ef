#include "grasswalk/walk.hpp"

#include <cmath>
#include <cstring>
#include <limits>

#include "grasswalk/errors.hpp"
#include "grasswalk/parallel.hpp"

namespace grasswalk {
namespace {

struct Candidate {
  Eigen::VectorXd x;
  double value = std::numeric_limits<double>::quiet_NaN();
  std::uint64_t evals = 0;
  std::uint64_t capped = 0;
  double min_evaluated = std::numeric_limits<double>::infinity();
};

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof(double)) == 0; }

bool same_bits(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() != b.size()) return false;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (!same_bits(a[i], b[i])) return false;
  }
  return true;
}

}  // namespace

bool identical(const RoundRecord& a, const RoundRecord& b) {
  if (a.round != b.round || a.chosen_sample != b.chosen_sample ||
      a.solver_evals != b.solver_evals || a.flags != b.flags ||
      a.sample_minima.size() != b.sample_minima.size()) {
    return false;
  }
  if (!same_bits(a.loss, b.loss) || !same_bits(a.min_evaluated, b.min_evaluated) ||
      !same_bits(a.x, b.x)) {
    return false;
  }
  for (std::size_t i = 0; i < a.sample_minima.size(); ++i) {
    if (!same_bits(a.sample_minima[i], b.sample_minima[i])) return false;
  }
  return true;
}

bool identical(const WalkTrace& a, const WalkTrace& b) {
  if (a.termination != b.termination || a.rounds.size() != b.rounds.size()) return false;
  if (!same_bits(a.x0, b.x0) || !same_bits(a.initial_loss, b.initial_loss)) return false;
  for (std::size_t i = 0; i < a.rounds.size(); ++i) {
    if (!identical(a.rounds[i], b.rounds[i])) return false;
  }
  return true;
}

std::string to_string(TerminationReason reason) {
  switch (reason) {
    case TerminationReason::kEpsilonRule:
      return "epsilon_rule";
    case TerminationReason::kBudget:
      return "budget";
    case TerminationReason::kConvergedExact:
      return "converged_exact";
  }
  return "unknown";
}

TerminationReason termination_from_string(const std::string& s) {
  if (s == "epsilon_rule") return TerminationReason::kEpsilonRule;
  if (s == "budget") return TerminationReason::kBudget;
  if (s == "converged_exact") return TerminationReason::kConvergedExact;
  throw ArgumentError("unknown termination reason: " + s);
}

void validate(const WalkConfig& cfg, Eigen::Index d) {
  if (cfg.k < 1 || cfg.k > d) {
    throw ArgumentError("walk: need 1 <= k <= d, got k=" + std::to_string(cfg.k) +
                        ", d=" + std::to_string(d));
  }
  if (cfg.T < 1) throw ArgumentError("walk: T must be >= 1");
  if (!(cfg.epsilon_a > 0.0)) throw ArgumentError("walk: epsilon_a must be > 0");
  if (cfg.max_rounds < 1) throw ArgumentError("walk: max_rounds must be >= 1");
  if (cfg.threads < 1) throw ArgumentError("walk: threads must be >= 1");
  if (cfg.x0 && cfg.x0->size() != d) {
    throw ArgumentError("walk: x0 has length " + std::to_string(cfg.x0->size()) +
                        ", loss dimension is " + std::to_string(d));
  }
}

WalkResult run_walk(const LossPtr& loss, const WalkConfig& cfg, const InnerSolver& solver,
                    const PlaneObserver& observer) {
  return run_walk(loss, cfg, solver, RngStream(cfg.seed), observer);
}

WalkResult run_walk(const LossPtr& loss, const WalkConfig& cfg, const InnerSolver& solver,
                    const RngStream& root, const PlaneObserver& observer) {
  if (!loss) throw ArgumentError("walk: loss is null");
  const Eigen::Index d = loss->dim();
  validate(cfg, d);

  WalkResult result;
  WalkTrace& trace = result.trace;
  trace.x0 = cfg.x0 ? *cfg.x0 : Eigen::VectorXd::Zero(d);
  trace.initial_loss = loss->eval(trace.x0);
  result.loss_evals = 1;

  Eigen::VectorXd current = trace.x0;
  double current_loss = trace.initial_loss;
  const auto T = static_cast<std::size_t>(cfg.T);

  for (int round = 1; round <= cfg.max_rounds; ++round) {
    RoundRecord record;
    record.round = round;
    const bool anchored = round > 1 || cfg.anchored_start;
    const bool zero_anchor = anchored && current.isZero(0.0);
    if (zero_anchor) record.flags.emplace_back(round_flags::kZeroAnchorUniform);

    std::vector<Candidate> candidates(T);
    parallel_for(T, cfg.threads, [&](std::size_t s) {
      const auto r = static_cast<std::uint64_t>(round);
      RngStream plane_rng = root.child({r, s, 0});
      RngStream solver_rng = root.child({r, s, 1});
      Subspace plane = (anchored && !zero_anchor)
                           ? sample_conditioned(current, cfg.k, plane_rng, cfg.conditioned_mode)
                           : sample_uniform(d, cfg.k, plane_rng);
      if (observer) observer(round, static_cast<int>(s), plane);
      const Eigen::VectorXd u0 =
          anchored ? plane.coordinates_of(current) : Eigen::VectorXd::Zero(cfg.k);
      RestrictedLoss restricted(loss, std::move(plane));
      SolveResult solved = solver.solve(restricted, u0, solver_rng);
      Candidate& c = candidates[s];
      c.x = restricted.plane().embed(solved.u);
      c.value = solved.value;
      c.evals = restricted.stats().evals;
      c.capped = restricted.stats().capped;
      c.min_evaluated = restricted.stats().min_value;
    });

    int chosen = -1;
    std::uint64_t capped = 0;
    record.min_evaluated = std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < T; ++s) {
      const Candidate& c = candidates[s];
      record.sample_minima.push_back(c.value);
      record.solver_evals += c.evals;
      capped += c.capped;
      record.min_evaluated = std::min(record.min_evaluated, c.min_evaluated);
      if (std::isfinite(c.value) &&
          (chosen < 0 || c.value < candidates[static_cast<std::size_t>(chosen)].value)) {
        chosen = static_cast<int>(s);
      }
    }
    result.loss_evals += record.solver_evals;
    if (capped > 0) record.flags.emplace_back(round_flags::kSingularEvals);

    const double previous_loss = current_loss;
    if (chosen < 0) {
      record.flags.emplace_back(round_flags::kAllNonfinite);
    } else {
      const Candidate& best = candidates[static_cast<std::size_t>(chosen)];
      if (anchored && best.value > current_loss) {
        // Rounding in embed(coordinates_of(x)) can nudge a non-improving
        // solve above the anchor's loss; keep the anchor instead.
        record.flags.emplace_back(round_flags::kAnchorRetained);
        chosen = -1;
      } else {
        if (!anchored && best.value > current_loss) {
          record.flags.emplace_back(round_flags::kWorseThanStart);
        }
        current = best.x;
        current_loss = best.value;
      }
    }
    record.chosen_sample = chosen;
    record.x = current;
    record.loss = current_loss;
    trace.rounds.push_back(std::move(record));

    const double improvement = previous_loss - current_loss;
    if (!cfg.budget_only && !(improvement > cfg.epsilon_a)) {
      trace.termination = improvement == 0.0 ? TerminationReason::kConvergedExact
                                             : TerminationReason::kEpsilonRule;
      break;
    }
    if (round == cfg.max_rounds) trace.termination = TerminationReason::kBudget;
  }

  result.x = current;
  result.loss = current_loss;
  result.rounds = static_cast<int>(trace.rounds.size());
  return result;
}

CoupledResult run_coupled(const LossPtr& loss, double alpha_prime, const WalkConfig& cfg,
                          const InnerSolver& solver) {
  return run_coupled(loss, alpha_prime, cfg, solver, RngStream(cfg.seed));
}

CoupledResult run_coupled(const LossPtr& loss, double alpha_prime, const WalkConfig& cfg,
                          const InnerSolver& solver, const RngStream& root) {
  CoupledResult out;
  out.plain = run_walk(loss, cfg, solver, root);
  out.clipped = run_walk(clip(loss, alpha_prime), cfg, solver, root);
  if (out.plain.trace.initial_loss < alpha_prime) {
    out.divergence_round = 0;
  } else {
    for (const RoundRecord& r : out.plain.trace.rounds) {
      if (r.min_evaluated < alpha_prime) {
        out.divergence_round = r.round;
        break;
      }
    }
  }
  return out;
}

}  // namespace grasswalk
