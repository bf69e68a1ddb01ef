#include "grasswalk/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "grasswalk/errors.hpp"
#include "grasswalk/parallel.hpp"

namespace grasswalk {
namespace {

// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v)) {
      comp_ += (sum_ - t) + v;
    } else {
      comp_ += (v - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

bool degenerate_range(const SampleMoments& m) {
  const double scale = std::max({1.0, std::abs(m.min), std::abs(m.max)});
  return !(m.max - m.min > 1e-12 * scale);
}

double binomial_3sigma(double p, std::size_t n) {
  return 3.0 * std::sqrt(std::max(p * (1.0 - p), 0.0) / static_cast<double>(n));
}

std::vector<double> draw_values(const SampledFunction& f, std::size_t n, const RngStream& rng,
                                int threads) {
  std::vector<double> values(n);
  parallel_for(n, threads, [&](std::size_t i) {
    RngStream s = rng.child(i);
    values[i] = f.draw(s);
  });
  return values;
}

}  // namespace

SampleMoments moments(std::span<const double> values) {
  if (values.empty()) throw ArgumentError("moments of an empty sample");
  SampleMoments m;
  m.count = values.size();
  m.min = values.front();
  m.max = values.front();
  CompensatedSum sum;
  for (double v : values) {
    if (!std::isfinite(v)) throw DegenerateError("sample contains a non-finite value");
    m.min = std::min(m.min, v);
    m.max = std::max(m.max, v);
    sum.add(v);
  }
  const auto n = static_cast<double>(values.size());
  m.mean = sum.value() / n;
  CompensatedSum sq;
  for (double v : values) sq.add((v - m.mean) * (v - m.mean));
  m.l2_dev = std::sqrt(sq.value() / n);
  return m;
}

std::vector<double> sample_phi(const LossPtr& loss, const PlaneFamily& family, int k,
                               std::size_t num_samples, const InnerSolver& solver,
                               const RngStream& rng, int threads, std::uint64_t* solver_evals) {
  if (!loss) throw ArgumentError("sample_phi: loss is null");
  const Eigen::Index d = loss->dim();
  if (k < 1 || k > d) throw ArgumentError("sample_phi: need 1 <= k <= d");
  const bool conditioned = family.kind == PlaneFamily::Kind::kConditioned;
  if (conditioned && family.anchor.size() != d) {
    throw ArgumentError("sample_phi: anchor dimension does not match loss");
  }
  if (conditioned && family.anchor.isZero(0.0)) {
    throw ArgumentError("sample_phi: conditioned family needs a nonzero anchor");
  }

  std::vector<double> values(num_samples);
  std::vector<std::uint64_t> evals(num_samples);
  parallel_for(num_samples, threads, [&](std::size_t i) {
    RngStream plane_rng = rng.child({i, 0});
    RngStream solver_rng = rng.child({i, 1});
    Subspace plane = conditioned ? sample_conditioned(family.anchor, k, plane_rng, family.mode)
                                 : sample_uniform(d, k, plane_rng);
    const Eigen::VectorXd u0 =
        conditioned ? plane.coordinates_of(family.anchor) : Eigen::VectorXd::Zero(k);
    RestrictedLoss restricted(loss, std::move(plane));
    values[i] = solver.solve(restricted, u0, solver_rng).value;
    evals[i] = restricted.stats().evals;
  });
  if (solver_evals != nullptr) {
    *solver_evals = 0;
    for (std::uint64_t e : evals) *solver_evals += e;
  }
  return values;
}

PhiStats estimate_phi_stats(const LossPtr& loss, const PlaneFamily& family, int k,
                            std::size_t num_samples, const InnerSolver& solver,
                            const RngStream& rng, int threads) {
  if (num_samples < 2) throw ArgumentError("estimate_phi_stats: need at least 2 samples");
  PhiStats stats;
  stats.family = family;
  stats.samples = num_samples;
  stats.values = sample_phi(loss, family, k, num_samples, solver, rng, threads, &stats.solver_evals);
  const SampleMoments m = moments(stats.values);
  if (degenerate_range(m)) {
    throw DegenerateError("phi is constant over the sampled planes; delta is undefined");
  }
  stats.alpha_min_hat = m.min;
  stats.alpha_max_hat = m.max;
  stats.mean_hat = m.mean;
  stats.l2_dev_hat = m.l2_dev;
  stats.delta_hat = m.l2_dev / (std::numbers::sqrt2 * (m.max - m.min));
  return stats;
}

double theta_T(double theta, int T) { return 1.0 - std::pow(1.0 - theta * theta / 2.0, T); }

AnchorSampler gaussian_anchor_sampler(Eigen::Index d, double radius) {
  if (d < 1) throw ArgumentError("anchor sampler needs d >= 1");
  if (!(radius > 0.0)) throw ArgumentError("anchor radius must be positive");
  return [d, radius](RngStream& rng) -> Eigen::VectorXd { return radius * rng.normal_vector(d); };
}

GapEstimate estimate_gap_at(const LossPtr& loss, std::span<const Eigen::VectorXd> anchors,
                            const GapConfig& cfg, const InnerSolver& solver,
                            const RngStream& rng) {
  if (anchors.empty()) throw ArgumentError("estimate_gap: need at least one anchor");
  if (cfg.planes_per_anchor < 2) throw ArgumentError("estimate_gap: need planes_per_anchor >= 2");
  if (cfg.T < 1) throw ArgumentError("estimate_gap: T must be >= 1");
  GapEstimate out;
  out.T = cfg.T;
  for (std::size_t a = 0; a < anchors.size(); ++a) {
    if (anchors[a].isZero(0.0)) {
      ++out.skipped_degenerate;
      continue;
    }
    const std::vector<double> phi =
        sample_phi(loss, PlaneFamily::conditioned(anchors[a]), cfg.k, cfg.planes_per_anchor,
                   solver, rng.child({a, 1}), cfg.threads);
    const SampleMoments m = moments(phi);
    if (degenerate_range(m)) {
      ++out.skipped_degenerate;
      continue;
    }
    out.anchors.push_back({anchors[a], m.l2_dev / (m.max - m.min), m});
  }
  if (out.anchors.empty()) {
    throw DegenerateError("estimate_gap: phi is constant around every anchor");
  }
  out.theta_hat = out.anchors.front().ratio;
  for (const AnchorRatio& r : out.anchors) out.theta_hat = std::min(out.theta_hat, r.ratio);
  out.theta_T_hat = theta_T(out.theta_hat, cfg.T);
  return out;
}

GapEstimate estimate_gap(const LossPtr& loss, const AnchorSampler& sampler,
                         std::size_t num_anchors, const GapConfig& cfg,
                         const InnerSolver& solver, const RngStream& rng) {
  if (num_anchors < 1) throw ArgumentError("estimate_gap: need at least one anchor");
  std::vector<Eigen::VectorXd> anchors;
  anchors.reserve(num_anchors);
  for (std::size_t a = 0; a < num_anchors; ++a) {
    RngStream s = rng.child({a, 0});
    anchors.push_back(sampler(s));
  }
  return estimate_gap_at(loss, anchors, cfg, solver, rng);
}

SampledFunction sin_circle() {
  return {"sin-circle",
          [](RngStream& rng) { return std::sin(2.0 * std::numbers::pi * rng.uniform()); }};
}

SampledFunction sin_torus(int n) {
  if (n < 1) throw ArgumentError("sin_torus needs n >= 1");
  return {"sin-torus-" + std::to_string(n), [n](RngStream& rng) {
            double sum = 0.0;
            for (int i = 0; i < n; ++i) sum += std::sin(2.0 * std::numbers::pi * rng.uniform());
            return sum;
          }};
}

SampledFunction phi_on_grassmannian(LossPtr loss, int k, SolverPtr solver) {
  if (!loss || !solver) throw ArgumentError("phi_on_grassmannian needs a loss and a solver");
  if (k < 1 || k > loss->dim()) throw ArgumentError("phi_on_grassmannian: need 1 <= k <= d");
  return {"phi-" + loss->name(), [loss, k, solver](RngStream& rng) {
            RngStream plane_rng = rng.child(0);
            RngStream solver_rng = rng.child(1);
            RestrictedLoss restricted(loss, sample_uniform(loss->dim(), k, plane_rng));
            return solver->solve(restricted, Eigen::VectorXd::Zero(k), solver_rng).value;
          }};
}

std::string to_string(BoundStatus status) {
  switch (status) {
    case BoundStatus::kHolds:
      return "holds";
    case BoundStatus::kViolated:
      return "violated";
    case BoundStatus::kNotApplicable:
      return "not_applicable";
  }
  return "unknown";
}

static LevelSetReport level_set_from_values(const std::vector<double>& values,
                                     std::optional<double> alpha_prime_opt) {
  const std::size_t num_samples = values.size();
  LevelSetReport r;
  r.samples = num_samples;
  r.f = moments(values);
  if (degenerate_range(r.f)) throw DegenerateError("verify_level_set: f is constant");
  const double alpha_prime = alpha_prime_opt.value_or(r.f.min);
  r.alpha_prime = alpha_prime;
  if (!(alpha_prime < r.f.max)) {
    throw ArgumentError("verify_level_set: alpha_prime must lie below the sampled maximum");
  }
  const auto n = static_cast<double>(num_samples);
  const double range = r.f.max - r.f.min;
  const double top = r.f.max - alpha_prime;
  std::size_t below = 0;
  for (double v : values) below += v < alpha_prime ? 1 : 0;
  r.u_measure_hat = static_cast<double>(below) / n;
  r.u_limit = (r.f.l2_dev * r.f.l2_dev) / (range * range);
  const double delta_sq = 0.5 * r.f.l2_dev * r.f.l2_dev / (top * top) -
                          0.5 * r.u_measure_hat * range * range / (top * top);
  if (!(r.u_measure_hat < r.u_limit) || !(delta_sq > 0.0)) {
    r.status = BoundStatus::kNotApplicable;
    return r;
  }
  r.delta = std::sqrt(delta_sq);
  r.threshold = r.f.max - r.delta * top;
  r.bound = delta_sq;
  std::size_t inside = 0;
  for (double v : values) inside += v <= r.threshold ? 1 : 0;
  r.measure_hat = static_cast<double>(inside) / n;
  r.ci_half_width = binomial_3sigma(r.measure_hat, num_samples);
  r.status = r.measure_hat + r.ci_half_width >= r.bound ? BoundStatus::kHolds
                                                        : BoundStatus::kViolated;
  return r;
}

LevelSetReport verify_level_set(const SampledFunction& f, double alpha_prime,
                                std::size_t num_samples, const RngStream& rng, int threads) {
  if (num_samples < 2) throw ArgumentError("verify_level_set: need at least 2 samples");
  if (std::isnan(alpha_prime)) throw ArgumentError("verify_level_set: alpha_prime is NaN");
  return level_set_from_values(draw_values(f, num_samples, rng, threads), alpha_prime);
}

LevelSetReport verify_level_set_at_min(const SampledFunction& f, std::size_t num_samples,
                                       const RngStream& rng, int threads) {
  if (num_samples < 2) throw ArgumentError("verify_level_set: need at least 2 samples");
  return level_set_from_values(draw_values(f, num_samples, rng, threads), std::nullopt);
}

BestOfTReport verify_best_of_T(const SampledFunction& f, int T, std::size_t trials,
                               const RngStream& rng, std::size_t calibration_samples,
                               int threads) {
  if (T < 1) throw ArgumentError("verify_best_of_T: T must be >= 1");
  if (trials < 1) throw ArgumentError("verify_best_of_T: need at least one trial");
  if (calibration_samples < 2) throw ArgumentError("verify_best_of_T: need calibration samples");
  const SampleMoments m = moments(draw_values(f, calibration_samples, rng.child(0), threads));
  if (degenerate_range(m)) throw DegenerateError("verify_best_of_T: f is constant");

  BestOfTReport r;
  r.T = T;
  r.trials = trials;
  r.calibration_samples = calibration_samples;
  r.delta = m.l2_dev / (std::numbers::sqrt2 * (m.max - m.min));
  r.threshold = m.min + (1.0 - r.delta) * (m.max - m.min);
  r.bound = 1.0 - std::pow(1.0 - r.delta * r.delta, T);

  std::vector<char> success(trials);
  const RngStream trial_root = rng.child(1);
  parallel_for(trials, threads, [&](std::size_t t) {
    const RngStream trial = trial_root.child(t);
    double best = std::numeric_limits<double>::infinity();
    for (int s = 0; s < T; ++s) {
      RngStream draw = trial.child(static_cast<std::uint64_t>(s));
      best = std::min(best, f.draw(draw));
    }
    success[t] = best <= r.threshold ? 1 : 0;
  });
  std::size_t hits = 0;
  for (char s : success) hits += static_cast<std::size_t>(s);
  r.rate = static_cast<double>(hits) / static_cast<double>(trials);
  r.ci_half_width = binomial_3sigma(r.rate, trials);
  r.status = r.rate + r.ci_half_width >= r.bound ? BoundStatus::kHolds : BoundStatus::kViolated;
  return r;
}

BoundPrediction predict_bounds(double delta, double theta, double alpha_range, double epsilon_a,
                               int T, int n) {
  if (!(theta > 0.0 && theta < std::numbers::sqrt2)) {
    throw ArgumentError("predict_bounds: theta must lie in (0, sqrt 2)");
  }
  if (!(delta >= 0.0 && delta < 1.0)) throw ArgumentError("predict_bounds: delta must lie in [0, 1)");
  if (!(alpha_range > 0.0)) throw ArgumentError("predict_bounds: alpha range must be positive");
  if (!(epsilon_a > 0.0)) throw ArgumentError("predict_bounds: epsilon_a must be positive");
  if (T < 1) throw ArgumentError("predict_bounds: T must be >= 1");
  if (n < 0) throw ArgumentError("predict_bounds: n must be >= 0");

  const double contraction = 1.0 - theta / std::numbers::sqrt2;
  const double stage = 1.0 - theta * theta / 2.0;

  BoundPrediction p;
  p.rate_bound = (1.0 - delta) * std::pow(contraction, n) * alpha_range;

  const double steps =
      std::ceil(std::log(epsilon_a / ((1.0 - delta) * alpha_range)) / std::log(contraction));
  p.predicted_iterations = static_cast<int>(std::max(steps, 0.0)) + 1;

  p.success_probability =
      (1.0 - std::pow(1.0 - delta * delta, T)) * std::pow(1.0 - std::pow(stage, T), n);

  if (delta > 0.0) {
    const double first = std::log(1.0 - 1.0 / std::numbers::sqrt2) / std::log(1.0 - delta * delta);
    double second = 0.0;
    if (n > 0) {
      second = std::log(1.0 - std::pow(2.0, -1.0 / (2.0 * n))) / std::log(stage);
    }
    const double t = std::ceil(std::max(first, second));
    if (std::isfinite(t) && t < 2147483647.0) p.T_for_half = std::max(1, static_cast<int>(t));
  }
  return p;
}

ClippedAnalysis clipped_analysis(const LossPtr& loss, double alpha_prime,
                                 const ClippedAnalysisConfig& cfg, const InnerSolver& solver,
                                 const RngStream& rng) {
  if (!loss) throw ArgumentError("clipped_analysis: loss is null");
  const LossPtr clipped = clip(loss, alpha_prime);
  ClippedAnalysis out;
  out.alpha_prime = alpha_prime;
  out.phi = estimate_phi_stats(clipped, PlaneFamily::uniform(), cfg.k, cfg.samples, solver,
                               rng.child(0), cfg.threads);
  if (cfg.anchors > 0) {
    GapConfig gap_cfg{cfg.k, cfg.planes_per_anchor, cfg.T, cfg.threads};
    out.gap = estimate_gap(clipped, gaussian_anchor_sampler(loss->dim(), cfg.anchor_radius),
                           cfg.anchors, gap_cfg, solver, rng.child(1));
  }
  return out;
}

}  // namespace grasswalk
