#include "grasswalk/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "grasswalk/errors.hpp"

namespace grasswalk {
namespace {

void check_start(const RestrictedLoss& f, const Eigen::VectorXd& u0) {
  if (u0.size() != f.sub_dim()) {
    throw ArgumentError("solver start has " + std::to_string(u0.size()) +
                        " coordinates, plane has dimension " + std::to_string(f.sub_dim()));
  }
}

const QuadraticLoss* unwrap_quadratic(const LossFunction& loss) {
  const LossFunction* current = &loss;
  while (const auto* clipped = dynamic_cast<const ClippedLoss*>(current)) {
    current = clipped->base().get();
  }
  return dynamic_cast<const QuadraticLoss*>(current);
}

// NaN never compares below anything, so a NaN candidate never replaces a
// finite incumbent.
bool better(double candidate, double incumbent) {
  return candidate < incumbent || (std::isnan(incumbent) && !std::isnan(candidate));
}

}  // namespace

ShrinkDescent::ShrinkDescent(ShrinkDescentConfig cfg) : cfg_(cfg) {
  if (cfg_.num_scales < 1 || cfg_.proposals_per_scale < 1) {
    throw ArgumentError("shrink descent needs num_scales >= 1 and proposals_per_scale >= 1");
  }
  if (!(cfg_.initial_scale > 0.0)) throw ArgumentError("shrink descent initial_scale must be > 0");
}

SolveResult shrink_descent(const RestrictedLoss& f, const Eigen::VectorXd& u0,
                           const ShrinkDescentConfig& cfg, RngStream& rng) {
  check_start(f, u0);
  SolveResult out{u0, f.eval_restricted(u0), 1};
  for (int j = 1; j <= cfg.num_scales; ++j) {
    const double step = std::ldexp(cfg.initial_scale, -j);
    for (int t = 0; t < cfg.proposals_per_scale; ++t) {
      Eigen::VectorXd candidate = out.u + step * rng.unit_vector(u0.size());
      const double value = f.eval_restricted(candidate);
      ++out.evals;
      if (value < out.value) {
        out.u = std::move(candidate);
        out.value = value;
      }
    }
  }
  return out;
}

SolveResult exact_quadratic(const RestrictedLoss& f, const Eigen::VectorXd& u0, RngStream&) {
  check_start(f, u0);
  const QuadraticLoss* quadratic = unwrap_quadratic(f.base());
  if (quadratic == nullptr) {
    throw ArgumentError("exact_quadratic requires a quadratic base loss, got " + f.base().name());
  }
  const double start = f.eval_restricted(u0);
  Eigen::VectorXd u = f.plane().coordinates_of(quadratic->center());
  const double value = f.eval_restricted(u);
  if (better(value, start) || value == start) return {std::move(u), value, 2};
  return {u0, start, 2};
}

NelderMead::NelderMead(NelderMeadConfig cfg) : cfg_(cfg) {
  if (!(cfg_.initial_step > 0.0)) throw ArgumentError("nelder-mead initial_step must be > 0");
  if (cfg_.max_evals < 1) throw ArgumentError("nelder-mead max_evals must be >= 1");
}

SolveResult nelder_mead(const RestrictedLoss& f, const Eigen::VectorXd& u0,
                        const NelderMeadConfig& cfg, RngStream&) {
  check_start(f, u0);
  const Eigen::Index k = u0.size();
  const double start_value = f.eval_restricted(u0);
  std::uint64_t evals = 1;

  std::vector<Eigen::VectorXd> simplex{u0};
  std::vector<double> values{start_value};
  for (Eigen::Index i = 0; i < k; ++i) {
    Eigen::VectorXd v = u0;
    v[i] += cfg.initial_step;
    values.push_back(f.eval_restricted(v));
    simplex.push_back(std::move(v));
    ++evals;
  }

  auto eval = [&](const Eigen::VectorXd& v) {
    ++evals;
    return f.eval_restricted(v);
  };
  // NaN sorts last
  auto less = [](double a, double b) { return better(a, b); };

  std::vector<std::size_t> order(simplex.size());
  while (static_cast<int>(evals) < cfg.max_evals) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return less(values[a], values[b]); });
    const std::size_t best = order.front();
    const std::size_t worst = order.back();
    const std::size_t second_worst = order[order.size() - 2];
    if (std::isfinite(values[worst]) &&
        std::abs(values[worst] - values[best]) <= cfg.f_tolerance) {
      break;
    }

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(k);
    for (std::size_t i = 0; i + 1 < order.size(); ++i) centroid += simplex[order[i]];
    centroid /= static_cast<double>(k);

    const Eigen::VectorXd reflected = centroid + (centroid - simplex[worst]);
    const double fr = eval(reflected);
    if (less(fr, values[best])) {
      const Eigen::VectorXd expanded = centroid + 2.0 * (centroid - simplex[worst]);
      const double fe = eval(expanded);
      if (less(fe, fr)) {
        simplex[worst] = expanded;
        values[worst] = fe;
      } else {
        simplex[worst] = reflected;
        values[worst] = fr;
      }
      continue;
    }
    if (less(fr, values[second_worst])) {
      simplex[worst] = reflected;
      values[worst] = fr;
      continue;
    }
    const bool outside = less(fr, values[worst]);
    const Eigen::VectorXd contracted =
        outside ? Eigen::VectorXd(centroid + 0.5 * (reflected - centroid))
                : Eigen::VectorXd(centroid + 0.5 * (simplex[worst] - centroid));
    const double fc = eval(contracted);
    if (less(fc, outside ? fr : values[worst])) {
      simplex[worst] = contracted;
      values[worst] = fc;
      continue;
    }
    for (std::size_t i = 0; i < simplex.size(); ++i) {
      if (i == best) continue;
      simplex[i] = simplex[best] + 0.5 * (simplex[i] - simplex[best]);
      values[i] = eval(simplex[i]);
    }
  }

  std::size_t best = 0;
  for (std::size_t i = 1; i < simplex.size(); ++i) {
    if (less(values[i], values[best])) best = i;
  }
  if (better(values[best], start_value)) return {simplex[best], values[best], evals};
  return {u0, start_value, evals};
}

}  // namespace grasswalk
