#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include <Eigen/Core>

#include "grasswalk/objectives.hpp"
#include "grasswalk/rng.hpp"

namespace grasswalk {

struct SolveResult {
  Eigen::VectorXd u;
  double value = 0.0;  // f.eval_restricted(u), computed on the same path
  std::uint64_t evals = 0;
};

/// Black box B: minimizes a restricted loss inside its plane, starting from
/// u0. Every implementation guarantees value <= f(u0) and is deterministic
/// given (f, u0, rng).
class InnerSolver {
 public:
  virtual ~InnerSolver() = default;
  virtual SolveResult solve(const RestrictedLoss& f, const Eigen::VectorXd& u0,
                            RngStream& rng) const = 0;
  virtual std::string name() const = 0;
};

using SolverPtr = std::shared_ptr<const InnerSolver>;

struct ShrinkDescentConfig {
  int num_scales = 20;          // m
  int proposals_per_scale = 1;  // r
  double initial_scale = 1.0;   // s0
};

/// Random descent with geometrically shrinking steps: for j = 1..m, r times,
/// propose u + s0 2^-j w with w uniform on the unit sphere and keep it only if
/// it strictly lowers f. Uses exactly 1 + m r evaluations.
SolveResult shrink_descent(const RestrictedLoss& f, const Eigen::VectorXd& u0,
                           const ShrinkDescentConfig& cfg, RngStream& rng);

/// Closed-form minimizer for QuadraticLoss (optionally wrapped in ClippedLoss):
/// u* = B^T c. Throws ArgumentError for any other base loss.
SolveResult exact_quadratic(const RestrictedLoss& f, const Eigen::VectorXd& u0, RngStream& rng);

struct NelderMeadConfig {
  double initial_step = 1.0;
  int max_evals = 2000;
  double f_tolerance = 1e-14;  // stop when simplex value spread falls below this
};

SolveResult nelder_mead(const RestrictedLoss& f, const Eigen::VectorXd& u0,
                        const NelderMeadConfig& cfg, RngStream& rng);

class ShrinkDescent final : public InnerSolver {
 public:
  explicit ShrinkDescent(ShrinkDescentConfig cfg);
  SolveResult solve(const RestrictedLoss& f, const Eigen::VectorXd& u0,
                    RngStream& rng) const override {
    return shrink_descent(f, u0, cfg_, rng);
  }
  std::string name() const override { return "shrink"; }
  const ShrinkDescentConfig& config() const { return cfg_; }

 private:
  ShrinkDescentConfig cfg_;
};

class ExactQuadratic final : public InnerSolver {
 public:
  SolveResult solve(const RestrictedLoss& f, const Eigen::VectorXd& u0,
                    RngStream& rng) const override {
    return exact_quadratic(f, u0, rng);
  }
  std::string name() const override { return "exact"; }
};

class NelderMead final : public InnerSolver {
 public:
  explicit NelderMead(NelderMeadConfig cfg);
  SolveResult solve(const RestrictedLoss& f, const Eigen::VectorXd& u0,
                    RngStream& rng) const override {
    return nelder_mead(f, u0, cfg_, rng);
  }
  std::string name() const override { return "nelder-mead"; }

 private:
  NelderMeadConfig cfg_;
};

}  // namespace grasswalk
