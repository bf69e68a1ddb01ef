#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>

#include <Eigen/Core>

#include "grasswalk/geometry.hpp"

namespace grasswalk {

/// Black-box continuous objective on R^d. Implementations must be stateless
/// so eval can run concurrently.
class LossFunction {
 public:
  virtual ~LossFunction() = default;

  virtual double eval(const Eigen::VectorXd& x) const = 0;
  virtual Eigen::Index dim() const = 0;
  virtual std::string name() const = 0;

  /// Benchmark metadata only; nothing in the library branches on it.
  virtual std::optional<double> known_optimum() const { return std::nullopt; }
};

using LossPtr = std::shared_ptr<const LossFunction>;

/// Value returned by Thomson energy when two projected points coincide.
inline constexpr double kSingularCap = 1e300;

/// |x - c|^2
class QuadraticLoss final : public LossFunction {
 public:
  explicit QuadraticLoss(Eigen::VectorXd center);

  double eval(const Eigen::VectorXd& x) const override;
  Eigen::Index dim() const override { return center_.size(); }
  std::string name() const override { return "quadratic"; }
  std::optional<double> known_optimum() const override { return 0.0; }

  const Eigen::VectorXd& center() const { return center_; }

 private:
  Eigen::VectorXd center_;
};

/// 10 d + sum((x_i - s_i)^2 - 10 cos(2 pi (x_i - s_i))), minimum 0 at s.
class RastriginLoss final : public LossFunction {
 public:
  explicit RastriginLoss(Eigen::VectorXd shift);
  double eval(const Eigen::VectorXd& x) const override;
  Eigen::Index dim() const override { return shift_.size(); }
  std::string name() const override { return "rastrigin"; }
  std::optional<double> known_optimum() const override { return 0.0; }

 private:
  Eigen::VectorXd shift_;
};

/// Ackley function (a=20, b=0.2, c=2 pi) shifted to s, minimum 0 at s.
class AckleyLoss final : public LossFunction {
 public:
  explicit AckleyLoss(Eigen::VectorXd shift);
  double eval(const Eigen::VectorXd& x) const override;
  Eigen::Index dim() const override { return shift_.size(); }
  std::string name() const override { return "ackley"; }
  std::optional<double> known_optimum() const override { return 0.0; }

 private:
  Eigen::VectorXd shift_;
};

/// Adapter for ad hoc objectives (tests, Python callers).
class FunctionLoss final : public LossFunction {
 public:
  using Fn = std::function<double(const Eigen::VectorXd&)>;
  FunctionLoss(Eigen::Index dim, Fn fn, std::string name = "function",
               std::optional<double> known_optimum = std::nullopt);

  double eval(const Eigen::VectorXd& x) const override { return fn_(x); }
  Eigen::Index dim() const override { return dim_; }
  std::string name() const override { return name_; }
  std::optional<double> known_optimum() const override { return optimum_; }

 private:
  Eigen::Index dim_;
  Fn fn_;
  std::string name_;
  std::optional<double> optimum_;
};

/// Inverse stereographic projection R^n -> S^n \ {north pole}:
/// y -> (2y, |y|^2 - 1) / (1 + |y|^2). Stable for arbitrarily large |y|.
Eigen::VectorXd stereo(const Eigen::VectorXd& y);

/// Coulomb energy of N points on S^n, parameterized by N stereographic
/// charts stacked into one vector of length N*n.
class ThomsonProblem final : public LossFunction {
 public:
  ThomsonProblem(int num_points, int sphere_dim);

  double eval(const Eigen::VectorXd& y) const override;
  Eigen::Index dim() const override { return static_cast<Eigen::Index>(num_points_) * sphere_dim_; }
  std::string name() const override { return "thomson"; }
  std::optional<double> known_optimum() const override;

  int num_points() const { return num_points_; }
  int sphere_dim() const { return sphere_dim_; }

  /// Points on S^n, one per row.
  Eigen::MatrixXd points(const Eigen::VectorXd& y) const;

 private:
  int num_points_;
  int sphere_dim_;
};

/// Coulomb energy, or kSingularCap if two points lie within 1e-15.
double thomson_energy(const ThomsonProblem& problem, const Eigen::VectorXd& y);

/// Minimal Thomson energies on S^2 for N in [2, 12], from the checked-in
/// multi-start oracle table (tools/thomson_oracle.py).
std::optional<double> thomson_s2_optimum(int num_points);

/// max(base, clip_level)
class ClippedLoss final : public LossFunction {
 public:
  ClippedLoss(LossPtr base, double clip_level);

  double eval(const Eigen::VectorXd& x) const override;
  Eigen::Index dim() const override { return base_->dim(); }
  std::string name() const override { return "clipped(" + base_->name() + ")"; }

  const LossPtr& base() const { return base_; }
  double clip_level() const { return clip_level_; }

 private:
  LossPtr base_;
  double clip_level_;
};

std::shared_ptr<const ClippedLoss> clip(LossPtr base, double alpha_prime);

/// base(x) - depth * max(0, 1 - |x - center| / radius)^2: a narrow downward
/// dip of floor base(center) - depth supported on a ball.
class SpikedLoss final : public LossFunction {
 public:
  SpikedLoss(LossPtr base, Eigen::VectorXd center, double radius, double depth);

  double eval(const Eigen::VectorXd& x) const override;
  Eigen::Index dim() const override { return base_->dim(); }
  std::string name() const override { return "spiked(" + base_->name() + ")"; }

  const LossPtr& base() const { return base_; }
  const Eigen::VectorXd& center() const { return center_; }
  double radius() const { return radius_; }
  double depth() const { return depth_; }
  /// base(center) - depth
  double floor() const;

 private:
  LossPtr base_;
  Eigen::VectorXd center_;
  double radius_;
  double depth_;
};

/// Per-evaluator bookkeeping. Not shared across threads.
struct EvalStats {
  std::uint64_t evals = 0;
  std::uint64_t capped = 0;     // values >= kSingularCap
  std::uint64_t nonfinite = 0;
  double min_value = std::numeric_limits<double>::infinity();
};

/// The loss seen through a plane's coordinates: u -> base(embed(plane, u)).
/// Each instance counts its own evaluations; use one instance per task.
class RestrictedLoss {
 public:
  RestrictedLoss(LossPtr base, Subspace plane);

  double eval_restricted(const Eigen::VectorXd& u) const;
  Eigen::Index sub_dim() const { return plane_.sub_dim(); }

  const LossFunction& base() const { return *base_; }
  const LossPtr& base_ptr() const { return base_; }
  const Subspace& plane() const { return plane_; }
  const EvalStats& stats() const { return stats_; }

 private:
  LossPtr base_;
  Subspace plane_;
  mutable EvalStats stats_;
};

}  // namespace grasswalk
