#include "grasswalk/objectives.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "grasswalk/errors.hpp"

namespace grasswalk {

QuadraticLoss::QuadraticLoss(Eigen::VectorXd center) : center_(std::move(center)) {
  if (center_.size() < 1) throw ArgumentError("quadratic loss needs dimension >= 1");
}

double QuadraticLoss::eval(const Eigen::VectorXd& x) const { return (x - center_).squaredNorm(); }

RastriginLoss::RastriginLoss(Eigen::VectorXd shift) : shift_(std::move(shift)) {
  if (shift_.size() < 1) throw ArgumentError("rastrigin loss needs dimension >= 1");
}

double RastriginLoss::eval(const Eigen::VectorXd& x) const {
  double sum = 10.0 * static_cast<double>(shift_.size());
  for (Eigen::Index i = 0; i < shift_.size(); ++i) {
    const double z = x[i] - shift_[i];
    sum += z * z - 10.0 * std::cos(2.0 * std::numbers::pi * z);
  }
  return sum;
}

AckleyLoss::AckleyLoss(Eigen::VectorXd shift) : shift_(std::move(shift)) {
  if (shift_.size() < 1) throw ArgumentError("ackley loss needs dimension >= 1");
}

double AckleyLoss::eval(const Eigen::VectorXd& x) const {
  const double n = static_cast<double>(shift_.size());
  double sq = 0.0;
  double cs = 0.0;
  for (Eigen::Index i = 0; i < shift_.size(); ++i) {
    const double z = x[i] - shift_[i];
    sq += z * z;
    cs += std::cos(2.0 * std::numbers::pi * z);
  }
  const double value =
      -20.0 * std::exp(-0.2 * std::sqrt(sq / n)) - std::exp(cs / n) + 20.0 + std::numbers::e;
  // exp(1) + 20 - 20 - exp(1) is not exactly zero in floating point
  return std::max(value, 0.0);
}

FunctionLoss::FunctionLoss(Eigen::Index dim, Fn fn, std::string name,
                           std::optional<double> known_optimum)
    : dim_(dim), fn_(std::move(fn)), name_(std::move(name)), optimum_(known_optimum) {
  if (dim_ < 1) throw ArgumentError("function loss needs dimension >= 1");
  if (!fn_) throw ArgumentError("function loss needs a callable");
}

Eigen::VectorXd stereo(const Eigen::VectorXd& y) {
  const Eigen::Index n = y.size();
  Eigen::VectorXd p(n + 1);
  const double s = y.squaredNorm();
  if (s <= 1.0) {
    p.head(n) = 2.0 * y / (1.0 + s);
    p[n] = (s - 1.0) / (1.0 + s);
    return p;
  }
  // Divide through by |y|^2 so huge inputs neither overflow nor lose the
  // unit-norm property.
  const double r = y.stableNorm();
  const double t = 1.0 / r;
  p.head(n) = (y * t) * (2.0 * t / (1.0 + t * t));
  p[n] = (1.0 - t * t) / (1.0 + t * t);
  return p;
}

ThomsonProblem::ThomsonProblem(int num_points, int sphere_dim)
    : num_points_(num_points), sphere_dim_(sphere_dim) {
  if (num_points_ < 2) throw ArgumentError("thomson problem needs N >= 2");
  if (sphere_dim_ < 1) throw ArgumentError("thomson problem needs sphere dimension n >= 1");
}

Eigen::MatrixXd ThomsonProblem::points(const Eigen::VectorXd& y) const {
  if (y.size() != dim()) {
    throw ArgumentError("thomson: expected vector of length " + std::to_string(dim()));
  }
  Eigen::MatrixXd p(num_points_, sphere_dim_ + 1);
  for (int i = 0; i < num_points_; ++i) {
    p.row(i) = stereo(y.segment(static_cast<Eigen::Index>(i) * sphere_dim_, sphere_dim_)).transpose();
  }
  return p;
}

double ThomsonProblem::eval(const Eigen::VectorXd& y) const {
  const Eigen::MatrixXd p = points(y);
  double energy = 0.0;
  for (int i = 0; i < num_points_; ++i) {
    for (int j = i + 1; j < num_points_; ++j) {
      const double dist = (p.row(i) - p.row(j)).norm();
      if (!(dist > 1e-15)) return kSingularCap;
      energy += 1.0 / dist;
    }
  }
  return energy;
}

std::optional<double> ThomsonProblem::known_optimum() const {
  if (sphere_dim_ == 2) return thomson_s2_optimum(num_points_);
  return std::nullopt;
}

double thomson_energy(const ThomsonProblem& problem, const Eigen::VectorXd& y) {
  return problem.eval(y);
}

ClippedLoss::ClippedLoss(LossPtr base, double clip_level)
    : base_(std::move(base)), clip_level_(clip_level) {
  if (!base_) throw ArgumentError("clipped loss needs a base loss");
  if (std::isnan(clip_level_)) throw ArgumentError("clip level must not be NaN");
}

double ClippedLoss::eval(const Eigen::VectorXd& x) const {
  const double v = base_->eval(x);
  return v >= clip_level_ ? v : clip_level_;
}

std::shared_ptr<const ClippedLoss> clip(LossPtr base, double alpha_prime) {
  return std::make_shared<const ClippedLoss>(std::move(base), alpha_prime);
}

SpikedLoss::SpikedLoss(LossPtr base, Eigen::VectorXd center, double radius, double depth)
    : base_(std::move(base)), center_(std::move(center)), radius_(radius), depth_(depth) {
  if (!base_) throw ArgumentError("spiked loss needs a base loss");
  if (center_.size() != base_->dim()) throw ArgumentError("spike center dimension mismatch");
  if (!(radius_ > 0.0)) throw ArgumentError("spike radius must be positive");
  if (!(depth_ > 0.0)) throw ArgumentError("spike depth must be positive");
}

double SpikedLoss::eval(const Eigen::VectorXd& x) const {
  const double v = base_->eval(x);
  const double dist = (x - center_).norm();
  if (dist >= radius_) return v;
  const double bump = 1.0 - dist / radius_;
  return v - depth_ * bump * bump;
}

double SpikedLoss::floor() const { return base_->eval(center_) - depth_; }

RestrictedLoss::RestrictedLoss(LossPtr base, Subspace plane)
    : base_(std::move(base)), plane_(std::move(plane)) {
  if (!base_) throw ArgumentError("restricted loss needs a base loss");
  if (base_->dim() != plane_.ambient_dim()) {
    throw ArgumentError("restricted loss: plane ambient dimension " +
                        std::to_string(plane_.ambient_dim()) + " does not match loss dimension " +
                        std::to_string(base_->dim()));
  }
}

double RestrictedLoss::eval_restricted(const Eigen::VectorXd& u) const {
  const double v = base_->eval(plane_.embed(u));
  ++stats_.evals;
  if (!std::isfinite(v)) {
    ++stats_.nonfinite;
  } else {
    if (v >= kSingularCap) ++stats_.capped;
    if (v < stats_.min_value) stats_.min_value = v;
  }
  return v;
}

}  // namespace grasswalk
