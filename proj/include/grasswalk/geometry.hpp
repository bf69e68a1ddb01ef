#pragma once

#include <Eigen/Core>

#include "grasswalk/rng.hpp"

namespace grasswalk {

/// A k-dimensional linear subspace of R^d stored as a d-by-k matrix with
/// orthonormal columns. Planes always pass through the origin.
class Subspace {
 public:
  /// Takes ownership of an orthonormal basis; throws ArgumentError if the
  /// columns are not orthonormal to within 1e-10 or if k is 0 or exceeds d.
  explicit Subspace(Eigen::MatrixXd basis);

  Eigen::Index ambient_dim() const { return basis_.rows(); }
  Eigen::Index sub_dim() const { return basis_.cols(); }
  const Eigen::MatrixXd& basis() const { return basis_; }

  /// basis * u
  Eigen::VectorXd embed(const Eigen::VectorXd& u) const;
  /// basis^T * x
  Eigen::VectorXd coordinates_of(const Eigen::VectorXd& x) const;
  /// Orthogonal projection of x onto the plane.
  Eigen::VectorXd project(const Eigen::VectorXd& x) const;

  /// max |basis^T basis - I| entrywise.
  double orthonormality_error() const;

 private:
  Eigen::MatrixXd basis_;
};

/// How planes through a fixed anchor are drawn.
enum class ConditionedMode {
  /// Anchor direction plus a Haar-uniform (k-1)-plane of its orthogonal complement.
  kInvariant,
  /// Span of the anchor and k-1 raw Gaussian vectors, orthonormalized by
  /// Householder QR (the construction used for the Thomson runs).
  kSpanGaussian,
};

inline constexpr double kBasisTolerance = 1e-10;
inline constexpr double kContainmentTolerance = 1e-8;

/// Haar-uniform plane in G_{k,d}: Gaussian d-by-k matrix orthonormalized with a
/// positive-diagonal triangular factor.
Subspace sample_uniform(Eigen::Index d, Eigen::Index k, RngStream& rng);

/// Uniform plane among the k-planes containing x (x nonzero).
Subspace sample_conditioned(const Eigen::VectorXd& x, Eigen::Index k, RngStream& rng,
                            ConditionedMode mode = ConditionedMode::kInvariant);

Eigen::VectorXd embed(const Subspace& s, const Eigen::VectorXd& u);
Eigen::VectorXd coordinates_of(const Subspace& s, const Eigen::VectorXd& x);

}  // namespace grasswalk
