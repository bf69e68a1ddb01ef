#include "grasswalk/geometry.hpp"

#include <cmath>
#include <string>

#include <Eigen/QR>

#include "grasswalk/errors.hpp"

namespace grasswalk {
namespace {

constexpr double kRankFloor = 1e-12;
constexpr double kZeroAnchor = 1e-300;

void check_dims(Eigen::Index d, Eigen::Index k) {
  if (d < 1 || k < 1 || k > d) {
    throw ArgumentError("invalid subspace dimensions: d=" + std::to_string(d) +
                        ", k=" + std::to_string(k));
  }
}

// Orthogonalizes column `col` of q against columns [0, col) twice (classical
// Gram-Schmidt with reorthogonalization) and returns the residual norm before
// normalization. The diagonal of the implied triangular factor is this norm,
// hence nonnegative.
double orthogonalize_column(Eigen::MatrixXd& q, Eigen::Index col) {
  auto v = q.col(col);
  const double original = v.norm();
  for (int pass = 0; pass < 2; ++pass) {
    if (col > 0) {
      const Eigen::VectorXd h = q.leftCols(col).transpose() * v;
      v -= q.leftCols(col) * h;
    }
  }
  const double residual = v.norm();
  if (!(residual > kRankFloor * std::max(1.0, original))) return 0.0;
  v /= residual;
  return residual;
}

// Fills columns [first, k) with Gaussian draws orthonormalized against all
// previous columns; a column with vanishing residual is redrawn.
void fill_haar_columns(Eigen::MatrixXd& q, Eigen::Index first, RngStream& rng) {
  const Eigen::Index d = q.rows();
  for (Eigen::Index c = first; c < q.cols(); ++c) {
    do {
      for (Eigen::Index r = 0; r < d; ++r) q(r, c) = rng.normal();
    } while (orthogonalize_column(q, c) == 0.0);
  }
}

}  // namespace

Subspace::Subspace(Eigen::MatrixXd basis) : basis_(std::move(basis)) {
  check_dims(basis_.rows(), basis_.cols());
  if (!(orthonormality_error() <= kBasisTolerance)) {
    throw ArgumentError("subspace basis is not orthonormal");
  }
}

Eigen::VectorXd Subspace::embed(const Eigen::VectorXd& u) const {
  if (u.size() != sub_dim()) {
    throw ArgumentError("embed: expected " + std::to_string(sub_dim()) + " coordinates, got " +
                        std::to_string(u.size()));
  }
  return basis_ * u;
}

Eigen::VectorXd Subspace::coordinates_of(const Eigen::VectorXd& x) const {
  if (x.size() != ambient_dim()) {
    throw ArgumentError("coordinates_of: expected vector of length " +
                        std::to_string(ambient_dim()) + ", got " + std::to_string(x.size()));
  }
  return basis_.transpose() * x;
}

Eigen::VectorXd Subspace::project(const Eigen::VectorXd& x) const { return embed(coordinates_of(x)); }

double Subspace::orthonormality_error() const {
  const Eigen::MatrixXd gram = basis_.transpose() * basis_;
  return (gram - Eigen::MatrixXd::Identity(sub_dim(), sub_dim())).cwiseAbs().maxCoeff();
}

Subspace sample_uniform(Eigen::Index d, Eigen::Index k, RngStream& rng) {
  check_dims(d, k);
  Eigen::MatrixXd q(d, k);
  fill_haar_columns(q, 0, rng);
  return Subspace(std::move(q));
}

Subspace sample_conditioned(const Eigen::VectorXd& x, Eigen::Index k, RngStream& rng,
                            ConditionedMode mode) {
  const Eigen::Index d = x.size();
  check_dims(d, k);
  const double norm = x.norm();
  if (!(norm >= kZeroAnchor) || !std::isfinite(norm)) {
    throw ArgumentError("conditioned sampling requires a finite nonzero anchor");
  }

  if (mode == ConditionedMode::kInvariant) {
    Eigen::MatrixXd q(d, k);
    q.col(0) = x / norm;
    fill_haar_columns(q, 1, rng);
    return Subspace(std::move(q));
  }

  // Span of x and k-1 Gaussian vectors. Householder QR with the sign of each
  // column fixed so that R has a positive diagonal; the first column is then
  // exactly x/|x| up to rounding.
  for (;;) {
    Eigen::MatrixXd spanning(d, k);
    spanning.col(0) = x / norm;
    for (Eigen::Index c = 1; c < k; ++c) spanning.col(c) = rng.normal_vector(d);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(spanning);
    Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(d, k);
    const Eigen::MatrixXd r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
    bool full_rank = true;
    for (Eigen::Index c = 0; c < k; ++c) {
      if (std::abs(r(c, c)) < kRankFloor) full_rank = false;
      if (r(c, c) < 0.0) q.col(c) = -q.col(c);
    }
    if (!full_rank) continue;
    // Pin the anchor direction exactly and clean the remaining columns
    // against it so the containment tolerance is met at any scale.
    q.col(0) = x / norm;
    for (Eigen::Index c = 1; c < k; ++c) orthogonalize_column(q, c);
    return Subspace(std::move(q));
  }
}

Eigen::VectorXd embed(const Subspace& s, const Eigen::VectorXd& u) { return s.embed(u); }

Eigen::VectorXd coordinates_of(const Subspace& s, const Eigen::VectorXd& x) {
  return s.coordinates_of(x);
}

}  // namespace grasswalk
