#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

#include <Eigen/Core>

namespace grasswalk {

/// Deterministic random stream addressed by a master seed and a hierarchical
/// index path, e.g. (trial, round, sample). The same (seed, path) always
/// yields the same sequence; children with different indices are seeded from
/// independent 64-bit keys.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed);
  RngStream(std::uint64_t seed, std::vector<std::uint64_t> path);

  /// Stream for `path + {index}`. Does not consume from this stream.
  RngStream child(std::uint64_t index) const;
  RngStream child(std::initializer_list<std::uint64_t> indices) const;

  std::uint64_t seed() const { return seed_; }
  const std::vector<std::uint64_t>& path() const { return path_; }
  std::uint64_t key() const { return key_; }

  double normal();
  double uniform();  // [0, 1)
  std::uint64_t next_u64();

  Eigen::VectorXd normal_vector(Eigen::Index n);
  /// Uniform point on the unit sphere S^{n-1}.
  Eigen::VectorXd unit_vector(Eigen::Index n);

 private:
  std::uint64_t seed_;
  std::vector<std::uint64_t> path_;
  std::uint64_t key_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace grasswalk
