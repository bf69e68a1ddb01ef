#include "grasswalk/rng.hpp"

#include <cmath>

namespace grasswalk {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_key(std::uint64_t seed, const std::vector<std::uint64_t>& path) {
  std::uint64_t h = splitmix64(seed ^ 0x6a09e667f3bcc908ULL);
  for (std::uint64_t index : path) {
    h = splitmix64(h ^ splitmix64(index + 0x3c6ef372fe94f82bULL));
  }
  return h;
}

}  // namespace

RngStream::RngStream(std::uint64_t seed) : RngStream(seed, {}) {}

RngStream::RngStream(std::uint64_t seed, std::vector<std::uint64_t> path)
    : seed_(seed), path_(std::move(path)), key_(derive_key(seed_, path_)), engine_(key_) {}

RngStream RngStream::child(std::uint64_t index) const {
  std::vector<std::uint64_t> p = path_;
  p.push_back(index);
  return RngStream(seed_, std::move(p));
}

RngStream RngStream::child(std::initializer_list<std::uint64_t> indices) const {
  std::vector<std::uint64_t> p = path_;
  p.insert(p.end(), indices.begin(), indices.end());
  return RngStream(seed_, std::move(p));
}

double RngStream::normal() { return normal_(engine_); }

double RngStream::uniform() { return uniform_(engine_); }

std::uint64_t RngStream::next_u64() { return engine_(); }

Eigen::VectorXd RngStream::normal_vector(Eigen::Index n) {
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = normal();
  return v;
}

Eigen::VectorXd RngStream::unit_vector(Eigen::Index n) {
  for (;;) {
    Eigen::VectorXd v = normal_vector(n);
    const double norm = v.norm();
    if (norm > 1e-300) return v / norm;
  }
}

}  // namespace grasswalk
