#include <array>
#include <optional>

#include "grasswalk/objectives.hpp"

namespace grasswalk {
namespace {

// Copied from data/thomson_s2_optima.csv (tools/thomson_oracle.py, 64 starts
// per N, every start reached the listed value).
constexpr std::array<double, 11> kThomsonS2{
    0.5000000000,  1.7320508076,  3.6742346142,  6.4746914947,
    9.9852813742,  14.4529774142, 19.6752878612, 25.7599865313,
    32.7169494601, 40.5964505082, 49.1652530576,
};

}  // namespace

std::optional<double> thomson_s2_optimum(int num_points) {
  if (num_points < 2 || num_points > 12) return std::nullopt;
  return kThomsonS2[static_cast<std::size_t>(num_points - 2)];
}

}  // namespace grasswalk
