#pragma once

#include <stdexcept>
#include <string>

namespace grasswalk {

/// Invalid dimensions, out-of-range parameters, malformed configuration.
class ArgumentError : public std::invalid_argument {
 public:
  explicit ArgumentError(const std::string& what) : std::invalid_argument(what) {}
};

/// Raised when a sampled statistic has zero range (constant phi), so delta
/// and the gap ratio are undefined.
class DegenerateError : public std::runtime_error {
 public:
  explicit DegenerateError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace grasswalk
