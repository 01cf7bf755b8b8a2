#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace subsum {

// A resource limit was hit: sieve hard cap, enumeration cap, width goal,
// element-value cap. The message carries what was achieved before the cap.
class CapacityError : public std::runtime_error {
 public:
  explicit CapacityError(std::string msg) : std::runtime_error(std::move(msg)) {}
};

// A documented precondition was violated by the caller.
class InvalidInputError : public std::invalid_argument {
 public:
  explicit InvalidInputError(std::string msg) : std::invalid_argument(std::move(msg)) {}
};

// Growth-corridor generation found an empty prime window.
class EDeltaError : public std::runtime_error {
 public:
  EDeltaError(std::string msg, std::uint64_t from, double window_lo, double window_hi)
      : std::runtime_error(std::move(msg)), from_element(from), lo(window_lo), hi(window_hi) {}

  std::uint64_t from_element;
  double lo;
  double hi;
};

// An injectivity or disjointness witness failed at construction time.
// This signals a bug in the construction discipline, not bad input.
class WitnessError : public std::logic_error {
 public:
  explicit WitnessError(std::string msg) : std::logic_error(std::move(msg)) {}
};

}  // namespace subsum
