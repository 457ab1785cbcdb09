#pragma once

#include <stdexcept>
#include <string>

namespace fgb {

// Out-of-range argument, malformed input, or a violated precondition.
class InvalidParameter : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// An exact combinatorial routine was asked for an instance larger than its cap.
class CapacityExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Feedback or round access inconsistent with the learning protocol.
class ProtocolViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// A replayed environment ran out of rounds.
class EndOfStream : public ProtocolViolation {
 public:
  using ProtocolViolation::ProtocolViolation;
};

class SolverFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Policy/environment/run parameters that cannot be combined.
class ConfigurationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace fgb
