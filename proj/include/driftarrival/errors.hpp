#pragma once

#include <stdexcept>
#include <string>

namespace driftarrival {

/// Invalid or unreadable configuration (bad physical constants, malformed
/// config file, missing required field). CLI exit code 1.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Filesystem / serialization failure. CLI exit code 2.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Requested simulation exceeds the particle-step budget. CLI exit code 3.
struct CapacityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Sample set cannot identify the parameters (too few samples, zero
/// residual spread). CLI exit code 4.
struct DegenerateSampleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Operation needs at least one sample.
struct EmptySampleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Goodness-of-fit test cannot be run on this histogram (expected counts
/// too small even after merging). CLI exit code 5.
struct CannotTestError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace driftarrival
