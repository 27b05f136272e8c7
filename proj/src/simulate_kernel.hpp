#pragma once

// Private interface between the particle-stepping kernel and the driver.
// The kernel translation unit is built with value-changing optimizations
// (fast-math, native ISA), so nothing here may have an ABI that depends on
// those flags: plain scalars, raw pointers, and std::vector only.

#include <cstdint>
#include <vector>

namespace driftarrival::simulate::detail {

struct KernelParams {
  int lat_dim = 0;           ///< D - 1 lateral coordinates
  double sigma = 0;          ///< per-coordinate noise scale
  const double* vlat = nullptr;
  const double* x0 = nullptr;
};

struct KernelSpec {
  double dt = 0;
  std::uint64_t seed = 0;
  bool bridge = false;       ///< also absorb on within-step excursions
};

struct ChunkOut {
  std::vector<double> t;
  std::vector<double> lat;   ///< row-major (arrival, lateral coordinate)
  std::uint64_t censored = 0;
};

/// Steps particles [first, first + count) through `steps` increments,
/// recording absorbed arrivals into `out` in particle order.
void run_chunk(const KernelParams& p, const KernelSpec& spec,
               std::uint64_t steps, std::uint64_t first, std::uint64_t count,
               ChunkOut& out);

}  // namespace driftarrival::simulate::detail
