#pragma once

#include <cstdint>
#include <string>

#include "driftarrival/core/types.hpp"

namespace driftarrival::core {

/// How a config file's `diffusion` value maps to the SDE noise variance rate.
/// SigmaSquared: the value is sigma_phys^2 directly (variance rate).
/// Einstein: the value is the Einstein diffusion coefficient D_c, so
/// sigma_phys^2 = 2 * D_c.
enum class DiffusionConvention { SigmaSquared, Einstein };

DiffusionConvention parse_diffusion_convention(const std::string& name);
std::string to_string(DiffusionConvention c);

/// Fully resolved run configuration: physical channel plus simulation
/// protocol. `physical.diffusion_sigma_sq` always holds the variance rate,
/// whatever convention the file used.
struct RunConfig {
  PhysicalConfig physical;
  DiffusionConvention convention = DiffusionConvention::SigmaSquared;

  std::uint64_t particles = 1'000'000;
  double dt = 1e-3;
  double horizon = 2.0;
  std::uint64_t seed = 0;
  std::string crossing = "step-end";  ///< "step-end" or "bridge"

  ChannelParams channel() const { return normalize(physical); }
};

/// Parses a JSON run configuration. Schema (README has the full story):
///   dim (required), diffusion (required),
///   tx_rx_distance=1, perp_drift=1, lateral_drift=[0...], lateral_origin=[0...],
///   diffusion_convention="sigma-squared"|"einstein" (hyphen/underscore keys
///   both accepted), particles, dt, horizon, seed, crossing.
/// Throws ConfigError naming the offending field.
RunConfig parse_config_text(const std::string& text);

/// Loads and parses a JSON config file. Missing file -> ConfigError.
RunConfig load_config(const std::string& path);

}  // namespace driftarrival::core
