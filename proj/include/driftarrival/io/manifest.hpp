#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "driftarrival/core/config.hpp"
#include "driftarrival/simulate/simulate.hpp"

namespace driftarrival::io {

inline constexpr const char* kToolVersion = "1.0.0";

/// Everything needed to audit or replay a command: the resolved physical
/// channel and protocol, the seed, the knobs specific to the command, and
/// where the outputs went. Replaying a manifest with the same inputs
/// reproduces the data outputs byte for byte.
struct RunManifest {
  std::string command;
  std::string version = kToolVersion;
  core::PhysicalConfig physical;
  core::DiffusionConvention convention = core::DiffusionConvention::SigmaSquared;
  simulate::SimSpec spec;
  unsigned threads = 0;
  nlohmann::json settings = nlohmann::json::object();
  std::vector<std::pair<std::string, std::string>> outputs;
  double duration_seconds = 0.0;
};

/// Serializes the manifest as pretty JSON. Throws IoError on I/O failure.
void save_manifest(const std::string& path, const RunManifest& m);

/// Parses a manifest written by save_manifest. Throws IoError when the
/// file is unreadable or not a manifest.
RunManifest load_manifest(const std::string& path);

}  // namespace driftarrival::io
