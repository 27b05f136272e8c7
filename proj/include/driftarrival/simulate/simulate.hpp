#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <string>

#include "driftarrival/core/types.hpp"

namespace driftarrival::simulate {

enum class CrossingMode {
  StepEnd,           ///< absorb when a step ends at or past the receiver plane
  BridgeCorrected,   ///< also absorb on within-step excursions (bridge test)
};

CrossingMode parse_crossing_mode(const std::string& name);
std::string to_string(CrossingMode mode);

struct SimSpec {
  std::uint64_t n_particles = 0;
  double dt = 0;
  double horizon = 0;      ///< particles not absorbed by now are censored
  std::uint64_t seed = 0;
  CrossingMode crossing = CrossingMode::StepEnd;
};

/// Columnar arrival records: entry i of `t` pairs with row i of `x`
/// (the D-1 lateral coordinates on the receiver plane).
struct SampleSet {
  Eigen::VectorXd t;
  Eigen::MatrixXd x;

  Eigen::Index size() const { return t.size(); }
  core::ArrivalSample sample(Eigen::Index i) const {
    return {t[i], x.row(i).transpose()};
  }
};

struct SimResult {
  SampleSet arrivals;
  std::uint64_t n_censored = 0;
  SimSpec spec_echo;
  core::ChannelParams params_echo;

  std::uint64_t n_particles() const {
    return static_cast<std::uint64_t>(arrivals.size()) + n_censored;
  }
  double censored_fraction() const {
    return n_particles() ? static_cast<double>(n_censored) / n_particles() : 0.0;
  }
};

struct Moments {
  double mean_t = 0;
  double mean_inv_t = 0;
  Eigen::VectorXd mean_lateral;
  bool censoring_warning = false;  ///< censored fraction exceeded 1e-3
};

/// Particle-step budget; refuse larger runs instead of thrashing the host.
/// Default 1e10, overridable through the DRIFTARRIVAL_CAP environment
/// variable (plain or scientific notation).
std::uint64_t capacity_cap();

/// Number of whole steps of length dt that fit inside the horizon; the last
/// step's end time never exceeds the horizon in floating point.
std::uint64_t step_count(const SimSpec& spec);

/// Runs spec.n_particles independent drifted random walks from
/// (0, lateral_origin), each stepped by dt with noise sigma*sqrt(dt) per
/// coordinate, absorbing on the plane at perpendicular coordinate 1.
///
/// Deterministic: the noise for (particle, step) comes from a counter-based
/// stream keyed by the seed, so results are bit-identical for any `threads`
/// value (0 = one worker per hardware thread).
SimResult simulate(const core::ChannelParams& p, const SimSpec& spec,
                   unsigned threads = 0);

/// Arithmetic means over arrivals; flags possible censoring bias.
Moments empirical_moments(const SimResult& r);

}  // namespace driftarrival::simulate
