#pragma once

#include <Eigen/Core>

#include <cstdint>

#include "driftarrival/simulate/simulate.hpp"

namespace driftarrival::validate {

/// 2D arrival histogram over (time, lateral position) for D = 2 channels.
/// Bin (i, j) covers [t_edges[i], t_edges[i+1]) x [x_edges[j], x_edges[j+1]),
/// with the last bin on each axis closed so edge-exact samples count.
struct Histogram2D {
  Eigen::VectorXd t_edges;
  Eigen::VectorXd x_edges;
  Eigen::MatrixXd counts;      ///< (t bins) x (x bins), whole numbers
  std::uint64_t total = 0;     ///< sum of counts
  std::uint64_t dropped = 0;   ///< samples outside the edge range
};

/// Bins D = 2 arrival samples; out-of-range samples are dropped and
/// reported, so total + dropped always equals the input sample count.
/// Throws std::domain_error for non-increasing edges and
/// std::invalid_argument for non-2D samples or fewer than 2 edges.
Histogram2D build_histogram(const simulate::SampleSet& samples,
                            const Eigen::VectorXd& t_edges,
                            const Eigen::VectorXd& x_edges);

}  // namespace driftarrival::validate
