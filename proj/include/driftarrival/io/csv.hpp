#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <string>

#include "driftarrival/core/types.hpp"
#include "driftarrival/simulate/simulate.hpp"
#include "driftarrival/validate/histogram.hpp"

namespace driftarrival::io {

/// A sample dump read back from disk: the arrival records plus the channel
/// and protocol echo carried in the file's comment header.
struct SampleFile {
  simulate::SampleSet samples;
  core::ChannelParams params;
  simulate::SimSpec spec;
  std::uint64_t censored = 0;
};

/// Writes arrivals as CSV: `#` metadata lines (channel, protocol, censoring),
/// a `t,x2,...` header row, then one row per arrival at 17 significant
/// digits. Deterministic byte-for-byte for identical results.
void write_samples_csv(const std::string& path, const simulate::SimResult& r);

/// Reads a sample CSV back. Metadata lines are optional; missing entries
/// fall back to a unit channel (sigma 1, zero drift and origin) so
/// hand-crafted files stay usable. Throws IoError on unreadable or
/// malformed input.
SampleFile read_samples_csv(const std::string& path);

/// Long-format histogram dump: `t_lo,t_hi,x_lo,x_hi,count` per bin, with
/// totals in the comment header.
void write_histogram_csv(const std::string& path,
                         const validate::Histogram2D& h);

/// Model bin probabilities on the same long-format grid as the histogram
/// dump; the off-grid remainder is recorded in the comment header.
void write_model_csv(const std::string& path, const Eigen::VectorXd& t_edges,
                     const Eigen::VectorXd& x_edges,
                     const Eigen::MatrixXd& prob);

/// %.17g rendering used for all CSV numbers (full round-trip precision).
std::string format_full(double v);

}  // namespace driftarrival::io
