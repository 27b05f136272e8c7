#include "simulate_kernel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "driftarrival/simulate/rng.hpp"

namespace driftarrival::simulate::detail {

namespace {

constexpr int kBatchSteps = 32;  // steps of noise drawn per refill
constexpr int kMaxLatDim = 15;   // matches core::kMaxDim - 1

// Counter layout: low word = particle index, high word = (lane << 32) | step.
// Lanes 0..nb-1 carry the step's normal draws, lane nb the bridge uniform.
// Whole batches are always generated (fixed trip count), so a given
// (particle, step) normal never depends on horizon, threads, or batch tail.

}  // namespace

void run_chunk(const KernelParams& p, const KernelSpec& spec,
               std::uint64_t steps, std::uint64_t first, std::uint64_t count,
               ChunkOut& out) {
  const int lat_dim = p.lat_dim;
  const int nb = (lat_dim + 2) / 2;  // two normals per 128-bit block
  const double dt = spec.dt;
  const double noise = p.sigma * std::sqrt(dt);
  const double bridge_rate = 2.0 / (p.sigma * p.sigma * dt);
  double vdt[kMaxLatDim] = {};
  for (int k = 0; k < lat_dim; ++k) vdt[k] = p.vlat[k] * dt;

  out.t.reserve(count);
  out.lat.reserve(count * static_cast<std::size_t>(lat_dim));

  // unit-stride staging arrays so the transcendental passes vectorize
  std::uint64_t raw_a[kBatchSteps * 8];
  std::uint64_t raw_b[kBatchSteps * 8];
  double radius[kBatchSteps * 8];
  double angle[kBatchSteps * 8];
  double zc[kBatchSteps * 8];
  double zs[kBatchSteps * 8];
  const int nblocks = kBatchSteps * nb;

  for (std::uint64_t i = 0; i < count; ++i) {
    const std::uint64_t particle = first + i;
    double x1 = 0.0;
    double lat[kMaxLatDim] = {};
    for (int k = 0; k < lat_dim; ++k) lat[k] = p.x0[k];

    bool absorbed = false;
    for (std::uint64_t s0 = 0; s0 < steps && !absorbed; s0 += kBatchSteps) {
      int b = 0;
      for (int si = 0; si < kBatchSteps; ++si) {
        const std::uint64_t step = s0 + static_cast<std::uint64_t>(si);
        for (int lane = 0; lane < nb; ++lane, ++b) {
          const auto w = Philox4x32::words64(
              spec.seed, (static_cast<std::uint64_t>(lane) << 32) | step,
              particle);
          raw_a[b] = w[0];
          raw_b[b] = w[1];
        }
      }
      for (int j = 0; j < nblocks; ++j)
        radius[j] = std::sqrt(-2.0 * std::log(uniform_from_bits(raw_a[j])));
      for (int j = 0; j < nblocks; ++j)
        angle[j] = 2.0 * std::numbers::pi * uniform_from_bits(raw_b[j]);
      for (int j = 0; j < nblocks; ++j) zc[j] = radius[j] * std::cos(angle[j]);
      for (int j = 0; j < nblocks; ++j) zs[j] = radius[j] * std::sin(angle[j]);

      const int nsteps =
          static_cast<int>(std::min<std::uint64_t>(kBatchSteps, steps - s0));
      for (int si = 0; si < nsteps && !absorbed; ++si) {
        const int base = si * nb;
        // coordinate c of this step reads block c/2, cosine leg for even c
        const auto norm = [&](int c) {
          return (c & 1) ? zs[base + (c >> 1)] : zc[base + (c >> 1)];
        };
        const std::uint64_t s = s0 + static_cast<std::uint64_t>(si);
        const double gap0 = 1.0 - x1;
        x1 += dt + noise * norm(0);
        if (spec.bridge) {
          double mid[kMaxLatDim];
          for (int k = 0; k < lat_dim; ++k) {
            const double inc = vdt[k] + noise * norm(k + 1);
            mid[k] = lat[k] + 0.5 * inc;
            lat[k] += inc;
          }
          bool hit = x1 >= 1.0;
          if (!hit) {
            // within-step crossing probability exp(-2 gap0 gap1 / (s^2 dt));
            // skipped when it cannot beat the smallest representable uniform
            const double q = bridge_rate * gap0 * (1.0 - x1);
            if (q < 38.0) {
              const auto w = Philox4x32::words64(
                  spec.seed, (static_cast<std::uint64_t>(nb) << 32) | s,
                  particle);
              hit = uniform_from_bits(w[0]) < std::exp(-q);
            }
          }
          if (hit) {
            absorbed = true;
            out.t.push_back((static_cast<double>(s) + 0.5) * dt);
            for (int k = 0; k < lat_dim; ++k) out.lat.push_back(mid[k]);
          }
        } else {
          for (int k = 0; k < lat_dim; ++k)
            lat[k] += vdt[k] + noise * norm(k + 1);
          if (x1 >= 1.0) {
            absorbed = true;
            out.t.push_back(static_cast<double>(s + 1) * dt);
            for (int k = 0; k < lat_dim; ++k) out.lat.push_back(lat[k]);
          }
        }
      }
    }
    if (!absorbed) ++out.censored;
  }
}

}  // namespace driftarrival::simulate::detail
