#include "driftarrival/simulate/simulate.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <thread>
#include <vector>

#include "driftarrival/errors.hpp"
#include "simulate_kernel.hpp"

namespace driftarrival::simulate {

CrossingMode parse_crossing_mode(const std::string& name) {
  if (name == "step-end") return CrossingMode::StepEnd;
  if (name == "bridge" || name == "bridge-corrected")
    return CrossingMode::BridgeCorrected;
  throw ConfigError("crossing mode must be 'step-end' or 'bridge', got '" +
                    name + "'");
}

std::string to_string(CrossingMode mode) {
  return mode == CrossingMode::StepEnd ? "step-end" : "bridge";
}

std::uint64_t capacity_cap() {
  if (const char* env = std::getenv("DRIFTARRIVAL_CAP")) {
    char* end = nullptr;
    const double v = std::strtod(env, &end);
    if (end != env && v >= 1) return static_cast<std::uint64_t>(v);
  }
  return 10'000'000'000ull;
}

std::uint64_t step_count(const SimSpec& spec) {
  if (!(spec.dt > 0) || !(spec.horizon > spec.dt))
    throw std::invalid_argument("step_count requires 0 < dt < horizon");
  // nearest-then-correct keeps an exact-divisor horizon at ratio steps while
  // still flooring genuine fractions, immune to 1-ulp quotient noise
  std::uint64_t n = static_cast<std::uint64_t>(spec.horizon / spec.dt + 0.5);
  if (n < 1) n = 1;
  while (n > 1 && static_cast<double>(n) * spec.dt > spec.horizon) --n;
  return n;
}

namespace {

constexpr std::uint64_t kChunk = 16384;  // particles per work unit

void validate_spec(const SimSpec& spec) {
  if (spec.n_particles < 1)
    throw std::invalid_argument("n_particles must be >= 1");
  if (!(spec.dt > 0)) throw std::invalid_argument("dt must be > 0");
  if (!(spec.horizon > spec.dt))
    throw std::invalid_argument("horizon must exceed dt");
}

}  // namespace

SimResult simulate(const core::ChannelParams& p, const SimSpec& spec,
                   unsigned threads) {
  core::validate(p);
  validate_spec(spec);
  const std::uint64_t steps = step_count(spec);
  if (steps > 0xFFFFFFFFull - 64)
    throw CapacityError("step count " + std::to_string(steps) +
                        " exceeds the supported range");
  const std::uint64_t cap = capacity_cap();
  if (spec.n_particles > cap / steps)
    throw CapacityError(
        "requested " + std::to_string(spec.n_particles) + " particles x " +
        std::to_string(steps) + " steps exceeds the particle-step budget " +
        std::to_string(cap) + "; set DRIFTARRIVAL_CAP to raise it");

  detail::KernelParams kp;
  kp.lat_dim = p.lateral_dim();
  kp.sigma = p.sigma;
  kp.vlat = p.lateral_drift.data();
  kp.x0 = p.lateral_origin.data();
  detail::KernelSpec ks;
  ks.dt = spec.dt;
  ks.seed = spec.seed;
  ks.bridge = spec.crossing == CrossingMode::BridgeCorrected;

  const std::uint64_t n_chunks = (spec.n_particles + kChunk - 1) / kChunk;
  std::vector<detail::ChunkOut> outs(n_chunks);
  std::atomic<std::uint64_t> cursor{0};
  auto worker = [&] {
    for (;;) {
      const std::uint64_t c = cursor.fetch_add(1, std::memory_order_relaxed);
      if (c >= n_chunks) return;
      const std::uint64_t first = c * kChunk;
      const std::uint64_t count =
          std::min<std::uint64_t>(kChunk, spec.n_particles - first);
      detail::run_chunk(kp, ks, steps, first, count, outs[c]);
    }
  };

  std::uint64_t n_workers =
      threads ? threads : std::max(1u, std::thread::hardware_concurrency());
  n_workers = std::min<std::uint64_t>(n_workers, n_chunks);
  if (n_workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(n_workers);
    for (std::uint64_t t = 0; t < n_workers; ++t) pool.emplace_back(worker);
  }

  std::uint64_t total = 0;
  SimResult r;
  for (const auto& o : outs) {
    total += o.t.size();
    r.n_censored += o.censored;
  }
  const int lat_dim = p.lateral_dim();
  r.arrivals.t.resize(static_cast<Eigen::Index>(total));
  r.arrivals.x.resize(static_cast<Eigen::Index>(total), lat_dim);
  Eigen::Index row = 0;
  for (const auto& o : outs) {
    for (std::size_t i = 0; i < o.t.size(); ++i, ++row) {
      r.arrivals.t[row] = o.t[i];
      for (int k = 0; k < lat_dim; ++k)
        r.arrivals.x(row, k) = o.lat[i * static_cast<std::size_t>(lat_dim) + k];
    }
  }
  r.spec_echo = spec;
  r.params_echo = p;
  return r;
}

Moments empirical_moments(const SimResult& r) {
  if (r.arrivals.size() == 0)
    throw EmptySampleError("no arrivals to average over");
  Moments m;
  m.mean_t = r.arrivals.t.mean();
  m.mean_inv_t = r.arrivals.t.cwiseInverse().mean();
  m.mean_lateral = r.arrivals.x.colwise().mean();
  m.censoring_warning = r.censored_fraction() > 1e-3;
  return m;
}

}  // namespace driftarrival::simulate
