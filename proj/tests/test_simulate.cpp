#include <cmath>
#include <cstdlib>
#include <vector>

#include "doctest.h"
#include "driftarrival/analytic/densities.hpp"
#include "driftarrival/errors.hpp"
#include "driftarrival/simulate/rng.hpp"
#include "driftarrival/simulate/simulate.hpp"

using namespace driftarrival;
using simulate::CrossingMode;
using simulate::SimSpec;

namespace {

core::ChannelParams make_params(int dim, double sigma_sq,
                                std::vector<double> v = {},
                                std::vector<double> x0 = {}) {
  core::ChannelParams p;
  p.dim = dim;
  p.sigma = std::sqrt(sigma_sq);
  p.lateral_drift = Eigen::VectorXd::Zero(dim - 1);
  p.lateral_origin = Eigen::VectorXd::Zero(dim - 1);
  for (std::size_t k = 0; k < v.size(); ++k) p.lateral_drift[k] = v[k];
  for (std::size_t k = 0; k < x0.size(); ++k) p.lateral_origin[k] = x0[k];
  return p;
}

SimSpec make_spec(std::uint64_t n, double dt, double horizon,
                  std::uint64_t seed, CrossingMode mode) {
  SimSpec s;
  s.n_particles = n;
  s.dt = dt;
  s.horizon = horizon;
  s.seed = seed;
  s.crossing = mode;
  return s;
}

bool same_samples(const simulate::SimResult& a, const simulate::SimResult& b) {
  if (a.arrivals.size() != b.arrivals.size()) return false;
  if (a.n_censored != b.n_censored) return false;
  if (a.arrivals.x.cols() != b.arrivals.x.cols()) return false;
  return (a.arrivals.t.array() == b.arrivals.t.array()).all() &&
         (a.arrivals.x.array() == b.arrivals.x.array()).all();
}

}  // namespace

TEST_CASE("counter cipher matches published verification vectors") {
  using simulate::Philox4x32;
  // zero counter, zero key
  auto out = Philox4x32::block(0, 0, 0);
  CHECK(out[0] == 0x6627e8d5u);
  CHECK(out[1] == 0xe169c58du);
  CHECK(out[2] == 0xbc57ac4cu);
  CHECK(out[3] == 0x9b00dbd8u);

  // all-ones counter and key
  out = Philox4x32::block(~0ull, ~0ull, ~0ull);
  CHECK(out[0] == 0x408f276du);
  CHECK(out[1] == 0x41c83b0eu);
  CHECK(out[2] == 0xa20bc7c6u);
  CHECK(out[3] == 0x6d5451fdu);

  // pi digits as counter and key
  const std::uint64_t ctr_lo = (0x85a308d3ull << 32) | 0x243f6a88ull;
  const std::uint64_t ctr_hi = (0x03707344ull << 32) | 0x13198a2eull;
  const std::uint64_t key = (0x299f31d0ull << 32) | 0xa4093822ull;
  out = Philox4x32::block(key, ctr_hi, ctr_lo);
  CHECK(out[0] == 0xd16cfe09u);
  CHECK(out[1] == 0x94fdccebu);
  CHECK(out[2] == 0x5001e420u);
  CHECK(out[3] == 0x24126ea1u);

  const auto w = Philox4x32::words64(key, ctr_hi, ctr_lo);
  CHECK(w[0] == ((0x94fdccebull << 32) | 0xd16cfe09ull));
  CHECK(w[1] == ((0x24126ea1ull << 32) | 0x5001e420ull));
}

TEST_CASE("bit-to-uniform map stays strictly inside the unit interval") {
  CHECK(simulate::uniform_from_bits(0) == 0x1.0p-54);
  CHECK(simulate::uniform_from_bits(~0ull) == 1.0 - 0x1.0p-54);
  CHECK(simulate::uniform_from_bits(1ull << 63) == doctest::Approx(0.5).epsilon(1e-15));
  for (std::uint64_t i = 0; i < 1000; ++i) {
    const auto w = simulate::Philox4x32::words64(7, i, 0);
    const double u = simulate::uniform_from_bits(w[0]);
    CHECK(u > 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("normal pairs from the cipher have standard moments") {
  const int n = 100000;
  double sum = 0, sum_sq = 0;
  for (int i = 0; i < n; ++i) {
    const auto w = simulate::Philox4x32::words64(42, i, 0);
    const auto [z0, z1] = simulate::box_muller(w[0], w[1]);
    CHECK(std::isfinite(z0));
    CHECK(std::isfinite(z1));
    sum += z0 + z1;
    sum_sq += z0 * z0 + z1 * z1;
  }
  const double mean = sum / (2.0 * n);
  const double var = sum_sq / (2.0 * n) - mean * mean;
  CHECK(std::abs(mean) < 0.012);       // 4 sigma is 0.009
  CHECK(std::abs(var - 1.0) < 0.02);
}

TEST_CASE("crossing mode names parse and print") {
  CHECK(simulate::parse_crossing_mode("step-end") == CrossingMode::StepEnd);
  CHECK(simulate::parse_crossing_mode("bridge") == CrossingMode::BridgeCorrected);
  CHECK(simulate::parse_crossing_mode("bridge-corrected") ==
        CrossingMode::BridgeCorrected);
  CHECK_THROWS_AS(simulate::parse_crossing_mode("midpoint"), ConfigError);
  CHECK(simulate::to_string(CrossingMode::StepEnd) == "step-end");
  CHECK(simulate::to_string(CrossingMode::BridgeCorrected) == "bridge");
}

TEST_CASE("step grid fills the horizon without overshooting") {
  auto steps = [](double dt, double horizon) {
    return simulate::step_count(make_spec(1, dt, horizon, 0, CrossingMode::StepEnd));
  };
  CHECK(steps(1e-3, 2.0) == 2000);      // exact divisor survives FP noise
  CHECK(steps(1e-3, 2.0005) == 2000);
  CHECK(steps(1e-3, 1.9995) == 1999);
  CHECK(steps(0.3, 1.0) == 3);
  CHECK(steps(1e-2, 1.0) == 100);

  for (double dt : {1e-3, 2e-3, 3e-3, 0.123, 1.0 / 3.0}) {
    for (double horizon : {1.0, 2.0, 2.5, 10.0 / 3.0}) {
      const std::uint64_t n = steps(dt, horizon);
      CHECK(n >= 1);
      CHECK(static_cast<double>(n) * dt <= horizon);
      CHECK(static_cast<double>(n + 1) * dt > horizon - 1e-12);
    }
  }

  CHECK_THROWS_AS(steps(0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(steps(2.0, 1.0), std::invalid_argument);
}

TEST_CASE("results are bit-identical for any worker count") {
  const auto p = make_params(2, 0.5, {-1.0});
  const auto spec = make_spec(20000, 1e-2, 2.0, 12345, CrossingMode::StepEnd);
  const auto r1 = simulate::simulate(p, spec, 1);
  const auto r3 = simulate::simulate(p, spec, 3);
  const auto r0 = simulate::simulate(p, spec, 0);
  CHECK(same_samples(r1, r3));
  CHECK(same_samples(r1, r0));
  CHECK(r1.arrivals.size() > 15000);  // most particles arrive within 2 units

  const auto rb1 = simulate::simulate(p, make_spec(20000, 1e-2, 2.0, 12345,
                                                   CrossingMode::BridgeCorrected), 1);
  const auto rb4 = simulate::simulate(p, make_spec(20000, 1e-2, 2.0, 12345,
                                                   CrossingMode::BridgeCorrected), 4);
  CHECK(same_samples(rb1, rb4));
}

TEST_CASE("arrival times do not depend on the lateral dimension") {
  // perpendicular noise comes from lane 0 of every step for any dim, so
  // step-end arrival times agree bitwise across dims given one seed
  const auto spec = make_spec(20000, 5e-3, 2.0, 99, CrossingMode::StepEnd);
  const auto r1 = simulate::simulate(make_params(1, 0.5), spec);
  const auto r2 = simulate::simulate(make_params(2, 0.5, {-3.0}), spec);
  const auto r3 = simulate::simulate(make_params(3, 0.5, {1.0, -1.0}), spec);
  REQUIRE(r1.arrivals.size() == r2.arrivals.size());
  REQUIRE(r1.arrivals.size() == r3.arrivals.size());
  CHECK(r1.n_censored == r2.n_censored);
  CHECK((r1.arrivals.t.array() == r2.arrivals.t.array()).all());
  CHECK((r1.arrivals.t.array() == r3.arrivals.t.array()).all());
  CHECK(r1.arrivals.x.cols() == 0);
  CHECK(r2.arrivals.x.cols() == 1);
  CHECK(r3.arrivals.x.cols() == 2);
}

TEST_CASE("a longer horizon only appends arrivals") {
  const auto p = make_params(2, 0.5, {0.5});
  for (auto mode : {CrossingMode::StepEnd, CrossingMode::BridgeCorrected}) {
    const auto r_short =
        simulate::simulate(p, make_spec(20000, 1e-2, 1.0, 7, mode));
    const auto r_long =
        simulate::simulate(p, make_spec(20000, 1e-2, 4.0, 7, mode));
    CHECK(r_long.arrivals.size() >= r_short.arrivals.size());
    CHECK(r_long.n_censored <= r_short.n_censored);

    // the short run is exactly the long run truncated to its horizon
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < r_long.arrivals.size(); ++i)
      if (r_long.arrivals.t[i] <= 1.0) keep.push_back(i);
    REQUIRE(static_cast<Eigen::Index>(keep.size()) == r_short.arrivals.size());
    bool equal = true;
    for (Eigen::Index j = 0; j < r_short.arrivals.size(); ++j) {
      equal = equal && r_short.arrivals.t[j] == r_long.arrivals.t[keep[j]];
      equal = equal && r_short.arrivals.x(j, 0) == r_long.arrivals.x(keep[j], 0);
    }
    CHECK(equal);
  }
}

TEST_CASE("bridge absorption dominates step-end absorption pathwise") {
  const auto p = make_params(2, 0.5, {0.0});
  const auto se = simulate::simulate(
      p, make_spec(50000, 5e-3, 2.0, 31, CrossingMode::StepEnd));
  const auto br = simulate::simulate(
      p, make_spec(50000, 5e-3, 2.0, 31, CrossingMode::BridgeCorrected));
  CHECK(br.arrivals.size() > se.arrivals.size());
  CHECK(br.n_censored < se.n_censored);
}

TEST_CASE("absorbed fraction matches the arrival-time law") {
  const auto p = make_params(2, 0.5, {0.0});
  const double horizon = 2.0;
  const double target = analytic::fat_cdf(horizon, p);
  const std::uint64_t n = 100000;
  const double se = std::sqrt(target * (1.0 - target) / n);

  // bridge crossing has O(dt) weak error; 4 MC sigma plus a dt allowance
  const auto br = simulate::simulate(
      p, make_spec(n, 2e-3, horizon, 2024, CrossingMode::BridgeCorrected));
  const double frac_br =
      static_cast<double>(br.arrivals.size()) / static_cast<double>(n);
  CHECK(std::abs(frac_br - target) < 4 * se + 3e-3);

  // step-end misses within-step excursions, so it under-absorbs by roughly
  // the 0.5826 sigma sqrt(dt) barrier offset; check sign and rough size
  const auto st = simulate::simulate(
      p, make_spec(n, 1e-2, horizon, 2024, CrossingMode::StepEnd));
  const auto br2 = simulate::simulate(
      p, make_spec(n, 1e-2, horizon, 2024, CrossingMode::BridgeCorrected));
  const double frac_st =
      static_cast<double>(st.arrivals.size()) / static_cast<double>(n);
  const double frac_br2 =
      static_cast<double>(br2.arrivals.size()) / static_cast<double>(n);
  CHECK(frac_st < frac_br2 - 5e-3);
  CHECK(frac_st > target - 0.05);
  CHECK(std::abs(frac_br2 - target) < 4 * se + 8e-3);
}

TEST_CASE("empirical moments agree with the closed-form law") {
  // E[T] = 1 and E[1/T] = 1 + sigma^2 in normalized units; lateral mean
  // rides the drift, E[X] = x0 + v E[T]
  const auto p = make_params(2, 0.25, {-3.0}, {0.5});
  const std::uint64_t n = 50000;
  const auto r = simulate::simulate(
      p, make_spec(n, 5e-3, 50.0, 4711, CrossingMode::BridgeCorrected));
  CHECK(r.censored_fraction() < 1e-4);
  const auto m = simulate::empirical_moments(r);
  CHECK_FALSE(m.censoring_warning);
  const double se_t = 0.5 / std::sqrt(static_cast<double>(n));
  CHECK(std::abs(m.mean_t - 1.0) < 4 * se_t + 0.01);
  CHECK(std::abs(m.mean_inv_t - 1.25) < 0.025);
  REQUIRE(m.mean_lateral.size() == 1);
  CHECK(std::abs(m.mean_lateral[0] - (0.5 - 3.0 * m.mean_t)) < 0.035);
}

TEST_CASE("low noise concentrates arrivals at unit time") {
  const auto p = make_params(1, 0.01);
  const auto r = simulate::simulate(
      p, make_spec(20000, 2e-3, 4.0, 5, CrossingMode::BridgeCorrected));
  CHECK(r.n_censored == 0);
  const auto m = simulate::empirical_moments(r);
  CHECK(std::abs(m.mean_t - 1.0) < 0.007);
  CHECK(m.mean_lateral.size() == 0);
}

TEST_CASE("driftless lateral coordinates stay centered") {
  const auto p = make_params(3, 0.5);
  const std::uint64_t n = 20000;
  const auto r = simulate::simulate(
      p, make_spec(n, 2e-3, 4.0, 99991, CrossingMode::BridgeCorrected));
  const auto m = simulate::empirical_moments(r);
  REQUIRE(m.mean_lateral.size() == 2);
  // lateral variance is sigma^2 E[T] = 0.5, so 4 sigma of the mean is 0.02
  CHECK(std::abs(m.mean_lateral[0]) < 0.025);
  CHECK(std::abs(m.mean_lateral[1]) < 0.025);
}

TEST_CASE("single particle and empty-arrival edge cases") {
  const auto p = make_params(2, 0.5, {0.0});
  const auto r = simulate::simulate(
      p, make_spec(1, 1e-2, 10.0, 1, CrossingMode::StepEnd));
  CHECK(r.n_particles() == 1);
  if (r.arrivals.size() == 1) {
    CHECK(r.arrivals.t[0] > 0.0);
    CHECK(r.arrivals.t[0] <= 10.0);
    const auto m = simulate::empirical_moments(r);
    CHECK(m.mean_t == r.arrivals.t[0]);
  }

  // drift 1 cannot reach the plane in two short steps at negligible noise
  const auto none = simulate::simulate(
      make_params(1, 1e-8), make_spec(5, 1e-3, 2e-3, 3, CrossingMode::StepEnd));
  CHECK(none.arrivals.size() == 0);
  CHECK(none.n_censored == 5);
  CHECK(none.censored_fraction() == 1.0);
  CHECK_THROWS_AS(simulate::empirical_moments(none), EmptySampleError);
}

TEST_CASE("capacity budget refuses oversized runs") {
  CHECK(simulate::capacity_cap() == 10'000'000'000ull);

  setenv("DRIFTARRIVAL_CAP", "2e5", 1);
  CHECK(simulate::capacity_cap() == 200000ull);
  const auto p = make_params(2, 0.5, {0.0});
  CHECK_THROWS_AS(
      simulate::simulate(p, make_spec(300, 1e-3, 2.0, 0, CrossingMode::StepEnd)),
      CapacityError);
  // 100 particles x 2000 steps just fits
  CHECK_NOTHROW(simulate::simulate(
      p, make_spec(100, 1e-3, 2.0, 0, CrossingMode::StepEnd)));
  unsetenv("DRIFTARRIVAL_CAP");

  setenv("DRIFTARRIVAL_CAP", "not a number", 1);
  CHECK(simulate::capacity_cap() == 10'000'000'000ull);
  unsetenv("DRIFTARRIVAL_CAP");

  // default budget: 6e6 particles x 2000 steps = 1.2e10 > 1e10
  CHECK_THROWS_AS(
      simulate::simulate(p, make_spec(6'000'000, 1e-3, 2.0, 0,
                                      CrossingMode::StepEnd)),
      CapacityError);

  // step counts past 32 bits are refused outright
  setenv("DRIFTARRIVAL_CAP", "1e30", 1);
  CHECK_THROWS_AS(
      simulate::simulate(p, make_spec(1, 1e-10, 2.0, 0, CrossingMode::StepEnd)),
      CapacityError);
  unsetenv("DRIFTARRIVAL_CAP");

  CHECK_THROWS_AS(
      simulate::simulate(p, make_spec(0, 1e-3, 2.0, 0, CrossingMode::StepEnd)),
      std::invalid_argument);
}
