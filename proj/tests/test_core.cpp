#include "doctest.h"

#include <cmath>

#include "driftarrival/core/config.hpp"
#include "driftarrival/core/types.hpp"

using namespace driftarrival;
using core::ChannelParams;
using core::PhysicalConfig;

namespace {

PhysicalConfig make_physical(double lambda, double vp, double sigma_sq,
                             std::initializer_list<double> vlat,
                             std::initializer_list<double> x0) {
  PhysicalConfig cfg;
  cfg.tx_rx_distance = lambda;
  cfg.perp_drift = vp;
  cfg.diffusion_sigma_sq = sigma_sq;
  cfg.lateral_drift = Eigen::VectorXd::Zero(static_cast<int>(vlat.size()));
  cfg.lateral_origin = Eigen::VectorXd::Zero(static_cast<int>(x0.size()));
  int k = 0;
  for (double v : vlat) cfg.lateral_drift[k++] = v;
  k = 0;
  for (double v : x0) cfg.lateral_origin[k++] = v;
  return cfg;
}

}  // namespace

TEST_CASE("normalize maps physical units to the dimensionless channel") {
  // unit distance and perpendicular speed: values carry over directly
  auto p = core::normalize(make_physical(1, 1, 0.5, {0.0}, {0.0}));
  CHECK(p.dim == 2);
  CHECK(p.sigma_sq() == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(p.lateral_drift[0] == 0.0);

  p = core::normalize(make_physical(1, 1, 0.5, {-3.0}, {0.0}));
  CHECK(p.sigma_sq() == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(p.lateral_drift[0] == doctest::Approx(-3.0));

  // sigma^2 scales by 1/(lambda*v_p), velocities by 1/v_p
  p = core::normalize(make_physical(2, 2, 4.0, {2.0}, {0.0}));
  CHECK(p.sigma_sq() == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(p.lateral_drift[0] == doctest::Approx(1.0));
}

TEST_CASE("normalize rejects non-positive physical constants") {
  CHECK_THROWS_AS(core::normalize(make_physical(0, 1, 1, {0.0}, {0.0})), ConfigError);
  CHECK_THROWS_AS(core::normalize(make_physical(1, -2, 1, {0.0}, {0.0})), ConfigError);
  CHECK_THROWS_AS(core::normalize(make_physical(1, 1, 0, {0.0}, {0.0})), ConfigError);
}

TEST_CASE("denormalize_sample scales time by lambda/v_p and space by lambda") {
  core::ArrivalSample s;
  s.time = 1.0;
  s.lateral = Eigen::VectorXd::Zero(1);

  auto cfg = make_physical(1, 1, 0.5, {0.0}, {0.0});
  auto out = core::denormalize_sample(s, cfg);
  CHECK(out.time == doctest::Approx(1.0));
  CHECK(out.lateral[0] == 0.0);

  s.lateral[0] = 0.5;
  cfg = make_physical(2, 1, 0.5, {0.0}, {0.0});
  out = core::denormalize_sample(s, cfg);
  CHECK(out.time == doctest::Approx(2.0));
  CHECK(out.lateral[0] == doctest::Approx(1.0));

  s.time = 0.5;
  s.lateral[0] = -1.0;
  cfg = make_physical(1, 2, 0.5, {0.0}, {0.0});
  out = core::denormalize_sample(s, cfg);
  CHECK(out.time == doctest::Approx(0.25));
  CHECK(out.lateral[0] == doctest::Approx(-1.0));
}

TEST_CASE("normalize and denormalize round-trip within 1e-12") {
  auto cfg = make_physical(3.7, 1.9, 2.3, {0.4, -1.1}, {0.2, 0.05});
  auto p = core::normalize(cfg);
  auto back = core::denormalize(p, cfg.tx_rx_distance, cfg.perp_drift);
  CHECK(back.diffusion_sigma_sq ==
        doctest::Approx(cfg.diffusion_sigma_sq).epsilon(1e-12));
  for (int k = 0; k < 2; ++k) {
    CHECK(back.lateral_drift[k] == doctest::Approx(cfg.lateral_drift[k]).epsilon(1e-12));
    CHECK(back.lateral_origin[k] ==
          doctest::Approx(cfg.lateral_origin[k]).epsilon(1e-12));
  }

  core::ArrivalSample s;
  s.time = 0.83;
  s.lateral = Eigen::VectorXd::Constant(2, -0.37);
  auto s2 = core::normalize_sample(core::denormalize_sample(s, cfg), cfg);
  CHECK(s2.time == doctest::Approx(s.time).epsilon(1e-12));
  CHECK(s2.lateral[0] == doctest::Approx(s.lateral[0]).epsilon(1e-12));
}

TEST_CASE("parameter validation enforces shape and positivity") {
  ChannelParams p;
  p.dim = 2;
  p.sigma = 0.5;
  p.lateral_drift = Eigen::VectorXd::Zero(1);
  p.lateral_origin = Eigen::VectorXd::Zero(1);
  CHECK_NOTHROW(core::validate(p));

  p.sigma = 0.0;
  CHECK_THROWS_AS(core::validate(p), std::invalid_argument);
  p.sigma = 0.5;
  p.lateral_drift = Eigen::VectorXd::Zero(2);
  CHECK_THROWS_AS(core::validate(p), std::invalid_argument);
  p.lateral_drift = Eigen::VectorXd::Zero(1);
  p.dim = 0;
  CHECK_THROWS_AS(core::validate(p), std::invalid_argument);
  p.dim = 17;
  CHECK_THROWS_AS(core::validate(p), std::invalid_argument);
}

TEST_CASE("dimension one has empty lateral vectors") {
  ChannelParams p;
  p.dim = 1;
  p.sigma = 1.0;
  p.lateral_drift = Eigen::VectorXd();
  p.lateral_origin = Eigen::VectorXd();
  CHECK_NOTHROW(core::validate(p));
  CHECK(p.lateral_dim() == 0);
}

TEST_CASE("config parsing resolves fields, defaults, and conventions") {
  auto cfg = core::parse_config_text(R"({
    "dim": 2,
    "diffusion": 0.5,
    "lateral_drift": [-3.0],
    "particles": 1000,
    "dt": 1e-3,
    "horizon": 2.0,
    "seed": 42
  })");
  CHECK(cfg.physical.diffusion_sigma_sq == doctest::Approx(0.5));
  CHECK(cfg.physical.tx_rx_distance == 1.0);
  CHECK(cfg.physical.lateral_drift[0] == doctest::Approx(-3.0));
  CHECK(cfg.physical.lateral_origin[0] == 0.0);
  CHECK(cfg.particles == 1000);
  CHECK(cfg.seed == 42);
  CHECK(cfg.crossing == "step-end");

  auto p = cfg.channel();
  CHECK(p.sigma == doctest::Approx(std::sqrt(0.5)));

  // einstein convention doubles the configured value
  auto cfg2 = core::parse_config_text(R"({
    "dim": 2, "diffusion": 0.25, "diffusion-convention": "einstein"
  })");
  CHECK(cfg2.physical.diffusion_sigma_sq == doctest::Approx(0.5));

  // hyphen and underscore key spellings are interchangeable
  auto cfg3 = core::parse_config_text(R"({
    "dim": 2, "diffusion": 0.5, "tx-rx-distance": 2.0, "perp-drift": 2.0
  })");
  CHECK(cfg3.physical.tx_rx_distance == 2.0);
  CHECK(core::normalize(cfg3.physical).sigma_sq() == doctest::Approx(0.125));
}

TEST_CASE("config parsing diagnostics name the offending field") {
  auto check_message = [](const std::string& text, const std::string& needle) {
    try {
      core::parse_config_text(text);
      FAIL_CHECK("expected ConfigError for: " << text);
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find(needle) != std::string::npos);
    }
  };
  check_message(R"({"diffusion": 0.5})", "dim");
  check_message(R"({"dim": 2})", "diffusion");
  check_message(R"({"dim": 2, "diffusion": -1})", "diffusion_sigma_sq");
  check_message(R"({"dim": 2, "diffusion": 0.5, "lateral_drift": [1, 2]})",
                "lateral_drift");
  check_message(R"({"dim": 2, "diffusion": 0.5, "crossing": "midpoint"})",
                "crossing");
  check_message(R"({"dim": 2, "diffusion": 0.5, "dt": 3.0, "horizon": 2.0})", "dt");
  CHECK_THROWS_AS(core::load_config("/nonexistent/path.json"), ConfigError);
}
